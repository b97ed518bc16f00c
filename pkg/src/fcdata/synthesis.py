"""The three data pipelines: non-function-call derivation, reasoning
augmentation, and multilingual translation.

The two LLM prompt templates are fixed strings with ``{PLACEHOLDER}`` sites
filled by plain substring replacement (the templates contain literal braces,
so ``str.format`` is unusable). Request building is pure and deterministic;
the gateway owns transport.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .core import (
    Completion,
    Decision,
    FunctionCall,
    Message,
    Sample,
    SchemaError,
    schema_from_dict,
    schema_to_dict,
    schemas_to_json,
)
from .jsonscan import first_json_object


class SynthesisError(ValueError):
    pass


class TranslationValidationError(SynthesisError):
    """A structural check failed; ``path`` names the diverging node."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


REASON_PROMPT_TEMPLATE = '''\
Your mission is to identify the reason for using the tool based on the history conversations.

## Example 1:

Given the history conversations as follows:
"""
[SYSTEM] You are a helpful assistant.
[USER] What is the weather in Taipei?
[BOT] Current temperature in Taipei: 32 Celsius
[USER] What is the weather in Palo Alto?
"""
and the available tools are as follows:
```json
[
  {
    "name": "weather_api.get_current_weather",
    "description": "Retrieves the current weather conditions for a specified location.",
    "parameters": {
      "location": {
        "type": "string",
        "description": "The name of the city or geographic location.",
        "required": true
      },
      "units": {
        "type": "string",
        "description": "The units for temperature measurement (e.g., 'Celsius', 'Fahrenheit').",
        "required": false
      }
    }
  }
]
```

Please output JSON with the key `reason` for identifying the reason 
to figure out how to use the available functions and finally expect to get the answer shown below.
```json
[
  {
    "name": "weather_api.get_current_weather",
    "arguments": {
      "location": "Palo Alto",
      "units": "Celsius"
    }
  }
]
```

## Output for Example1

```json
{
  "reason": "The user wants to know the current weather conditions in Palo Alto. The available tool 'weather_api.get_current_weather' can be used to retrieve this information by specifying the location as 'Palo Alto'."
}
```

## Example 2:

Given the history conversations as follows:
"""
[USER] Find the sum of all the multiples of 3 and 5 between 1 and 1000. Also find the product of the first five prime numbers.
"""
and the available tools are as follows:
```json
[
  {
    "name": "math_toolkit.sum_of_multiples",
    "description": "Find the sum of all multiples of specified numbers within a specified range.",
    "parameters": {
      "lower_limit": {
        "type": "integer",
        "description": "The start of the range (inclusive).",
        "required": true
      },
      "upper_limit": {
        "type": "integer",
        "description": "The end of the range (inclusive).",
        "required": true
      },
      "multiples": {
        "type": "array",
        "description": "The numbers to find multiples of.",
        "required": true
      }
    }
  },
  {
    "name": "math_toolkit.product_of_primes",
    "description": "Find the product of the first n prime numbers.",
    "parameters": {
      "count": {
        "type": "integer",
        "description": "The number of prime numbers to multiply together.",
        "required": true
      }
    }
  }
]
```

Please output JSON with the key `reason` for identifying the reason 
to figure out how to use the available functions and finally expect to get the answer shown below.
```json
[
  {
    "name": "math_toolkit.sum_of_multiples",
    "arguments": {
      "lower_limit": 1,
      "upper_limit": 1000,
      "multiples": [3, 5]
    }
  },
  {
    "name": "math_toolkit.product_of_primes",
    "arguments": {
      "count": 5
    }
  }
]
```

## Output for Example2

```json
{
  "reason": "The user wants to find the sum of all multiples of 3 and 5 between 1 and 1000, and also find the product of the first five prime numbers. The available tools 'math_toolkit.sum_of_multiples' and 'math_toolkit.product_of_primes' can be used to retrieve this information. The 'math_toolkit.sum_of_multiples' tool can be used by specifying the lower limit as 1, the upper limit as 1000, and the multiples as [3, 5]. The 'math_toolkit.product_of_primes' tool can be used by specifying the count as 5."
}
```

## Start

Given the history conversations as follows:
"""
{CONVERSATIONS}
"""
and the available tools are as follows:
```json
{FUNCTIONS}
```

Please output JSON with the key `reason` for identifying the reason 
to figure out how to use the available functions and finally expect to get the answer shown below.
```json
{FUNC_CALL}
```
'''

TRANSLATION_PROMPT_TEMPLATE = '''\
This JSON object outlines a conversation between a user and an assistant, including the available functions the assistant can utilize to meet the user's requests. 

In this JSON object:
- The `functions` key lists the available functions the assistant can use, including their descriptions and parameters.
- The `conversations` key outlines the conversation between the user and the assistant.
- The `tool_calls` key within the assistant's response shows the function calls the assistant makes to fulfill the user's requests, including the function name and arguments.

```json
{DATA}
```

AND NOW,
I want to translate this JSON into {TARGET_LANG}.
Note that:
- Do not translate any content in `functions`
- Translate the content in `arguments` if using {TARGET_LANG} is reasonable

Please provide your translation into JSON as same format above.
'''

_TRANSCRIPT_PREFIX = {"system": "[SYSTEM]", "user": "[USER]", "assistant": "[BOT]"}


@dataclass(frozen=True)
class ReasonRequest:
    conversations_block: str
    functions_json: str
    target_calls_json: str
    rendered_prompt: str


@dataclass(frozen=True)
class TranslationRequest:
    data_json: str
    target_lang: str
    rendered_prompt: str


def derive_non_function_call(sample: Sample) -> Sample:
    """Turn a function-call sample into a direct-answer one.

    Every function named in the target calls is removed from the provided
    list; with none of the helpful functions left, the correct behavior is a
    bare answer decision. The conversation is untouched.
    """
    if not sample.target.calls:
        raise SynthesisError("sample has no target calls; nothing to remove")
    called = {c.name for c in sample.target.calls}
    remaining = tuple(f for f in sample.functions if f.name not in called)
    if not remaining:
        raise SynthesisError("removing every called function would empty the function list")
    return replace(
        sample,
        functions=remaining,
        target=Completion(decision=Decision.ANSWER),
    )


def render_transcript(sample: Sample) -> str:
    """One line per turn, prefixed [SYSTEM] / [USER] / [BOT]."""
    return "\n".join(
        f"{_TRANSCRIPT_PREFIX[m.role]} {m.content}" for m in sample.conversation
    )


def calls_to_json(calls) -> str:
    return json.dumps(
        [{"name": c.name, "arguments": c.arguments} for c in calls],
        indent=2,
        ensure_ascii=False,
    )


def build_reason_request(sample: Sample) -> ReasonRequest:
    """Fill the reasoning-description prompt for one function-call sample."""
    if not sample.target.calls:
        raise SynthesisError("reasoning requests need a sample with target calls")
    if not sample.conversation:
        raise SynthesisError("reasoning requests need a non-empty conversation")
    conversations_block = render_transcript(sample)
    functions_json = schemas_to_json(sample.functions)
    target_calls_json = calls_to_json(sample.target.calls)
    rendered = (
        REASON_PROMPT_TEMPLATE
        .replace("{CONVERSATIONS}", conversations_block)
        .replace("{FUNCTIONS}", functions_json)
        .replace("{FUNC_CALL}", target_calls_json)
    )
    return ReasonRequest(
        conversations_block=conversations_block,
        functions_json=functions_json,
        target_calls_json=target_calls_json,
        rendered_prompt=rendered,
    )


def parse_reason_response(text: str) -> str:
    """Extract the `reason` string from a model response (fencing optional)."""
    obj = first_json_object(text)
    if obj is None:
        raise SynthesisError("no JSON object found in response")
    reason = obj.get("reason")
    if not isinstance(reason, str):
        raise SynthesisError("response JSON has no string `reason` key")
    return reason


def attach_reason(sample: Sample, reason_text: str) -> Sample:
    """New sample whose target carries the reasoning text."""
    if not sample.target.calls:
        raise SynthesisError("cannot attach a reason to a sample without calls")
    if not reason_text.strip():
        raise SynthesisError("reason text is empty")
    return replace(sample, target=replace(sample.target, reason=reason_text))


def sample_to_translation_payload(sample: Sample) -> dict:
    """The JSON shape sent to the translator: functions, conversations, tool_calls."""
    conversations: list[dict] = [
        {"role": m.role, "content": m.content} for m in sample.conversation
    ]
    assistant_turn: dict = {"role": "assistant"}
    if sample.target.calls:
        assistant_turn["tool_calls"] = [
            {"name": c.name, "arguments": c.arguments} for c in sample.target.calls
        ]
    else:
        assistant_turn["content"] = sample.target.text or ""
    conversations.append(assistant_turn)
    return {
        "functions": [schema_to_dict(f) for f in sample.functions],
        "conversations": conversations,
    }


def build_translation_request(sample: Sample, target_lang: str) -> TranslationRequest:
    data_json = json.dumps(sample_to_translation_payload(sample), indent=2, ensure_ascii=False)
    rendered = (
        TRANSLATION_PROMPT_TEMPLATE
        .replace("{DATA}", data_json)
        .replace("{TARGET_LANG}", target_lang)
    )
    return TranslationRequest(data_json=data_json, target_lang=target_lang, rendered_prompt=rendered)


def parse_and_validate_translation(original: Sample, response: str, target_lang: str) -> Sample:
    """Parse a translation response and enforce structural integrity.

    The function list must be byte-identical in structure (untranslated), the
    role sequence unchanged, call names unchanged and in order, and argument
    key sets unchanged per call. Failures carry the diverging path so the
    pipeline can record or re-query the item. Reasoning text, if the original
    carried any, is dropped: the translation shape has no slot for it.
    """
    obj = first_json_object(response)
    if obj is None:
        raise SynthesisError("no JSON object found in response")

    functions_node = obj.get("functions")
    if not isinstance(functions_node, list):
        raise TranslationValidationError("missing or non-list `functions`", "functions")
    if len(functions_node) != len(original.functions):
        raise TranslationValidationError(
            f"expected {len(original.functions)} functions, got {len(functions_node)}",
            "functions",
        )
    for i, node in enumerate(functions_node):
        try:
            parsed = schema_from_dict(node)
        except SchemaError as exc:
            raise TranslationValidationError(str(exc), f"functions[{i}]") from exc
        if parsed != original.functions[i]:
            raise TranslationValidationError(
                "function definition was altered by translation", f"functions[{i}]"
            )

    conversations_node = obj.get("conversations")
    if not isinstance(conversations_node, list):
        raise TranslationValidationError("missing or non-list `conversations`", "conversations")
    expected_roles = [m.role for m in original.conversation] + ["assistant"]
    if len(conversations_node) != len(expected_roles):
        raise TranslationValidationError(
            f"expected {len(expected_roles)} turns, got {len(conversations_node)}",
            "conversations",
        )
    for i, (turn, expected) in enumerate(zip(conversations_node, expected_roles)):
        role = turn.get("role") if isinstance(turn, dict) else None
        if role != expected:
            raise TranslationValidationError(
                f"expected role {expected!r}, got {role!r}", f"conversations[{i}].role"
            )

    translated_messages = []
    for i, turn in enumerate(conversations_node[:-1]):
        content = turn.get("content")
        if not isinstance(content, str):
            raise TranslationValidationError("turn content must be a string", f"conversations[{i}].content")
        translated_messages.append(Message(role=turn["role"], content=content))

    final_turn = conversations_node[-1]
    calls: list[FunctionCall] = []
    text: str | None = None
    if original.target.calls:
        calls_node = final_turn.get("tool_calls")
        if not isinstance(calls_node, list) or len(calls_node) != len(original.target.calls):
            raise TranslationValidationError(
                f"expected {len(original.target.calls)} tool calls", "tool_calls"
            )
        for i, (node, orig_call) in enumerate(zip(calls_node, original.target.calls)):
            name = node.get("name") if isinstance(node, dict) else None
            if name != orig_call.name:
                raise TranslationValidationError(
                    f"expected {orig_call.name!r}, got {name!r}", f"tool_calls[{i}].name"
                )
            args_node = node.get("arguments")
            if not isinstance(args_node, dict) or set(args_node) != set(orig_call.arguments):
                raise TranslationValidationError(
                    "argument keys differ from the original call", f"tool_calls[{i}].arguments"
                )
            calls.append(FunctionCall(name=name, arguments=args_node))
    else:
        content = final_turn.get("content")
        if not isinstance(content, str):
            raise TranslationValidationError(
                "final assistant turn must carry string content",
                f"conversations[{len(conversations_node) - 1}].content",
            )
        text = content or None

    return Sample(
        functions=original.functions,
        conversation=tuple(translated_messages),
        target=Completion(decision=original.target.decision, calls=tuple(calls), text=text),
        language_tag=target_lang,
    )
