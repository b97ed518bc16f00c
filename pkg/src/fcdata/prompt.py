"""ChatML prompt and completion rendering for function-calling fine-tunes.

Prompts are conditional on a :class:`PromptConfig`: where the function
descriptions go (nowhere, a dedicated ``tools`` role, or the system role),
whether completions start with a decision marker, and whether reasoning text
precedes the call list. Rendering is byte-deterministic so training files can
be pinned with golden fixtures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from . import callgrammar
from .core import Completion, Decision, Sample, schemas_to_json, validate_sample

DEFAULT_SYSTEM_TEXT = "You are a helpful assistant."

DEFAULT_SYSTEM_INSTRUCTION = (
    "You are a helpful assistant with access to the following functions. "
    "Call a function when the request requires one; otherwise respond directly."
)


class RenderError(ValueError):
    pass


class Placement(enum.Enum):
    """Where function descriptions appear in the conditional prompt."""

    NO_FUNCTIONS = "no_functions"
    DEDICATED_ROLE = "dedicated_role"
    SYSTEM_ROLE = "system_role"


@dataclass(frozen=True)
class SpecialTokens:
    """Marker strings; each becomes a single token after tokenization downstream."""

    bos: str = "<s>"
    im_start: str = "<|im_start|>"
    im_end: str = "<|im_end|>"
    answer: str = "<|answer|>"
    use_tool: str = "<|use_tool|>"

    def __post_init__(self):
        markers = (self.bos, self.im_start, self.im_end, self.answer, self.use_tool)
        if any(not m for m in markers):
            raise ValueError("special tokens must be non-empty")
        if len(set(markers)) != len(markers):
            raise ValueError("special tokens must be pairwise distinct")


@dataclass(frozen=True)
class PromptConfig:
    placement: Placement = Placement.DEDICATED_ROLE
    decision_token: bool = False
    reasoning: bool = False
    tokens: SpecialTokens = field(default_factory=SpecialTokens)
    system_instruction: str = DEFAULT_SYSTEM_INSTRUCTION

    def __post_init__(self):
        if self.reasoning and not self.decision_token:
            raise ValueError("reasoning templates require the decision token")


def _block(tokens: SpecialTokens, role: str, content: str) -> str:
    return f"{tokens.im_start}{role}\n{content}{tokens.im_end}\n"


def render_prompt(sample: Sample, cfg: PromptConfig) -> str:
    """Render the conditional prompt, ending with an open assistant block.

    A leading system turn in the conversation supplies the system text;
    otherwise a fixed default is used. Under ``SYSTEM_ROLE`` the system block
    is the configured instruction followed by the JSON function array (with
    any conversation system text kept in front).
    """
    violations = validate_sample(sample)
    if violations:
        raise RenderError("invalid sample: " + "; ".join(str(v) for v in violations))
    if cfg.placement is not Placement.NO_FUNCTIONS and not sample.functions:
        raise RenderError(f"placement {cfg.placement.value} requires a non-empty function list")

    messages = list(sample.conversation)
    system_text: str | None = None
    if messages and messages[0].role == "system":
        system_text = messages[0].content
        messages = messages[1:]

    t = cfg.tokens
    parts = [t.bos]
    if cfg.placement is Placement.SYSTEM_ROLE:
        pieces = [] if system_text is None else [system_text]
        pieces += [cfg.system_instruction, schemas_to_json(sample.functions)]
        parts.append(_block(t, "system", "\n".join(pieces)))
    else:
        parts.append(_block(t, "system", DEFAULT_SYSTEM_TEXT if system_text is None else system_text))
        if cfg.placement is Placement.DEDICATED_ROLE:
            parts.append(_block(t, "tools", schemas_to_json(sample.functions)))
    for msg in messages:
        parts.append(_block(t, msg.role, msg.content))
    parts.append(f"{t.im_start}assistant\n")
    return "".join(parts)


def render_completion(target: Completion, cfg: PromptConfig) -> str:
    """Render the target completion text, terminated by the end marker.

    With the decision token enabled the text starts with the answer or
    use-tool marker. Reasoning text, when configured and present, sits between
    the marker and the serialized call list, separated by one newline.
    """
    t = cfg.tokens
    parts: list[str] = []
    if cfg.decision_token:
        if target.decision is Decision.NONE:
            raise RenderError("decision token requested but target has decision=none")
        parts.append(t.answer if target.decision is Decision.ANSWER else t.use_tool)
    if target.calls:
        if cfg.reasoning and target.reason is not None:
            parts.append(target.reason)
            parts.append("\n")
        parts.append(callgrammar.serialize_calls(callgrammar.CallListAst(target.calls)))
    elif target.text is not None:
        parts.append(target.text)
    parts.append(t.im_end)
    return "".join(parts)


def render_training_example(sample: Sample, cfg: PromptConfig) -> str:
    """Prompt and completion concatenated: one training-file record."""
    return render_prompt(sample, cfg) + render_completion(sample.target, cfg)


def _try_parse_calls(text: str):
    try:
        return callgrammar.parse_calls(text)
    except callgrammar.CallSyntaxError:
        return None


def parse_completion(text: str, cfg: PromptConfig) -> Completion:
    """Parse model output back into a Completion. Total: never raises.

    A missing decision marker is recorded as ``Decision.NONE`` with the text
    preserved, so non-conforming model outputs can still be scored. After an
    answer marker the remainder is free text by definition; otherwise the
    remainder (or, under reasoning configs, its suffix from the first bracket
    that parses) is read as a call list.
    """
    t = cfg.tokens
    body = text.rstrip()
    if body.endswith(t.im_end):
        body = body[: -len(t.im_end)]

    decision = Decision.NONE
    if cfg.decision_token:
        # longest marker first, in case one configured marker prefixes the other
        markers = sorted(
            ((t.answer, Decision.ANSWER), (t.use_tool, Decision.USE_TOOL)),
            key=lambda pair: -len(pair[0]),
        )
        for marker, marked_decision in markers:
            if body.startswith(marker):
                decision = marked_decision
                body = body[len(marker):]
                break

    if decision is Decision.ANSWER:
        return Completion(decision=decision, text=body or None)

    if cfg.reasoning:
        idx = body.find("[")
        while idx != -1:
            ast = _try_parse_calls(body[idx:])
            if ast is not None:
                reason = body[:idx]
                if reason.endswith("\n"):
                    reason = reason[:-1]
                if not ast.calls:
                    # "[]" carries no calls; treat the whole body as text.
                    break
                return Completion(decision=decision, reason=reason or None, calls=ast.calls)
            idx = body.find("[", idx + 1)
        return Completion(decision=decision, text=body or None)

    ast = _try_parse_calls(body)
    if ast is not None and ast.calls:
        return Completion(decision=decision, calls=ast.calls)
    return Completion(decision=decision, text=body or None)


def config_variants(tokens: SpecialTokens | None = None) -> dict[str, PromptConfig]:
    """The named template variants used for golden fixtures and round-trips."""
    base = PromptConfig(tokens=tokens or SpecialTokens())
    return {
        "plain": replace(base, decision_token=False, reasoning=False),
        "no_functions": replace(
            base, placement=Placement.NO_FUNCTIONS, decision_token=False, reasoning=False
        ),
        "decision": replace(base, decision_token=True, reasoning=False),
        "decision_reasoning": replace(base, decision_token=True, reasoning=True),
    }
