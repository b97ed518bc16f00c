"""The eight frozen template variants and the reference samples behind them.

Each variant pairs a sample with a prompt config; renders are pinned by the
committed files under goldens/. Regenerate with scripts/make_goldens.py after
any deliberate template change.
"""

from fcdata.core import (
    Completion,
    Decision,
    FunctionCall,
    FunctionSchema,
    Message,
    ParamSpec,
    Sample,
)
from fcdata.prompt import Placement, PromptConfig

WEATHER_SCHEMA = FunctionSchema(
    name="weather_api.get_current_weather",
    description="Retrieves the current weather conditions for a specified location.",
    parameters={
        "location": ParamSpec("string", "The name of the city or geographic location.", True),
        "units": ParamSpec(
            "string",
            "The units for temperature measurement (e.g., 'Celsius', 'Fahrenheit').",
            False,
        ),
    },
)

_CONVERSATION = (
    Message("system", "You are a helpful assistant."),
    Message("user", "What is the weather in Taipei?"),
    Message("assistant", "Current temperature in Taipei: 32 Celsius"),
    Message("user", "What is the weather in Palo Alto?"),
)

_CALL_TARGET = Completion(
    decision=Decision.USE_TOOL,
    calls=(
        FunctionCall(
            "weather_api.get_current_weather",
            {"location": "Palo Alto", "units": "Celsius"},
        ),
    ),
)

_REASONED_TARGET = Completion(
    decision=Decision.USE_TOOL,
    reason=(
        "The user asks for the current weather in Palo Alto, and "
        "weather_api.get_current_weather retrieves current conditions for a "
        "given location."
    ),
    calls=_CALL_TARGET.calls,
)

_ANSWER_TARGET = Completion(
    decision=Decision.ANSWER,
    text="I cannot check live weather with the tools available, sorry.",
)

FC_SAMPLE = Sample(functions=(WEATHER_SCHEMA,), conversation=_CONVERSATION, target=_CALL_TARGET)
REASONED_SAMPLE = Sample(
    functions=(WEATHER_SCHEMA,), conversation=_CONVERSATION, target=_REASONED_TARGET
)
NF_SAMPLE = Sample(functions=(WEATHER_SCHEMA,), conversation=_CONVERSATION, target=_ANSWER_TARGET)
IF_SAMPLE = Sample(
    functions=(),
    conversation=(
        Message("system", "You are a helpful assistant."),
        Message("user", "What is the capital of France?"),
    ),
    target=Completion(decision=Decision.ANSWER, text="The capital of France is Paris."),
)


def golden_cases() -> dict[str, tuple[Sample, PromptConfig]]:
    no_fn = PromptConfig(placement=Placement.NO_FUNCTIONS)
    dedicated = PromptConfig(placement=Placement.DEDICATED_ROLE)
    system = PromptConfig(placement=Placement.SYSTEM_ROLE)
    dedicated_dt = PromptConfig(placement=Placement.DEDICATED_ROLE, decision_token=True)
    system_dt = PromptConfig(placement=Placement.SYSTEM_ROLE, decision_token=True)
    reasoning = PromptConfig(
        placement=Placement.DEDICATED_ROLE, decision_token=True, reasoning=True
    )
    return {
        "variant_a": (IF_SAMPLE, no_fn),
        "variant_b": (FC_SAMPLE, dedicated),
        "variant_c": (FC_SAMPLE, system),
        "variant_d": (NF_SAMPLE, dedicated),
        "variant_e": (NF_SAMPLE, dedicated_dt),
        "variant_f": (FC_SAMPLE, dedicated_dt),
        "variant_g": (FC_SAMPLE, system_dt),
        "variant_h": (REASONED_SAMPLE, reasoning),
    }
