import pytest

from fcdata.core import (
    Completion,
    Decision,
    FunctionCall,
    FunctionSchema,
    Message,
    ParamSpec,
    Sample,
)


@pytest.fixture
def weather_schema() -> FunctionSchema:
    return FunctionSchema(
        name="weather_api.get_current_weather",
        description="Retrieves the current weather conditions for a specified location.",
        parameters={
            "location": ParamSpec(
                "string", "The name of the city or geographic location.", True
            ),
            "units": ParamSpec(
                "string",
                "The units for temperature measurement (e.g., 'Celsius', 'Fahrenheit').",
                False,
            ),
        },
    )


@pytest.fixture
def math_schemas() -> tuple[FunctionSchema, FunctionSchema]:
    return (
        FunctionSchema(
            name="math_toolkit.sum_of_multiples",
            description="Find the sum of all multiples of specified numbers within a specified range.",
            parameters={
                "lower_limit": ParamSpec("integer", "The start of the range (inclusive).", True),
                "upper_limit": ParamSpec("integer", "The end of the range (inclusive).", True),
                "multiples": ParamSpec("array", "The numbers to find multiples of.", True),
            },
        ),
        FunctionSchema(
            name="math_toolkit.product_of_primes",
            description="Find the product of the first n prime numbers.",
            parameters={
                "count": ParamSpec(
                    "integer", "The number of prime numbers to multiply together.", True
                ),
            },
        ),
    )


@pytest.fixture
def weather_sample(weather_schema) -> Sample:
    return Sample(
        functions=(weather_schema,),
        conversation=(
            Message("system", "You are a helpful assistant."),
            Message("user", "What is the weather in Taipei?"),
            Message("assistant", "Current temperature in Taipei: 32 Celsius"),
            Message("user", "What is the weather in Palo Alto?"),
        ),
        target=Completion(
            decision=Decision.USE_TOOL,
            calls=(
                FunctionCall(
                    "weather_api.get_current_weather",
                    {"location": "Palo Alto", "units": "Celsius"},
                ),
            ),
        ),
    )


@pytest.fixture
def math_sample(math_schemas) -> Sample:
    return Sample(
        functions=math_schemas,
        conversation=(
            Message(
                "user",
                "Find the sum of all the multiples of 3 and 5 between 1 and 1000. "
                "Also find the product of the first five prime numbers.",
            ),
        ),
        target=Completion(
            decision=Decision.USE_TOOL,
            calls=(
                FunctionCall(
                    "math_toolkit.sum_of_multiples",
                    {"lower_limit": 1, "upper_limit": 1000, "multiples": [3, 5]},
                ),
                FunctionCall("math_toolkit.product_of_primes", {"count": 5}),
            ),
        ),
    )


@pytest.fixture
def nf_source_sample(weather_schema, math_schemas) -> Sample:
    """Three provided functions, one of which is called."""
    return Sample(
        functions=(weather_schema,) + math_schemas,
        conversation=(Message("user", "What is the weather in Palo Alto?"),),
        target=Completion(
            decision=Decision.USE_TOOL,
            calls=(
                FunctionCall(
                    "weather_api.get_current_weather", {"location": "Palo Alto"}
                ),
            ),
        ),
    )


@pytest.fixture
def answer_sample() -> Sample:
    return Sample(
        functions=(),
        conversation=(Message("user", "What is the capital of France?"),),
        target=Completion(decision=Decision.ANSWER, text="The capital of France is Paris."),
    )
