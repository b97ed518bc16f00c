"""Data engineering and evaluation toolkit for function-calling LLMs."""

from .core import (
    Completion,
    Decision,
    FunctionCall,
    FunctionSchema,
    Message,
    ParamSpec,
    Sample,
    SchemaError,
    Violation,
    json_to_schema,
    schema_to_json,
    schemas_to_json,
    validate_sample,
)
from .callgrammar import CallListAst, CallSyntaxError, parse_calls, serialize_calls
from .prompt import (
    Placement,
    PromptConfig,
    RenderError,
    SpecialTokens,
    parse_completion,
    render_completion,
    render_prompt,
    render_training_example,
)
from .evaluator import (
    AcceptableArg,
    AcceptableCall,
    EvalReport,
    EvalTask,
    match_call,
    run_suite,
    score_task,
)

__version__ = "0.1.0"

__all__ = [
    "AcceptableArg",
    "AcceptableCall",
    "CallListAst",
    "CallSyntaxError",
    "Completion",
    "Decision",
    "EvalReport",
    "EvalTask",
    "FunctionCall",
    "FunctionSchema",
    "Message",
    "ParamSpec",
    "Placement",
    "PromptConfig",
    "RenderError",
    "Sample",
    "SchemaError",
    "SpecialTokens",
    "Violation",
    "json_to_schema",
    "match_call",
    "parse_calls",
    "parse_completion",
    "render_completion",
    "render_prompt",
    "render_training_example",
    "run_suite",
    "schema_to_json",
    "schemas_to_json",
    "score_task",
    "serialize_calls",
    "validate_sample",
]
