"""Shared domain types: tool schemas, calls, conversations, and completions.

Everything here is immutable after construction and safe to share across
threads. Construction enforces per-type invariants; cross-field rules that
depend on dirty external data are collected by :func:`validate_sample`
instead of raised, so ingestion pipelines can report rather than crash.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field

# Argument/parameter values are plain JSON-compatible Python data.
Value = None | bool | int | float | str | list["Value"] | dict[str, "Value"]

TYPE_TAGS = ("string", "integer", "number", "boolean", "array", "object")

MESSAGE_ROLES = ("system", "user", "assistant", "tools")

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
DOTTED_NAME_RE = re.compile(rf"{_IDENT}(?:\.{_IDENT})*\Z")

_SCALAR_KIND = {
    "string": str,
    "integer": int,
    "number": (int, float),
    "boolean": bool,
}


class SchemaError(ValueError):
    """Raised when JSON cannot be read as a function schema.

    ``path`` locates the offending node, e.g. ``$.parameters.location.type``.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def is_dotted_name(name: str) -> bool:
    return bool(DOTTED_NAME_RE.match(name))


@dataclass(frozen=True)
class ParamSpec:
    """One typed parameter of a callable tool."""

    type_tag: str
    description: str = ""
    required: bool = True
    enum_values: tuple[Value, ...] | None = None
    item_type: "ParamSpec | None" = None

    def __post_init__(self):
        if self.type_tag not in TYPE_TAGS:
            raise ValueError(f"unknown parameter type {self.type_tag!r}")
        if self.enum_values is not None:
            object.__setattr__(self, "enum_values", tuple(self.enum_values))
            if not self.enum_values:
                raise ValueError("enum_values must be non-empty when present")
            kind = _SCALAR_KIND.get(self.type_tag)
            if kind is None:
                raise ValueError(
                    f"enum_values not allowed for type {self.type_tag!r}"
                )
            for v in self.enum_values:
                if isinstance(v, bool) and self.type_tag != "boolean":
                    raise ValueError(f"enum value {v!r} does not match type {self.type_tag!r}")
                if not isinstance(v, kind):
                    raise ValueError(f"enum value {v!r} does not match type {self.type_tag!r}")
        if self.item_type is not None and self.type_tag != "array":
            raise ValueError("item_type is only allowed for array parameters")


@dataclass(frozen=True)
class FunctionSchema:
    """A callable tool: dotted name, description, ordered parameter specs."""

    name: str
    description: str = ""
    parameters: dict[str, ParamSpec] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or not is_dotted_name(self.name):
            raise ValueError(f"invalid function name {self.name!r}")
        object.__setattr__(self, "parameters", dict(self.parameters))


@dataclass(frozen=True)
class FunctionCall:
    """A parsed call: dotted function name plus ordered keyword arguments."""

    name: str
    arguments: dict[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or not is_dotted_name(self.name):
            raise ValueError(f"invalid function name {self.name!r}")
        object.__setattr__(self, "arguments", dict(self.arguments))


@dataclass(frozen=True)
class Message:
    """One conversation turn."""

    role: str
    content: str

    def __post_init__(self):
        if self.role not in MESSAGE_ROLES:
            raise ValueError(f"unknown message role {self.role!r}")
        if self.role == "tools":
            # A tools turn must carry a JSON array of function schemas.
            try:
                parsed = json.loads(self.content)
            except json.JSONDecodeError as exc:
                raise ValueError(f"tools message content is not JSON: {exc}") from exc
            if not isinstance(parsed, list):
                raise ValueError("tools message content must be a JSON array")


class Decision(enum.Enum):
    """Leading binary choice of a completion.

    ``NONE`` means the template carries no decision marker at all.
    """

    ANSWER = "answer"
    USE_TOOL = "use_tool"
    NONE = "none"


@dataclass(frozen=True)
class Completion:
    """A model target or output: decision, optional reasoning, calls, text."""

    decision: Decision = Decision.NONE
    reason: str | None = None
    calls: tuple[FunctionCall, ...] = ()
    text: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))
        # Empty strings carry no information; normalize so round-trips are exact.
        if self.reason == "":
            object.__setattr__(self, "reason", None)
        if self.text == "":
            object.__setattr__(self, "text", None)
        if self.calls and self.decision is Decision.ANSWER:
            raise ValueError("a completion with calls cannot have decision=answer")
        if self.reason is not None and not self.calls:
            raise ValueError("reasoning text requires a non-empty call list")


@dataclass(frozen=True)
class Sample:
    """One training or evaluation instance.

    The conversation never contains tools-role turns; where the function
    descriptions go is a render-time choice.
    """

    functions: tuple[FunctionSchema, ...] = ()
    conversation: tuple[Message, ...] = ()
    target: Completion = Completion()
    language_tag: str = "en"

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "conversation", tuple(self.conversation))


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by validate_sample: field plus rule."""

    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def validate_sample(sample: Sample) -> list[Violation]:
    """Check the cross-field invariants of a Sample.

    Pure; returns an empty list iff the sample is valid. Violations are data,
    not failures, so callers can batch-report them.
    """
    violations: list[Violation] = []

    seen: set[str] = set()
    for fs in sample.functions:
        if fs.name in seen:
            violations.append(Violation("functions", f"duplicate function name {fs.name}"))
        seen.add(fs.name)

    if not sample.conversation:
        violations.append(Violation("conversation", "conversation is empty"))
    else:
        if sample.conversation[-1].role != "user":
            violations.append(
                Violation("conversation", "conversation must end with a user message")
            )
        for i, msg in enumerate(sample.conversation):
            if msg.role == "tools":
                violations.append(
                    Violation(f"conversation[{i}]", "tools-role messages are not allowed")
                )

    for i, call in enumerate(sample.target.calls):
        if call.name not in seen:
            violations.append(
                Violation(f"target.calls[{i}]", f"unknown function {call.name}")
            )

    return violations


def _param_to_dict(spec: ParamSpec) -> dict:
    d: dict = {
        "type": spec.type_tag,
        "description": spec.description,
        "required": spec.required,
    }
    if spec.enum_values is not None:
        d["enum"] = list(spec.enum_values)
    if spec.item_type is not None:
        d["items"] = _param_to_dict(spec.item_type)
    return d


def schema_to_dict(fs: FunctionSchema) -> dict:
    """Plain-dict form of a schema with the canonical key order."""
    return {
        "name": fs.name,
        "description": fs.description,
        "parameters": {name: _param_to_dict(p) for name, p in fs.parameters.items()},
    }


def schema_to_json(fs: FunctionSchema) -> str:
    """Pretty-print a schema as deterministic 2-space-indented JSON."""
    return json.dumps(schema_to_dict(fs), indent=2, ensure_ascii=False)


def schemas_to_json(functions) -> str:
    """Pretty-print a list of schemas as one JSON array (prompt payload form)."""
    return json.dumps([schema_to_dict(f) for f in functions], indent=2, ensure_ascii=False)


def _param_from_dict(d, path: str) -> ParamSpec:
    if not isinstance(d, dict):
        raise SchemaError("parameter spec must be an object", path)
    type_tag = d.get("type")
    if type_tag is None:
        raise SchemaError("missing `type`", path)
    if type_tag not in TYPE_TAGS:
        raise SchemaError(f"unknown parameter type {type_tag!r}", f"{path}.type")
    enum_values = d.get("enum")
    item_type = None
    if "items" in d and d["items"] is not None:
        item_type = _param_from_dict(d["items"], f"{path}.items")
    try:
        return ParamSpec(
            type_tag=type_tag,
            description=d.get("description", ""),
            required=bool(d.get("required", True)),
            enum_values=tuple(enum_values) if enum_values is not None else None,
            item_type=item_type,
        )
    except ValueError as exc:
        raise SchemaError(str(exc), path) from exc


def schema_from_dict(d, path: str = "$") -> FunctionSchema:
    """Build a FunctionSchema from a parsed JSON object; errors carry paths."""
    if not isinstance(d, dict):
        raise SchemaError("schema must be a JSON object", path)
    name = d.get("name")
    if name is None:
        raise SchemaError("missing `name`", path)
    if not isinstance(name, str) or not is_dotted_name(name):
        raise SchemaError(f"invalid function name {name!r}", f"{path}.name")
    params_node = d.get("parameters", {})
    if not isinstance(params_node, dict):
        raise SchemaError("`parameters` must be an object", f"{path}.parameters")
    parameters = {
        pname: _param_from_dict(pd, f"{path}.parameters.{pname}")
        for pname, pd in params_node.items()
    }
    description = d.get("description", "")
    if not isinstance(description, str):
        raise SchemaError("`description` must be a string", f"{path}.description")
    return FunctionSchema(name=name, description=description, parameters=parameters)


def json_to_schema(text: str) -> FunctionSchema:
    """Inverse of schema_to_json; tolerant of key order and whitespace."""
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    return schema_from_dict(parsed)
