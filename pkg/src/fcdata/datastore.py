"""Dataset ingestion, normalization, mixing, and statistics.

The native on-disk format is one JSON object per line with keys ``functions``,
``conversation``, ``target`` and ``language_tag``; target calls are stored as
the canonical call-list string so files stay diff-able and the call grammar is
the single source of truth. Foreign formats (apigen-like, glaive-like,
sharegpt-like) are normalized into the same Sample type at ingestion, with
per-record failures reported rather than raised.
"""

from __future__ import annotations

import ast as python_ast
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import callgrammar
from .core import (
    Completion,
    Decision,
    FunctionCall,
    FunctionSchema,
    Message,
    ParamSpec,
    Sample,
    SchemaError,
    TYPE_TAGS,
    schema_from_dict,
    schema_to_dict,
    validate_sample,
)
from .jsonscan import iter_json_values

FORMAT_TAGS = ("native", "apigen_like", "glaive_like", "sharegpt_like")

ROLES = ("instruction_following", "function_calling", "non_function_call", "translated")


class DatastoreError(ValueError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    path: str
    format_tag: str
    role: str

    def __post_init__(self):
        if self.format_tag not in FORMAT_TAGS:
            raise DatastoreError(f"unknown format_tag {self.format_tag!r}")
        if self.role not in ROLES:
            raise DatastoreError(f"unknown role {self.role!r}")


@dataclass(frozen=True)
class DatasetManifest:
    sources: tuple[SourceSpec, ...]
    counts: dict[str, int]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "counts", dict(self.counts))
        for role in self.counts:
            if role not in ROLES:
                raise DatastoreError(f"unknown role {role!r} in counts")


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: int = 0
    reasons: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected += 1
        self.reasons.append((line_no, reason))

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reasons": [{"line": line, "reason": reason} for line, reason in self.reasons],
        }


# --- native format -----------------------------------------------------------

def sample_to_record(sample: Sample) -> dict:
    target = sample.target
    return {
        "functions": [schema_to_dict(f) for f in sample.functions],
        "conversation": [{"role": m.role, "content": m.content} for m in sample.conversation],
        "target": {
            "decision": target.decision.value,
            "reason": target.reason,
            "calls": callgrammar.serialize_calls(callgrammar.CallListAst(target.calls)),
            "text": target.text,
        },
        "language_tag": sample.language_tag,
    }


def record_to_sample(record: dict) -> Sample:
    target_node = record.get("target", {})
    decision = Decision(target_node.get("decision", "none"))
    calls = callgrammar.parse_calls(target_node.get("calls", "[]")).calls
    return Sample(
        functions=tuple(schema_from_dict(d) for d in record.get("functions", [])),
        conversation=tuple(
            Message(role=m["role"], content=m["content"]) for m in record.get("conversation", [])
        ),
        target=Completion(
            decision=decision,
            reason=target_node.get("reason"),
            calls=calls,
            text=target_node.get("text"),
        ),
        language_tag=record.get("language_tag", "en"),
    )


def export_samples(samples, path) -> None:
    """Write samples as native JSONL; inverse of native ingestion."""
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample_to_record(sample), ensure_ascii=False))
            fh.write("\n")


# --- foreign-schema normalization --------------------------------------------

_PY_TYPE_MAP = {
    "str": "string",
    "string": "string",
    "int": "integer",
    "integer": "integer",
    "float": "number",
    "number": "number",
    "bool": "boolean",
    "boolean": "boolean",
    "list": "array",
    "array": "array",
    "tuple": "array",
    "dict": "object",
    "object": "object",
}


def _normalize_type(raw: str) -> tuple[str, bool]:
    """Map corpus type spellings like ``"str, optional"`` to a tag + optional flag."""
    parts = [p.strip().lower() for p in raw.split(",")]
    optional = "optional" in parts[1:]
    tag = _PY_TYPE_MAP.get(parts[0])
    if tag is None:
        raise SchemaError(f"unknown parameter type {raw!r}")
    return tag, optional


def _foreign_param(name: str, node: dict, required_names) -> ParamSpec:
    raw_type = node.get("type", "string")
    tag, optional = _normalize_type(str(raw_type))
    if required_names is not None:
        required = name in required_names
    elif "required" in node:
        required = bool(node["required"])
    else:
        required = not optional and "default" not in node
    enum_values = node.get("enum")
    return ParamSpec(
        type_tag=tag,
        description=str(node.get("description", "")),
        required=required,
        enum_values=tuple(enum_values) if enum_values else None,
    )


def foreign_schema_to_function(node: dict) -> FunctionSchema:
    """Normalize either the flat or the JSON-Schema-style tool description."""
    if not isinstance(node, dict) or "name" not in node:
        raise SchemaError("tool description missing `name`")
    params_node = node.get("parameters", {}) or {}
    required_names = None
    if isinstance(params_node, dict) and isinstance(params_node.get("properties"), dict):
        # JSON-Schema style: {"type": "object", "properties": {...}, "required": [...]}
        required_names = set(params_node.get("required", []))
        params_node = params_node["properties"]
    if not isinstance(params_node, dict):
        raise SchemaError("`parameters` must be an object")
    parameters = {}
    for pname, pnode in params_node.items():
        if not isinstance(pnode, dict):
            raise SchemaError(f"parameter {pname!r} must be an object")
        try:
            parameters[pname] = _foreign_param(pname, pnode, required_names)
        except (SchemaError, ValueError) as exc:
            raise SchemaError(f"parameter {pname!r}: {exc}") from exc
    name = str(node["name"]).replace("-", "_").replace(" ", "_")
    return FunctionSchema(
        name=name,
        description=str(node.get("description", "")),
        parameters=parameters,
    )


def _maybe_json(value):
    """Corpora embed JSON as strings; parse if needed."""
    if isinstance(value, str):
        return json.loads(value)
    return value


def _call_from_node(node: dict) -> FunctionCall:
    if not isinstance(node, dict) or "name" not in node:
        raise DatastoreError("call record missing `name`")
    args = node.get("arguments", {})
    if isinstance(args, str):
        try:
            args = json.loads(args)
        except json.JSONDecodeError:
            args = python_ast.literal_eval(args)
    if not isinstance(args, dict):
        raise DatastoreError("call arguments must be an object")
    return FunctionCall(name=str(node["name"]), arguments=args)


# --- per-format record converters --------------------------------------------

def _from_native(record: dict) -> Sample:
    return record_to_sample(record)


def _from_apigen(record: dict) -> Sample:
    query = record.get("query")
    if not isinstance(query, str) or not query.strip():
        raise DatastoreError("apigen record has no query")
    tools = _maybe_json(record.get("tools", []))
    answers = _maybe_json(record.get("answers", []))
    if not isinstance(tools, list) or not isinstance(answers, list):
        raise DatastoreError("apigen tools/answers must be lists")
    if not answers:
        raise DatastoreError("apigen record has no answers")
    functions = tuple(foreign_schema_to_function(t) for t in tools)
    calls = tuple(_call_from_node(a) for a in answers)
    return Sample(
        functions=functions,
        conversation=(Message("user", query),),
        target=Completion(decision=Decision.USE_TOOL, calls=calls),
    )


_GLAIVE_TURN_RE = re.compile(r"(USER|ASSISTANT|FUNCTION RESPONSE):\s*", re.DOTALL)


def _glaive_call(text: str) -> FunctionCall:
    marker = text.find("<functioncall>")
    raw = text[marker + len("<functioncall>"):].strip()
    raw = raw.split("<|endoftext|>")[0].strip()
    try:
        node = json.loads(raw)
    except json.JSONDecodeError:
        # glaive wraps arguments in single quotes: {"name": ..., "arguments": '{...}'}
        node = python_ast.literal_eval(raw)
    return _call_from_node(node)


def _from_glaive(record: dict) -> Sample:
    system = record.get("system", "")
    chat = record.get("chat", "")
    if not isinstance(system, str) or not isinstance(chat, str):
        raise DatastoreError("glaive record needs string `system` and `chat`")

    functions = []
    for value, _, _ in iter_json_values(system):
        nodes = value if isinstance(value, list) else [value]
        for node in nodes:
            if isinstance(node, dict) and "name" in node:
                functions.append(foreign_schema_to_function(node))

    pieces = _GLAIVE_TURN_RE.split(chat)
    turns: list[tuple[str, str]] = []
    for marker, content in zip(pieces[1::2], pieces[2::2]):
        turns.append((marker, content.replace("<|endoftext|>", "").strip()))

    conversation: list[Message] = []
    target: Completion | None = None
    for idx, (marker, content) in enumerate(turns):
        if marker == "USER":
            conversation.append(Message("user", content))
        elif marker == "ASSISTANT":
            if "<functioncall>" in content:
                target = Completion(decision=Decision.USE_TOOL, calls=(_glaive_call(content),))
                break
            if idx == len(turns) - 1:
                target = Completion(decision=Decision.ANSWER, text=content)
                break
            conversation.append(Message("assistant", content))
        else:
            raise DatastoreError("function-response turns before the first call are unsupported")
    if target is None:
        raise DatastoreError("glaive chat has no final assistant turn")
    if target.calls and not functions:
        raise DatastoreError("glaive record calls a function but declares none")
    return Sample(functions=tuple(functions), conversation=tuple(conversation), target=target)


_SHAREGPT_ROLES = {"system": "system", "human": "user", "gpt": "assistant"}


def _from_sharegpt(record: dict) -> Sample:
    entries = record.get("conversations")
    if not isinstance(entries, list) or not entries:
        raise DatastoreError("sharegpt record has no conversations")
    tools = _maybe_json(record.get("tools", record.get("functions", [])) or [])
    functions = tuple(foreign_schema_to_function(t) for t in tools)

    conversation: list[Message] = []
    target: Completion | None = None
    for i, entry in enumerate(entries):
        source = entry.get("from")
        value = entry.get("value", "")
        if source == "function_call":
            calls_node = _maybe_json(value)
            if isinstance(calls_node, dict):
                calls_node = [calls_node]
            target = Completion(
                decision=Decision.USE_TOOL,
                calls=tuple(_call_from_node(n) for n in calls_node),
            )
            break
        if source not in _SHAREGPT_ROLES:
            raise DatastoreError(f"unsupported sharegpt source {source!r}")
        if source == "gpt" and i == len(entries) - 1:
            target = Completion(decision=Decision.ANSWER, text=value)
            break
        conversation.append(Message(_SHAREGPT_ROLES[source], value))
    if target is None:
        raise DatastoreError("sharegpt record has no target turn")
    return Sample(functions=functions, conversation=tuple(conversation), target=target)


_CONVERTERS = {
    "native": _from_native,
    "apigen_like": _from_apigen,
    "glaive_like": _from_glaive,
    "sharegpt_like": _from_sharegpt,
}


def ingest(path, format_tag: str) -> tuple[list[Sample], IngestReport]:
    """Read a JSONL file and normalize each record into a Sample.

    Per-record failures (bad JSON, unknown types, samples breaking core
    invariants) land in the report; only an unreadable file or unknown format
    tag raises. Every returned sample passes validate_sample.
    """
    if format_tag not in FORMAT_TAGS:
        raise DatastoreError(f"unknown format_tag {format_tag!r}")
    converter = _CONVERTERS[format_tag]
    samples: list[Sample] = []
    report = IngestReport()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                report.reject(line_no, f"malformed JSON: {exc}")
                continue
            try:
                sample = converter(record)
            except (ValueError, KeyError, TypeError, AttributeError, SyntaxError) as exc:
                report.reject(line_no, f"{type(exc).__name__}: {exc}")
                continue
            violations = validate_sample(sample)
            if violations:
                report.reject(line_no, "; ".join(str(v) for v in violations))
                continue
            samples.append(sample)
            report.accepted += 1
    return samples, report


def load_manifest(path) -> DatasetManifest:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        sources = tuple(
            SourceSpec(path=s["path"], format_tag=s["format_tag"], role=s["role"])
            for s in doc["sources"]
        )
        return DatasetManifest(sources=sources, counts=dict(doc["counts"]), seed=int(doc["seed"]))
    except (KeyError, TypeError) as exc:
        raise DatastoreError(f"malformed manifest: {exc}") from exc


def mix(manifest: DatasetManifest, base_dir=None) -> list[Sample]:
    """Draw the requested count per role without replacement, then shuffle.

    Fully deterministic for a fixed (manifest, seed): roles are drawn in
    declaration-independent canonical order and a single seeded generator
    drives both sampling and the final global shuffle.
    """
    rng = random.Random(manifest.seed)
    pools: dict[str, list[Sample]] = {role: [] for role in ROLES}
    for src in manifest.sources:
        src_path = Path(base_dir) / src.path if base_dir is not None else Path(src.path)
        samples, _ = ingest(src_path, src.format_tag)
        pools[src.role].extend(samples)

    chosen: list[Sample] = []
    for role in ROLES:
        want = manifest.counts.get(role, 0)
        if not want:
            continue
        pool = pools[role]
        if want > len(pool):
            raise DatastoreError(
                f"requested {want} {role} samples but only {len(pool)} available"
            )
        chosen.extend(rng.sample(pool, want))
    rng.shuffle(chosen)
    return chosen


def infer_role(sample: Sample) -> str:
    """Structural role of a sample; Sample itself carries no role field."""
    if sample.target.calls:
        return "function_calling"
    if sample.functions:
        return "non_function_call"
    return "instruction_following"


def stats(samples) -> dict:
    """Counts by inferred role, language, decision; call histogram; tool count."""
    by_role: dict[str, int] = {}
    by_language: dict[str, int] = {}
    by_decision: dict[str, int] = {}
    calls_hist: dict[int, int] = {}
    function_names: set[str] = set()
    total = 0
    for sample in samples:
        total += 1
        role = infer_role(sample)
        by_role[role] = by_role.get(role, 0) + 1
        by_language[sample.language_tag] = by_language.get(sample.language_tag, 0) + 1
        decision = sample.target.decision.value
        by_decision[decision] = by_decision.get(decision, 0) + 1
        n_calls = len(sample.target.calls)
        calls_hist[n_calls] = calls_hist.get(n_calls, 0) + 1
        function_names.update(f.name for f in sample.functions)
    return {
        "total": total,
        "by_role": dict(sorted(by_role.items())),
        "by_language": dict(sorted(by_language.items())),
        "by_decision": dict(sorted(by_decision.items())),
        "calls_per_sample": {str(k): v for k, v in sorted(calls_hist.items())},
        "distinct_function_names": len(function_names),
    }
