"""Scoring of parsed completions against benchmark tasks.

Matching semantics are pinned here so divergence from any external harness is
auditable: function names compare exactly, every argument value must fall in the
task's acceptable set (reals within an absolute tolerance, strings after
whitespace trim), optional arguments may be omitted only when marked
omissible, and the parallel categories require a perfect one-to-one matching
between generated and target calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .core import Completion, FunctionCall, FunctionSchema, Value, schema_from_dict, schema_to_dict

REAL_TOLERANCE = 1e-6

AST_CATEGORIES = ("simple", "multiple", "parallel", "parallel_multiple")
CATEGORIES = AST_CATEGORIES + ("relevance",)


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class AcceptableArg:
    """The admissible values for one argument; omissible optionals may be absent."""

    values: tuple[Value, ...]
    omissible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("acceptable value list must be non-empty")


@dataclass(frozen=True)
class AcceptableCall:
    name: str
    arguments: dict[str, AcceptableArg] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "arguments", dict(self.arguments))


@dataclass(frozen=True)
class EvalTask:
    id: str
    category: str
    functions: tuple[FunctionSchema, ...]
    question: str
    targets: tuple[AcceptableCall, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.category not in CATEGORIES:
            raise TaskError(f"unknown category {self.category!r}")
        n_targets, n_functions = len(self.targets), len(self.functions)
        if self.category == "relevance":
            if n_targets:
                raise TaskError("relevance tasks carry no targets")
        elif self.category in ("simple", "multiple"):
            if n_targets != 1:
                raise TaskError(f"{self.category} tasks need exactly one target")
        elif n_targets < 2:
            raise TaskError(f"{self.category} tasks need at least two targets")
        if self.category in ("simple", "parallel") and n_functions != 1:
            raise TaskError(f"{self.category} tasks provide exactly one function")
        if self.category in ("multiple", "parallel_multiple") and n_functions < 2:
            raise TaskError(f"{self.category} tasks provide at least two functions")

        schemas = {f.name: f for f in self.functions}
        for t in self.targets:
            schema = schemas.get(t.name)
            if schema is None:
                raise TaskError(f"target names unknown function {t.name}")
            for arg_name, arg in t.arguments.items():
                if arg_name not in schema.parameters:
                    raise TaskError(f"target argument {arg_name!r} not in schema of {t.name}")
                if schema.parameters[arg_name].required and arg.omissible:
                    raise TaskError(f"required parameter {arg_name!r} of {t.name} cannot be omissible")


@dataclass(frozen=True)
class EvalReport:
    """Per-category pass counts plus the two aggregate metrics."""

    category_counts: dict[str, tuple[int, int]]
    ast_summary: float
    relevance_detection: float

    def to_dict(self) -> dict:
        return {
            "categories": {
                cat: {
                    "passed": passed,
                    "total": total,
                    "accuracy": passed / total if total else 0.0,
                }
                for cat, (passed, total) in self.category_counts.items()
            },
            "ast_summary": self.ast_summary,
            "relevance_detection": self.relevance_detection,
        }

    def format_table(self) -> str:
        lines = [f"{'category':<18} {'passed':>7} {'total':>6} {'accuracy':>9}"]
        for cat in CATEGORIES:
            passed, total = self.category_counts[cat]
            acc = passed / total if total else 0.0
            lines.append(f"{cat:<18} {passed:>7} {total:>6} {acc:>8.2%}")
        lines.append(f"{'AST summary':<33} {self.ast_summary:>8.2%}")
        lines.append(f"{'Relevance detection':<33} {self.relevance_detection:>8.2%}")
        return "\n".join(lines)


def values_equal(a: Value, b: Value) -> bool:
    """Value equality used by matching: tolerant reals, trimmed strings."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if isinstance(a, int) and isinstance(b, int):
            return a == b
        return abs(a - b) <= REAL_TOLERANCE
    if isinstance(a, str) and isinstance(b, str):
        return a.strip() == b.strip()
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(values_equal(v, b[k]) for k, v in a.items())
    return a is None and b is None


def match_call(generated: FunctionCall, target: AcceptableCall, schema: FunctionSchema) -> bool:
    """Structural match of one generated call against one acceptable call."""
    if schema.name != target.name:
        raise TaskError("schema does not describe the target function")
    if generated.name != target.name:
        return False
    for arg_name, arg in target.arguments.items():
        if not arg.omissible and arg_name not in generated.arguments:
            return False
    for arg_name, value in generated.arguments.items():
        if arg_name not in schema.parameters:
            return False
        arg = target.arguments.get(arg_name)
        if arg is None:
            return False
        if not any(values_equal(value, accepted) for accepted in arg.values):
            return False
    return True


def _has_perfect_matching(grid: list[list[bool]]) -> bool:
    # Kuhn's augmenting-path matching over the generated->target match grid.
    n = len(grid)
    owner: list[int | None] = [None] * n

    def augment(i: int, seen: set[int]) -> bool:
        for j in range(n):
            if grid[i][j] and j not in seen:
                seen.add(j)
                if owner[j] is None or augment(owner[j], seen):
                    owner[j] = i
                    return True
        return False

    return all(augment(i, set()) for i in range(n))


def score_task(task: EvalTask, completion: Completion) -> bool:
    """Pass/fail verdict for one task.

    Relevance keys on parsed calls alone: an output that declared tool use but
    decodes to no call still counts as abstaining.
    """
    calls = completion.calls
    if task.category == "relevance":
        return not calls
    schemas = {f.name: f for f in task.functions}
    if task.category in ("simple", "multiple"):
        target = task.targets[0]
        return len(calls) == 1 and match_call(calls[0], target, schemas[target.name])
    if len(calls) != len(task.targets):
        return False
    grid = [[match_call(g, t, schemas[t.name]) for t in task.targets] for g in calls]
    return _has_perfect_matching(grid)


def run_suite(tasks: list[EvalTask], completions: dict[str, Completion]) -> EvalReport:
    """Score every task; missing completions score false, never raise."""
    seen_ids: set[str] = set()
    counts = {cat: [0, 0] for cat in CATEGORIES}
    for task in tasks:
        if task.id in seen_ids:
            raise TaskError(f"duplicate task id {task.id!r}")
        seen_ids.add(task.id)
        completion = completions.get(task.id)
        passed = completion is not None and score_task(task, completion)
        counts[task.category][1] += 1
        if passed:
            counts[task.category][0] += 1

    def accuracy(cat: str) -> float:
        passed, total = counts[cat]
        return passed / total if total else 0.0

    return EvalReport(
        category_counts={cat: (p, t) for cat, (p, t) in counts.items()},
        ast_summary=sum(accuracy(c) for c in AST_CATEGORIES) / len(AST_CATEGORIES),
        relevance_detection=accuracy("relevance"),
    )


def task_to_dict(task: EvalTask) -> dict:
    d: dict = {
        "id": task.id,
        "category": task.category,
        "question": task.question,
        "functions": [schema_to_dict(f) for f in task.functions],
    }
    if task.category != "relevance":
        d["targets"] = [
            {
                "name": t.name,
                "arguments": {
                    name: {"values": list(arg.values), "omissible": arg.omissible}
                    for name, arg in t.arguments.items()
                },
            }
            for t in task.targets
        ]
    return d


def task_from_dict(d: dict) -> EvalTask:
    try:
        targets = tuple(
            AcceptableCall(
                name=t["name"],
                arguments={
                    name: AcceptableArg(
                        values=tuple(spec["values"]),
                        omissible=bool(spec.get("omissible", False)),
                    )
                    for name, spec in t.get("arguments", {}).items()
                },
            )
            for t in d.get("targets", [])
        )
        return EvalTask(
            id=d["id"],
            category=d["category"],
            functions=tuple(schema_from_dict(f) for f in d.get("functions", [])),
            question=d.get("question", ""),
            targets=targets,
        )
    except (KeyError, TypeError) as exc:
        raise TaskError(f"malformed task record: {exc}") from exc


def load_tasks(path) -> list[EvalTask]:
    """Read a JSONL task file, one EvalTask per line."""
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TaskError(f"line {line_no}: malformed JSON: {exc}") from exc
            try:
                tasks.append(task_from_dict(record))
            except TaskError as exc:
                raise TaskError(f"line {line_no}: {exc}") from exc
    return tasks
