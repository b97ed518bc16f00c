"""Command-line entry point: rendering, evaluation, and the synthesis pipelines.

Exit codes: 0 success (even with per-record rejects), 2 usage error, 3
input-data error, 4 backend failure. Per-record failures are data, not
process failures; they go to stderr or the rejects sidecar and the run
continues, so lossy LLM pipelines stay resumable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import datastore, gateway, prompt, synthesis
from .core import Completion, Message, Sample
from .evaluator import EvalTask, load_tasks, run_suite
from .gateway import BackendConfig, ChatRequest, GatewayError, RetryPolicy
from .prompt import Placement, PromptConfig, SpecialTokens

log = logging.getLogger("fcdata")


class InputDataError(ValueError):
    pass


class UsageError(ValueError):
    pass


# --- config loading -----------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputDataError(f"config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputDataError(f"config file {path} must hold a JSON object")
    return doc


def _prompt_config(args, config: dict) -> PromptConfig:
    """Resolve the template config: flags override file values override defaults."""
    tokens_node = config.get("tokens", {})
    try:
        tokens = SpecialTokens(**tokens_node) if tokens_node else SpecialTokens()
    except (ValueError, TypeError) as exc:
        raise InputDataError(f"config tokens: {exc}") from exc

    placement = getattr(args, "placement", None)
    if placement is None:
        placement = config.get("placement", Placement.DEDICATED_ROLE.value)
    try:
        placement = Placement(placement)
    except ValueError as exc:
        raise InputDataError(f"config placement: {exc}") from exc
    decision_token = getattr(args, "decision_token", None)
    if decision_token is None:
        decision_token = bool(config.get("decision_token", False))
    reasoning = getattr(args, "reasoning", None)
    if reasoning is None:
        reasoning = bool(config.get("reasoning", False))

    try:
        return PromptConfig(
            placement=placement,
            decision_token=decision_token,
            reasoning=reasoning,
            tokens=tokens,
            system_instruction=config.get("system_instruction", prompt.DEFAULT_SYSTEM_INSTRUCTION),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_backend(path: str) -> tuple[BackendConfig, dict]:
    """Read one backend JSON document: transport config plus request params."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    retry_node = doc.get("retry", {})
    try:
        cfg = BackendConfig(
            kind=doc.get("kind", "mock"),
            endpoint_url=doc.get("endpoint_url"),
            auth_env_var=doc.get("auth_env_var"),
            max_parallel=int(doc.get("max_parallel", 4)),
            retry=RetryPolicy(
                max_attempts=int(retry_node.get("max_attempts", 3)),
                base_backoff_ms=int(retry_node.get("base_backoff_ms", 100)),
            ),
            cache_dir=doc.get("cache_dir"),
            mock_responses=doc.get("mock_responses"),
        )
    except ValueError as exc:
        raise InputDataError(f"backend config {path}: {exc}") from exc
    model_id = doc.get("model_id")
    if not model_id:
        raise InputDataError(f"backend config {path}: model_id is required")
    request_params = {
        "model_id": model_id,
        "temperature": float(doc.get("temperature", 0.0)),
        "max_output": int(doc.get("max_output", 1024)),
    }
    return cfg, request_params


def _read_native(path) -> tuple[list[tuple[int, Sample]], list[tuple[int, str]]]:
    """Native JSONL, collecting per-line failures instead of raising."""
    records: list[tuple[int, Sample]] = []
    failures: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                sample = datastore.record_to_sample(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                failures.append((line_no, f"{type(exc).__name__}: {exc}"))
                continue
            records.append((line_no, sample))
    return records, failures


def _open_out(path: str):
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    return out.open("w", encoding="utf-8")


class _RejectsWriter:
    def __init__(self, path: str | None):
        self.path = path
        self.items: list[dict] = []

    def add(self, item_id, stage: str, reason: str) -> None:
        self.items.append({"id": item_id, "stage": stage, "reason": reason})
        log.warning("reject item=%s stage=%s: %s", item_id, stage, reason)

    def flush(self) -> None:
        if self.path is None:
            return
        with _open_out(self.path) as fh:
            for item in self.items:
                fh.write(json.dumps(item, ensure_ascii=False) + "\n")


# --- subcommands ---------------------------------------------------------------

def cmd_render(args) -> int:
    config = _load_config(args.config)
    cfg = _prompt_config(args, config)
    # Placement says where functions go when a sample has any; samples without
    # functions always use the no-functions template, so mixed blends render.
    fallback = dataclasses.replace(cfg, placement=Placement.NO_FUNCTIONS)
    records, failures = _read_native(args.input)
    for line_no, reason in failures:
        print(f"line {line_no}: {reason}", file=sys.stderr)
    with _open_out(args.out) as fh:
        for line_no, sample in records:
            if cfg.placement is Placement.NO_FUNCTIONS and sample.functions:
                print(
                    f"line {line_no}: warning: placement=no_functions, "
                    f"{len(sample.functions)} provided functions omitted",
                    file=sys.stderr,
                )
            effective = cfg if sample.functions else fallback
            try:
                text = prompt.render_training_example(sample, effective)
            except (prompt.RenderError, ValueError) as exc:
                print(f"line {line_no}: {exc}", file=sys.stderr)
                continue
            fh.write(json.dumps({"text": text}, ensure_ascii=False) + "\n")
    return 0


def task_prompt_sample(task: EvalTask) -> Sample:
    return Sample(
        functions=task.functions,
        conversation=(Message("user", task.question),),
        target=Completion(),
    )


def completions_from_backend(
    tasks: list[EvalTask],
    cfg: PromptConfig,
    backend: BackendConfig,
    request_params: dict,
) -> dict[str, Completion]:
    """Query the backend once per task and parse the raw outputs.

    Tasks whose request failed are left out of the map (they score false),
    but a batch where every single request failed is a backend failure.
    """
    requests_by_task: dict[str, ChatRequest] = {}
    for task in tasks:
        rendered = prompt.render_prompt(task_prompt_sample(task), cfg)
        requests_by_task[task.id] = ChatRequest(
            model_id=request_params["model_id"],
            messages=({"role": "user", "content": rendered},),
            temperature=request_params["temperature"],
            max_output=request_params["max_output"],
        )
    results = gateway.run_batch(list(requests_by_task.values()), backend)
    completions: dict[str, Completion] = {}
    last_error = None
    for task_id, req in requests_by_task.items():
        result = results[req.request_tag]
        if result.ok:
            completions[task_id] = prompt.parse_completion(result.content, cfg)
        else:
            last_error = result.error
            log.warning("task %s: backend error: %s", task_id, result.error)
    if tasks and not completions:
        raise GatewayError(f"all {len(tasks)} requests failed; last error: {last_error}")
    return completions


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    cfg = _prompt_config(args, config)
    tasks = load_tasks(args.tasks)
    if args.completions:
        completions: dict[str, Completion] = {}
        with open(args.completions, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "id" not in record or "text" not in record:
                    raise InputDataError(
                        f"completions line {line_no}: records need `id` and `text` keys"
                    )
                completions[record["id"]] = prompt.parse_completion(record["text"], cfg)
    else:
        backend, request_params = _load_backend(args.backend)
        completions = completions_from_backend(tasks, cfg, backend, request_params)

    report = run_suite(tasks, completions)
    print(report.format_table())
    if args.report:
        with _open_out(args.report) as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def cmd_synth_nf(args) -> int:
    records, failures = _read_native(args.input)
    rejects = _RejectsWriter(args.rejects)
    for line_no, reason in failures:
        rejects.add(line_no, "ingest", reason)
    with _open_out(args.out) as fh:
        for line_no, sample in records:
            try:
                derived = synthesis.derive_non_function_call(sample)
            except synthesis.SynthesisError as exc:
                rejects.add(line_no, "derive_nf", str(exc))
                continue
            fh.write(json.dumps(datastore.sample_to_record(derived), ensure_ascii=False) + "\n")
    rejects.flush()
    return 0


def _complete_with_retries(req: ChatRequest, backend: BackendConfig, parse, max_retries: int):
    """Query, parse, and re-query on parse failures up to max_retries times.

    Deterministic backends (mock, replay) return the same body every time, so
    retries only help against live sampling endpoints; they are cheap either
    way.
    """
    last_exc: Exception | None = None
    for _ in range(1 + max_retries):
        content = gateway.complete(req, backend)
        try:
            return parse(content)
        except synthesis.SynthesisError as exc:
            last_exc = exc
    raise last_exc


def cmd_synth_reason(args) -> int:
    backend, request_params = _load_backend(args.backend_config)
    records, failures = _read_native(args.input)
    rejects = _RejectsWriter(args.rejects)
    for line_no, reason in failures:
        rejects.add(line_no, "ingest", reason)

    def to_request(rendered: str) -> ChatRequest:
        return ChatRequest(
            model_id=request_params["model_id"],
            messages=({"role": "user", "content": rendered},),
            temperature=request_params["temperature"],
            max_output=request_params["max_output"],
        )

    with _open_out(args.out) as fh:
        for line_no, sample in records:
            try:
                request = synthesis.build_reason_request(sample)
            except synthesis.SynthesisError as exc:
                rejects.add(line_no, "precondition", str(exc))
                continue
            try:
                reason_text = _complete_with_retries(
                    to_request(request.rendered_prompt),
                    backend,
                    synthesis.parse_reason_response,
                    args.max_retries,
                )
                augmented = synthesis.attach_reason(sample, reason_text)
            except GatewayError as exc:
                rejects.add(line_no, "gateway", str(exc))
                continue
            except synthesis.SynthesisError as exc:
                rejects.add(line_no, "parse_reason", str(exc))
                continue
            fh.write(json.dumps(datastore.sample_to_record(augmented), ensure_ascii=False) + "\n")
    rejects.flush()
    return 0


def cmd_synth_translate(args) -> int:
    backend, request_params = _load_backend(args.backend_config)
    records, failures = _read_native(args.input)
    rejects = _RejectsWriter(args.rejects)
    for line_no, reason in failures:
        rejects.add(line_no, "ingest", reason)

    with _open_out(args.out) as fh:
        for line_no, sample in records:
            request = synthesis.build_translation_request(sample, args.target_lang)
            chat_req = ChatRequest(
                model_id=request_params["model_id"],
                messages=({"role": "user", "content": request.rendered_prompt},),
                temperature=request_params["temperature"],
                max_output=request_params["max_output"],
            )
            try:
                translated = _complete_with_retries(
                    chat_req,
                    backend,
                    lambda content: synthesis.parse_and_validate_translation(
                        sample, content, args.target_lang
                    ),
                    args.max_retries,
                )
            except GatewayError as exc:
                rejects.add(line_no, "gateway", str(exc))
                continue
            except synthesis.SynthesisError as exc:
                rejects.add(line_no, "validate_translation", str(exc))
                continue
            fh.write(json.dumps(datastore.sample_to_record(translated), ensure_ascii=False) + "\n")
    rejects.flush()
    return 0


def cmd_mix(args) -> int:
    manifest = datastore.load_manifest(args.manifest)
    samples = datastore.mix(manifest, base_dir=Path(args.manifest).parent)
    with _open_out(args.out) as fh:
        for sample in samples:
            fh.write(json.dumps(datastore.sample_to_record(sample), ensure_ascii=False) + "\n")
    print(f"wrote {len(samples)} samples to {args.out}")
    return 0


def cmd_stats(args) -> int:
    records, failures = _read_native(args.input)
    for line_no, reason in failures:
        print(f"line {line_no}: {reason}", file=sys.stderr)
    report = datastore.stats(sample for _, sample in records)
    print(json.dumps(report, indent=2, ensure_ascii=False))
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcdata",
        description="Data engineering and evaluation toolkit for function-calling LLMs.",
    )
    parser.add_argument("--config", help="JSON config file (tokens, template flags)")
    parser.add_argument("--log-level", default="WARNING", help="logging level name")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render samples into training text records")
    p.add_argument("input", help="native-format JSONL of samples")
    p.add_argument("--placement", choices=[pl.value for pl in Placement], default=None)
    p.add_argument("--decision-token", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--reasoning", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score completions against a task file")
    p.add_argument("--tasks", required=True, help="JSONL of benchmark tasks")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--completions", help="JSONL of {id, text} raw completions")
    source.add_argument("--backend", help="backend config JSON for live querying")
    p.add_argument("--report", help="where to write the report JSON")
    p.add_argument("--placement", choices=[pl.value for pl in Placement], default=None)
    p.add_argument("--decision-token", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--reasoning", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth-nf", help="derive non-function-call samples")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.set_defaults(func=cmd_synth_nf)

    p = sub.add_parser("synth-reason", help="attach LLM-generated reasoning text")
    p.add_argument("input")
    p.add_argument("--backend-config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--max-retries", type=int, default=2)
    p.set_defaults(func=cmd_synth_reason)

    p = sub.add_parser("synth-translate", help="translate samples via an LLM")
    p.add_argument("input")
    p.add_argument("--target-lang", required=True)
    p.add_argument("--backend-config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--max-retries", type=int, default=2)
    p.set_defaults(func=cmd_synth_translate)

    p = sub.add_parser("mix", help="sample and shuffle a dataset blend")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("stats", help="dataset statistics report")
    p.add_argument("input")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        logging.basicConfig(level=args.log_level.upper())
        return args.func(args)
    except GatewayError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 4
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    # the module error types (DatastoreError, TaskError, SchemaError,
    # CallSyntaxError, SynthesisError, InputDataError) are all ValueErrors
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
