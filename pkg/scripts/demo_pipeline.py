#!/usr/bin/env python3
"""End-to-end desk-scale demo, fully offline via the mock backend.

Builds a tiny corpus, derives non-function-call data, attaches mock reasoning,
translates with a mock translator, mixes a blend, renders training text, and
scores a perfect model on a small benchmark. Everything lands under an output
directory (default ./demo_out).
"""

import argparse
import json
import random
import sys
from pathlib import Path

from fcdata.core import (
    Completion,
    Decision,
    FunctionCall,
    FunctionSchema,
    Message,
    ParamSpec,
    Sample,
)
from fcdata.datastore import (
    DatasetManifest,
    SourceSpec,
    export_samples,
    mix,
    stats,
)
from fcdata.evaluator import AcceptableArg, AcceptableCall, EvalTask, run_suite
from fcdata.gateway import BackendConfig, ChatRequest, run_batch
from fcdata.prompt import PromptConfig, parse_completion, render_completion, render_training_example
from fcdata.synthesis import (
    build_reason_request,
    build_translation_request,
    derive_non_function_call,
    parse_and_validate_translation,
    parse_reason_response,
    sample_to_translation_payload,
)


def make_corpus(n: int) -> list[Sample]:
    samples = []
    for i in range(n):
        called = FunctionSchema(
            name=f"catalog.search_{i}",
            description="Search the product catalog.",
            parameters={"query": ParamSpec("string", "search terms", True)},
        )
        spare = FunctionSchema(
            name=f"cart.add_{i}",
            description="Add an item to the cart.",
            parameters={"sku": ParamSpec("string", "item id", True)},
        )
        samples.append(
            Sample(
                functions=(called, spare),
                conversation=(Message("user", f"Find me product number {i}"),),
                target=Completion(
                    decision=Decision.USE_TOOL,
                    calls=(FunctionCall(called.name, {"query": f"product {i}"}),),
                ),
            )
        )
    return samples


def mock_reason_backend() -> BackendConfig:
    def policy(req: ChatRequest) -> str:
        return json.dumps({"reason": "The user asked for a product, so the catalog search applies."})

    return BackendConfig(kind="mock", mock_policy=policy)


def mock_translate_backend(samples_by_prompt: dict[str, Sample], lang: str) -> BackendConfig:
    def policy(req: ChatRequest) -> str:
        sample = samples_by_prompt[req.messages[0]["content"]]
        payload = sample_to_translation_payload(sample)
        for turn in payload["conversations"]:
            if "content" in turn:
                turn["content"] = f"[{lang}] {turn['content']}"
        return json.dumps(payload, ensure_ascii=False)

    return BackendConfig(kind="mock", mock_policy=policy)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("demo_out"))
    parser.add_argument("--corpus-size", type=int, default=30)
    args = parser.parse_args()
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    corpus = make_corpus(args.corpus_size)
    export_samples(corpus, out / "fc.jsonl")

    # 1. non-function-call derivation
    nf = [derive_non_function_call(s) for s in corpus[:10]]
    export_samples(nf, out / "nf.jsonl")
    print(f"derived {len(nf)} non-function-call samples")

    # 2. reasoning augmentation through the mock gateway
    backend = mock_reason_backend()
    requests = {s.conversation[-1].content: build_reason_request(s) for s in corpus[:10]}
    chat_reqs = [
        ChatRequest(model_id="demo", messages=({"role": "user", "content": r.rendered_prompt},))
        for r in requests.values()
    ]
    results = run_batch(chat_reqs, backend)
    reasons = [parse_reason_response(r.content) for r in results.values() if r.ok]
    print(f"generated {len(reasons)} reasoning descriptions")

    # 3. mock translation with structural validation
    lang = "Traditional Chinese"
    trans_samples = corpus[:5]
    by_prompt = {
        build_translation_request(s, lang).rendered_prompt: s for s in trans_samples
    }
    backend = mock_translate_backend(by_prompt, lang)
    translated = []
    for s in trans_samples:
        req = build_translation_request(s, lang)
        chat_req = ChatRequest(
            model_id="demo", messages=({"role": "user", "content": req.rendered_prompt},)
        )
        body = run_batch([chat_req], backend)[chat_req.request_tag].content
        translated.append(parse_and_validate_translation(s, body, "zh-tw"))
    export_samples(translated, out / "tc.jsonl")
    print(f"translated {len(translated)} samples")

    # 4. blend and report
    if_samples = [
        Sample(
            functions=(),
            conversation=(Message("user", f"Explain concept {i}"),),
            target=Completion(decision=Decision.ANSWER, text=f"Concept {i} explained."),
        )
        for i in range(20)
    ]
    export_samples(if_samples, out / "if.jsonl")
    manifest = DatasetManifest(
        sources=(
            SourceSpec(str(out / "if.jsonl"), "native", "instruction_following"),
            SourceSpec(str(out / "fc.jsonl"), "native", "function_calling"),
            SourceSpec(str(out / "nf.jsonl"), "native", "non_function_call"),
            SourceSpec(str(out / "tc.jsonl"), "native", "translated"),
        ),
        counts={
            "instruction_following": 15,
            "function_calling": 15,
            "non_function_call": 5,
            "translated": 3,
        },
        seed=20240601,
    )
    blend = mix(manifest)
    export_samples(blend, out / "blend.jsonl")
    print("blend stats:", json.dumps(stats(blend)))

    # 5. render training text; function-less samples take the no-functions template
    import dataclasses

    from fcdata.prompt import Placement

    cfg = PromptConfig(decision_token=True)
    no_fn_cfg = dataclasses.replace(cfg, placement=Placement.NO_FUNCTIONS)
    with (out / "train.jsonl").open("w", encoding="utf-8") as fh:
        for sample in blend:
            effective = cfg if sample.functions else no_fn_cfg
            fh.write(json.dumps({"text": render_training_example(sample, effective)}) + "\n")
    print(f"rendered {len(blend)} training records")

    # 6. score a perfect model on a derived benchmark
    rng = random.Random(0)
    tasks, completions = [], {}
    for i, sample in enumerate(rng.sample(corpus, 10)):
        call = sample.target.calls[0]
        task = EvalTask(
            id=f"demo-{i}",
            category="simple",
            functions=(sample.functions[0],),
            question=sample.conversation[-1].content,
            targets=(
                AcceptableCall(
                    name=call.name,
                    arguments={
                        k: AcceptableArg(values=(v,)) for k, v in call.arguments.items()
                    },
                ),
            ),
        )
        tasks.append(task)
        completions[task.id] = parse_completion(render_completion(sample.target, cfg), cfg)
    report = run_suite(tasks, completions)
    print(report.format_table())
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
