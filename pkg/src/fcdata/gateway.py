"""Pluggable LLM backend: live chat-completions HTTP, offline mock, replay cache.

Requests are content-addressed: the request tag is a stable hash of the full
payload, which keys both the mock response table and the on-disk replay cache
so interrupted pipeline runs resume without re-querying. The API key is read
from a named environment variable and never appears in errors, logs, or cache
files.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import requests

RETRYABLE_STATUS = (429, 500, 502, 503, 504)

BACKEND_KINDS = ("http", "mock", "replay")


class GatewayError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    messages: tuple[dict, ...]
    temperature: float = 0.0
    max_output: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(dict(m) for m in self.messages))
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output <= 0:
            raise ValueError("max_output must be positive")

    @property
    def request_tag(self) -> str:
        payload = json.dumps(
            {
                "model_id": self.model_id,
                "messages": list(self.messages),
                "temperature": self.temperature,
                "max_output": self.max_output,
            },
            sort_keys=True,
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff_ms: int = 100


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"
    endpoint_url: str | None = None
    auth_env_var: str | None = None
    max_parallel: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    cache_dir: str | None = None
    timeout_s: float = 60.0
    # Offline responses: a table keyed by request_tag, or a scripted policy.
    mock_responses: Mapping[str, str] | None = None
    mock_policy: Callable[[ChatRequest], str] | None = None

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint_url:
            raise ValueError("http backend requires endpoint_url")
        if self.kind == "replay" and not self.cache_dir:
            raise ValueError("replay backend requires cache_dir")
        if self.max_parallel <= 0:
            raise ValueError("max_parallel must be positive")


@dataclass(frozen=True)
class BatchResult:
    content: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _post_json(url: str, headers: dict, payload: dict, timeout: float) -> tuple[int, str]:
    resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    return resp.status_code, resp.text


def _http_complete(req: ChatRequest, cfg: BackendConfig) -> str:
    if not cfg.endpoint_url:
        raise GatewayError("no endpoint_url configured for live requests")
    headers = {"Content-Type": "application/json"}
    if cfg.auth_env_var:
        key = os.environ.get(cfg.auth_env_var)
        if not key:
            raise GatewayError(f"environment variable {cfg.auth_env_var} is not set")
        headers["Authorization"] = f"Bearer {key}"
    payload = {
        "model": req.model_id,
        "messages": list(req.messages),
        "temperature": req.temperature,
        "max_tokens": req.max_output,
    }
    last_error = "no attempt made"
    for attempt in range(cfg.retry.max_attempts):
        if attempt:
            time.sleep(cfg.retry.base_backoff_ms * (2 ** (attempt - 1)) / 1000.0)
        try:
            status, body = _post_json(cfg.endpoint_url, headers, payload, cfg.timeout_s)
        except requests.RequestException as exc:
            last_error = f"transport error: {type(exc).__name__}: {exc}"
            continue
        if 200 <= status < 300:
            try:
                parsed = json.loads(body)
                content = parsed["choices"][0]["message"]["content"]
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise GatewayError(
                    f"malformed chat-completions response ({exc}): {body[:200]}"
                ) from exc
            if not isinstance(content, str):
                raise GatewayError("chat-completions content is not a string")
            return content
        excerpt = body[:200]
        if status in RETRYABLE_STATUS:
            last_error = f"HTTP {status}: {excerpt}"
            continue
        raise GatewayError(f"HTTP {status}: {excerpt}")
    raise GatewayError(f"request failed after {cfg.retry.max_attempts} attempts; last: {last_error}")


def _mock_complete(req: ChatRequest, cfg: BackendConfig) -> str:
    tag = req.request_tag
    if cfg.mock_responses is not None and tag in cfg.mock_responses:
        return cfg.mock_responses[tag]
    if cfg.mock_policy is not None:
        return cfg.mock_policy(req)
    raise GatewayError(f"mock backend has no response for request_tag {tag}")


def _cache_path(cache_dir: str, tag: str) -> Path:
    return Path(cache_dir) / f"{tag}.json"


def _cache_read(cache_dir: str, tag: str) -> str | None:
    path = _cache_path(cache_dir, tag)
    if not path.exists():
        return None
    record = json.loads(path.read_text(encoding="utf-8"))
    return record["content"]


def _cache_write(cache_dir: str, tag: str, content: str) -> None:
    path = _cache_path(cache_dir, tag)
    path.parent.mkdir(parents=True, exist_ok=True)
    record = {"request_tag": tag, "content": content}
    path.write_text(json.dumps(record, ensure_ascii=False), encoding="utf-8")


def complete(req: ChatRequest, cfg: BackendConfig) -> str:
    """Return the completion text for one request via the configured backend."""
    if cfg.kind == "mock":
        return _mock_complete(req, cfg)
    if cfg.kind == "replay":
        cached = _cache_read(cfg.cache_dir, req.request_tag)
        if cached is not None:
            return cached
        content = _http_complete(req, cfg)
        _cache_write(cfg.cache_dir, req.request_tag, content)
        return content
    return _http_complete(req, cfg)


def run_batch(reqs: list[ChatRequest], cfg: BackendConfig) -> dict[str, BatchResult]:
    """Complete a batch with bounded parallelism; per-item errors are captured.

    The result map always covers every request tag; one failure never blocks
    the rest of the batch.
    """
    tags = [r.request_tag for r in reqs]
    if len(set(tags)) != len(tags):
        raise ValueError("request tags must be unique within a batch")
    results: dict[str, BatchResult] = {}
    with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
        futures = {pool.submit(complete, r, cfg): r.request_tag for r in reqs}
        for fut in as_completed(futures):
            tag = futures[fut]
            try:
                results[tag] = BatchResult(content=fut.result())
            except Exception as exc:  # noqa: BLE001 - per-item isolation
                results[tag] = BatchResult(error=f"{type(exc).__name__}: {exc}")
    return results
