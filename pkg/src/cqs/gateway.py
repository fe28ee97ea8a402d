"""Chat-completion gateway: one interface over a remote HTTP endpoint, a
scripted deterministic mock, and a heuristic reviewer that lets the whole
pipeline run offline.

Remote wire format is a minimal chat-completions JSON shape:
request  {"messages": [{"role": ..., "content": ...}, ...],
          "temperature": t, "max_tokens": n, "seed": s?}
response {"choices": [{"message": {"content": "..."}}]}
The bearer token is read from the CQS_LLM_TOKEN environment variable.
"""

from __future__ import annotations

import hashlib
import os
import random
import threading
import time
from dataclasses import dataclass

import requests

from .errors import (
    BadStatusError,
    GatewayError,
    GatewayTimeout,
    RetriesExhaustedError,
    TransportError,
)
from .heuristics import heuristic_reply

TOKEN_ENV_VAR = "CQS_LLM_TOKEN"
BACKOFF_BASE_SECONDS = 0.5


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    temperature: float = 0.0
    max_tokens: int = 4096
    sample_seed: int | None = None

    def __post_init__(self):
        if not self.system or not self.user:
            raise ValueError("system and user prompts must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range [0, 2]: {self.temperature}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be > 0")


@dataclass(frozen=True)
class BackendConfig:
    backend_id: str
    kind: str  # remote | scripted | heuristic
    endpoint: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    max_in_flight: int = 4

    def __post_init__(self):
        if self.kind not in ("remote", "scripted", "heuristic"):
            raise ValueError(f"unknown backend kind: {self.kind}")
        if self.kind == "remote" and not self.endpoint:
            raise ValueError("remote backend requires an endpoint")
        if self.max_retries < 0 or self.max_in_flight < 1:
            raise ValueError("max_retries must be >= 0 and max_in_flight >= 1")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    backend_id: str


def request_key(req: ChatRequest) -> str:
    """Stable key for scripting canned responses."""
    h = hashlib.sha256()
    for part in (req.system, req.user, repr(req.temperature), repr(req.sample_seed)):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()


def sample_seed(diff_id: str, index: int) -> int:
    """Deterministic per-sample seed derived from (diff_id, sample index)."""
    digest = hashlib.sha256(f"{diff_id}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class ScriptedBackend:
    """Deterministic mock: responses keyed by request_key."""

    def __init__(self, backend_id: str = "scripted", responses: dict[str, str] | None = None):
        self.backend_id = backend_id
        self.responses = dict(responses or {})

    def add(self, req: ChatRequest, text: str) -> str:
        key = request_key(req)
        self.responses[key] = text
        return key

    def complete(self, req: ChatRequest) -> CompletionResult:
        key = request_key(req)
        if key not in self.responses:
            raise TransportError("no scripted response for request", self.backend_id)
        return CompletionResult(self.responses[key], self.backend_id)


class HeuristicBackend:
    """Deterministic rule-based responder for offline end-to-end runs."""

    def __init__(self, backend_id: str = "heuristic"):
        self.backend_id = backend_id

    def complete(self, req: ChatRequest) -> CompletionResult:
        try:
            text = heuristic_reply(req.user)
        except GatewayError:
            raise
        except Exception as exc:
            raise TransportError(f"heuristic reply failed: {exc}", self.backend_id)
        if text is None:
            raise TransportError("unrecognized prompt shape", self.backend_id)
        return CompletionResult(text, self.backend_id)


class RemoteBackend:
    """HTTP backend with bounded concurrency and jittered exponential backoff.

    Transient failures (timeouts, transport errors, 5xx) are retried up to
    max_retries times; other non-success statuses fail immediately.
    """

    def __init__(
        self,
        cfg: BackendConfig,
        session: requests.Session | None = None,
        sleep_fn=time.sleep,
        rng: random.Random | None = None,
    ):
        if cfg.kind != "remote":
            raise ValueError("RemoteBackend requires a remote config")
        self.cfg = cfg
        self.backend_id = cfg.backend_id
        self.session = session or requests.Session()
        self._sleep = sleep_fn
        self._rng = rng or random.Random()
        self._slots = threading.BoundedSemaphore(cfg.max_in_flight)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(self, req: ChatRequest) -> CompletionResult:
        payload = {
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.sample_seed is not None:
            payload["seed"] = req.sample_seed
        last_error: GatewayError | None = None
        with self._slots:
            for attempt in range(self.cfg.max_retries + 1):
                if attempt:
                    self._sleep(self._rng.uniform(0, BACKOFF_BASE_SECONDS * 2 ** (attempt - 1)))
                try:
                    resp = self.session.post(
                        self.cfg.endpoint,
                        json=payload,
                        headers=self._headers(),
                        timeout=self.cfg.timeout,
                    )
                except requests.Timeout:
                    last_error = GatewayTimeout("request timed out", self.backend_id)
                    continue
                except requests.RequestException as exc:
                    last_error = TransportError(str(exc), self.backend_id)
                    continue
                if resp.status_code >= 500:
                    last_error = BadStatusError(
                        f"server error {resp.status_code}", self.backend_id, resp.status_code
                    )
                    continue
                if resp.status_code != 200:
                    raise BadStatusError(
                        f"unexpected status {resp.status_code}", self.backend_id, resp.status_code
                    )
                try:
                    text = resp.json()["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError, ValueError) as exc:
                    raise TransportError(f"malformed response body: {exc}", self.backend_id)
                return CompletionResult(text, self.backend_id)
        raise RetriesExhaustedError(
            f"gave up after {self.cfg.max_retries + 1} attempts: {last_error}", self.backend_id
        )


def make_backend(cfg: BackendConfig, **kwargs):
    if cfg.kind == "remote":
        return RemoteBackend(cfg, **kwargs)
    if cfg.kind == "scripted":
        return ScriptedBackend(cfg.backend_id, kwargs.get("responses"))
    return HeuristicBackend(cfg.backend_id)


def complete(req: ChatRequest, cfg: BackendConfig, **kwargs) -> CompletionResult:
    return make_backend(cfg, **kwargs).complete(req)
