"""Chat-completion client: bounded parallelism, retries, caching, cost meter.

The wire shape is the provider-agnostic chat JSON (model, messages,
temperature, max_tokens in; first choice text plus usage out).  Every request
is a single system+user pair with the rendered prompt as the user message.
A file-backed cache keyed by (model, trial, prompt hash) makes metric re-runs
free; cache hits do not touch the cost ledger.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .errors import AuthError, ExhaustedRetries, OversizePrompt

logger = logging.getLogger(__name__)

SYSTEM_MESSAGE = "You are a helpful assistant."
RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}
_BACKOFF_BASE = 0.5
_BACKOFF_CAP = 30.0

# test seam: patched to avoid real sleeps in the retry tests
_sleep = time.sleep


@dataclass
class AgentConfig:
    endpoint: str
    model: str
    api_key_env: str = "OPENAI_API_KEY"
    temperature: float = 0.0
    max_tokens: int = 4096
    timeout: float = 120.0
    max_retries: int = 3
    parallelism: int = 10
    price_input: float = 0.0   # USD per input token
    price_output: float = 0.0  # USD per output token

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.price_input < 0 or self.price_output < 0:
            raise ValueError("prices must be >= 0")

    def api_key(self) -> str | None:
        if not self.api_key_env:
            return None
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return key


class CostLedger:
    """Thread-safe, monotone accumulator of request cost."""

    def __init__(self, price_input: float = 0.0, price_output: float = 0.0):
        self._lock = threading.Lock()
        self.price_input = price_input
        self.price_output = price_output
        self.requests = 0
        self.input_tokens = 0
        self.output_tokens = 0
        self.wall_seconds = 0.0

    def add_attempt(self):
        with self._lock:
            self.requests += 1

    def add_usage(self, input_tokens: int, output_tokens: int, wall: float):
        with self._lock:
            self.input_tokens += input_tokens
            self.output_tokens += output_tokens
            self.wall_seconds += wall

    @property
    def dollars(self) -> float:
        return self.input_tokens * self.price_input + self.output_tokens * self.price_output

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "requests": self.requests,
                "input_tokens": self.input_tokens,
                "output_tokens": self.output_tokens,
                "dollars": self.dollars,
                "wall_seconds": round(self.wall_seconds, 3),
            }


class ResponseCache:
    """One file per (model, trial, prompt-hash); misses return None."""

    def __init__(self, directory):
        self.directory = str(directory)
        os.makedirs(self.directory, exist_ok=True)

    def _path(self, model: str, prompt: str, trial: int) -> str:
        digest = hashlib.sha256(f"{model}\x00{trial}\x00{prompt}".encode("utf-8")).hexdigest()
        return os.path.join(self.directory, f"{digest}.json")

    def get(self, model: str, prompt: str, trial: int):
        path = self._path(model, prompt, trial)
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return None

    def put(self, model: str, prompt: str, trial: int, entry: dict):
        path = self._path(model, prompt, trial)
        tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(entry, f, sort_keys=True)
        os.replace(tmp, path)


@dataclass(frozen=True)
class Completion:
    text: str
    input_tokens: int
    output_tokens: int
    cached: bool = False


class _HTTPStatus(Exception):
    def __init__(self, status, body):
        super().__init__(f"HTTP {status}")
        self.status = status
        self.body = body


def _default_transport(url, payload, headers, timeout):
    resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    try:
        body = resp.json()
    except ValueError:
        body = {"raw": resp.text}
    return resp.status_code, body


def _looks_oversize(body) -> bool:
    text = json.dumps(body).lower()
    return "context length" in text or "too long" in text or "maximum context" in text


def complete(prompt: str, cfg: AgentConfig, *, ledger: CostLedger | None = None,
             cache: ResponseCache | None = None, trial: int = 0,
             transport=None) -> Completion:
    """Send one prompt; retry transient failures with exponential backoff."""
    if cache is not None:
        hit = cache.get(cfg.model, prompt, trial)
        if hit is not None:
            return Completion(hit["text"], hit["input_tokens"], hit["output_tokens"], cached=True)

    key = cfg.api_key()
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    payload = {
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": SYSTEM_MESSAGE},
            {"role": "user", "content": prompt},
        ],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }
    send = transport or _default_transport

    last_cause = None
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            _sleep(min(_BACKOFF_BASE * 2 ** (attempt - 1), _BACKOFF_CAP))
        if ledger is not None:
            ledger.add_attempt()
        started = time.monotonic()
        try:
            status, body = send(cfg.endpoint, payload, headers, cfg.timeout)
        except requests.RequestException as e:
            last_cause = e
            logger.warning("request failed (attempt %d): %s", attempt + 1, e)
            continue
        wall = time.monotonic() - started
        if status in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {status})")
        if status == 413 or (status == 400 and _looks_oversize(body)):
            raise OversizePrompt(f"endpoint rejected prompt length (HTTP {status})")
        if status in RETRYABLE_STATUS:
            last_cause = _HTTPStatus(status, body)
            logger.warning("retryable HTTP %d (attempt %d)", status, attempt + 1)
            continue
        if status != 200:
            raise ExhaustedRetries(attempt + 1, _HTTPStatus(status, body))
        try:
            text = body["choices"][0]["message"]["content"]
            usage = body.get("usage", {})
            in_toks = int(usage.get("prompt_tokens", 0))
            out_toks = int(usage.get("completion_tokens", 0))
        except (KeyError, IndexError, TypeError) as e:
            raise ExhaustedRetries(attempt + 1, e)
        if ledger is not None:
            ledger.add_usage(in_toks, out_toks, wall)
        if cache is not None:
            cache.put(cfg.model, prompt, trial, {
                "text": text, "input_tokens": in_toks, "output_tokens": out_toks,
            })
        return Completion(text, in_toks, out_toks)
    raise ExhaustedRetries(cfg.max_retries + 1, last_cause)


@dataclass
class BatchItem:
    ok: bool
    completion: Completion | None = None
    error: Exception | None = None


def run_batch(prompts, cfg: AgentConfig, *, ledger: CostLedger | None = None,
              cache: ResponseCache | None = None, trial: int = 0,
              transport=None) -> list[BatchItem]:
    """Run prompts with at most ``cfg.parallelism`` requests in flight.

    Results come back in job order regardless of completion order; failures
    occupy their slot instead of aborting the batch.
    """
    prompts = list(prompts)
    if not prompts:
        return []

    def one(prompt):
        try:
            return BatchItem(True, complete(
                prompt, cfg, ledger=ledger, cache=cache, trial=trial, transport=transport))
        except Exception as e:
            return BatchItem(False, error=e)

    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(one, prompts))
