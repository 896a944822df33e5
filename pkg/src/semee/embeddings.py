"""Embedding client for the similarity baseline.

Same provider-agnostic JSON shape as most embedding endpoints: a model name
plus a list of input texts in, one vector per text out.  Vectors are cached
on disk by text hash so re-scoring never re-bills.  Any transport problem
surfaces as :class:`~semee.errors.EmbeddingUnavailable`; the caller is
expected to mark the similarity method absent rather than zero it.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import requests

from .errors import AuthError, EmbeddingUnavailable


@dataclass
class EmbeddingConfig:
    endpoint: str
    model: str
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 60.0

    def api_key(self) -> str | None:
        if not self.api_key_env:
            return None
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return key


class EmbeddingClient:
    def __init__(self, cfg: EmbeddingConfig, cache_dir=None, transport=None):
        self.cfg = cfg
        self.cache_dir = str(cache_dir) if cache_dir else None
        if self.cache_dir:
            os.makedirs(self.cache_dir, exist_ok=True)
        self._transport = transport or self._http

    def _http(self, payload, headers):
        resp = requests.post(self.cfg.endpoint, json=payload, headers=headers,
                             timeout=self.cfg.timeout)
        return resp.status_code, resp.json()

    def _cache_path(self, text: str) -> str:
        digest = hashlib.sha256(f"{self.cfg.model}\x00{text}".encode("utf-8")).hexdigest()
        return os.path.join(self.cache_dir, f"{digest}.json")

    def _cached(self, text: str):
        if not self.cache_dir:
            return None
        try:
            with open(self._cache_path(text), encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError):
            return None

    def _store(self, text: str, vector):
        if not self.cache_dir:
            return
        path = self._cache_path(text)
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(vector, f)
        os.replace(tmp, path)

    def __call__(self, texts) -> list[list[float]]:
        texts = list(texts)
        vectors: dict[int, list[float]] = {}
        missing = []
        for i, text in enumerate(texts):
            hit = self._cached(text)
            if hit is None:
                missing.append(i)
            else:
                vectors[i] = hit
        if missing:
            try:
                key = self.cfg.api_key()
            except AuthError as e:
                raise EmbeddingUnavailable(str(e))
            headers = {"Content-Type": "application/json"}
            if key:
                headers["Authorization"] = f"Bearer {key}"
            payload = {"model": self.cfg.model, "input": [texts[i] for i in missing]}
            try:
                status, body = self._transport(payload, headers)
            except requests.RequestException as e:
                raise EmbeddingUnavailable(f"embedding endpoint unreachable: {e}")
            if status != 200:
                raise EmbeddingUnavailable(f"embedding endpoint returned HTTP {status}")
            try:
                fresh = [entry["embedding"] for entry in body["data"]]
            except (KeyError, TypeError) as e:
                raise EmbeddingUnavailable(f"bad embedding response shape: {e}")
            if len(fresh) != len(missing):
                raise EmbeddingUnavailable(
                    f"asked for {len(missing)} vectors, got {len(fresh)}")
            for i, vec in zip(missing, fresh):
                vectors[i] = [float(x) for x in vec]
                self._store(texts[i], vectors[i])
        return [vectors[i] for i in range(len(texts))]
