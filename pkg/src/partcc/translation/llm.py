"""Chat-completion client and reply parsing."""
from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional

import requests

from ..errors import BackendError, ConfigError, EmptyOutput, ExtractionError
from .fragment import AssemblyFragment

log = logging.getLogger(__name__)

ENV_ENDPOINT = "PARTCC_LLM_ENDPOINT"
ENV_API_KEY = "PARTCC_LLM_API_KEY"
ENV_MODEL = "PARTCC_LLM_MODEL"

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.S)


def extract_assembly(raw: str) -> AssemblyFragment:
    """The last fenced block of a reply, with label sets scanned from it."""
    blocks = _FENCE.findall(raw or "")
    if not blocks:
        raise ExtractionError("no fenced code block in the reply")
    return AssemblyFragment.from_text(blocks[-1].rstrip("\n"), "model output")


class TokenBucket:
    """Shared request limiter: ``rate`` requests per second, bursts up to ``capacity``."""

    def __init__(self, rate: float = 2.0, capacity: int = 4,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.rate = rate
        self.capacity = capacity
        self.tokens = float(capacity)
        self.clock = clock
        self.sleep = sleep
        self.stamp = clock()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.stamp) * self.rate)
                self.stamp = now
                if self.tokens >= 1:
                    self.tokens -= 1
                    return
                wait = (1 - self.tokens) / self.rate
            self.sleep(wait)


@dataclass
class LLMConfig:
    endpoint: Optional[str] = None
    api_key: Optional[str] = None
    model: str = "default"
    timeout: float = 120.0
    attempts: int = 3
    backoff: float = 1.0
    temperature: float = 0.0

    @classmethod
    def from_env(cls, **overrides) -> "LLMConfig":
        cfg = cls(endpoint=os.environ.get(ENV_ENDPOINT), api_key=os.environ.get(ENV_API_KEY),
                  model=os.environ.get(ENV_MODEL, "default"))
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        return cfg


class ChatClient:
    """POSTs an OpenAI-style ``messages`` array and returns the reply text."""

    def __init__(self, config: LLMConfig, bucket: Optional[TokenBucket] = None,
                 session: Optional[requests.Session] = None,
                 sleep: Callable[[float], None] = time.sleep):
        if not config.endpoint:
            raise ConfigError(f"no LLM endpoint configured (set {ENV_ENDPOINT} or --endpoint)")
        self.config = config
        self.bucket = bucket
        self.session = session or requests.Session()
        self.sleep = sleep

    def complete(self, prompt: str, system: Optional[str] = None) -> str:
        cfg = self.config
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": prompt})
        body = {"model": cfg.model, "messages": messages, "temperature": cfg.temperature}
        headers = {"Content-Type": "application/json"}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"
        last: Exception | None = None
        for attempt in range(cfg.attempts):
            if attempt:
                self.sleep(cfg.backoff * 2 ** (attempt - 1))
            if self.bucket is not None:
                self.bucket.acquire()
            try:
                resp = self.session.post(cfg.endpoint, json=body, headers=headers,
                                         timeout=cfg.timeout)
            except requests.RequestException as exc:
                last = exc
                log.warning("LLM request failed (attempt %d): %s", attempt + 1, exc)
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = BackendError(f"HTTP {resp.status_code}")
                log.warning("LLM endpoint returned %s (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise BackendError(f"HTTP {resp.status_code}: {resp.text[:500]}")
            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise BackendError(f"malformed reply: {exc}") from exc
            if not text or not text.strip():
                raise EmptyOutput("the model returned an empty reply")
            return text
        raise BackendError(f"LLM endpoint unreachable after {cfg.attempts} attempts: {last}")
