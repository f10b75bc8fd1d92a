"""Chat-completions HTTP client with retries, plus a fixture session for
network-free tests. The API key is read from the environment and never
written to logs or output files."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass

import requests

logger = logging.getLogger(__name__)

ENV_API_KEY = "LLM_API_KEY"
ENV_BASE_URL = "LLM_BASE_URL"

_RETRYABLE_STATUS = {429, 500, 502, 503, 504}

# module-level so tests can stub the sleep
_sleep = time.sleep


class LLMError(RuntimeError):
    pass


class LLMAuthError(LLMError):
    pass


class LLMTransportError(LLMError):
    pass


class LLMFormatError(LLMError):
    pass


@dataclass
class LLMClientConfig:
    base_url: str = ""
    model: str = "default"
    api_key: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if not self.base_url:
            self.base_url = os.environ.get(ENV_BASE_URL, "")

    def resolved_key(self) -> str | None:
        return self.api_key or os.environ.get(ENV_API_KEY)


def request_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class LLMClient:
    """One request per attempt with exponential backoff on transient failures."""

    def __init__(self, config: LLMClientConfig, session=None):
        self.config = config
        self.session = session if session is not None else requests.Session()

    def chat(self, system_prompt: str, user_text: str) -> str:
        cfg = self.config
        if not cfg.base_url:
            raise LLMError(f"no base url configured (set {ENV_BASE_URL})")
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_text},
            ],
        }
        headers = {}
        key = cfg.resolved_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"

        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                _sleep(cfg.backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self.session.post(url, json=payload, timeout=cfg.timeout,
                                         headers=headers)
            except requests.RequestException as exc:
                last_error = LLMTransportError(f"transport failure: {type(exc).__name__}")
                logger.warning("chat attempt %d/%d failed: %s", attempt + 1,
                               cfg.max_retries + 1, type(exc).__name__)
                continue
            status = resp.status_code
            if status in (401, 403):
                raise LLMAuthError(f"authentication rejected (status {status})")
            if status in _RETRYABLE_STATUS:
                last_error = LLMTransportError(f"server returned status {status}")
                logger.warning("chat attempt %d/%d got status %d", attempt + 1,
                               cfg.max_retries + 1, status)
                continue
            if status != 200:
                raise LLMTransportError(f"unexpected status {status}")
            return _parse_content(resp)
        raise last_error if last_error is not None else LLMTransportError("no attempts made")


def _parse_content(resp) -> str:
    try:
        body = resp.json()
    except ValueError as exc:
        raise LLMFormatError("response body is not json") from exc
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise LLMFormatError("response missing choices[0].message.content") from exc
    if not isinstance(content, str):
        raise LLMFormatError("message content is not a string")
    return content


class _CannedResponse:
    def __init__(self, status_code: int, body: dict):
        self.status_code = status_code
        self._body = body

    def json(self) -> dict:
        return self._body


class FixtureSession:
    """Drop-in session that replays stored responses keyed by request hash."""

    def __init__(self, records: dict[str, str] | None = None):
        self.records = dict(records or {})

    @classmethod
    def load(cls, path) -> "FixtureSession":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.records, fh, sort_keys=True, indent=1)

    def record(self, payload: dict, content: str) -> None:
        self.records[request_hash(payload)] = content

    def post(self, url, json=None, timeout=None, headers=None) -> _CannedResponse:
        key = request_hash(json or {})
        if key not in self.records:
            raise requests.ConnectionError(f"no fixture for request {key[:12]}")
        return _CannedResponse(200, {"choices": [{"message": {"content": self.records[key]}}]})
