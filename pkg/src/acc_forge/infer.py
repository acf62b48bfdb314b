"""Minimal HTTP client for collecting model predictions.

The endpoint receives ``{"prompt": str, "audios": [base64 WAV, ...]}`` as a
JSON POST and answers ``{"text": str}``. Requests run on a bounded thread
pool; results come back in input order and failures become explicit error
rows.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import socket
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .errors import AccForgeError, EndpointUnreachable, MalformedResponse
from .manifest import InstructionSample

log = logging.getLogger(__name__)

_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


class InferenceClient:
    def __init__(self, endpoint: str, *, token: Optional[str] = None, timeout: float = 30.0,
                 retries: int = 2, backoff: float = 0.5, parallelism: int = 1):
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.endpoint = endpoint
        self.token = token
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.parallelism = parallelism

    def _post(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        req = urllib.request.Request(self.endpoint, data=json.dumps(payload).encode(), headers=headers, method="POST")
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            body = resp.read()
        try:
            data = json.loads(body)
        except ValueError:
            raise MalformedResponse(f"response is not JSON: {body[:80]!r}") from None
        if not isinstance(data, dict) or not isinstance(data.get("text"), str):
            raise MalformedResponse(f"response lacks a 'text' string: {body[:80]!r}")
        return data

    def complete(self, prompt: str, audios: Sequence[bytes]) -> tuple[str, int]:
        """Send one request; returns ``(text, retries_used)``."""
        payload = {"prompt": prompt, "audios": [base64.b64encode(a).decode("ascii") for a in audios]}
        last = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                return self._post(payload)["text"], attempt
            except urllib.error.HTTPError as exc:
                if exc.code not in _RETRYABLE_STATUS:
                    raise EndpointUnreachable(f"{self.endpoint} answered HTTP {exc.code}") from None
                last = f"HTTP {exc.code}"
            except (urllib.error.URLError, socket.timeout, ConnectionError, TimeoutError) as exc:
                last = str(getattr(exc, "reason", exc))
            log.info("request to %s failed (%s), attempt %d of %d", self.endpoint, last, attempt + 1, self.retries + 1)
        raise EndpointUnreachable(f"{self.endpoint} unreachable after {self.retries + 1} attempt(s): {last}")

    def run(self, samples: Sequence[InstructionSample], audio_root=".") -> list[dict]:
        """One row per sample, in order: ``{"id", "candidate", "retries"}`` or an error row."""
        root = Path(audio_root)

        def one(item):
            index, sample = item
            sample_id = sample.meta.get("id", str(index))
            try:
                audios = [(root / ref).read_bytes() for ref in sample.audio_refs]
                text, retries = self.complete(sample.prompt, audios)
                return {"id": sample_id, "candidate": text, "retries": retries}
            except (AccForgeError, OSError) as exc:
                record = exc.to_record() if isinstance(exc, AccForgeError) else {
                    "error": type(exc).__name__, "message": str(exc)}
                return {"id": sample_id, "candidate": None, "error": record}

        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            return list(pool.map(one, enumerate(samples)))


def token_from_env(var: Optional[str]) -> Optional[str]:
    return os.environ.get(var) if var else None
