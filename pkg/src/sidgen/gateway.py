"""HTTP chat-completion client and persisted generation jobs.

Wire shape is the OpenAI-compatible one: request {model, messages,
temperature, max_tokens}, content at choices[0].message.content. Secrets come
from environment variables named in the profile and never reach any persisted
artifact. Profiles with a ``mock:`` endpoint short-circuit to the
deterministic offline provider.
"""

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import AuthError, ProtocolError, TransportError
from .mock_provider import mock_response
from .promptgen import prompt_hash

RETRYABLE_STATUSES = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class ProviderProfile:
    name: str
    endpoint: str
    model_id: str
    auth_env_var: str = None
    temperature: float = 1.0
    max_tokens: int = 1024
    timeout: float = 30.0
    max_attempts: int = 4
    base_backoff: float = 0.5

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def is_mock(self):
        return self.endpoint.startswith("mock:")

    def to_manifest(self):
        # auth_env_var is the *name* of the variable; the secret itself is
        # never serialized.
        return {
            "name": self.name,
            "endpoint": self.endpoint,
            "model_id": self.model_id,
            "auth_env_var": self.auth_env_var,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


MOCK_PROFILE = ProviderProfile(
    name="mock", endpoint="mock:", model_id="mock-chat", temperature=1.0
)


@dataclass
class RawCompletion:
    job_id: str
    request_index: int
    prompt_hash: str
    response_text: str
    http_status: int
    started_at: float
    finished_at: float
    provider: str = None
    attempts: int = 1
    token_usage: dict = None

    def to_dict(self):
        return {
            "job_id": self.job_id,
            "request_index": self.request_index,
            "prompt_hash": self.prompt_hash,
            "response_text": self.response_text,
            "http_status": self.http_status,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "provider": self.provider,
            "attempts": self.attempts,
            "token_usage": self.token_usage,
        }

    @classmethod
    def from_dict(cls, row):
        return cls(**row)


def _extract_content(payload):
    try:
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed provider envelope: {exc}") from None


def complete(
    profile,
    prompt,
    job_id=None,
    request_index=None,
    client=None,
    sleep=time.sleep,
):
    """One chat completion with retry on transient failures.

    Timeouts, 429 and 5xx retry with exponential backoff (base_backoff *
    2^attempt); 401/403 are fatal immediately.
    """
    started = time.time()
    phash = prompt_hash(prompt)

    if profile.is_mock:
        text = mock_response(prompt, request_index or 0)
        return RawCompletion(
            job_id=job_id,
            request_index=request_index,
            prompt_hash=phash,
            response_text=text,
            http_status=200,
            started_at=started,
            finished_at=time.time(),
            provider=profile.name,
            attempts=1,
        )

    headers = {"Content-Type": "application/json"}
    if profile.auth_env_var:
        secret = os.environ.get(profile.auth_env_var, "")
        if not secret:
            raise AuthError(
                f"environment variable {profile.auth_env_var} is not set"
            )
        headers["Authorization"] = f"Bearer {secret}"
    body = {
        "model": profile.model_id,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": profile.temperature,
        "max_tokens": profile.max_tokens,
    }

    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=profile.timeout)
    last_status = None
    try:
        for attempt in range(1, profile.max_attempts + 1):
            try:
                resp = client.post(profile.endpoint, json=body, headers=headers)
            except (httpx.TimeoutException, httpx.TransportError):
                last_status = None
                if attempt < profile.max_attempts:
                    sleep(profile.base_backoff * 2 ** (attempt - 1))
                continue
            last_status = resp.status_code
            if resp.status_code in (401, 403):
                raise AuthError(
                    f"provider {profile.name} rejected credentials "
                    f"(HTTP {resp.status_code})"
                )
            if resp.status_code in RETRYABLE_STATUSES:
                if attempt < profile.max_attempts:
                    sleep(profile.base_backoff * 2 ** (attempt - 1))
                continue
            if resp.status_code >= 400:
                raise TransportError(
                    f"provider {profile.name} returned HTTP {resp.status_code}",
                    last_status=resp.status_code,
                )
            try:
                payload = resp.json()
            except (json.JSONDecodeError, ValueError):
                raise ProtocolError("provider response is not JSON") from None
            content = _extract_content(payload)
            return RawCompletion(
                job_id=job_id,
                request_index=request_index,
                prompt_hash=phash,
                response_text=content,
                http_status=resp.status_code,
                started_at=started,
                finished_at=time.time(),
                provider=profile.name,
                attempts=attempt,
                token_usage=payload.get("usage"),
            )
        raise TransportError(
            f"retries exhausted after {profile.max_attempts} attempts "
            f"(last status {last_status})",
            last_status=last_status,
        )
    finally:
        if own_client:
            client.close()


@dataclass(frozen=True)
class GenerationJob:
    job_id: str
    prompt: str
    provider: str
    request_count: int
    output_dir: str
    seed: int = 0

    @property
    def prompt_hash(self):
        return prompt_hash(self.prompt)


def _completions_path(job):
    return Path(job.output_dir) / "completions.jsonl"


def read_completions(job_or_dir):
    path = (
        _completions_path(job_or_dir)
        if isinstance(job_or_dir, GenerationJob)
        else Path(job_or_dir) / "completions.jsonl"
    )
    completions = []
    if path.exists():
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    completions.append(RawCompletion.from_dict(json.loads(line)))
    return completions


def run_job(job, profile, concurrency=4, client=None, sleep=time.sleep):
    """Run a persisted generation job; resumable and append-only.

    The job manifest is written before the first request. Indices already
    persisted are skipped on re-run. At most ``concurrency`` requests are in
    flight; a fatal provider error aborts the job but persisted completions
    survive.
    """
    out = Path(job.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "job.json"
    manifest = {
        "job_id": job.job_id,
        "prompt_hash": job.prompt_hash,
        "provider": profile.to_manifest(),
        "request_count": job.request_count,
        "seed": job.seed,
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    (out / "prompt.txt").write_text(job.prompt, encoding="utf-8")

    existing = read_completions(job)
    done = {c.request_index for c in existing}
    todo = [i for i in range(job.request_count) if i not in done]

    write_lock = threading.Lock()
    abort = threading.Event()
    fatal = []

    def one(index):
        if abort.is_set():
            return None
        try:
            completion = complete(
                profile,
                job.prompt,
                job_id=job.job_id,
                request_index=index,
                client=client,
                sleep=sleep,
            )
        except (AuthError, TransportError, ProtocolError) as exc:
            abort.set()
            fatal.append(exc)
            return None
        with write_lock:
            with _completions_path(job).open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(completion.to_dict(), ensure_ascii=False) + "\n")
        return completion

    results = list(existing)
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        for got in pool.map(one, todo):
            if got is not None:
                results.append(got)
    if fatal:
        raise fatal[0]
    results.sort(key=lambda c: c.request_index)
    return results
