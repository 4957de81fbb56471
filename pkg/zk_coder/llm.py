"""
LLM backends.

A backend hands out one session per pipeline run; sessions turn an
:class:`LlmRequest` into an :class:`LlmResponse`. `HttpBackend` talks to an
OpenAI-compatible chat-completions endpoint, `ScriptedBackend` replays canned
responses from a YAML script and makes runs reproducible.

"""
import hashlib
import json
import time
from dataclasses import dataclass
from os import environ
from threading import Lock
from typing import Optional, Tuple

import requests
import yaml

from zk_coder.constants import DEFAULT_LLM_RETRIES
from zk_coder.decorators import logger
from zk_coder.errors import ConfigError, LlmTransportError


ROLE_SYSTEM = "system"
ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"

DEFAULT_API_KEY_ENV = "ZK_CODER_API_KEY"


@dataclass(frozen=True)
class LlmRequest:
    messages: Tuple[Tuple[str, str], ...]
    temperature: Optional[float] = None
    max_tokens: int = 4096

    def digest(self):
        """First 16 hex digits of the SHA-256 of the messages."""
        payload = json.dumps([list(message) for message in self.messages], ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def serialize(self):
        payload = {
            "messages": [{"role": role, "content": content} for role, content in self.messages],
            "max_tokens": self.max_tokens,
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        return payload


@dataclass(frozen=True)
class LlmResponse:
    content: str
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token usage must be non-negative")

    @property
    def total_tokens(self):
        return self.prompt_tokens + self.completion_tokens

    def serialize(self):
        return {
            "content": self.content,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


def whitespace_tokens(text):
    return len(text.split())


@logger
class HttpBackend:
    """
    OpenAI-compatible chat-completions client.

    Transport errors, rate limiting and server errors are retried with
    exponential backoff; after the last attempt :class:`LlmTransportError`
    is raised.

    """

    def __init__(
        self,
        endpoint,
        model,
        api_key_env=DEFAULT_API_KEY_ENV,
        retries=DEFAULT_LLM_RETRIES,
        backoff=1.,
        timeout=180.,
    ):
        if not endpoint or not model:
            raise ConfigError("'api_endpoint' and 'model' must be set for the http backend.")
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.retries = max(1, retries)
        self.backoff = backoff
        self.timeout = timeout

    def session(self, run_id=None):
        return self

    def headers(self):
        headers = {"Content-Type": "application/json"}
        api_key = environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = "Bearer {}".format(api_key)
        return headers

    def complete(self, request):
        payload = dict(request.serialize(), model=self.model)
        last_error = None
        for attempt in range(self.retries):
            try:
                response = requests.post(
                    "{}/chat/completions".format(self.endpoint),
                    headers=self.headers(),
                    json=payload,
                    timeout=self.timeout,
                )
                if response.status_code == 200:
                    return self.parse(response.json())
                last_error = "HTTP {}: {}".format(response.status_code, response.text[:200])
                if response.status_code < 500 and response.status_code != 429:
                    break
            except (requests.RequestException, ValueError) as error:
                last_error = str(error)
            self.logger.warning("complete() - attempt %d/%d failed: %s", attempt + 1, self.retries, last_error)
            if attempt + 1 < self.retries:
                time.sleep(self.backoff * 2 ** attempt)
        raise LlmTransportError("no response from {} after {} attempt(s): {}".format(
            self.endpoint,
            self.retries,
            last_error,
        ))

    def parse(self, body):
        try:
            content = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise LlmTransportError("malformed completion response: {}".format(str(body)[:200]))
        usage = body.get("usage") or {}
        return LlmResponse(
            content,
            int(usage.get("prompt_tokens") or 0),
            int(usage.get("completion_tokens") or 0),
        )


@dataclass(frozen=True)
class ScriptedResponse:
    content: str
    prompt_tokens: object = None
    completion_tokens: object = None

    def respond(self, request):
        prompt_tokens = self.prompt_tokens
        if prompt_tokens is None:
            prompt_tokens = sum(whitespace_tokens(content) for _, content in request.messages)
        completion_tokens = self.completion_tokens
        if completion_tokens is None:
            completion_tokens = whitespace_tokens(self.content)
        return LlmResponse(self.content, int(prompt_tokens), int(completion_tokens))


def _scripted(entry, path):
    if isinstance(entry, str):
        return ScriptedResponse(entry)
    if isinstance(entry, dict) and "content" in entry:
        usage = entry.get("usage") or {}
        return ScriptedResponse(str(entry["content"]), usage.get("prompt"), usage.get("completion"))
    raise ConfigError("{}: every scripted response must be a string or have a 'content' field".format(path))


@logger
class ScriptedBackend:
    """
    Replays canned responses.

    The script is a YAML document with an ordinal list `responses` and an
    optional mapping `by_hash` from request digests to responses; a digest
    match answers out of band without consuming an ordinal response. With
    `repeat_last: true` the final response answers every further request.

    """

    def __init__(self, responses, by_hash=None, repeat_last=False, path=None):
        self.responses = tuple(responses)
        self.by_hash = dict(by_hash or {})
        self.repeat_last = repeat_last
        self.path = path

    @classmethod
    def load(cls, path):
        try:
            with open(path) as stream:
                document = yaml.safe_load(stream) or {}
        except (OSError, yaml.YAMLError) as error:
            raise ConfigError("cannot read script {}: {}".format(path, error))
        if not isinstance(document, dict):
            raise ConfigError("{}: a script must be a mapping".format(path))
        backend = cls(
            [_scripted(entry, path) for entry in document.get("responses") or ()],
            {str(key): _scripted(entry, path) for key, entry in (document.get("by_hash") or {}).items()},
            bool(document.get("repeat_last", False)),
            path,
        )
        backend.logger.debug(
            "load() - %d ordinal and %d digest response(s) from %s",
            len(backend.responses),
            len(backend.by_hash),
            path,
        )
        return backend

    def session(self, run_id=None):
        return ScriptedSession(self)


class ScriptedSession:
    """Cursor of one run over a shared script."""

    def __init__(self, backend):
        self.backend = backend
        self.cursor = 0
        self.lock = Lock()

    def complete(self, request):
        override = self.backend.by_hash.get(request.digest())
        if override is not None:
            return override.respond(request)
        with self.lock:
            responses = self.backend.responses
            if self.cursor >= len(responses):
                if not (self.backend.repeat_last and responses):
                    raise LlmTransportError("script exhausted after {} response(s)".format(len(responses)))
                scripted = responses[-1]
            else:
                scripted = responses[self.cursor]
            self.cursor += 1
        return scripted.respond(request)


def make_backend(cfg):
    """Backend selected by a run configuration."""
    if cfg.backend == "scripted":
        if not cfg.script_path:
            raise ConfigError("'script_path' must be set for the scripted backend.")
        return ScriptedBackend.load(cfg.script_path)
    return HttpBackend(
        cfg.api_endpoint,
        cfg.model,
        api_key_env=cfg.api_key_env,
        retries=cfg.llm_retries,
        timeout=cfg.llm_timeout,
    )
