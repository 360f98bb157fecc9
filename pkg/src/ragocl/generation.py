"""Prompt rendering and LLM client contract (greedy decoding, bounded output)."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

import httpx

from ragocl.errors import ClientTimeout, ClientUnavailable, EmptySpecification

PROMPT_HEAD = (
    "You are given a meta-model with information about classes, associations and their attributes.\n"
    "You are also given a natural language specification.\n"
    "Your task is to generate an OCL (Object Constraint Language) constraint for this specification \n"
    "and based on the meta-model.\n"
    "Do not provide any explanations or additional text.\n"
    "The meta-model information is: "
)
PROMPT_MIDDLE = "\nThe natural language specification is: "
PROMPT_SKELETON = PROMPT_HEAD + PROMPT_MIDDLE

RETRIEVER_IDS = ("bm25", "dense", "sparse", "pathocl-jaccard", "pathocl-cosine", "none")


@dataclass(frozen=True)
class PromptSpec:
    context_text: str
    nl_spec: str
    rendered: str


def build_prompt(context_text: str, nl_spec: str) -> PromptSpec:
    if not nl_spec or not nl_spec.strip():
        raise EmptySpecification("the natural language specification is empty")
    return PromptSpec(context_text, nl_spec, PROMPT_HEAD + context_text + PROMPT_MIDDLE + nl_spec)


def join_chunks(texts: Sequence[str]) -> str:
    """Retrieved chunks in rank order, one per line."""
    return "\n".join(texts)


def split_prompt(rendered: str) -> tuple[str, str]:
    """Inverse of :func:`build_prompt`: recover ``(context_text, nl_spec)``."""
    if not rendered.startswith(PROMPT_HEAD):
        raise ValueError("text was not rendered from the prompt template")
    body = rendered[len(PROMPT_HEAD):]
    context, sep, spec = body.partition(PROMPT_MIDDLE)
    if not sep:
        raise ValueError("text was not rendered from the prompt template")
    return context, spec


@dataclass(frozen=True)
class GenerationConfig:
    max_output_tokens: int = 1024
    decoding: str = "greedy"
    system_role_text: str = ""
    timeout_s: float = 120.0

    def __post_init__(self):
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        if self.decoding != "greedy":
            raise ValueError("only greedy decoding is supported")


@dataclass(frozen=True)
class CompletionRequest:
    system: str
    prompt: str
    max_tokens: int
    greedy: bool = True
    # routing metadata for mock clients; never sent over the wire
    sample_id: str | None = None


@dataclass(frozen=True)
class Completion:
    text: str
    truncated: bool = False


class LLMClient(Protocol):
    def complete(self, request: CompletionRequest) -> Completion: ...


@dataclass
class GenerationRecord:
    sample_id: str
    retriever_id: str
    k: int
    prompt: str
    output_ocl: str
    latency_ms: int = 0
    truncated: bool = False

    def __post_init__(self):
        if self.retriever_id not in RETRIEVER_IDS:
            raise ValueError(f"unknown retriever id {self.retriever_id!r}")
        if self.retriever_id == "none" and self.k != 0:
            raise ValueError("retriever 'none' implies k = 0")

    def to_json(self) -> dict:
        return {
            "sample": self.sample_id,
            "retriever": self.retriever_id,
            "k": self.k,
            "prompt": self.prompt,
            "output": self.output_ocl,
            "latency_ms": self.latency_ms,
            "truncated": self.truncated,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "GenerationRecord":
        return cls(obj["sample"], obj["retriever"], int(obj["k"]), obj["prompt"], obj["output"],
                   int(obj.get("latency_ms", 0)), bool(obj.get("truncated", False)))


def generate_ocl(
    prompt: PromptSpec,
    client: LLMClient,
    config: GenerationConfig = GenerationConfig(),
    sample_id: str = "",
    retriever_id: str = "none",
    k: int = 0,
) -> GenerationRecord:
    request = CompletionRequest(
        system=config.system_role_text,
        prompt=prompt.rendered,
        max_tokens=config.max_output_tokens,
        greedy=True,
        sample_id=sample_id,
    )
    t0 = time.perf_counter()
    completion = client.complete(request)
    latency = int(round((time.perf_counter() - t0) * 1000))
    return GenerationRecord(
        sample_id=sample_id,
        retriever_id=retriever_id,
        k=k,
        prompt=prompt.rendered,
        output_ocl=completion.text.strip(),
        latency_ms=latency,
        truncated=completion.truncated,
    )


# ------------------------------------------------------------------- clients


class EchoClient:
    """Returns the prompt's meta-model context verbatim (the specification if the context is empty)."""

    def complete(self, request: CompletionRequest) -> Completion:
        context, spec = split_prompt(request.prompt)
        return Completion(context if context.strip() else spec)


@dataclass
class CannedClient:
    """Fixed answer per sample id."""

    answers: Mapping[str, str]
    default: str | None = None

    def complete(self, request: CompletionRequest) -> Completion:
        if request.sample_id in self.answers:
            return Completion(self.answers[request.sample_id])
        if self.default is not None:
            return Completion(self.default)
        raise ClientUnavailable(f"no canned answer for sample {request.sample_id!r}")


@dataclass
class RemoteLLMClient:
    """HTTP client: POST ``{system, prompt, max_tokens, greedy}`` -> ``{text, truncated}``.

    ``min_interval_s`` enforces a per-client rate limit across threads.
    """

    endpoint: str
    token: str | None = None
    timeout_s: float = 120.0
    min_interval_s: float = 0.0
    http: httpx.Client | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)
    _last: float = field(default=0.0, init=False, repr=False)

    def __post_init__(self):
        if self.http is None:
            self.http = httpx.Client(timeout=self.timeout_s)

    def _throttle(self) -> None:
        if self.min_interval_s <= 0:
            return
        with self._lock:
            wait = self._last + self.min_interval_s - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last = time.monotonic()

    def complete(self, request: CompletionRequest) -> Completion:
        self._throttle()
        body = {
            "system": request.system,
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
            "greedy": True,
        }
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        try:
            resp = self.http.post(self.endpoint, json=body, headers=headers, timeout=self.timeout_s)
            resp.raise_for_status()
            payload = resp.json()
        except httpx.TimeoutException as exc:
            raise ClientTimeout(self.timeout_s) from exc
        except (httpx.HTTPError, ValueError) as exc:
            raise ClientUnavailable(f"{self.endpoint}: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise ClientUnavailable(f"{self.endpoint}: response lacks a 'text' string")
        return Completion(payload["text"], bool(payload.get("truncated", False)))
