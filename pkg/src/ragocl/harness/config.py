"""Experiment configuration: one declarative YAML/JSON document."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from ragocl.errors import ConfigError
from ragocl.harness.pipeline import PATHOCL_RETRIEVERS, SWEEP_RETRIEVERS

FILTER_THRESHOLDS = {"hard_above": 50, "small_below": 100, "none": None}


@dataclass
class ProviderConfig:
    kind: str = "deterministic-surrogate"
    endpoint: str | None = None
    dim: int = 256
    cache_policy: str = "none"
    cache_path: str | None = None
    token_env: str | None = None
    timeout_s: float = 30.0

    @property
    def token(self) -> str | None:
        return os.environ.get(self.token_env) if self.token_env else None


@dataclass
class LLMConfig:
    kind: str = "echo"  # echo | canned | remote
    endpoint: str | None = None
    token_env: str | None = None
    timeout_s: float = 120.0
    min_interval_s: float = 0.0
    answers_path: str | None = None
    default: str | None = None
    max_output_tokens: int = 1024
    system_role_text: str = ""

    @property
    def token(self) -> str | None:
        return os.environ.get(self.token_env) if self.token_env else None


@dataclass
class ExperimentConfig:
    dataset_path: str = "dataset.jsonl"
    kb_path: str | None = None
    retrievers: list[str] = field(default_factory=lambda: ["bm25", "dense", "sparse"])
    k_values: list[int] = field(default_factory=lambda: [0, 10, 20, 30, 40, 50])
    pathocl_k_values: list[int] = field(default_factory=lambda: [1, 3, 5])
    sample_n: int = 72
    seed: int = 0
    filter: str = "hard_above"
    filter_threshold: int | None = None
    dense: ProviderConfig = field(default_factory=ProviderConfig)
    sparse: ProviderConfig = field(default_factory=ProviderConfig)
    evaluation: ProviderConfig = field(default_factory=ProviderConfig)
    llm: LLMConfig = field(default_factory=LLMConfig)
    max_in_flight: int = 4
    trim_by: str = "per-metric"
    max_path_len: int = 6
    max_paths: int = 10_000

    def __post_init__(self):
        self.validate()

    @property
    def threshold(self) -> int | None:
        if self.filter_threshold is not None:
            return self.filter_threshold
        return FILTER_THRESHOLDS[self.filter]

    def validate(self) -> None:
        if not self.retrievers:
            raise ConfigError("retrievers must not be empty")
        unknown = set(self.retrievers) - set(SWEEP_RETRIEVERS)
        if unknown:
            raise ConfigError(f"unknown retrievers {sorted(unknown)}; choose from {list(SWEEP_RETRIEVERS)}")
        if not self.k_values or not self.pathocl_k_values:
            raise ConfigError("k_values must not be empty")
        if any(k < 0 for k in self.k_values + self.pathocl_k_values):
            raise ConfigError("k values must be non-negative")
        if self.filter not in FILTER_THRESHOLDS:
            raise ConfigError(f"filter must be one of {list(FILTER_THRESHOLDS)}")
        if any(r in PATHOCL_RETRIEVERS for r in self.retrievers) and self.filter != "small_below":
            raise ConfigError("PathOCL retrievers require filter 'small_below'")
        if self.sample_n < 1:
            raise ConfigError("sample_n must be positive")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be positive")
        if self.trim_by not in ("per-metric", "cs"):
            raise ConfigError("trim_by must be 'per-metric' or 'cs'")
        if self.llm.kind not in ("echo", "canned", "remote"):
            raise ConfigError(f"unknown llm kind {self.llm.kind!r}")

    def ks_for(self, retriever: str) -> list[int]:
        return list(self.pathocl_k_values if retriever in PATHOCL_RETRIEVERS else self.k_values)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: str | Path | None = None) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        data = dict(data)
        try:
            for key in ("dense", "sparse", "evaluation"):
                if key in data:
                    data[key] = ProviderConfig(**(data[key] or {}))
            if "llm" in data:
                data["llm"] = LLMConfig(**(data["llm"] or {}))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if base_dir is not None:
            base = Path(base_dir)
            for key in ("dataset_path", "kb_path"):
                if data.get(key) and not Path(data[key]).is_absolute():
                    data[key] = str(base / data[key])
        return cls(**data)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    return ExperimentConfig.from_dict(data, base_dir=path.parent)
