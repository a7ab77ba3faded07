"""Versioned engine configuration with JSON persistence."""

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Tuple, Union

CONFIG_VERSION = 1
TF_MODES = ("occurrence", "word")


class ConfigError(ValueError):
    """Raised for unreadable, unknown or out-of-range configuration values."""


@dataclass(frozen=True)
class EngineConfig:
    """
    Every tunable of the retrieval engine.

    Defaults are the reference operating point: 20x10x5 HSV bins,
    alpha 0.5, a 20,000-word codebook, 128-bit signatures matched at
    Hamming distance 52 with bandwidth 26, and multiple assignment to
    3 words on the query side.
    """

    hsv_dims: Tuple[int, int, int] = (20, 10, 5)
    alpha: float = 0.5
    codebook_size: int = 20000
    kmeans_iters: int = 25
    d_b: int = 128
    h_t: int = 52
    sigma: float = 26.0
    ma: int = 3
    candidates: int = 1000
    weights_enabled: bool = True
    normalization_enabled: bool = True
    tf_mode: str = "occurrence"
    seed: int = 0
    version: int = CONFIG_VERSION

    def __post_init__(self):
        object.__setattr__(self, "hsv_dims", tuple(int(d) for d in self.hsv_dims))
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {self.version}")
        if len(self.hsv_dims) != 3 or min(self.hsv_dims) < 1:
            raise ConfigError(f"hsv_dims must be three positive ints, got {self.hsv_dims}")
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        for name in ("codebook_size", "d_b", "ma", "candidates"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.kmeans_iters < 0:
            raise ConfigError(f"kmeans_iters must be >= 0, got {self.kmeans_iters}")
        if not 0 <= self.h_t <= self.d_b:
            raise ConfigError(f"h_t must lie in [0, d_b], got {self.h_t}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.tf_mode not in TF_MODES:
            raise ConfigError(f"tf_mode must be one of {TF_MODES}, got {self.tf_mode!r}")

    def with_overrides(self, **overrides: Any) -> "EngineConfig":
        """Copy with the given fields replaced; ``None`` values are ignored."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hsv_dims"] = list(self.hsv_dims)
        return data

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def pipeline_config(self, mode: str = "c2f"):
        from c2f_retrieval.pipeline.c2f_pipeline import PipelineConfig

        return PipelineConfig(
            K=self.candidates,
            alpha=self.alpha,
            hsv_dims=self.hsv_dims,
            k=self.codebook_size,
            d_b=self.d_b,
            h_t=self.h_t,
            sigma=self.sigma,
            ma=self.ma,
            weights_enabled=self.weights_enabled,
            normalization_enabled=self.normalization_enabled,
            tf_mode=self.tf_mode,
            mode=mode,
        )


def config_from_dict(data: Dict[str, Any]) -> EngineConfig:
    known = {f.name for f in fields(EngineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return EngineConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Union[str, Path]) -> EngineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return config_from_dict(data)


def save_config(config: EngineConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
