"""Experiment configuration: one JSON document per run.

Unknown fields are rejected at every level so that a typo cannot silently
fall back to a default.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .errors import ValidationError

OPERATIONS = (
    "criteria", "sample", "marginal-series", "couple", "beta", "overflow",
    "appendix-tree", "cesaro", "summability", "spinflip-conditional",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Caps(_Strict):
    max_exact_states: int = Field(1 << 20, ge=1)
    enumeration_depth: int = Field(16, ge=1)
    series_K_max: int = Field(1 << 22, ge=64)


class CriteriaParams(_Strict):
    checks: Optional[list[Literal["growth", "pressure", "corollary5", "v_free", "renewal_V", "sr_sandwich"]]] = None
    N: int = Field(12, ge=1)
    v: Optional[str] = None


class SampleParams(_Strict):
    T: int = Field(1000, ge=0)
    stream: int = Field(0, ge=0)


class MarginalParams(_Strict):
    I: int = Field(100, ge=0)
    word: str = "1"
    method: Literal["exact", "mc"] = "exact"
    reps: int = Field(10000, ge=1)


class CoupleParams(_Strict):
    lower_model: dict
    lower_past: str = "(0)"
    T: int = Field(1000, ge=1)
    seeds: int = Field(1, ge=1)


class BetaParams(_Strict):
    gaps: list[int] = Field(default_factory=lambda: [1, 2, 4, 8])
    w: int = Field(2, ge=1)
    burn: int = Field(1000, ge=1)
    reps: int = Field(10000, ge=1)
    exact: bool = False


class OverflowParams(_Strict):
    T: int = Field(1000, ge=1)


class TreeParams(_Strict):
    construction: Literal["tree1", "tree2"] = "tree2"
    breakpoints: Optional[list[int]] = None
    f: Optional[dict] = None
    N: int = Field(12, ge=0)
    adjust: bool = False
    words: bool = False


class CesaroParams(_Strict):
    k: int = Field(50, ge=1)
    n: int = Field(4, ge=1)
    method: Literal["exact", "mc"] = "exact"
    reps: int = Field(10000, ge=1)


class SummabilityParams(_Strict):
    alphas: list[float] = Field(default_factory=lambda: [1.5, 2.0, 2.5, 3.0])
    deltas: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 1.5, 2.0])
    c1: int = Field(1, ge=1)
    I: int = Field(1 << 16, ge=64)


class SpinflipParams(_Strict):
    density: float = Field(0.3, gt=0.0, lt=1.0)
    window: int = Field(50, ge=1)


PARAMS = {
    "criteria": CriteriaParams,
    "sample": SampleParams,
    "marginal-series": MarginalParams,
    "couple": CoupleParams,
    "beta": BetaParams,
    "overflow": OverflowParams,
    "appendix-tree": TreeParams,
    "cesaro": CesaroParams,
    "summability": SummabilityParams,
    "spinflip-conditional": SpinflipParams,
}

NEEDS_MODEL = {"criteria", "sample", "marginal-series", "couple", "beta", "overflow", "cesaro"}


class ExperimentConfig(_Strict):
    operation: Literal[OPERATIONS]
    model: Optional[dict] = None
    past: str = "(0)"
    params: dict = Field(default_factory=dict)
    seed: int = Field(0, ge=0, lt=1 << 64)
    caps: Caps = Field(default_factory=Caps)
    out: Optional[str] = None
    tag: Optional[str] = None

    def typed_params(self):
        """Operation parameters validated against the operation's schema."""
        try:
            return PARAMS[self.operation](**self.params)
        except PydanticValidationError as exc:
            raise ValidationError(f"bad params for {self.operation}: {_summary(exc)}") from None

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2)


def _summary(exc: PydanticValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors())


def parse_config(data: dict) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig(**data)
    except PydanticValidationError as exc:
        raise ValidationError(f"invalid config: {_summary(exc)}") from None
    if cfg.operation in NEEDS_MODEL and cfg.model is None:
        raise ValidationError(f"operation {cfg.operation!r} needs a model descriptor")
    cfg.typed_params()
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return parse_config(data)
