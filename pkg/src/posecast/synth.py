"""Seeded synthetic pose-like sequences with known AR ground truth.

Desk-scale stand-in for motion-capture data: every dimension is an AR
process plus an optional deterministic trend, and the generator emits a
manifest of the true parameters so oracle experiments can assert against
them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidInputError, SchemaError
from .sequence import REPRESENTATIONS, PoseSequence

TREND_NONE = "none"
TREND_SINUSOID = "sinusoid"
TREND_LINEAR = "linear"


@dataclass
class TrendSpec:
    kind: str = TREND_NONE
    amplitude: float = 0.0
    period: float = 1.0
    slope: float = 0.0

    def __post_init__(self):
        if self.kind not in (TREND_NONE, TREND_SINUSOID, TREND_LINEAR):
            raise InvalidInputError(f"unknown trend kind {self.kind!r}")
        if self.kind == TREND_SINUSOID and self.period <= 0:
            raise InvalidInputError("sinusoid trend needs period > 0")

    def values(self, length: int) -> np.ndarray:
        t = np.arange(length, dtype=float)
        if self.kind == TREND_SINUSOID:
            return self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        if self.kind == TREND_LINEAR:
            return self.slope * t
        return np.zeros(length)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == TREND_SINUSOID:
            d.update(amplitude=self.amplitude, period=self.period)
        elif self.kind == TREND_LINEAR:
            d.update(slope=self.slope)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrendSpec":
        return cls(
            kind=d.get("kind", TREND_NONE),
            amplitude=float(d.get("amplitude", 0.0)),
            period=float(d.get("period", 1.0)),
            slope=float(d.get("slope", 0.0)),
        )


@dataclass
class DimSpec:
    coefficients: np.ndarray
    sigma: float
    trend: TrendSpec = field(default_factory=TrendSpec)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if self.sigma < 0:
            raise InvalidInputError("sigma must be >= 0")

    @property
    def order(self) -> int:
        return self.coefficients.size

    def to_dict(self) -> dict:
        return {
            "coefficients": [float(c) for c in self.coefficients],
            "sigma": float(self.sigma),
            "trend": self.trend.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DimSpec":
        return cls(
            coefficients=d.get("coefficients", []),
            sigma=float(d.get("sigma", 0.0)),
            trend=TrendSpec.from_dict(d.get("trend", {})),
        )


@dataclass
class IndividualSpec:
    individual_id: str
    dims: list

    def to_dict(self) -> dict:
        return {"id": self.individual_id, "dims": [d.to_dict() for d in self.dims]}

    @classmethod
    def from_dict(cls, d: dict) -> "IndividualSpec":
        try:
            return cls(
                individual_id=str(d["id"]),
                dims=[DimSpec.from_dict(x) for x in d["dims"]],
            )
        except KeyError as exc:
            raise SchemaError(f"individual spec missing field {exc}") from exc


@dataclass
class SyntheticSpec:
    individuals: list
    length: int
    fps: float = 25.0
    representation: str = "positions_cm"
    seed: int = 0

    def __post_init__(self):
        if self.length < 1:
            raise InvalidInputError("length must be >= 1")
        if not self.individuals:
            raise InvalidInputError("spec has no individuals")
        if self.representation not in REPRESENTATIONS:
            raise InvalidInputError(f"unknown representation {self.representation!r}")
        ids = [ind.individual_id for ind in self.individuals]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("individual ids must be unique")

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "fps": self.fps,
            "representation": self.representation,
            "seed": self.seed,
            "individuals": [ind.to_dict() for ind in self.individuals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        try:
            return cls(
                individuals=[IndividualSpec.from_dict(x) for x in d["individuals"]],
                length=int(d["length"]),
                fps=float(d.get("fps", 25.0)),
                representation=d.get("representation", "positions_cm"),
                seed=int(d.get("seed", 0)),
            )
        except KeyError as exc:
            raise SchemaError(f"synthetic spec missing field {exc}") from exc

    @classmethod
    def load(cls, path) -> "SyntheticSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def ar_is_stable(coefficients) -> bool:
    """All roots of ``z^P - a1 z^(P-1) - ... - aP`` strictly inside the unit circle."""
    coefficients = np.asarray(coefficients, dtype=float).reshape(-1)
    if coefficients.size == 0:
        return True
    roots = np.roots(np.concatenate([[1.0], -coefficients]))
    return bool(np.all(np.abs(roots) < 1.0))


def _simulate_dim(dim: DimSpec, length: int, rng) -> np.ndarray:
    eps = rng.normal(0.0, dim.sigma, size=length) if dim.sigma > 0 else np.zeros(length)
    if dim.order == 0:
        noise = eps
    else:
        # y_t = a . (y_{t-1..t-P}) + eps_t with zero initial state
        noise = lfilter([1.0], np.concatenate([[1.0], -dim.coefficients]), eps)
    return noise + dim.trend.values(length)


def generate(spec: SyntheticSpec, allow_unstable: bool = False):
    """Sequences plus a ground-truth manifest, reproducible from the seed."""
    for ind in spec.individuals:
        for d, dim in enumerate(ind.dims):
            if not allow_unstable and not ar_is_stable(dim.coefficients):
                raise InvalidInputError(
                    f"individual {ind.individual_id!r} dim {d} is unstable; "
                    "pass allow_unstable to generate anyway"
                )
    rng = np.random.default_rng(spec.seed)
    sequences = {}
    for ind in spec.individuals:
        cols = [_simulate_dim(dim, spec.length, rng) for dim in ind.dims]
        sequences[ind.individual_id] = PoseSequence(
            frames=np.stack(cols, axis=1),
            representation=spec.representation,
            fps=spec.fps,
            subject_id=ind.individual_id,
            action="synthetic",
        )
    manifest = {"ground_truth": spec.to_dict()}
    return sequences, manifest
