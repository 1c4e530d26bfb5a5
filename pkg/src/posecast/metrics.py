"""Evaluation metrics: mean per-joint error, mean Euler-angle error,
the benchmark aggregate, and per-horizon error curves."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidInputError
from .rotations import expmap_frames_to_euler
from .sequence import REPR_EXPMAP, REPR_POSITIONS, PoseSequence

METRIC_MPJE = "mpje"
METRIC_MEA = "mea"
METRICS = (METRIC_MPJE, METRIC_MEA)


def _check_pair(pred, truth, name):
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise InvalidInputError(f"{name}: shape mismatch {pred.shape} vs {truth.shape}")
    if pred.ndim != 3 or pred.shape[-1] != 3:
        raise InvalidInputError(f"{name}: expected (steps, blocks, 3), got {pred.shape}")
    if not (np.all(np.isfinite(pred)) and np.all(np.isfinite(truth))):
        raise InvalidInputError(f"{name}: non-finite values")
    return pred, truth


def wrap_to_pi(x) -> np.ndarray:
    """Wrap angle differences onto (-pi, pi] (the nearest representative)."""
    x = np.asarray(x, dtype=float)
    wrapped = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def mpje(pred, truth) -> float:
    """Mean per-joint error in cm: Euclidean joint error averaged over
    prediction steps and joints."""
    pred, truth = _check_pair(pred, truth, "mpje")
    return float(np.mean(np.linalg.norm(pred - truth, axis=-1)))


def mea(pred, truth, per_component: bool = False) -> float:
    """Mean Euler-angle error in radians over ``(steps, triples, 3)``.

    Differences are wrapped onto (-pi, pi] before the per-triple norm.
    ``per_component`` switches to the flattened reading: the mean absolute
    component difference (1/(3L) weighting instead of 1/L).
    """
    pred, truth = _check_pair(pred, truth, "mea")
    diff = wrap_to_pi(pred - truth)
    if per_component:
        return float(np.mean(np.abs(diff)))
    return float(np.mean(np.linalg.norm(diff, axis=-1)))


def aggregate_objective(errors_by_individual) -> float:
    """Benchmark objective: per-individual mean over anchors, then mean
    over individuals (individuals weigh equally regardless of anchor count)."""
    if isinstance(errors_by_individual, Mapping):
        groups = list(errors_by_individual.values())
    else:
        groups = [list(g) for g in errors_by_individual]
    if not groups:
        raise InvalidInputError("no individuals to aggregate")
    means = []
    for g in groups:
        g = np.asarray(list(g), dtype=float)
        if g.size == 0:
            raise InvalidInputError("individual with no anchors")
        means.append(g.mean())
    return float(np.mean(means))


def stepwise_metric(pred_frames, truth_frames, metric: str) -> np.ndarray:
    """Per-step error vector for flat ``(N, D)`` frames, D = 3 * blocks."""
    pred_frames = np.asarray(pred_frames, dtype=float)
    truth_frames = np.asarray(truth_frames, dtype=float)
    if pred_frames.shape != truth_frames.shape:
        raise InvalidInputError(
            f"shape mismatch {pred_frames.shape} vs {truth_frames.shape}"
        )
    n, d = pred_frames.shape
    if d % 3 != 0:
        raise InvalidInputError(f"D={d} is not a multiple of 3")
    p = pred_frames.reshape(n, d // 3, 3)
    t = truth_frames.reshape(n, d // 3, 3)
    diff = p - t
    if metric == METRIC_MEA:
        diff = wrap_to_pi(diff)
    elif metric != METRIC_MPJE:
        raise InvalidInputError(f"unknown metric {metric!r}")
    return np.linalg.norm(diff, axis=-1).mean(axis=1)


@dataclass
class ErrorCurve:
    """Per-horizon mean error e_h for h = 1..N plus contributing counts."""

    metric: str
    fps: float
    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.counts = np.asarray(self.counts, dtype=int)
        if self.values.shape != self.counts.shape or self.values.ndim != 1:
            raise InvalidInputError("values and counts must be equal-length vectors")
        if np.any(self.values[self.counts > 0] < 0):
            raise InvalidInputError("error values must be nonnegative")

    @property
    def horizons(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1)

    @property
    def horizon_ms(self) -> np.ndarray:
        return self.horizons * (1000.0 / self.fps)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["horizon_ms", "metric", "value", "count"])
            for ms, v, c in zip(self.horizon_ms, self.values, self.counts):
                writer.writerow([repr(float(ms)), self.metric, repr(float(v)), int(c)])

    @classmethod
    def read_csv(cls, path, fps: float) -> "ErrorCurve":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise InvalidInputError(f"empty curve file {path}")
        metric = rows[0]["metric"]
        values = np.array([float(r["value"]) for r in rows])
        counts = np.array([int(r["count"]) for r in rows])
        return cls(metric=metric, fps=fps, values=values, counts=counts)


class CurveAccumulator:
    """Accumulate stepwise error vectors into a per-horizon mean curve."""

    def __init__(self, metric: str, fps: float):
        self.metric = metric
        self.fps = fps
        self._sums = np.zeros(0)
        self._counts = np.zeros(0, dtype=int)

    def add(self, stepwise: np.ndarray) -> None:
        n = stepwise.size
        if n > self._sums.size:
            self._sums = np.pad(self._sums, (0, n - self._sums.size))
            self._counts = np.pad(self._counts, (0, n - self._counts.size))
        self._sums[:n] += stepwise
        self._counts[:n] += 1

    def curve(self) -> ErrorCurve:
        values = np.divide(
            self._sums,
            self._counts,
            out=np.zeros_like(self._sums),
            where=self._counts > 0,
        )
        return ErrorCurve(self.metric, self.fps, values, self._counts)


def error_curve(records: Iterable, truth: PoseSequence, metric: str) -> ErrorCurve:
    """Average the per-horizon metric over forecast records.

    Records need ``anchor_t`` (count of observed frames, i.e. the index of
    the first predicted frame), ``horizon`` and an ``(N, D)`` ``prediction``.
    Angle data is converted from exp-map to Euler angles for MEA, matching
    the benchmark's evaluate-in-Euler convention.
    """
    if metric not in METRICS:
        raise InvalidInputError(f"unknown metric {metric!r}")
    if metric == METRIC_MPJE and truth.representation != REPR_POSITIONS:
        raise InvalidInputError("mpje requires positional data")
    if metric == METRIC_MEA and truth.representation != REPR_EXPMAP:
        raise InvalidInputError("mea requires exp-map angle data")

    truth_frames = truth.frames
    if metric == METRIC_MEA:
        truth_frames = expmap_frames_to_euler(truth_frames)

    acc = CurveAccumulator(metric, truth.fps)
    for rec in records:
        t, n = int(rec.anchor_t), int(rec.horizon)
        if t < 0 or t + n > truth.n_frames:
            raise InvalidInputError(
                f"anchor {t} with horizon {n} out of range for {truth.n_frames} frames"
            )
        pred = np.asarray(rec.prediction, dtype=float)
        if metric == METRIC_MEA:
            pred = expmap_frames_to_euler(pred)
        acc.add(stepwise_metric(pred, truth_frames[t : t + n], metric))
    return acc.curve()
