"""Base (trend) predictors and the predictor contract.

A predictor observes pose frames and, on demand, forecasts the next N
frames.  Stateful predictors may carry memory across anchors; the
evaluation protocol decides when to reset them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


class Predictor:
    """Contract: feed frames with ``observe``, then ``predict(horizon)``
    returns an ``(N, D)`` forecast of the next N frames.

    Predictions must be deterministic given the observation history (and
    any training seed).  ``reset`` drops observation memory, not fitted
    parameters.
    """

    name = "predictor"

    def reset(self) -> None:
        pass

    def observe(self, frames) -> None:
        raise NotImplementedError

    def predict(self, horizon: int) -> np.ndarray:
        raise NotImplementedError

    def parameter_count(self) -> int:
        return 0


def _frames_2d(frames) -> np.ndarray:
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 1:
        frames = frames[None, :]
    if frames.ndim != 2:
        raise InvalidInputError(f"frames must be (T, D), got shape {frames.shape}")
    return frames


def zero_velocity_predict(window, horizon: int) -> np.ndarray:
    """Repeat the last observed pose for every forecast step."""
    window = _frames_2d(window)
    if window.shape[0] < 1:
        raise InvalidInputError("window must contain at least one frame")
    return np.tile(window[-1], (horizon, 1))


class ZeroVelocityPredictor(Predictor):
    """Constant-pose baseline: forecasts the most recent observation."""

    name = "zero-velocity"

    def __init__(self):
        self._last = None

    def reset(self) -> None:
        self._last = None

    def observe(self, frames) -> None:
        frames = _frames_2d(frames)
        if frames.shape[0]:
            self._last = frames[-1].copy()

    def predict(self, horizon: int) -> np.ndarray:
        if self._last is None:
            raise InvalidInputError("predict called before any observation")
        return np.tile(self._last, (horizon, 1))


@dataclass
class RidgeMap:
    """Fitted linear map from a flattened observation window to a
    flattened forecast block, with the training standardization baked in."""

    weights: np.ndarray  # (F, N*D) incl. bias row
    mean: np.ndarray
    scale: np.ndarray
    window_shape: tuple
    output_shape: tuple
    lam: float

    def features(self, window) -> np.ndarray:
        window = np.asarray(window, dtype=float)
        if window.shape != self.window_shape:
            raise InvalidInputError(
                f"window shape {window.shape} does not match fitted {self.window_shape}"
            )
        z = (window.reshape(-1) - self.mean) / self.scale
        return np.append(z, 1.0)

    def parameter_count(self) -> int:
        return int(self.weights.size)


def ridge_regression_fit(windows, targets, lam: float = 1.0) -> RidgeMap:
    """Fit ``W`` minimizing ``sum ||target - W phi(window)||^2 + lam ||W||_F^2``.

    Features are the flattened window, z-scored per input dimension with
    training statistics, plus a constant; everything including the
    constant is ridge-penalized, so predictions shrink to zero as lam
    grows.  ``lam=0`` falls back to a minimum-norm least-squares solve.
    """
    if lam < 0:
        raise InvalidInputError(f"lam must be >= 0, got {lam}")
    windows = [np.asarray(w, dtype=float) for w in windows]
    targets = [np.asarray(t, dtype=float) for t in targets]
    if not windows or len(windows) != len(targets):
        raise InvalidInputError("need equally many windows and targets, at least one pair")
    wshape, tshape = windows[0].shape, targets[0].shape
    if len(wshape) != 2 or len(tshape) != 2 or wshape[1] != tshape[1]:
        raise InvalidInputError(
            f"windows must be (M, D) and targets (N, D); got {wshape} and {tshape}"
        )
    for w, t in zip(windows, targets):
        if w.shape != wshape or t.shape != tshape:
            raise InvalidInputError("inconsistent window/target shapes across pairs")

    X = np.stack([w.reshape(-1) for w in windows])
    Y = np.stack([t.reshape(-1) for t in targets])
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    Z = (X - mean) / scale
    A = np.hstack([Z, np.ones((Z.shape[0], 1))])

    if lam == 0.0:
        W = np.linalg.lstsq(A, Y, rcond=None)[0]
    else:
        gram = A.T @ A + lam * np.eye(A.shape[1])
        W = np.linalg.solve(gram, A.T @ Y)
    return RidgeMap(
        weights=W,
        mean=mean,
        scale=scale,
        window_shape=wshape,
        output_shape=tshape,
        lam=float(lam),
    )


def ridge_regression_predict(rmap: RidgeMap, window) -> np.ndarray:
    """Apply a fitted ridge map to one observation window."""
    return (rmap.features(window) @ rmap.weights).reshape(rmap.output_shape)


class RidgePredictor(Predictor):
    """Predictor wrapper around a fitted ridge map; keeps the last M
    observed frames as its window."""

    name = "ridge"

    def __init__(self, rmap: RidgeMap):
        self.rmap = rmap
        self._window: list[np.ndarray] = []

    def reset(self) -> None:
        self._window = []

    def observe(self, frames) -> None:
        for row in _frames_2d(frames):
            self._window.append(row.copy())
        m = self.rmap.window_shape[0]
        del self._window[:-m]

    def predict(self, horizon: int) -> np.ndarray:
        m, n = self.rmap.window_shape[0], self.rmap.output_shape[0]
        if len(self._window) < m:
            raise InvalidInputError(f"need {m} observed frames, have {len(self._window)}")
        if horizon > n:
            raise InvalidInputError(f"map was fitted for horizon {n}, asked for {horizon}")
        pred = ridge_regression_predict(self.rmap, np.stack(self._window))
        return pred[:horizon]

    def parameter_count(self) -> int:
        return self.rmap.parameter_count()


class ScriptedPredictor(Predictor):
    """Serves externally computed forecasts (e.g. a neural network's) by
    anchor position; this is how NN predictions enter the benchmark."""

    name = "external"

    def __init__(self, records):
        self._by_anchor = {}
        self.dims = None
        for rec in records:
            self._by_anchor[int(rec.anchor_t)] = np.asarray(rec.prediction, dtype=float)
            self.dims = self._by_anchor[int(rec.anchor_t)].shape[1]
        self._seen = 0

    def reset(self) -> None:
        self._seen = 0

    def observe(self, frames) -> None:
        self._seen += _frames_2d(frames).shape[0]

    def predict(self, horizon: int) -> np.ndarray:
        pred = self._by_anchor.get(self._seen)
        if pred is None:
            raise InvalidInputError(f"no external prediction at anchor {self._seen}")
        if pred.shape[0] < horizon:
            raise InvalidInputError(
                f"external prediction at anchor {self._seen} has horizon "
                f"{pred.shape[0]} < requested {horizon}"
            )
        return pred[:horizon].copy()

    def anchors(self) -> list[int]:
        return sorted(self._by_anchor)
