"""Autoregressive models: batch fitting, order selection, multi-step forecasts.

A scalar AR(P) model predicts ``y_t = a . (y_{t-1}, ..., y_{t-P})`` with
white-noise innovation of variance ``sigma2``.  Batch fitting solves the
exponentially-weighted ridge regression

    a = (sum_j g^{t-j} phi_j phi_j^T + ridge*I)^{-1}  sum_j g^{t-j} phi_j y_j

where ``g`` is the forgetting factor and ``t`` the most recent sample, so
older samples are down-weighted geometrically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, RankDeficiencyError

DEFAULT_FORGETTING = 0.99
DEFAULT_RIDGE = 1e-8
# residual variance at or below this fraction of the series power counts
# as a deterministic (noise-free) fit
_DETERMINISTIC_REL = 1e-20


@dataclass
class ArModel:
    """Fitted AR model: order, coefficients (most recent lag first),
    innovation variance in squared series units."""

    order: int
    coefficients: np.ndarray
    innovation_variance: float = 0.0

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if self.order != self.coefficients.size:
            raise InvalidInputError(
                f"order {self.order} but {self.coefficients.size} coefficients"
            )
        if not np.all(np.isfinite(self.coefficients)):
            raise InvalidInputError("coefficients contain non-finite values")
        if not (np.isfinite(self.innovation_variance) and self.innovation_variance >= 0):
            raise InvalidInputError("innovation variance must be finite and >= 0")

    def to_dict(self) -> dict:
        return {
            "order": int(self.order),
            "coefficients": [float(c) for c in self.coefficients],
            "innovation_variance": float(self.innovation_variance),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArModel":
        return cls(
            order=int(data["order"]),
            coefficients=data["coefficients"],
            innovation_variance=float(data["innovation_variance"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ArModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def lagged_design(values, order: int):
    """Regressor matrix and targets for an AR(order) fit.

    Row i of the design is ``(y_{t-1}, ..., y_{t-P})`` for target ``y_t``;
    only times with a full lag window are usable.
    """
    y = np.asarray(values, dtype=float).reshape(-1)
    if order < 0:
        raise InvalidInputError("order must be >= 0")
    n = y.size - order
    if n < 1:
        raise InvalidInputError(f"series of length {y.size} too short for order {order}")
    if order == 0:
        return np.empty((y.size, 0)), y.copy()
    phi = np.empty((n, order))
    for k in range(order):
        phi[:, k] = y[order - 1 - k : y.size - 1 - k]
    return phi, y[order:]


def _as_series_list(values) -> list[np.ndarray]:
    if isinstance(values, (list, tuple)) and values and np.ndim(values[0]) == 1:
        return [np.asarray(v, dtype=float).reshape(-1) for v in values]
    return [np.asarray(values, dtype=float).reshape(-1)]


def _weighted_fit(designs, order: int, ridge: float):
    """Solve the pooled weighted normal equations; returns (coeffs, sigma2)."""
    if order == 0:
        y = np.concatenate([d[1] for d in designs])
        w = np.concatenate([d[2] for d in designs])
        return np.empty(0), float(w @ (y**2) / w.sum())
    info = np.zeros((order, order))
    moment = np.zeros(order)
    for phi, y, w in designs:
        wphi = phi * w[:, None]
        info += wphi.T @ phi
        moment += wphi.T @ y
    reg = info + ridge * np.eye(order)
    if ridge == 0.0:
        eigmin = float(np.linalg.eigvalsh(reg)[0])
        if eigmin <= max(1e-12 * abs(np.trace(reg)), 0.0):
            raise RankDeficiencyError(
                "information matrix is singular; pass ridge > 0 to regularize"
            )
    try:
        coeffs = np.linalg.solve(reg, moment)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(
            "information matrix is singular; pass ridge > 0 to regularize"
        ) from exc
    wsum = 0.0
    wsse = 0.0
    for phi, y, w in designs:
        resid = y - phi @ coeffs
        wsse += float(w @ resid**2)
        wsum += float(w.sum())
    return coeffs, wsse / wsum


def _weights(n: int, forgetting: float) -> np.ndarray:
    return forgetting ** np.arange(n - 1, -1, -1, dtype=float)


def fit_ar_batch(
    values,
    order: int,
    forgetting: float = 1.0,
    ridge: float = DEFAULT_RIDGE,
) -> ArModel:
    """Closed-form exponentially-weighted AR fit.

    ``values`` may be one series or a list of series; each series is
    weighted from its own last sample backwards, and the designs are
    pooled.  With ``forgetting=1`` and ``ridge=0`` this is ordinary least
    squares.
    """
    if not 0.0 < forgetting <= 1.0:
        raise InvalidInputError(f"forgetting factor must be in (0, 1], got {forgetting}")
    if ridge < 0.0:
        raise InvalidInputError(f"ridge must be >= 0, got {ridge}")
    series = _as_series_list(values)
    designs = []
    for s in series:
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("series contains non-finite values")
        phi, y = lagged_design(s, order)
        designs.append((phi, y, _weights(y.size, forgetting)))
    coeffs, sigma2 = _weighted_fit(designs, order, ridge)
    return ArModel(order=order, coefficients=coeffs, innovation_variance=sigma2)


class BicSelection(NamedTuple):
    """Result of BIC order selection.

    ``deterministic`` flags a series fit exactly (zero residual variance)
    at the returned order.
    """

    order: int
    deterministic: bool
    scores: tuple
    residual_variances: tuple


def bic_order_select(
    values,
    max_order: int,
    forgetting: float = 1.0,
    ridge: float = DEFAULT_RIDGE,
) -> BicSelection:
    """Pick the AR order in ``0..max_order`` minimizing
    ``n*ln(sigma2_P) + P*ln(n)``.

    All candidate orders are fitted and scored on the same n samples
    (those with a full max_order lag window), so scores are comparable
    and ties resolve toward the smallest order.  A zero residual variance
    short-circuits to the smallest order achieving it, flagged
    ``deterministic``.
    """
    if max_order < 0:
        raise InvalidInputError("max_order must be >= 0")
    if not 0.0 < forgetting <= 1.0:
        raise InvalidInputError(f"forgetting factor must be in (0, 1], got {forgetting}")
    series = _as_series_list(values)
    for s in series:
        if s.size <= max_order + 1:
            raise InvalidInputError(
                f"series of length {s.size} too short for max order {max_order}"
            )
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("series contains non-finite values")
    n = sum(s.size - max_order for s in series)

    def trimmed_designs(p):
        designs = []
        for s in series:
            phi, y = lagged_design(s, p)
            skip = max_order - p  # align all orders on the same targets
            designs.append((phi[skip:], y[skip:], _weights(y.size - skip, forgetting)))
        return designs

    sigma2s = [_weighted_fit(trimmed_designs(p), p, ridge)[1] for p in range(max_order + 1)]

    # Deterministic series: the conditioning ridge leaves a tiny residual
    # even on exact fits, so near-zero candidates are rechecked ridge-free.
    power = sigma2s[0]
    for p, s2 in enumerate(sigma2s):
        if s2 > 1e-10 * power:
            continue
        try:
            _, pure = _weighted_fit(trimmed_designs(p), p, 0.0)
        except RankDeficiencyError:
            continue
        if pure <= _DETERMINISTIC_REL * max(power, 1e-300):
            return BicSelection(p, True, (), tuple(sigma2s))

    scores = tuple(n * np.log(s2) + p * np.log(n) for p, s2 in enumerate(sigma2s))
    best = int(np.argmin(scores))  # argmin takes the first (smallest order) on ties
    return BicSelection(best, False, scores, tuple(sigma2s))


def ar_predict(model_or_state, history, horizon: int) -> np.ndarray:
    """Multi-step forecast, feeding predictions back as regressors.

    ``history`` holds the latest observations oldest-first; only the last
    P values are used.  Unstable coefficient sets are allowed, so
    forecasts may grow without bound.
    """
    order = int(model_or_state.order)
    coeffs = np.asarray(model_or_state.coefficients, dtype=float)
    if horizon < 0:
        raise InvalidInputError("horizon must be >= 0")
    if order == 0:
        return np.zeros(horizon)
    hist = np.asarray(history, dtype=float).reshape(-1)
    if hist.size < order:
        raise InvalidInputError(f"need {order} history values, got {hist.size}")
    window = hist[-order:].copy()
    out = np.empty(horizon)
    for h in range(horizon):
        nxt = float(coeffs @ window[::-1])
        out[h] = nxt
        window = np.roll(window, -1)
        window[-1] = nxt
    return out
