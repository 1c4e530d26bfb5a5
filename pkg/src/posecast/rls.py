"""Recursive least squares with exponential forgetting.

One ``RlsState`` tracks the coefficients of a single scalar AR dimension
online.  The inverse information matrix is propagated with the matrix
inversion lemma, so each update costs O(P^2) and never inverts anything:

    X_t = (1/g) * X_{t-1} * (I - phi phi^T X_{t-1} / (phi^T X_{t-1} phi + g))
    a_t = a_{t-1} + X_t phi (y - phi^T a_{t-1})

After t updates the state solves the same weighted regression as the
closed form with an implied ridge prior of ``g^t / init_scale``.
"""

from __future__ import annotations

import numpy as np

from .ar import DEFAULT_FORGETTING, ar_predict
from .errors import InvalidInputError, NumericalDegeneracyError

DEFAULT_INIT_SCALE = 1e4


class RlsState:
    """Online AR(P) coefficient estimator for one dimension.

    Mutable; update from exactly one caller at a time.  Distinct states
    (one per dimension) are independent and safe to advance in parallel.
    """

    def __init__(
        self,
        order: int,
        forgetting: float = DEFAULT_FORGETTING,
        init_scale: float = DEFAULT_INIT_SCALE,
    ):
        if order < 1:
            raise InvalidInputError(f"order must be >= 1, got {order}")
        if not 0.0 < forgetting <= 1.0:
            raise InvalidInputError(f"forgetting factor must be in (0, 1], got {forgetting}")
        if not init_scale > 0.0:
            raise InvalidInputError(f"init_scale must be > 0, got {init_scale}")
        self.order = int(order)
        self.forgetting = float(forgetting)
        self.init_scale = float(init_scale)
        self.coefficients = np.zeros(self.order)
        self.inverse_information = init_scale * np.eye(self.order)
        self.sample_count = 0

    def one_step(self, phi) -> float:
        """Linear prediction ``a . phi`` with the current coefficients."""
        phi = np.asarray(phi, dtype=float).reshape(-1)
        return float(self.coefficients @ phi)

    def update(self, phi, y: float) -> "RlsState":
        """Fold in one sample: regressors ``phi = (y_{t-1},...,y_{t-P})``,
        target ``y = y_t``."""
        phi = np.asarray(phi, dtype=float).reshape(-1)
        if phi.size != self.order:
            raise InvalidInputError(f"expected {self.order} regressors, got {phi.size}")
        if not (np.all(np.isfinite(phi)) and np.isfinite(y)):
            raise InvalidInputError("non-finite update sample")
        gamma = self.forgetting
        X = self.inverse_information
        Xphi = X @ phi
        denom = float(phi @ Xphi) + gamma
        if not np.isfinite(denom) or denom <= 0.0:
            raise NumericalDegeneracyError(
                f"update denominator {denom} is not positive; state has degenerated"
            )
        X = (X - np.outer(Xphi, Xphi) / denom) / gamma
        X = (X + X.T) / 2.0  # re-enforce symmetry each step
        if not np.all(np.isfinite(X)):
            raise NumericalDegeneracyError("inverse information matrix became non-finite")
        innovation = float(y) - float(self.coefficients @ phi)
        self.coefficients = self.coefficients + (X @ phi) * innovation
        self.inverse_information = X
        self.sample_count += 1
        return self

    def predict(self, history, horizon: int) -> np.ndarray:
        """Multi-step forecast with the current coefficients."""
        return ar_predict(self, history, horizon)

    def implied_ridge(self) -> float:
        """Ridge strength of the initialization prior after the updates seen."""
        return self.forgetting**self.sample_count / self.init_scale

    def __repr__(self) -> str:
        return (
            f"RlsState(order={self.order}, forgetting={self.forgetting}, "
            f"samples={self.sample_count}, coefficients={self.coefficients!r})"
        )
