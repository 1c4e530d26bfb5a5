"""Online residual correction of a base predictor.

The corrector watches the stream of observations and the base predictor's
forecasts, maintains one RLS-estimated AR model per dimension on the
base's one-step residuals, and adds the AR extrapolation of the newest
residual to every forecast horizon.  Only one-step residuals ever train
the estimators; longer horizons are corrected by extrapolation alone, so
the correction decays geometrically for stable coefficients.
"""

from __future__ import annotations

import numpy as np

from .ar import DEFAULT_FORGETTING, ar_predict
from .errors import InvalidInputError
from .rls import DEFAULT_INIT_SCALE, RlsState


class ResidualCorrector:
    """Per-dimension AR(order) residual corrector over a base predictor.

    Call ``step`` once per time step, in order.  Until a prior base
    forecast exists the corrector passes the base prediction through
    unchanged (cold start).  The base predictor is never touched.
    """

    def __init__(
        self,
        dims: int,
        order: int = 1,
        forgetting: float = DEFAULT_FORGETTING,
        init_scale: float = DEFAULT_INIT_SCALE,
    ):
        if dims < 1:
            raise InvalidInputError(f"dims must be >= 1, got {dims}")
        self.dims = int(dims)
        self.order = int(order)
        self.forgetting = float(forgetting)
        self.init_scale = float(init_scale)
        self.states = [RlsState(order, forgetting, init_scale) for _ in range(dims)]
        self._prev_one_step = None
        self._residuals: list[np.ndarray] = []  # last `order` residual vectors
        self.last_base = None
        self.last_correction = None
        self.last_residual = None

    def reset(self) -> None:
        self.states = [
            RlsState(self.order, self.forgetting, self.init_scale) for _ in range(self.dims)
        ]
        self._prev_one_step = None
        self._residuals = []
        self.last_base = None
        self.last_correction = None
        self.last_residual = None

    @property
    def coefficients(self) -> np.ndarray:
        """Current per-dimension coefficient matrix, shape (D, order)."""
        return np.stack([s.coefficients for s in self.states])

    def parameter_count(self) -> int:
        return self.dims * self.order

    def step(self, observed, base_prediction) -> np.ndarray:
        """Update with the newly observed frame and correct the base forecast.

        ``observed`` is the frame that just became visible; row 0 of
        ``base_prediction`` must be the base's forecast of the *next*
        frame.  Returns ``base_prediction + correction``.
        """
        observed = np.asarray(observed, dtype=float).reshape(-1)
        base = np.asarray(base_prediction, dtype=float)
        if observed.size != self.dims:
            raise InvalidInputError(f"observed has {observed.size} dims, corrector has {self.dims}")
        if base.ndim != 2 or base.shape[1] != self.dims:
            raise InvalidInputError(
                f"base prediction must be (N, {self.dims}), got shape {base.shape}"
            )
        if not (np.all(np.isfinite(observed)) and np.all(np.isfinite(base))):
            raise InvalidInputError("non-finite corrector inputs")

        horizon = base.shape[0]
        if self._prev_one_step is None:
            correction = np.zeros_like(base)
            self.last_residual = None
        else:
            residual = observed - self._prev_one_step
            if len(self._residuals) >= self.order:
                for d, state in enumerate(self.states):
                    phi = [self._residuals[-1 - k][d] for k in range(self.order)]
                    state.update(phi, residual[d])
            self._residuals.append(residual)
            del self._residuals[: -self.order]
            hist = np.zeros((self.order, self.dims))
            got = np.stack(self._residuals)
            hist[self.order - got.shape[0] :] = got
            correction = np.empty_like(base)
            for d, state in enumerate(self.states):
                correction[:, d] = ar_predict(state, hist[:, d], horizon)
            self.last_residual = residual
        corrected = base + correction
        # the base stays recoverable: corrected is exactly last_base + last_correction
        self.last_base = base.copy()
        self.last_correction = correction
        self._prev_one_step = base[0].copy()
        return corrected
