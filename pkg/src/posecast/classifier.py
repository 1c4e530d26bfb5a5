"""Linear max-margin classifier for selecting a bank individual.

One-vs-rest hinge loss, trained by stochastic subgradient descent with L2
regularization (Pegasos-style 1/(lam*t) step sizes).  Deterministic for a
fixed seed.

Feature maps are configurable because raw pose windows carry little of
the dynamics that separate individuals:

* ``window``   -- the flattened observation window (default).
* ``autocorr`` -- per-dimension sample autocorrelations at lags 1..k,
  which expose AR structure and make dynamics-separable classes linearly
  separable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SchemaError

FEATURE_WINDOW = "window"
FEATURE_AUTOCORR = "autocorr"
FEATURE_KINDS = (FEATURE_WINDOW, FEATURE_AUTOCORR)


def extract_features(window, kind: str = FEATURE_WINDOW, lags: int = 3) -> np.ndarray:
    """Feature vector for one ``(M, D)`` observation window."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2:
        raise InvalidInputError(f"window must be (M, D), got shape {window.shape}")
    if kind == FEATURE_WINDOW:
        return window.reshape(-1).copy()
    if kind == FEATURE_AUTOCORR:
        m, d = window.shape
        if m <= lags:
            raise InvalidInputError(f"window of {m} frames too short for {lags} lags")
        centered = window - window.mean(axis=0)
        c0 = np.sum(centered**2, axis=0)
        safe = np.where(c0 > 0.0, c0, 1.0)
        feats = np.empty((lags, d))
        for k in range(1, lags + 1):
            feats[k - 1] = np.sum(centered[k:] * centered[:-k], axis=0) / safe
        return feats.reshape(-1)
    raise InvalidInputError(f"unknown feature kind {kind!r}")


@dataclass
class LinearClassifier:
    """Per-class weight vectors over the standardized feature space.

    ``weights`` has one row per class over F features plus a trailing
    bias column; prediction is the argmax class score.
    """

    classes: list[str]
    weights: np.ndarray
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    feature_kind: str = FEATURE_WINDOW
    lags: int = 3

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.feature_mean = np.asarray(self.feature_mean, dtype=float)
        self.feature_scale = np.asarray(self.feature_scale, dtype=float)
        if not self.classes:
            raise InvalidInputError("classifier needs at least one class")
        if self.weights.shape != (len(self.classes), self.feature_mean.size + 1):
            raise InvalidInputError(
                f"weight matrix shape {self.weights.shape} does not match "
                f"{len(self.classes)} classes x {self.feature_mean.size}+1 features"
            )

    def _standardized(self, window) -> np.ndarray:
        feats = extract_features(window, self.feature_kind, self.lags)
        if feats.size != self.feature_mean.size:
            raise InvalidInputError(
                f"window yields {feats.size} features, classifier expects "
                f"{self.feature_mean.size}"
            )
        z = (feats - self.feature_mean) / self.feature_scale
        return np.append(z, 1.0)

    def decision_scores(self, window) -> np.ndarray:
        return self.weights @ self._standardized(window)

    def predict(self, window) -> str:
        return self.classes[int(np.argmax(self.decision_scores(window)))]

    @classmethod
    def fit(
        cls,
        windows,
        labels,
        feature_kind: str = FEATURE_WINDOW,
        lags: int = 3,
        epochs: int = 30,
        lam: float = 1e-3,
        seed: int = 0,
    ) -> "LinearClassifier":
        """Train one-vs-rest hinge-loss classifiers by seeded SGD."""
        labels = [str(x) for x in labels]
        if len(windows) != len(labels) or not windows:
            raise InvalidInputError("need equally many windows and labels, at least one")
        X = np.stack([extract_features(w, feature_kind, lags) for w in windows])
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        Z = np.hstack([(X - mean) / scale, np.ones((X.shape[0], 1))])
        classes = sorted(set(labels))
        y = np.array([classes.index(lbl) for lbl in labels])

        weights = np.zeros((len(classes), Z.shape[1]))
        if len(classes) > 1:
            rng = np.random.default_rng(seed)
            for c in range(len(classes)):
                sign = np.where(y == c, 1.0, -1.0)
                w = np.zeros(Z.shape[1])
                t = 0
                for _ in range(epochs):
                    for i in rng.permutation(Z.shape[0]):
                        t += 1
                        eta = 1.0 / (lam * t)
                        margin = sign[i] * (w @ Z[i])
                        w *= 1.0 - eta * lam
                        if margin < 1.0:
                            w += eta * sign[i] * Z[i]
                weights[c] = w
        return cls(
            classes=classes,
            weights=weights,
            feature_mean=mean,
            feature_scale=scale,
            feature_kind=feature_kind,
            lags=lags,
        )

    def save(self, path) -> None:
        obj = {
            "classes": self.classes,
            "weights": self.weights.tolist(),
            "feature_mean": self.feature_mean.tolist(),
            "feature_scale": self.feature_scale.tolist(),
            "feature_kind": self.feature_kind,
            "lags": self.lags,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearClassifier":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        try:
            return cls(
                classes=[str(c) for c in obj["classes"]],
                weights=obj["weights"],
                feature_mean=obj["feature_mean"],
                feature_scale=obj["feature_scale"],
                feature_kind=obj.get("feature_kind", FEATURE_WINDOW),
                lags=int(obj.get("lags", 3)),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed classifier file: {exc}") from exc
