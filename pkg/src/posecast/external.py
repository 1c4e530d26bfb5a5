"""Forecast records and the JSON-lines interchange format.

One line per anchor: ``{"t": int, "N": int, "D": int, "pred": [[...], ...]}``
where ``t`` counts the frames observed before the forecast (so row h of
``pred`` predicts frame ``t + h`` of the sequence, 0-based).  Exporters
from any framework can emit this; the benchmark ingests it unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ParseError, SchemaError

SOURCE_BASE = "base"
SOURCE_CORRECTED = "corrected"


@dataclass
class ForecastRecord:
    """One N-step forecast anchored after ``anchor_t`` observed frames."""

    anchor_t: int
    horizon: int
    prediction: np.ndarray
    source: str = SOURCE_BASE

    def __post_init__(self):
        self.prediction = np.asarray(self.prediction, dtype=float)
        if self.prediction.ndim != 2:
            raise InvalidInputError(
                f"prediction must be (N, D), got shape {self.prediction.shape}"
            )
        if self.prediction.shape[0] != self.horizon:
            raise InvalidInputError(
                f"horizon {self.horizon} but prediction has {self.prediction.shape[0]} rows"
            )
        if self.anchor_t < 0:
            raise InvalidInputError(f"anchor must be >= 0, got {self.anchor_t}")
        if not np.all(np.isfinite(self.prediction)):
            raise InvalidInputError("prediction contains non-finite values")

    @property
    def dims(self) -> int:
        return self.prediction.shape[1]


def load_external_predictions(path, expected_dims: int | None = None) -> list[ForecastRecord]:
    """Read and validate a JSON-lines prediction file.

    Enforces per-record shape and finiteness, strictly increasing anchors,
    and (when given) the dimension count of the sequence under evaluation.
    """
    records: list[ForecastRecord] = []
    last_anchor = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            try:
                t, n, d, pred = obj["t"], obj["N"], obj["D"], obj["pred"]
            except (KeyError, TypeError) as exc:
                raise ParseError(f"missing field {exc}", line=lineno) from exc
            pred = np.asarray(pred, dtype=float)
            if pred.shape != (n, d):
                raise SchemaError(
                    f"line {lineno}: declared shape {n}x{d} but pred is "
                    f"{'x'.join(str(s) for s in pred.shape)}"
                )
            if expected_dims is not None and d != expected_dims:
                raise SchemaError(
                    f"line {lineno}: record has D={d}, sequence has D={expected_dims}"
                )
            if not np.all(np.isfinite(pred)):
                raise SchemaError(f"line {lineno}: non-finite prediction values")
            if last_anchor is not None and t <= last_anchor:
                raise SchemaError(
                    f"line {lineno}: anchor {t} not greater than previous {last_anchor}"
                )
            last_anchor = t
            records.append(ForecastRecord(anchor_t=int(t), horizon=int(n), prediction=pred))
    return records


def write_external_predictions(records, path) -> None:
    """Emit records in the JSON-lines interchange format."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "t": int(rec.anchor_t),
                "N": int(rec.horizon),
                "D": int(rec.dims),
                "pred": [[float(v) for v in row] for row in rec.prediction],
            }
            fh.write(json.dumps(obj) + "\n")
