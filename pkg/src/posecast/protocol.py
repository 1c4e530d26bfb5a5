"""The windowed evaluation protocol.

Streaming mode walks every time step of a test sequence, keeps predictor
and corrector memory warm, and emits a forecast at each anchor
``t = M, M+stride, ...,  T-N`` (``t`` counts observed frames).  Legacy
mode reproduces the fixed-window task: the predictor is reset at every
anchor and sees only the last M frames, carrying no memory.

Prediction generation is strictly causal: no frame at or beyond the
current anchor is read until the anchor's forecast has been emitted.
Scoring happens afterwards, from the emitted records.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

from .corrector import ResidualCorrector
from .errors import ConfigError, InvalidInputError
from .external import SOURCE_CORRECTED, ForecastRecord
from .metrics import (
    METRIC_MEA,
    METRIC_MPJE,
    METRICS,
    CurveAccumulator,
    aggregate_objective,
    stepwise_metric,
)
from .predictors import Predictor
from .rotations import expmap_frames_to_euler
from .sequence import REPR_EXPMAP, REPR_POSITIONS, REPRESENTATIONS, PoseSequence

MODE_STREAMING = "streaming"
MODE_LEGACY = "legacy"
MODES = (MODE_STREAMING, MODE_LEGACY)

DEFAULT_SPLIT = {"train": ["1", "6", "7", "9"], "val": ["11"], "test": ["5"]}


@dataclass
class SplitConfig:
    train: list = field(default_factory=lambda: list(DEFAULT_SPLIT["train"]))
    val: list = field(default_factory=lambda: list(DEFAULT_SPLIT["val"]))
    test: list = field(default_factory=lambda: list(DEFAULT_SPLIT["test"]))

    def __post_init__(self):
        self.train = [str(x) for x in self.train]
        self.val = [str(x) for x in self.val]
        self.test = [str(x) for x in self.test]
        groups = self.train + self.val + self.test
        if len(set(groups)) != len(groups):
            raise ConfigError("split ids must be disjoint")


@dataclass
class ProtocolConfig:
    observe: int = 10
    predict: int = 25
    fps: float = 25.0
    representation: str = REPR_POSITIONS
    stride: int = 1
    mode: str = MODE_STREAMING
    metric: str = ""
    seed: int = 0
    split: SplitConfig = field(default_factory=SplitConfig)

    def __post_init__(self):
        if self.observe < 1 or self.predict < 1:
            raise ConfigError("observe and predict must be >= 1")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.fps <= 0:
            raise ConfigError("fps must be > 0")
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(f"unknown representation {self.representation!r}")
        if not self.metric:
            self.metric = (
                METRIC_MPJE if self.representation == REPR_POSITIONS else METRIC_MEA
            )
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")

    def to_dict(self) -> dict:
        return {
            "observe": self.observe,
            "predict": self.predict,
            "fps": self.fps,
            "representation": self.representation,
            "stride": self.stride,
            "mode": self.mode,
            "metric": self.metric,
            "seed": self.seed,
            "split": {"train": self.split.train, "val": self.split.val, "test": self.split.test},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolConfig":
        proto = dict(data.get("protocol", {}))
        split = data.get("split", {})
        kwargs = {
            k: proto[k]
            for k in ("observe", "predict", "fps", "representation", "stride", "mode", "metric", "seed")
            if k in proto
        }
        if split:
            kwargs["split"] = SplitConfig(
                train=split.get("train", DEFAULT_SPLIT["train"]),
                val=split.get("val", DEFAULT_SPLIT["val"]),
                test=split.get("test", DEFAULT_SPLIT["test"]),
            )
        return cls(**kwargs)

    @classmethod
    def from_toml(cls, path) -> "ProtocolConfig":
        return cls.from_dict(load_toml(path))


def load_toml(path) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib as toml
    else:
        import tomli as toml
    with open(path, "rb") as fh:
        return toml.load(fh)


def expected_anchor_count(n_frames: int, observe: int, predict: int, stride: int) -> int:
    """Anchors evaluated for one sequence: floor((T-M-N)/stride) + 1."""
    if n_frames < observe + predict:
        return 0
    return (n_frames - observe - predict) // stride + 1


def generate_records(
    frames,
    observe: int,
    predict: int,
    stride: int = 1,
    predictor: Predictor = None,
    corrector: ResidualCorrector = None,
    mode: str = MODE_STREAMING,
) -> dict:
    """Causal prediction pass over one sequence.

    ``frames`` only needs ``shape`` and row indexing, so instrumented
    wrappers can audit the access pattern.  Returns records grouped by
    source name.  In streaming mode the corrector is stepped at *every*
    frame (residuals need the base's one-step forecast each step), while
    records are only emitted at anchors.
    """
    if predictor is None:
        raise InvalidInputError("a predictor is required")
    if mode not in MODES:
        raise InvalidInputError(f"unknown mode {mode!r}")
    if mode == MODE_LEGACY and corrector is not None:
        raise InvalidInputError("the corrector carries memory; legacy mode forbids it")
    T = frames.shape[0]
    if T < observe + predict:
        raise InvalidInputError(
            f"sequence of {T} frames too short for observe={observe}, predict={predict}"
        )

    out: dict = {predictor.name: []}
    if corrector is not None:
        out[SOURCE_CORRECTED] = []

    if mode == MODE_LEGACY:
        predictor.reset()
        for t in range(observe, T - predict + 1, stride):
            predictor.reset()
            for i in range(t - observe, t):
                predictor.observe(frames[i])
            base = predictor.predict(predict)
            out[predictor.name].append(
                ForecastRecord(t, predict, np.array(base), source=predictor.name)
            )
        return out

    predictor.reset()
    if corrector is not None:
        corrector.reset()
    for i in range(observe):
        predictor.observe(frames[i])
    for t in range(observe, T - predict + 1):
        if t > observe:
            predictor.observe(frames[t - 1])
        at_anchor = (t - observe) % stride == 0
        if not at_anchor and corrector is None:
            continue  # the base predictor is only queried when needed
        base = predictor.predict(predict)
        corrected = None
        if corrector is not None:
            corrected = corrector.step(frames[t - 1], base)
        if at_anchor:
            out[predictor.name].append(
                ForecastRecord(t, predict, np.array(base), source=predictor.name)
            )
            if corrected is not None:
                out[SOURCE_CORRECTED].append(
                    ForecastRecord(t, predict, np.array(corrected), source=SOURCE_CORRECTED)
                )
    return out


@dataclass
class RunResult:
    curves: dict
    aggregates: dict
    anchor_log: list
    anchor_counts: dict
    skipped: list

    def sources(self) -> list:
        return sorted(self.curves)


def run_protocol(
    config: ProtocolConfig,
    sequences,
    predictor: Predictor,
    corrector: ResidualCorrector = None,
) -> RunResult:
    """Evaluate a predictor (optionally corrected) over test sequences.

    Produces one error curve per source, the per-anchor log, and the
    per-individual aggregate objective.  Sequences shorter than
    observe+predict are skipped with a warning entry, not an error.
    """
    if isinstance(sequences, PoseSequence):
        sequences = [sequences]
    sequences = list(sequences)
    if not sequences:
        raise InvalidInputError("no sequences to evaluate")

    metric = config.metric
    accumulators: dict = {}
    per_individual: dict = {}
    anchor_log = []
    anchor_counts = {}
    skipped = []

    for seq in sequences:
        seq_name = f"{seq.subject_id}/{seq.action}" if seq.action else seq.subject_id
        if seq.n_frames < config.observe + config.predict:
            skipped.append(seq_name)
            continue
        if metric == METRIC_MEA and seq.representation != REPR_EXPMAP:
            raise InvalidInputError("mea evaluation requires exp-map sequences")
        if metric == METRIC_MPJE and seq.representation != REPR_POSITIONS:
            raise InvalidInputError("mpje evaluation requires positional sequences")

        records_by_source = generate_records(
            seq.frames,
            config.observe,
            config.predict,
            config.stride,
            predictor,
            corrector,
            mode=config.mode,
        )
        truth = seq.frames
        if metric == METRIC_MEA:
            truth = expmap_frames_to_euler(truth)
        count = None
        for source, records in records_by_source.items():
            acc = accumulators.setdefault(source, CurveAccumulator(metric, config.fps))
            for rec in records:
                pred = rec.prediction
                if metric == METRIC_MEA:
                    pred = expmap_frames_to_euler(pred)
                steps = stepwise_metric(pred, truth[rec.anchor_t : rec.anchor_t + rec.horizon], metric)
                acc.add(steps)
                scalar = float(steps.mean())
                anchor_log.append(
                    {
                        "sequence": seq_name,
                        "anchor": int(rec.anchor_t),
                        "source": source,
                        "error": scalar,
                    }
                )
                per_individual.setdefault(source, {}).setdefault(seq.subject_id, []).append(scalar)
            count = len(records)
        anchor_counts[seq_name] = count

    if not accumulators:
        raise InvalidInputError("all sequences were too short to evaluate")

    curves = {source: acc.curve() for source, acc in accumulators.items()}
    aggregates = {
        source: aggregate_objective(groups) for source, groups in per_individual.items()
    }
    return RunResult(
        curves=curves,
        aggregates=aggregates,
        anchor_log=anchor_log,
        anchor_counts=anchor_counts,
        skipped=skipped,
    )
