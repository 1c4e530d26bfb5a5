"""Per-individual AR model banks and oracle selection schemes.

A bank holds one fitted AR model per dimension for every training
individual.  Selection schemes pick, for a test sequence, the individual
(or per-dimension mix of individuals) whose models predict it best.  Both
oracles rank candidates by the same per-dimension error matrix, so the
per-dimension composite can never be worse than the per-person pick.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .ar import DEFAULT_RIDGE, ArModel, ar_predict, bic_order_select, fit_ar_batch
from .errors import InvalidInputError, SchemaError
from .sequence import PoseSequence, fitting_view

ERROR_ONE_STEP = "one-step"
ERROR_HORIZON = "horizon"


@dataclass
class ModelBank:
    """Map individual id -> list of D per-dimension AR models."""

    individuals: dict
    dims: int
    fps: float = 25.0
    representation: str = "positions_cm"

    def __post_init__(self):
        if not self.individuals:
            raise InvalidInputError("bank has no individuals")
        for ind, models in self.individuals.items():
            if len(models) != self.dims:
                raise InvalidInputError(
                    f"individual {ind!r} has {len(models)} models for {self.dims} dims"
                )

    @property
    def ids(self) -> list[str]:
        return sorted(self.individuals)

    def max_order(self) -> int:
        return max(m.order for models in self.individuals.values() for m in models)

    def parameter_count(self) -> int:
        return sum(m.order for models in self.individuals.values() for m in models)

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "dims": self.dims,
            "fps": self.fps,
            "representation": self.representation,
            "individuals": self.ids,
        }
        with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
        for ind in self.ids:
            sub = directory / str(ind)
            sub.mkdir(exist_ok=True)
            for k, model in enumerate(self.individuals[ind]):
                model.save(sub / f"dim_{k}.json")

    @classmethod
    def load(cls, directory) -> "ModelBank":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise SchemaError(f"bank manifest not found: {manifest_path}")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        dims = int(manifest["dims"])
        individuals = {}
        for ind in manifest["individuals"]:
            models = []
            for k in range(dims):
                path = directory / str(ind) / f"dim_{k}.json"
                if not path.exists():
                    raise SchemaError(f"missing model file {path}")
                models.append(ArModel.load(path))
            individuals[str(ind)] = models
        return cls(
            individuals=individuals,
            dims=dims,
            fps=float(manifest.get("fps", 25.0)),
            representation=manifest.get("representation", "positions_cm"),
        )


def _group_sequences(sequences) -> dict:
    if isinstance(sequences, Mapping):
        return {str(k): list(v) for k, v in sequences.items()}
    groups: dict = {}
    for seq in sequences:
        groups.setdefault(str(seq.subject_id), []).append(seq)
    return groups


def train_bank(
    sequences,
    max_order: int,
    forgetting: float = 1.0,
    ridge: float = DEFAULT_RIDGE,
) -> ModelBank:
    """Fit one AR model per individual and dimension, order chosen by BIC.

    ``sequences`` is an iterable of PoseSequence (grouped by subject id)
    or a mapping of id -> sequences.  Constant dimensions are recorded as
    order-0 models with zero innovation variance.
    """
    groups = _group_sequences(sequences)
    if not groups:
        raise InvalidInputError("no training sequences")
    dims = None
    fps = None
    representation = None
    individuals = {}
    for ind, seqs in groups.items():
        views = [fitting_view(s) for s in seqs]
        if dims is None:
            dims, fps, representation = seqs[0].n_dims, seqs[0].fps, seqs[0].representation
        for s in seqs:
            if s.n_dims != dims:
                raise InvalidInputError("sequences disagree on dimension count")
        models = []
        for d in range(dims):
            series = [v[:, d] for v in views]
            flat = np.concatenate(series)
            if np.ptp(flat) == 0.0:
                models.append(ArModel(order=0, coefficients=np.empty(0)))
                continue
            selection = bic_order_select(series, max_order, forgetting=forgetting, ridge=ridge)
            models.append(
                fit_ar_batch(series, selection.order, forgetting=forgetting, ridge=ridge)
            )
        individuals[ind] = models
    return ModelBank(
        individuals=individuals, dims=dims, fps=fps, representation=representation
    )


def _frames_of(seq_or_frames) -> np.ndarray:
    if isinstance(seq_or_frames, PoseSequence):
        return fitting_view(seq_or_frames)
    frames = np.asarray(seq_or_frames, dtype=float)
    if frames.ndim != 2:
        raise InvalidInputError(f"expected (T, D) frames, got shape {frames.shape}")
    return frames


def selection_error_matrix(
    bank: ModelBank,
    seq_or_frames,
    error: str = ERROR_ONE_STEP,
    horizon: int = 1,
    stride: int = 1,
):
    """Per-candidate, per-dimension mean squared forecast error.

    Returns ``(ids, E)`` with ``E[i, d]`` the error of candidate
    ``ids[i]``'s model for dimension d on the given sequence.  One-step
    errors run over the whole observed prefix; horizon errors forecast
    ``horizon`` steps from each anchor.  All candidates are scored on the
    same targets so the numbers are comparable.
    """
    frames = _frames_of(seq_or_frames)
    if frames.shape[1] != bank.dims:
        raise InvalidInputError(
            f"sequence has {frames.shape[1]} dims, bank has {bank.dims}"
        )
    ids = bank.ids
    T = frames.shape[0]
    pmax = max(bank.max_order(), 1)
    E = np.zeros((len(ids), bank.dims))

    if error == ERROR_ONE_STEP:
        if T <= pmax:
            raise InvalidInputError(f"sequence of length {T} too short for order {pmax}")
        for i, ind in enumerate(ids):
            for d, model in enumerate(bank.individuals[ind]):
                y = frames[:, d]
                targets = y[pmax:]
                if model.order == 0:
                    pred = np.zeros_like(targets)
                else:
                    phi = np.stack(
                        [y[pmax - 1 - k : T - 1 - k] for k in range(model.order)], axis=1
                    )
                    pred = phi @ model.coefficients
                E[i, d] = float(np.mean((targets - pred) ** 2))
        return ids, E

    if error == ERROR_HORIZON:
        anchors = list(range(pmax, T - horizon + 1, stride))
        if not anchors:
            raise InvalidInputError(
                f"sequence of length {T} too short for horizon {horizon} evaluation"
            )
        for i, ind in enumerate(ids):
            for d, model in enumerate(bank.individuals[ind]):
                y = frames[:, d]
                sse = 0.0
                for t in anchors:
                    pred = ar_predict(model, y[t - pmax : t], horizon)
                    sse += float(np.sum((pred - y[t : t + horizon]) ** 2))
                E[i, d] = sse / (len(anchors) * horizon)
        return ids, E

    raise InvalidInputError(f"unknown selection error {error!r}")


def oracle_classify(
    bank: ModelBank,
    seq_or_frames,
    error: str = ERROR_ONE_STEP,
    horizon: int = 1,
    stride: int = 1,
) -> str:
    """The candidate whose models give the lowest total prediction error;
    ties go to the lexicographically smallest id."""
    ids, E = selection_error_matrix(bank, seq_or_frames, error, horizon, stride)
    return ids[int(np.argmin(E.sum(axis=1)))]


def oracle_classify_per_dimension(
    bank: ModelBank,
    seq_or_frames,
    error: str = ERROR_ONE_STEP,
    horizon: int = 1,
    stride: int = 1,
) -> list[str]:
    """Independent best candidate per dimension (finer argmin over the
    same error matrix, so the composite error never exceeds the
    per-person oracle's)."""
    ids, E = selection_error_matrix(bank, seq_or_frames, error, horizon, stride)
    return [ids[int(i)] for i in np.argmin(E, axis=0)]


def oracle_refit(
    bank: ModelBank,
    individual_id: str,
    seq_or_frames,
    forgetting: float = 1.0,
    ridge: float = DEFAULT_RIDGE,
) -> list[ArModel]:
    """Refit the selected individual's lag structure on new data: orders
    are copied per dimension, coefficients re-estimated."""
    if individual_id not in bank.individuals:
        raise InvalidInputError(f"unknown individual {individual_id!r}")
    frames = _frames_of(seq_or_frames)
    if frames.shape[1] != bank.dims:
        raise InvalidInputError(
            f"sequence has {frames.shape[1]} dims, bank has {bank.dims}"
        )
    refitted = []
    for d, model in enumerate(bank.individuals[individual_id]):
        refitted.append(
            fit_ar_batch(frames[:, d], model.order, forgetting=forgetting, ridge=ridge)
        )
    return refitted


def composite_error(ids_or_choice, E_ids, E) -> float:
    """Total error of a selection: one id for all dims, or one id per dim."""
    index = {ind: i for i, ind in enumerate(E_ids)}
    if isinstance(ids_or_choice, str):
        return float(E[index[ids_or_choice]].sum())
    choice = list(ids_or_choice)
    if len(choice) != E.shape[1]:
        raise InvalidInputError(f"{len(choice)} choices for {E.shape[1]} dims")
    return float(sum(E[index[ind], d] for d, ind in enumerate(choice)))
