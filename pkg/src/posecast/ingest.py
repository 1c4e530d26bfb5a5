"""Pose CSV ingestion and emission.

A sequence is stored as ``<name>.csv`` (header = dim labels, one frame
per row) plus a JSON sidecar ``<name>.json`` carrying the metadata the
CSV cannot: subject, action, fps, representation, dimension count, and
the Euler order convention for angle data.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError, ParseError, SchemaError
from .sequence import EULER_ORDER, REPRESENTATIONS, PoseSequence
from .skeleton import Skeleton, center_and_normalize


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_pose_csv(seq: PoseSequence, csv_path) -> None:
    """Write a sequence and its sidecar next to each other."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(seq.dim_labels)
        for row in seq.frames:
            writer.writerow([repr(float(v)) for v in row])
    sidecar = {
        "subject_id": seq.subject_id,
        "action": seq.action,
        "fps": seq.fps,
        "representation": seq.representation,
        "dims": seq.n_dims,
        "dim_labels": seq.dim_labels,
        "euler_order": EULER_ORDER,
    }
    with open(sidecar_path(csv_path), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def read_pose_csv(csv_path, sidecar=None) -> PoseSequence:
    """Read and validate a pose CSV with its JSON sidecar.

    Raises with the offending (1-based) data row number for ragged rows,
    unparseable fields, and non-finite values.
    """
    csv_path = Path(csv_path)
    sidecar = Path(sidecar) if sidecar is not None else sidecar_path(csv_path)
    if not sidecar.exists():
        raise ConfigError(f"missing sidecar: expected metadata at {sidecar}")
    with open(sidecar, encoding="utf-8") as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"sidecar {sidecar} is not valid JSON: {exc}") from exc
    try:
        dims = int(meta["dims"])
        representation = meta["representation"]
        fps = float(meta["fps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"sidecar {sidecar} missing or invalid field: {exc}") from exc
    if representation not in REPRESENTATIONS:
        raise SchemaError(
            f"sidecar {sidecar} declares unknown representation {representation!r}"
        )
    order = meta.get("euler_order", EULER_ORDER)
    if order != EULER_ORDER:
        raise SchemaError(f"unsupported euler order {order!r} (this build uses {EULER_ORDER})")

    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if len(header) != dims:
            raise SchemaError(
                f"{csv_path}: header has {len(header)} dims, sidecar declares {dims}"
            )
        rows = []
        for rownum, row in enumerate(reader, start=1):
            if len(row) != dims:
                raise ParseError(
                    f"row {rownum} has {len(row)} values, expected {dims}", line=rownum + 1
                )
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise ParseError(f"row {rownum}: {exc}", line=rownum + 1) from exc
            for v in values:
                if not math.isfinite(v):
                    raise InvalidInputError(
                        f"{csv_path}: non-finite value at row {rownum}"
                    )
            rows.append(values)
    if not rows:
        raise InvalidInputError(f"{csv_path}: no frames")
    return PoseSequence(
        frames=np.array(rows),
        representation=representation,
        fps=fps,
        subject_id=str(meta.get("subject_id", "")),
        action=str(meta.get("action", "")),
        dim_labels=list(header),
        meta={"euler_order": order},
    )


def ingest(csv_path, sidecar=None, skeleton: Skeleton = None, center: bool = False) -> PoseSequence:
    """Read a sequence, optionally passing positional data through
    center_and_normalize against the standardized skeleton."""
    seq = read_pose_csv(csv_path, sidecar)
    if center:
        if skeleton is None:
            raise ConfigError("--center requires a skeleton")
        seq = center_and_normalize(seq, skeleton)
    return seq


def read_directory(directory, skeleton: Skeleton = None, center: bool = False) -> list:
    """Ingest every ``*.csv`` in a directory (sorted for determinism)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise ConfigError(f"no CSV sequences found in {directory}")
    return [ingest(p, skeleton=skeleton, center=center) for p in paths]
