"""Run reports: plot-ready curve CSVs plus a schema-validated JSON summary.

The report embeds a content hash over everything except the timestamp,
so identical configurations and seeds produce byte-identical reports
(modulo ``created_at``) and the hash certifies it.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import SchemaError
from .metrics import ErrorCurve

SCHEMA_VERSION = 1

_HASH_EXCLUDED = ("created_at", "content_hash")


def _schema() -> dict:
    with resources.files("posecast.schemas").joinpath("report.schema.json").open() as fh:
        return json.load(fh)


def _canonical(body: dict) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"))


def content_hash(report: dict) -> str:
    """SHA-256 over the canonical report body, timestamp excluded."""
    body = {k: v for k, v in report.items() if k not in _HASH_EXCLUDED}
    return hashlib.sha256(_canonical(body).encode()).hexdigest()


def curve_payload(source: str, curve: ErrorCurve, aggregate: float = None) -> dict:
    return {
        "source": source,
        "metric": curve.metric,
        "fps": curve.fps,
        "horizon_ms": [float(x) for x in curve.horizon_ms],
        "values": [float(v) for v in curve.values],
        "counts": [int(c) for c in curve.counts],
        "aggregate": None if aggregate is None else float(aggregate),
    }


def build_report(
    config: dict,
    models: list,
    curves: dict,
    aggregates: dict = None,
    anchor_counts: dict = None,
    skipped: list = None,
    timestamp: bool = True,
) -> dict:
    """Assemble the report object (curves keyed by source name)."""
    aggregates = aggregates or {}
    report = {
        "schema_version": SCHEMA_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat() if timestamp else None,
        "config": config,
        "models": [
            {"name": str(m["name"]), "parameter_count": int(m["parameter_count"])}
            for m in models
        ],
        "curves": [
            curve_payload(source, curves[source], aggregates.get(source))
            for source in sorted(curves)
        ],
        "evaluation": {
            "anchor_counts": {str(k): v for k, v in (anchor_counts or {}).items()},
            "skipped": list(skipped or []),
        },
    }
    report["content_hash"] = content_hash(report)
    return report


def validate_report(report: dict) -> None:
    try:
        jsonschema.validate(report, _schema())
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"report does not match schema: {exc.message}") from exc
    if report["content_hash"] != content_hash(report):
        raise SchemaError("report content hash does not match its body")


def write_report(report: dict, path) -> None:
    validate_report(report)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    validate_report(report)
    return report


def write_curves(curves: dict, outdir) -> list:
    """One ``curve_<source>.csv`` per source; returns paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for source in sorted(curves):
        path = outdir / f"curve_{source}.csv"
        curves[source].write_csv(path)
        paths.append(path)
    return paths
