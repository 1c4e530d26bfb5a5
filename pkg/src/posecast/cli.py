"""Benchmark command line.

Subcommands: synth, ingest-check, fit-bank, classify, evaluate, report.
Exit codes: 0 success, 1 validation/configuration error, 2 numerical
degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bank import (
    ERROR_HORIZON,
    ERROR_ONE_STEP,
    ModelBank,
    oracle_classify,
    oracle_classify_per_dimension,
    train_bank,
)
from .classifier import FEATURE_KINDS, FEATURE_WINDOW, LinearClassifier
from .corrector import ResidualCorrector
from .errors import ConfigError, InvalidInputError, NumericalError, PosecastError
from .external import load_external_predictions
from .ingest import ingest, read_directory, write_pose_csv
from .metrics import METRICS
from .predictors import (
    RidgePredictor,
    ScriptedPredictor,
    ZeroVelocityPredictor,
    ridge_regression_fit,
)
from .protocol import (
    MODE_STREAMING,
    MODES,
    ProtocolConfig,
    load_toml,
    run_protocol,
)
from .report import build_report, write_curves, write_report
from .skeleton import Skeleton
from .synth import SyntheticSpec, generate


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for numerical failures
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posecast", description=__doc__)
    parser.add_argument("--version", action="version", version=f"posecast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[], help="generate seeded synthetic sequences")
    p.add_argument("--spec", required=True, help="SyntheticSpec JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--allow-unstable", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate pose CSV files")
    p.add_argument("paths", nargs="+", help="CSV files to check")
    p.add_argument("--skeleton", help="standardized skeleton JSON")
    p.add_argument("--center", action="store_true", help="run center_and_normalize")
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("fit-bank", help="train per-individual AR model banks")
    p.add_argument("--data", required=True, help="directory of training CSVs")
    p.add_argument("--out", required=True, help="bank output directory")
    p.add_argument("--bic-max", type=int, default=5, help="max AR order for BIC")
    p.add_argument("--gamma", type=float, default=1.0, help="forgetting factor")
    p.set_defaults(func=cmd_fit_bank)

    p = sub.add_parser("classify", help="select a bank individual for a sequence")
    p.add_argument("--bank", required=True)
    p.add_argument("--input", help="test sequence CSV")
    p.add_argument(
        "--scheme", choices=["oracle", "per-dimension", "svm"], default="oracle"
    )
    p.add_argument("--error", choices=[ERROR_ONE_STEP, ERROR_HORIZON], default=ERROR_ONE_STEP)
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--svm-model", help="trained classifier JSON (scheme svm)")
    p.add_argument("--observe", type=int, default=10, help="window length for svm features")
    p.add_argument("--fit-svm", action="store_true", help="train the svm instead of classifying")
    p.add_argument("--data", help="training CSV directory (with --fit-svm)")
    p.add_argument("--out", help="classifier output path (with --fit-svm)")
    p.add_argument("--feature", choices=list(FEATURE_KINDS), default=FEATURE_WINDOW)
    p.add_argument("--lags", type=int, default=3)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lam", type=float, default=1e-3)
    p.add_argument("--window-stride", type=int, help="training window stride (default: observe)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="run the windowed protocol")
    p.add_argument("--input", required=True, help="test CSV or directory")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="TOML config with [protocol]/[split] tables")
    p.add_argument("--mode", choices=list(MODES))
    p.add_argument("--metric", choices=list(METRICS))
    p.add_argument("--observe", type=int)
    p.add_argument("--predict", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--base",
        choices=["zero-velocity", "ridge", "external"],
        default="zero-velocity",
        help="base (trend) predictor",
    )
    p.add_argument("--predictions", help="JSON-lines NN predictions (base external)")
    p.add_argument("--train", help="training CSV directory (base ridge)")
    p.add_argument("--train-stride", type=int, help="window stride for ridge training")
    p.add_argument("--ridge-lam", type=float, default=1.0)
    p.add_argument("--corrector", action="store_true", help="apply the online AR corrector")
    p.add_argument("--order", type=int, default=1, help="corrector AR order")
    p.add_argument("--gamma", type=float, default=0.99, help="corrector forgetting factor")
    p.add_argument("--init-scale", type=float, default=1e4)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="assemble a report from curve CSVs")
    p.add_argument("--curves", nargs="+", required=True, help="curve_<source>.csv files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--fps", type=float, default=25.0)
    p.set_defaults(func=cmd_report)
    return parser


def cmd_synth(args) -> int:
    spec = SyntheticSpec.load(args.spec)
    sequences, manifest = generate(spec, allow_unstable=args.allow_unstable)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    for ind_id in sorted(sequences):
        path = outdir / f"{ind_id}.csv"
        write_pose_csv(sequences[ind_id], path)
        files[ind_id] = path.name
        print(f"wrote {path} ({sequences[ind_id].n_frames} frames)")
    manifest["files"] = files
    with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {outdir / 'manifest.json'}")
    return 0


def cmd_ingest_check(args) -> int:
    skeleton = Skeleton.load(args.skeleton) if args.skeleton else None
    for path in args.paths:
        seq = ingest(path, skeleton=skeleton, center=args.center)
        print(
            f"{path}: ok ({seq.n_frames} frames x {seq.n_dims} dims, "
            f"{seq.representation}, {seq.fps:g} fps, subject {seq.subject_id!r})"
        )
    return 0


def cmd_fit_bank(args) -> int:
    seqs = read_directory(args.data)
    bank = train_bank(seqs, max_order=args.bic_max, forgetting=args.gamma)
    bank.save(args.out)
    orders = {
        ind: [m.order for m in models] for ind, models in sorted(bank.individuals.items())
    }
    print(f"bank with {len(bank.individuals)} individuals x {bank.dims} dims -> {args.out}")
    for ind, os in orders.items():
        print(f"  {ind}: orders {os}")
    return 0


def _training_windows(seqs, observe, stride):
    windows, labels = [], []
    for seq in seqs:
        step = stride or observe
        for start in range(0, seq.n_frames - observe + 1, step):
            windows.append(seq.frames[start : start + observe])
            labels.append(seq.subject_id)
    if not windows:
        raise InvalidInputError("training sequences shorter than the observation window")
    return windows, labels


def cmd_classify(args) -> int:
    if args.fit_svm:
        if not (args.data and args.out):
            raise ConfigError("--fit-svm requires --data and --out")
        seqs = read_directory(args.data)
        windows, labels = _training_windows(seqs, args.observe, args.window_stride)
        clf = LinearClassifier.fit(
            windows,
            labels,
            feature_kind=args.feature,
            lags=args.lags,
            epochs=args.epochs,
            lam=args.lam,
            seed=args.seed,
        )
        clf.save(args.out)
        print(f"trained classifier over {sorted(set(labels))} -> {args.out}")
        return 0

    if not args.input:
        raise ConfigError("--input is required unless --fit-svm")
    bank = ModelBank.load(args.bank)
    seq = ingest(args.input)
    if args.scheme == "oracle":
        chosen = oracle_classify(bank, seq, error=args.error, horizon=args.horizon)
        print(chosen)
    elif args.scheme == "per-dimension":
        chosen = oracle_classify_per_dimension(bank, seq, error=args.error, horizon=args.horizon)
        print(json.dumps(chosen))
    else:
        if not args.svm_model:
            raise ConfigError("scheme svm requires --svm-model")
        clf = LinearClassifier.load(args.svm_model)
        if seq.n_frames < args.observe:
            raise InvalidInputError(
                f"sequence has {seq.n_frames} frames, window needs {args.observe}"
            )
        print(clf.predict(seq.frames[-args.observe :]))
    return 0


def _build_config(args, representation: str) -> ProtocolConfig:
    data = dict(load_toml(args.config)) if args.config else {}
    proto = dict(data.get("protocol", {}))
    proto.setdefault("representation", representation)
    for key in ("mode", "metric", "observe", "predict", "stride", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            proto[key] = value
    data["protocol"] = proto
    return ProtocolConfig.from_dict(data)


def cmd_evaluate(args) -> int:
    input_path = Path(args.input)
    if input_path.is_dir():
        seqs = read_directory(input_path)
    else:
        seqs = [ingest(input_path)]
    config = _build_config(args, seqs[0].representation)
    dims = seqs[0].n_dims

    if args.base == "zero-velocity":
        predictor = ZeroVelocityPredictor()
    elif args.base == "ridge":
        if not args.train:
            raise ConfigError("base ridge requires --train with training CSVs")
        train_seqs = read_directory(args.train)
        windows, targets = [], []
        step = args.train_stride or config.predict
        for seq in train_seqs:
            last = seq.n_frames - config.observe - config.predict
            for start in range(0, last + 1, step):
                windows.append(seq.frames[start : start + config.observe])
                targets.append(
                    seq.frames[start + config.observe : start + config.observe + config.predict]
                )
        if not windows:
            raise InvalidInputError("training sequences too short for ridge windows")
        predictor = RidgePredictor(ridge_regression_fit(windows, targets, lam=args.ridge_lam))
    else:
        if not args.predictions:
            raise ConfigError("base external requires --predictions")
        if len(seqs) != 1:
            raise ConfigError("external predictions evaluate exactly one sequence")
        if config.mode != MODE_STREAMING:
            raise ConfigError("external predictions are anchored absolutely; use streaming mode")
        records = load_external_predictions(args.predictions, expected_dims=dims)
        predictor = ScriptedPredictor(records)

    corrector = None
    if args.corrector:
        corrector = ResidualCorrector(
            dims, order=args.order, forgetting=args.gamma, init_scale=args.init_scale
        )
        if isinstance(predictor, ScriptedPredictor):
            needed = range(config.observe, seqs[0].n_frames - config.predict + 1)
            missing = [t for t in needed if t not in set(predictor.anchors())]
            if missing:
                raise InvalidInputError(
                    "the corrector needs the base's one-step forecast at every frame; "
                    f"predictions missing at anchors {missing[:5]}..."
                )

    result = run_protocol(config, seqs, predictor, corrector)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    write_curves(result.curves, outdir)
    with open(outdir / "anchors.jsonl", "w", encoding="utf-8") as fh:
        for entry in result.anchor_log:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")
    models = [{"name": predictor.name, "parameter_count": predictor.parameter_count()}]
    if corrector is not None:
        models.append({"name": "corrected", "parameter_count": corrector.parameter_count()})
    report = build_report(
        config=config.to_dict(),
        models=models,
        curves=result.curves,
        aggregates=result.aggregates,
        anchor_counts=result.anchor_counts,
        skipped=result.skipped,
    )
    write_report(report, outdir / "report.json")
    for source in result.sources():
        curve = result.curves[source]
        print(
            f"{source}: {config.metric} h1={curve.values[0]:.6g} "
            f"hN={curve.values[-1]:.6g} aggregate={result.aggregates[source]:.6g}"
        )
    if result.skipped:
        print(f"skipped {len(result.skipped)} too-short sequence(s): {result.skipped}")
    print(f"report -> {outdir / 'report.json'}")
    return 0


def cmd_report(args) -> int:
    from .metrics import ErrorCurve

    curves = {}
    for path in args.curves:
        name = Path(path).stem
        source = name[len("curve_") :] if name.startswith("curve_") else name
        curves[source] = ErrorCurve.read_csv(path, fps=args.fps)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    report = build_report(
        config={"sources": sorted(curves), "fps": args.fps},
        models=[],
        curves=curves,
    )
    write_report(report, outdir / "report.json")
    print(f"report -> {outdir / 'report.json'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args) or 0
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except (PosecastError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
