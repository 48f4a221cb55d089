"""Command-line front end binding the pipeline end to end.

Subcommands: ``synth`` (labeled test corpus), ``extract`` (WAVs -> feature
store), ``train`` / ``tune`` / ``evaluate`` (models and reports),
``classify`` (one WAV -> rasa scores) and ``recommend`` (mood-transition
playlist). Every artifact embeds the fully resolved configuration, and all
randomness flows from explicit seeds (``--seed``, falling back to the
``RAGA_MOODKIT_SEED`` environment variable, then 0), so reruns are
byte-identical.

Exit codes: 0 success, 1 validation error, 2 runtime/data error.
"""
from __future__ import annotations

import argparse
import functools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .audio import DEFAULT_BI_SAMPLE_PLAN, SegmentPlan, bi_sample, parse_plan, read_wav, resample, to_mono
from .bundle import ModelBundle
from .catalog import load_manifest, parse_rasa
from .errors import DataError, MoodkitError, StartBeyondEnd, ValidationError
from .experiments import (
    ExperimentConfig,
    evaluate_bundle,
    extract_song_rows,
    run_on_features,
    table_from_rows,
)
from .mfcc import MfccConfig, feature_correlation, segment_features
from .models import FAMILY_ORDER
from .recommender import recommend_transition, score_library
from .store import read_store, segment_id, write_correlation_csv, write_store


def _default_seed() -> int:
    return int(os.environ.get("RAGA_MOODKIT_SEED", "0"))


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_params(pairs) -> dict:
    """``k=v`` pairs; a comma-separated value becomes a tuple (e.g. hidden sizes)."""
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValidationError(f"bad parameter {pair!r}; expected name=value")
        name, value = pair.split("=", 1)
        if "," in value:
            params[name] = tuple(_parse_scalar(v) for v in value.split(","))
        else:
            params[name] = _parse_scalar(value)
    return params


def parse_grid(pairs) -> dict:
    """``k=v1,v2`` pairs mapping each name to its candidate list."""
    grid = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValidationError(f"bad grid entry {pair!r}; expected name=v1,v2,...")
        name, values = pair.split("=", 1)
        grid[name] = [_parse_scalar(v) for v in values.split(",")]
    if not grid:
        raise ValidationError("grid must contain at least one parameter")
    return grid


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _add_mfcc_options(parser):
    group = parser.add_argument_group("feature extraction")
    group.add_argument("--fft-size", type=int, default=2048)
    group.add_argument("--hop", type=int, default=512)
    group.add_argument("--n-filters", type=int, default=40)
    group.add_argument("--n-coeffs", type=int, default=40)
    group.add_argument("--f-low", type=float, default=0.0)
    group.add_argument("--f-high", type=float, default=None)
    group.add_argument("--sample-rate", type=int, default=22050)
    group.add_argument("--log-floor", type=float, default=1e-10)


def _mfcc_from_args(args) -> MfccConfig:
    return MfccConfig(
        fft_size=args.fft_size,
        hop=args.hop,
        n_filters=args.n_filters,
        n_coeffs=args.n_coeffs,
        f_low=args.f_low,
        f_high=args.f_high,
        sample_rate=args.sample_rate,
        log_floor=args.log_floor,
    )


def _echo(command: str, **resolved) -> dict:
    return {"command": command, **resolved}


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# --- synth -----------------------------------------------------------------------

def cmd_synth(args) -> int:
    from .synth import SyntheticSpec, generate_corpus

    seed = _resolve_seed(args)
    spec = SyntheticSpec(
        files_per_class=args.files_per_class,
        duration_s=args.duration,
        seed=seed,
    )
    manifest = generate_corpus(spec, args.out)
    _print_json(
        _echo(
            "synth",
            out=str(args.out),
            files_per_class=args.files_per_class,
            duration=args.duration,
            seed=seed,
            manifest=str(manifest),
            n_files=args.files_per_class * 6,
        )
    )
    return 0


# --- extract ---------------------------------------------------------------------

def _extract_task(record, plan, config, base_dir):
    try:
        return record.id, None, extract_song_rows(record, plan, config, base_dir=base_dir)
    except (MoodkitError, OSError) as exc:
        return record.id, str(exc), None


def cmd_extract(args) -> int:
    config = _mfcc_from_args(args)
    plan = parse_plan(args.plan)
    records = load_manifest(args.manifest)
    base_dir = Path(args.manifest).parent

    task = functools.partial(_extract_task, plan=plan, config=config, base_dir=base_dir)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(task, records))
    else:
        results = [task(record) for record in records]

    rows = []
    failures = []
    for song_id, error, song_rows in results:
        if error is not None:
            failures.append((song_id, error))
            print(f"extract: {song_id}: {error}", file=sys.stderr)
        else:
            rows.extend(song_rows)
    if failures and args.strict:
        raise DataError(f"{len(failures)} file(s) failed under --strict: "
                        + ", ".join(song_id for song_id, _ in failures))
    if not rows:
        raise DataError("no features extracted; every file failed")

    table = table_from_rows(rows, config, plan)
    echo = _echo(
        "extract",
        manifest=str(args.manifest),
        out=str(args.out),
        plan=[list(c) for c in plan.cuts],
        mfcc=config.as_dict(),
        jobs=args.jobs,
        strict=args.strict,
        correlation_out=str(args.correlation_out) if args.correlation_out else None,
    )
    write_store(table, args.out, extra_meta={"config": echo, "failures": sorted(s for s, _ in failures)})
    if args.correlation_out:
        write_correlation_csv(feature_correlation(table.X), args.correlation_out)
    _print_json({**echo, "n_rows": len(table), "n_failures": len(failures)})
    return 0


# --- train / tune / evaluate -------------------------------------------------------

def _run_training(args, grid: dict | None) -> int:
    table = read_store(args.features)
    seed = _resolve_seed(args)
    params = parse_params(args.params)
    config = ExperimentConfig(
        family=args.family,
        params=params,
        grid=grid,
        plan=table.plan,
        scaler=args.scaler,
        split_level=args.split_level,
        val_fraction=args.val_fraction,
        seed=seed,
        mfcc=table.mfcc,
        cv=getattr(args, "cv", None),
    )
    report = run_on_features(table, config)
    echo = _echo(
        "tune" if grid is not None else "train",
        features=str(args.features),
        out=str(args.out),
        family=args.family,
        params=params,
        grid=None if grid is None else {k: list(v) for k, v in grid.items()},
        scaler=args.scaler,
        split_level=args.split_level,
        val_fraction=args.val_fraction,
        seed=seed,
        cv=getattr(args, "cv", None),
    )
    report.bundle.config = {**report.bundle.config, **echo, "params": report.params}
    report.bundle.save(args.out)
    if args.split_out:
        roles = report.bundle.split["roles"]
        with Path(args.split_out).open("w", encoding="utf-8") as handle:
            handle.write("id,role\n")
            for seg in table.segment_ids:
                handle.write(f"{seg},{roles[seg]}\n")
    if getattr(args, "report_out", None):
        Path(args.report_out).write_text(report.to_json(), encoding="utf-8")
    print(report.to_markdown(), end="")
    if report.grid_rows is not None:
        for row in report.grid_rows:
            status = f"{row.validation_accuracy:.4f}" if row.error is None else f"failed: {row.error}"
            print(f"  grid {row.params} -> {status}")
    _print_json(
        {
            **echo,
            "params": report.params,
            "train_accuracy": report.train_accuracy,
            "validation_accuracy": report.validation_accuracy,
            "n_train_rows": report.n_train_rows,
            "n_val_rows": report.n_val_rows,
        }
    )
    print(f"completed in {report.wall_clock_s:.2f}s", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    return _run_training(args, grid=None)


def cmd_tune(args) -> int:
    return _run_training(args, grid=parse_grid(args.grid))


def cmd_evaluate(args) -> int:
    bundle = ModelBundle.load(args.model)
    table = read_store(args.features)
    report = evaluate_bundle(bundle, table)
    print(report.to_markdown(), end="")
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    _print_json(
        {
            "command": "evaluate",
            "features": str(args.features),
            "model": str(args.model),
            "train_accuracy": report.train_accuracy,
            "validation_accuracy": report.validation_accuracy,
            "stored_train_accuracy": bundle.metrics.get("train_accuracy"),
            "stored_validation_accuracy": bundle.metrics.get("validation_accuracy"),
        }
    )
    print(f"completed in {report.wall_clock_s:.2f}s", file=sys.stderr)
    return 0


# --- classify / recommend -----------------------------------------------------------

def _bundle_feature_setup(bundle: ModelBundle):
    config = MfccConfig(**bundle.feature_fingerprint)
    cuts = bundle.config.get("plan")
    plan = SegmentPlan(tuple(tuple(c) for c in cuts)) if cuts else None
    return config, plan


def _segments_within(buffer, plan: SegmentPlan | None):
    """Plan cuts that start inside the buffer; a missing plan means one full cut."""
    if plan is None:
        return [buffer]
    cuts = [(s, d) for s, d in plan.cuts if s < buffer.duration_s]
    if not cuts:
        raise StartBeyondEnd(
            f"file of {buffer.duration_s:.1f}s is shorter than every planned cut"
        )
    return bi_sample(buffer, SegmentPlan(tuple(cuts)))


def cmd_classify(args) -> int:
    bundle = ModelBundle.load(args.model)
    config, plan = _bundle_feature_setup(bundle)
    buffer = resample(to_mono(read_wav(args.wav)), config.sample_rate)
    segments = _segments_within(buffer, plan)
    vectors = np.vstack(
        [segment_features(seg, config, source_id=segment_id("query", i)).values
         for i, seg in enumerate(segments)]
    )
    scores = bundle.predict_scores(vectors).mean(axis=0)
    classes = [str(c) for c in bundle.model.classes_]
    predicted = classes[int(np.argmax(scores))]
    _print_json(
        {
            "command": "classify",
            "model": str(args.model),
            "wav": str(args.wav),
            "n_segments": len(segments),
            "scores": {cls: float(s) for cls, s in zip(classes, scores)},
            "predicted": predicted,
        }
    )
    return 0


def cmd_recommend(args) -> int:
    current = parse_rasa(args.from_rasa)
    aspired = parse_rasa(args.to_rasa)
    if args.length < 1:
        raise ValidationError(f"--length must be >= 1, got {args.length}")
    bundle = ModelBundle.load(args.model)
    config, plan = _bundle_feature_setup(bundle)
    if plan is None:
        plan = DEFAULT_BI_SAMPLE_PLAN
    records = load_manifest(args.manifest)
    base_dir = Path(args.manifest).parent

    rows = []
    for record in records:
        rows.extend(extract_song_rows(record, plan, config, base_dir=base_dir))
    table = table_from_rows(rows, config, plan)
    library = score_library(bundle, table)
    playlist = recommend_transition(library, current, aspired, args.length)
    print(
        f"transition {current.value} -> {aspired.value} "
        f"({len(playlist.slots)} of {len(library)} songs)"
    )
    print(playlist.to_text(), end="")
    if args.out:
        Path(args.out).write_text(playlist.to_json(), encoding="utf-8")
    return 0


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raga-moodkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic WAV corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--files-per-class", type=int, default=20)
    p.add_argument("--duration", type=float, default=90.0, help="seconds per file")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("extract", help="extract per-segment features into a store")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="feature store CSV path")
    p.add_argument("--plan", default="bisample",
                   help="segment plan preset or start:dur,start:dur list")
    p.add_argument("--correlation-out", default=None,
                   help="also write the feature correlation matrix CSV")
    p.add_argument("--strict", action="store_true",
                   help="fail (exit 2) if any file cannot be processed")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    _add_mfcc_options(p)
    p.set_defaults(handler=cmd_extract)

    def add_fit_options(p, with_grid):
        p.add_argument("--features", required=True, help="feature store CSV")
        p.add_argument("--out", required=True, help="model bundle path")
        p.add_argument("--family", required=True, choices=FAMILY_ORDER)
        p.add_argument("--params", nargs="*", default=[], metavar="NAME=VALUE")
        if with_grid:
            p.add_argument("--grid", nargs="+", required=True, metavar="NAME=V1,V2")
            p.add_argument("--report-out", default=None, help="grid report JSON path")
            p.add_argument("--cv", type=int, default=None,
                           help="select by k-fold inside the training split instead of the holdout")
        p.add_argument("--scaler", default="zscore", choices=("zscore", "minmax", "none"))
        p.add_argument("--split-level", default="file", choices=("file", "segment"))
        p.add_argument("--val-fraction", type=float, default=0.2)
        p.add_argument("--split-out", default=None, help="write id,role split CSV")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("train", help="fit one model with fixed parameters")
    add_fit_options(p, with_grid=False)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("tune", help="holdout grid search, keep the best model")
    add_fit_options(p, with_grid=True)
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("evaluate", help="score a saved model against a store")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=None, help="report JSON path")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("classify", help="score one WAV file")
    p.add_argument("--model", required=True)
    p.add_argument("--wav", required=True)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("recommend", help="mood-transition playlist from a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--from", dest="from_rasa", required=True, metavar="RASA")
    p.add_argument("--to", dest="to_rasa", required=True, metavar="RASA")
    p.add_argument("--length", type=int, default=5)
    p.add_argument("--out", default=None, help="playlist JSON path")
    p.set_defaults(handler=cmd_recommend)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MoodkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
