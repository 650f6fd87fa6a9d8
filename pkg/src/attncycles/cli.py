"""Command-line pipeline: synth | prepare | extract | select | train-video
| train-channel | evaluate | ablate | report.

Every stage reads and writes plain files under an output directory, so
stages can be rerun independently and chained:

    synth -> prepare -> extract -> select -> train-video -> train-channel
          -> evaluate / ablate / report

Exit codes: 0 success, 1 validation failure, 2 runtime failure, 64 unknown
subcommand. All randomness hangs off --seed; identical config plus seed
gives byte-identical outputs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import experiments, ingest, io, metrics, synth
from .experiments import (
    DEFAULT_ABLATION_GRID,
    AblationRow,
    ExperimentSpec,
    audit_no_test_leakage,
    assemble_video_features,
    baseline_row,
    build_channel_matrix,
    channel_labels,
    format_experiment_table,
    run_ablation,
    run_channel_stage,
    run_video_stage,
)
from .learners import load_model
from .selection import SelectionReport, select_top_union
from .types import DatasetSplit, FactualityLabel
from .video_features import extract_attention_matrix, extract_text_matrix

log = logging.getLogger("attncycles")


class ValidationFailure(Exception):
    """Bad arguments, missing paths, malformed configs."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse errors through exit code 1
        raise ValidationFailure(message)


def _require_file(path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise ValidationFailure(f"{what} not found: {path}")
    return path


def _require_dir(path, what: str) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise ValidationFailure(f"{what} not found: {path}")
    return path


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config_file(path) -> dict:
    path = _require_file(path, "config file")
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return json.loads(text)
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    return tomllib.loads(text)


def _spec_from_args(args, stage: str) -> ExperimentSpec:
    data = {}
    if getattr(args, "config", None):
        data = dict(_load_config_file(args.config))
    data["stage"] = stage
    if getattr(args, "features", None):
        data["features"] = [f.strip() for f in args.features.split(",") if f.strip()]
    elif "features" not in data:
        data["features"] = ["attention"] if stage == "video" else [
            "attention_avg", "attention_stats", "attention_agg_pred"
        ]
    if getattr(args, "learner", None):
        data["learner"] = args.learner
    if getattr(args, "smote", None) is not None:
        data["smote"] = args.smote
    if getattr(args, "selection_k", None) is not None:
        data["selection_k"] = args.selection_k
    if getattr(args, "rounds", None) is not None:
        params = dict(data.get("learner_params", {}))
        params["n_rounds"] = args.rounds
        data["learner_params"] = params
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    try:
        return ExperimentSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ValidationFailure(f"bad experiment spec: {exc}") from None


# ---------------------------------------------------------------------------
# Prepared-corpus plumbing shared by the stages.
# ---------------------------------------------------------------------------


def _load_prepared(prepared_dir):
    prepared = _require_dir(prepared_dir, "prepared corpus directory")
    channels_path = _require_file(prepared / "channels.jsonl", "prepared channels file")
    split_path = _require_file(prepared / "split.json", "split file")
    channels = io.load_channels(channels_path)
    split = io.load_split(split_path)
    return channels, split


@dataclass
class _LoadedVideoRun:
    """File-backed stand-in for a VideoStageResult consumed downstream."""

    distributions: dict
    selection: Optional[SelectionReport]
    provenance: dict


def _load_video_run(run_dir) -> _LoadedVideoRun:
    run = _require_dir(run_dir, "video-stage run directory")
    preds = _require_file(run / "video_predictions.jsonl", "video predictions")
    selection = None
    selection_path = run / "video_selection.json"
    if selection_path.is_file():
        selection = SelectionReport.from_dict(io.load_json(selection_path))
    provenance = {}
    provenance_path = run / "video_provenance.json"
    if provenance_path.is_file():
        provenance = {
            key: frozenset(ids) for key, ids in io.load_json(provenance_path).items()
        }
    return _LoadedVideoRun(io.load_predictions(preds), selection, provenance)


def _save_provenance(provenance: dict, path) -> None:
    io.save_json({key: sorted(ids) for key, ids in provenance.items()}, path)


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def _cmd_synth(args) -> int:
    sizes = {}
    for part in args.channels.split(","):
        name, _, count = part.partition("=")
        try:
            sizes[FactualityLabel.parse(name)] = int(count)
        except ValueError as exc:
            raise ValidationFailure(f"bad --channels entry {part!r}: {exc}") from None
    lo, _, hi = args.videos.partition(",")
    out = _outdir(args.output)
    channels = synth.generate_dataset(
        sizes, seed=args.seed, videos_per_channel=(int(lo), int(hi or lo))
    )
    synth.write_corpus_files(channels, out / "snapshots.jsonl", out / "manifest.jsonl")
    log.info("wrote %d channels (%d videos) under %s",
             len(channels), sum(len(c.videos) for c in channels), out)
    return 0


def _cmd_prepare(args) -> int:
    snapshots = _require_file(args.snapshots, "snapshot log")
    manifest = _require_file(args.manifest, "channel manifest")
    embeddings_dir = None
    if args.embeddings_dir:
        embeddings_dir = _require_dir(args.embeddings_dir, "embeddings directory")
    ratios = tuple(float(r) for r in args.ratios.split(","))
    out = _outdir(args.output)

    channels, errors = ingest.prepare_corpus(
        io.read_lines(snapshots),
        io.read_lines(manifest),
        embeddings_dir=embeddings_dir,
        embedding_format=args.embedding_format,
    )
    if not channels:
        raise ValidationFailure("no channels survived preparation")
    split = ingest.split_dataset(channels, ratios=ratios, seed=args.seed)
    io.save_channels(channels, out / "channels.jsonl")
    io.save_split(split, out / "split.json")
    io.save_json(
        {
            "channels": len(channels),
            "videos": sum(len(c.videos) for c in channels),
            "snapshot_line_errors": len(errors),
            "ratios": list(ratios),
            "seed": args.seed,
        },
        out / "prepare.json",
    )
    log.info("prepared %d channels -> %s", len(channels), out)
    return 0


def _cmd_extract(args) -> int:
    channels, _split = _load_prepared(args.prepared)
    videos = ingest.all_videos(channels)
    out = _outdir(args.output)
    kinds = ("attention", "text") if args.features == "all" else (args.features,)
    for kind in kinds:
        if kind == "attention":
            matrix = extract_attention_matrix(videos, jobs=args.jobs)
        else:
            matrix = extract_text_matrix(videos)
        path = out / f"features_{kind}.{args.format}"
        matrix.save(path, fmt=args.format)
        log.info("wrote %s (%d x %d)", path, *matrix.shape)
    return 0


def _cmd_select(args) -> int:
    channels, split = _load_prepared(args.prepared)
    videos = ingest.all_videos(channels)
    train = set(split.train)
    train_videos = [v for v in videos if v.channel_id in train]
    matrix = extract_attention_matrix(train_videos, jobs=args.jobs)
    labels = np.array([int(v.distant_label) for v in train_videos])
    report = select_top_union(matrix, labels, k=args.k)
    out = _outdir(args.output)
    io.save_json(report.to_dict(), out / "selection.json")
    log.info("selected %d features (k=%d per method)", len(report.selected), args.k)
    return 0


def _cmd_train_video(args) -> int:
    channels, split = _load_prepared(args.prepared)
    spec = _spec_from_args(args, "video")
    bundle = assemble_video_features(channels, jobs=args.jobs)
    result = run_video_stage(channels, split, spec, bundle=bundle)
    audit_no_test_leakage(result.provenance, split)

    out = _outdir(args.output)
    result.model.save(out / "video_model.json")
    io.save_predictions(result.distributions, out / "video_predictions.jsonl")
    io.save_json(result.report.to_dict(), out / "video_report.json")
    if result.selection is not None:
        io.save_json(result.selection.to_dict(), out / "video_selection.json")
    _save_provenance(result.provenance, out / "video_provenance.json")
    io.save_json(spec.to_dict(), out / "video_spec.json")
    log.info("video stage: accuracy %.4f mae %.4f -> %s",
             result.report.accuracy, result.report.mae, out)
    return 0


def _cmd_train_channel(args) -> int:
    channels, split = _load_prepared(args.prepared)
    spec = _spec_from_args(args, "channel")
    video_results = {}
    if args.attention_run:
        video_results["attention"] = _load_video_run(args.attention_run)
    if args.text_run:
        video_results["text"] = _load_video_run(args.text_run)

    needs_bundle = any(g in ("text_avg", "attention_avg") for g in spec.features)
    bundle = assemble_video_features(channels, jobs=args.jobs) if needs_bundle else None
    try:
        result = run_channel_stage(channels, split, spec,
                                   video_results=video_results, bundle=bundle)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from None
    audit_no_test_leakage(result.provenance, split)

    out = _outdir(args.output)
    result.model.save(out / "channel_model.json")
    io.save_predictions(result.distributions, out / "channel_predictions.jsonl")
    io.save_json(result.report.to_dict(), out / "channel_report.json")
    _save_provenance(result.provenance, out / "channel_provenance.json")
    io.save_json(spec.to_dict(), out / "channel_spec.json")
    log.info("channel stage (%d dims): accuracy %.4f mae %.4f -> %s",
             result.dim, result.report.accuracy, result.report.mae, out)
    return 0


def _cmd_evaluate(args) -> int:
    channels, split = _load_prepared(args.prepared)
    predictions = io.load_predictions(_require_file(args.predictions, "predictions file"))
    part_ids = getattr(split, args.part)

    if args.stage == "channel":
        labels = channel_labels(channels)
        truth_of = lambda cid: labels[cid]
        train_truth = [labels[c] for c in split.train]
        eval_ids = [c.channel_id for c in channels if c.channel_id in set(part_ids)]
    else:
        videos = ingest.all_videos(channels)
        by_id = {v.video_id: int(v.distant_label) for v in videos}
        truth_of = lambda vid: by_id[vid]
        train_truth = [int(v.distant_label) for v in videos if v.channel_id in set(split.train)]
        eval_ids = [v.video_id for v in videos if v.channel_id in set(part_ids)]

    missing = [i for i in eval_ids if i not in predictions]
    if missing:
        raise ValidationFailure(f"predictions missing for {len(missing)} item(s), "
                                f"e.g. {missing[:3]}")
    truth = [truth_of(i) for i in eval_ids]
    pred = [int(np.argmax(predictions[i])) for i in eval_ids]
    report = metrics.evaluate(truth, pred, split_sizes={args.part: len(eval_ids)})

    rows = [
        baseline_row(train_truth, truth),
        {"index": 1, "name": f"{args.stage} model ({args.part})",
         "dim": None, "report": report},
    ]
    table = format_experiment_table(rows, title=f"{args.stage}-level evaluation")
    payload = {
        "stage": args.stage,
        "part": args.part,
        "baseline": rows[0]["report"].to_dict(),
        "model": report.to_dict(),
    }
    if args.output:
        out = _outdir(args.output)
        io.save_json(payload, out / "report.json")
        (out / "report.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def _parse_grid_file(path) -> tuple:
    data = _load_config_file(path)
    rows = []
    for entry in data.get("rows", []):
        rows.append(
            AblationRow(
                name=entry["name"],
                actions=tuple(entry.get("actions", ())),
                ratios=tuple(entry.get("ratios", ())),
                include_stats=bool(entry.get("include_stats", False)),
                include_agg=bool(entry.get("include_agg", False)),
                everything=bool(entry.get("everything", False)),
            )
        )
    if not rows:
        raise ValidationFailure(f"grid file {path} defines no rows")
    return tuple(rows)


def _cmd_ablate(args) -> int:
    channels, split = _load_prepared(args.prepared)
    spec = _spec_from_args(args, "channel")
    grid = _parse_grid_file(args.grid) if args.grid else DEFAULT_ABLATION_GRID
    bundle = assemble_video_features(channels, jobs=args.jobs)

    video_spec = ExperimentSpec(
        stage="video", features=("attention",), learner=spec.learner,
        learner_params=spec.learner_params, smote=spec.smote,
        selection_k=spec.selection_k, seed=spec.seed,
    )
    video_result = run_video_stage(channels, split, video_spec, bundle=bundle)
    audit_no_test_leakage(video_result.provenance, split)
    results = run_ablation(channels, split, spec, {"attention": video_result},
                           bundle, grid)

    labels = channel_labels(channels)
    rows = [baseline_row([labels[c] for c in split.train],
                         [labels[c] for c in split.test])]
    payload_rows = []
    for i, (row, dim, report) in enumerate(results, start=1):
        rows.append({"index": i, "name": row.name, "dim": dim, "report": report})
        payload_rows.append({"name": row.name, "dim": dim, **report.to_dict()})
    table = format_experiment_table(rows, title="Ablation (channel level)")
    out = _outdir(args.output)
    io.save_json({"rows": payload_rows, "baseline": rows[0]["report"].to_dict()},
                 out / "ablation.json")
    (out / "ablation.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def _cmd_report(args) -> int:
    data = io.load_json(_require_file(args.input, "report file"))
    if "rows" in data:  # ablation layout
        rows = [{"index": 0, "name": "Majority class", "dim": None,
                 "report": metrics.EvaluationReport.from_dict(data["baseline"])}]
        for i, row in enumerate(data["rows"], start=1):
            payload = {k: v for k, v in row.items() if k not in ("name", "dim")}
            rows.append({"index": i, "name": row["name"], "dim": row["dim"],
                         "report": metrics.EvaluationReport.from_dict(payload)})
        sys.stdout.write(format_experiment_table(rows, title="Ablation (channel level)"))
    else:
        rows = [
            {"index": 0, "name": "Majority class", "dim": None,
             "report": metrics.EvaluationReport.from_dict(data["baseline"])},
            {"index": 1, "name": f"{data.get('stage', 'model')} model", "dim": None,
             "report": metrics.EvaluationReport.from_dict(data["model"])},
        ]
        sys.stdout.write(format_experiment_table(rows))
    return 0


# ---------------------------------------------------------------------------
# Parser wiring.
# ---------------------------------------------------------------------------

COMMANDS = {
    "synth": _cmd_synth,
    "prepare": _cmd_prepare,
    "extract": _cmd_extract,
    "select": _cmd_select,
    "train-video": _cmd_train_video,
    "train-channel": _cmd_train_channel,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
    "report": _cmd_report,
}

USAGE = "usage: attncycles {%s} ..." % "|".join(COMMANDS)


def build_parser() -> _Parser:
    parser = _Parser(prog="attncycles", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")

    def common(p, output=True):
        p.add_argument("--verbose", action="store_true")
        p.add_argument("--jobs", type=int, default=1, help="worker bound for extraction")
        if output:
            p.add_argument("--output", "-o", required=True, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic corpus in raw formats")
    p.add_argument("--channels", default="high=30,mixed=15,low=5")
    p.add_argument("--videos", default="20,40", help="per-channel video count range")
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("prepare", help="raw logs -> labeled channels + split")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--embeddings-dir")
    p.add_argument("--embedding-format", choices=("json", "f32le"), default="f32le")
    p.add_argument("--ratios", default="0.70,0.15,0.15")
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("extract", help="feature matrices + dictionary sidecars")
    p.add_argument("--prepared", required=True)
    p.add_argument("--features", choices=("attention", "text", "all"), default="attention")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common(p)

    p = sub.add_parser("select", help="fit feature selection on the training split")
    p.add_argument("--prepared", required=True)
    p.add_argument("--k", type=int, default=100)
    common(p)

    p = sub.add_parser("train-video", help="train the video-level classifier")
    p.add_argument("--prepared", required=True)
    p.add_argument("--config", help="experiment spec TOML/JSON")
    p.add_argument("--features", help="comma list: attention,text")
    p.add_argument("--learner", choices=("gbdt", "logistic", "ordinal_logistic"))
    p.add_argument("--smote", dest="smote", action="store_true", default=None)
    p.add_argument("--no-smote", dest="smote", action="store_false")
    p.add_argument("--selection-k", type=int)
    p.add_argument("--rounds", type=int, help="boosting rounds override")
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("train-channel", help="train the channel-level classifier")
    p.add_argument("--prepared", required=True)
    p.add_argument("--config")
    p.add_argument("--features", help="comma list of channel groups")
    p.add_argument("--learner", choices=("gbdt", "logistic", "ordinal_logistic"))
    p.add_argument("--smote", dest="smote", action="store_true", default=None)
    p.add_argument("--no-smote", dest="smote", action="store_false")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--attention-run", help="train-video output dir (attention model)")
    p.add_argument("--text-run", help="train-video output dir (text model)")
    common(p)

    p = sub.add_parser("evaluate", help="score saved predictions against a split part")
    p.add_argument("--prepared", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--stage", choices=("video", "channel"), required=True)
    p.add_argument("--part", choices=("train", "dev", "test"), default="test")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", "-o", help="optional output directory")

    p = sub.add_parser("ablate", help="feature-group ablation grid")
    p.add_argument("--prepared", required=True)
    p.add_argument("--grid", help="grid TOML/JSON; defaults to the built-in grid")
    p.add_argument("--config")
    p.add_argument("--features")
    p.add_argument("--learner", choices=("gbdt", "logistic", "ordinal_logistic"))
    p.add_argument("--smote", dest="smote", action="store_true", default=None)
    p.add_argument("--no-smote", dest="smote", action="store_false")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int)
    common(p)

    p = sub.add_parser("report", help="render a saved report JSON as a table")
    p.add_argument("--input", required=True)
    p.add_argument("--verbose", action="store_true")

    return parser


def dispatch(argv) -> int:
    """Run one subcommand; returns the process exit code."""
    argv = list(argv)
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        sys.stderr.write(f"attncycles: unknown subcommand {argv[0]!r}\n{USAGE}\n")
        return 64
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ValidationFailure as exc:
        sys.stderr.write(f"attncycles: {exc}\n{USAGE}\n")
        return 1
    if not getattr(args, "command", None):
        sys.stderr.write(USAGE + "\n")
        return 64
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationFailure as exc:
        log.error("%s", exc)
        return 1
    except Exception as exc:  # runtime failure
        log.error("%s: %s", type(exc).__name__, exc)
        if getattr(args, "verbose", False):
            raise
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
