"""Command-line front end.

    ksatptf estimate --model cosby84 --sand 40 --silt 40 --clay 20 --bd 1.4
    ksatptf evaluate --input data.csv --output out/
    ksatptf report   --input data.csv --output out/
    ksatptf scatter  --input data.csv --output out/ --svg
    ksatptf synth    --seed 42 --count 10000 --output corpus.csv

Exit status: 0 success, 1 validation or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import classic, cpxr, reports
from .classic import ClassicModelId
from .errors import KsatError
from .estimators import CPXR_ID, build_estimators, parse_model_list
from .metrics import per_class_report, summary_stats
from .pipeline import (
    ESTIMATE,
    EVALUATE,
    SynthConfig,
    exclusion_reason,
    generate_synthetic,
    ingest_csv,
    write_csv,
)
from .soil import DEFAULT_TOLERANCE, SampleArrays, SoilSample, classify_texture_array, validate_sample

log = logging.getLogger("ksatptf")

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


def _shared_parser():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", metavar="PATH", help="sample CSV")
    p.add_argument("--output", metavar="DIR", help="output directory (synth: file or directory)")
    p.add_argument("--models", "--model", dest="models", default="all", metavar="LIST",
                   help="comma-separated model ids or 'all'")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                   help="allowed |sand+silt+clay-100| in percent (default 0.5)")
    p.add_argument("--renormalize", action="store_true", help="rescale texture to sum to 100")
    p.add_argument("--weighting", choices=["arr", "uniform"], default=None,
                   help="pattern weights of the cpxr model (default from bundle: arr)")
    p.add_argument("--avg-space", choices=["log", "linear"], default="log",
                   help="space in which matching local models are averaged")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--ignore-extra", action="store_true", help="allow unknown CSV columns")
    p.add_argument("--jabro-as-printed", action="store_true",
                   help="NON-DEFAULT audit mode: Jabro as literally tabulated (24 x bracket)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser():
    shared = _shared_parser()
    parser = argparse.ArgumentParser(prog="ksatptf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", parents=[shared], help="estimate K_sat for one sample or a CSV")
    est.add_argument("--id", default="sample")
    est.add_argument("--sand", type=float)
    est.add_argument("--silt", type=float)
    est.add_argument("--clay", type=float)
    est.add_argument("--bd", type=float, help="bulk density (g/cm3)")
    est.add_argument("--length", type=float, help="sample height/length L (cm)")
    est.add_argument("--diameter", type=float, help="sample internal diameter ID (cm)")

    sub.add_parser("evaluate", parents=[shared], help="per-class MLE/RMSLE tables")
    sub.add_parser("report", parents=[shared], help="evaluation plus human-readable tables")
    scat = sub.add_parser("scatter", parents=[shared], help="measured vs estimated export")
    scat.add_argument("--svg", action="store_true", help="also write one SVG per model")
    sub.add_parser("synth", parents=[shared], help="write a seeded synthetic corpus")
    return parser


def _inline_sample(args, parser):
    texture = [args.sand, args.silt, args.clay]
    missing = [i for i, v in enumerate(texture) if v is None]
    if len(missing) > 1:
        parser.error("give at least two of --sand/--silt/--clay")
    if missing:
        texture[missing[0]] = 100.0 - sum(v for v in texture if v is not None)
    if args.bd is None:
        parser.error("--bd is required for inline estimation")
    return SoilSample(
        id=args.id,
        sand_pct=texture[0],
        silt_pct=texture[1],
        clay_pct=texture[2],
        bulk_density=args.bd,
        height=args.length,
        diameter=args.diameter,
    )


def _estimate_one(mid, sample, args):
    """(ksat or None, note) for one model and sample."""
    reason = exclusion_reason(sample, mid)
    if reason is not None:
        return None, reason
    if mid == CPXR_ID:
        value, pred = cpxr.explain(
            cpxr.default_model(), sample, weighting=args.weighting, avg_space=args.avg_space
        )
        ids = ",".join(str(i) for i in pred.pattern_ids)
        weights = ",".join(f"{w:.6g}" for _, w in pred.trace)
        return value, f"patterns=[{ids}] weights=[{weights}]"
    value = classic.estimate_classic(ClassicModelId(mid), sample, jabro_as_printed=args.jabro_as_printed)
    return value, "as-printed" if args.jabro_as_printed and mid == "jabro92" else ""


def cmd_estimate(args, parser):
    model_ids = parse_model_list(args.models)
    if args.input:
        result = _ingest(args, ESTIMATE)
        samples = result.accepted
    else:
        samples = [validate_sample(_inline_sample(args, parser), args.tolerance, args.renormalize)]

    if args.input:
        rows = [["id", "model", "ksat_cm_per_day", "note"]]
        for s in samples:
            for mid in model_ids:
                value, note = _estimate_one(mid, s, args)
                rows.append([s.id, mid, "" if value is None else repr(value), note])
        _emit(reports.csv_text(rows), args.output, "estimates.csv")
    else:
        s = samples[0]
        for mid in model_ids:
            value, note = _estimate_one(mid, s, args)
            if value is None:
                print(f"{mid}: not applicable ({note})")
            else:
                print(f"{mid}: {value:.6g} cm/day" + (f" {note}" if note else ""))
    return EXIT_OK


def _emit(text, out_dir, name):
    if out_dir is None:
        sys.stdout.write(text)
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text, encoding="utf-8", newline="\n")
    log.info("wrote %s", path / name)


def _ingest(args, mode):
    if not args.input:
        raise KsatError("--input is required")
    result = ingest_csv(args.input, mode, args.tolerance, args.renormalize, args.ignore_extra)
    for r in result.rejected:
        print(f"row {r.row}: rejected ({r.reason}): {r.message}", file=sys.stderr)
    if result.rejected:
        print(f"{len(result.rejected)} of {result.total_rows} rows rejected", file=sys.stderr)
    if not result.accepted:
        raise KsatError(f"no valid rows in {args.input}")
    return result


def _evaluate(args):
    result = _ingest(args, EVALUATE)
    estimators = build_estimators(
        args.models,
        weighting=args.weighting,
        avg_space=args.avg_space,
        jabro_as_printed=args.jabro_as_printed,
    )
    arrays = SampleArrays.from_samples(result.accepted)
    return result, arrays, per_class_report(arrays, estimators)


def _write_eval_tables(report, out):
    _emit(reports.metric_table_csv(report, "mle"), out, "mle_by_class.csv")
    _emit(reports.metric_table_csv(report, "rmsle", mark_best=True), out, "rmsle_by_class.csv")
    _emit(reports.long_table_csv(report), out, "metrics_long.csv")
    _emit(reports.overall_csv(report), out, "overall.csv")


def cmd_evaluate(args, parser):
    _, _, report = _evaluate(args)
    out = args.output or "."
    _write_eval_tables(report, out)
    sys.stdout.write(reports.overall_text(report))
    return EXIT_OK


def cmd_report(args, parser):
    result, arrays, report = _evaluate(args)
    out = args.output or "."
    _write_eval_tables(report, out)
    _emit(reports.markdown_tables(report), out, "report.md")
    stats = summary_stats(result.accepted, "source")
    _emit(reports.summary_stats_csv(stats), out, "summary_stats.csv")
    _emit(reports.summary_stats_text(stats), out, "summary_stats.md")
    classes = classify_texture_array(arrays.sand, arrays.silt, arrays.clay)
    _emit(reports.texture_distribution_csv(classes), out, "texture_distribution.csv")
    _emit(reports.texture_points_csv(result.accepted, classes), out, "texture_points.csv")
    sys.stdout.write(reports.overall_text(report))
    return EXIT_OK


def cmd_scatter(args, parser):
    _, _, report = _evaluate(args)
    out = args.output or "."
    _emit(reports.scatter_csv(report), out, "scatter.csv")
    if args.svg:
        for m in report.models:
            _emit(reports.scatter_svg(report, m), out, f"scatter_{m}.svg")
    return EXIT_OK


def cmd_synth(args, parser):
    samples = generate_synthetic(SynthConfig(seed=args.seed, count=args.count))
    if args.output is None:
        write_csv(samples, sys.stdout)
        return EXIT_OK
    path = Path(args.output)
    if path.is_dir() or not path.suffix:
        path.mkdir(parents=True, exist_ok=True)
        path = path / f"synthetic_seed{args.seed}_n{args.count}.csv"
    write_csv(samples, path)
    print(f"wrote {len(samples)} samples to {path}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "scatter": cmd_scatter,
    "synth": cmd_synth,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        parse_model_list(args.models)
    except ValueError as exc:
        parser.error(str(exc))
    if args.count < 1:
        parser.error("--count must be >= 1")
    try:
        return COMMANDS[args.command](args, parser)
    except (KsatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
