"""Command-line interface: ``tcaging <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import curves, lifespan, regfit
from .ceo import CeoError, InferMode, OutcomeMapPolicy, filter_allfail_sessions, load_dataset
from .report import FORMATS, RunConfig, analyze, json_safe, write_bundle
from .synth import SynthProfile, generate, write_outputs

log = logging.getLogger("tcaging")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _format_list(text: str) -> tuple[str, ...]:
    fmts = tuple(x.strip() for x in text.split(",") if x.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(bad)}")
    return fmts


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("data_dir", nargs="?", help="directory holding creations.csv and executions.csv")
    g.add_argument("--creations", help="creations CSV (overrides DATA_DIR/creations.csv)")
    g.add_argument("--executions", help="executions CSV (overrides DATA_DIR/executions.csv)")
    g.add_argument(
        "--infer",
        choices=[m.value for m in InferMode],
        default=InferMode.STRICT.value,
        help="how to complete missing creation times (default: strict)",
    )
    g.add_argument(
        "--outcome-map",
        action="append",
        default=[],
        metavar="LABEL=PASS|FAIL|DROP",
        help="map a raw outcome label; repeatable",
    )
    g.add_argument("--outcome-map-file", help="file with one LABEL=PASS|FAIL|DROP pair per line")
    g.add_argument("--no-filter-allfail", dest="filter_allfail", action="store_false",
                   help="keep sessions in which every test failed")
    g.add_argument("--min-session-size", type=int, default=2)


def _add_analysis(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grace-days", type=int, default=lifespan.DEFAULT_GRACE_DAYS)
    p.add_argument("--min-support", type=int, default=curves.DEFAULT_MIN_SUPPORT)


def _load(args, prefilter: bool = True):
    creations = args.creations
    executions = args.executions
    if args.data_dir:
        creations = creations or os.path.join(args.data_dir, "creations.csv")
        executions = executions or os.path.join(args.data_dir, "executions.csv")
    if not executions:
        raise CeoError("no executions file given (pass DATA_DIR or --executions)")
    if creations and not os.path.exists(creations) and args.infer != InferMode.STRICT.value:
        creations = None

    pairs = list(args.outcome_map)
    if args.outcome_map_file:
        with open(args.outcome_map_file, encoding="utf-8") as fh:
            pairs = fh.read().splitlines() + pairs
    policy = OutcomeMapPolicy.from_pairs(pairs)

    dataset = load_dataset(creations, executions, policy, args.infer)
    if prefilter and args.filter_allfail:
        dataset, removed = filter_allfail_sessions(dataset, args.min_session_size)
        if removed:
            log.info("removed %d all-fail session(s)", removed)
    return dataset


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_validate(args) -> int:
    ds = _load(args)
    _emit(
        _dumps(
            {
                "test_cases": len(ds.creations),
                "executions": len(ds.executions),
                "t1": ds.t1.isoformat(),
                "tM": ds.tM.isoformat(),
                "rejected_before_creation": ds.rejected_before_creation,
                "duplicates_removed": ds.duplicates_removed,
            }
        ),
        None,
    )
    return 0


def _write_day_counts(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "count"])
        w.writerows(rows)


def cmd_lifespan(args) -> int:
    ds = _load(args)
    spans = lifespan.determine_death(ds, args.grace_days)
    summary = lifespan.aliveness_summary(spans)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write_day_counts(
            os.path.join(args.out_dir, "age_histogram.csv"),
            sorted(lifespan.age_distribution(spans, args.bin_width).items()),
        )
        _write_day_counts(os.path.join(args.out_dir, "growth.csv"), lifespan.growth_curve(spans))
        _emit(_dumps(summary.as_dict()), os.path.join(args.out_dir, "aliveness.json"))
    _emit(_dumps(summary.as_dict()), None)
    return 0


def _series_cmd(kind):
    def run(args) -> int:
        ds = _load(args)
        spans = lifespan.determine_death(ds, args.grace_days)
        if args.wallclock:
            series = curves.wallclock_series(ds, spans, kind, args.min_support)
        elif kind == curves.ACTIVATION:
            series = curves.activation_series(ds, spans, args.min_support)
        else:
            series = curves.hazard_series(ds, spans, args.min_support)
        buf = io.StringIO()
        curves.write_series_csv(series, buf)
        _emit(buf.getvalue(), args.out)
        return 0

    return run


def cmd_fit(args) -> int:
    if args.series:
        with open(args.series, newline="", encoding="utf-8") as fh:
            series = curves.read_series_csv(fh, curves.HAZARD, args.min_support)
    else:
        ds = _load(args)
        spans = lifespan.determine_death(ds, args.grace_days)
        series = curves.hazard_series(ds, spans, args.min_support)
    families = list(args.degrees) + (["exponential"] if args.exponential else [])
    reports = regfit.fit_report(series, families, args.grid_max, args.p_threshold)
    _emit(_dumps(json_safe({"models": [r.as_dict(args.percent) for r in reports]})), args.out)
    return 0


def cmd_analyze(args) -> int:
    ds = _load(args, prefilter=False)
    config = RunConfig(
        grace_days=args.grace_days,
        min_support=args.min_support,
        filter_allfail=args.filter_allfail,
        min_session_size=args.min_session_size,
        span=args.span,
        confidence=args.confidence,
        smooth_degree=args.smooth_degree,
        degrees=args.degrees,
        exponential=args.exponential,
        grid_max=args.grid_max,
        p_threshold=args.p_threshold,
        yearly_mode=args.yearly_mode,
        bin_width=args.bin_width,
        percent=args.percent,
        formats=args.formats,
    )
    bundle = analyze(ds, config)
    written = write_bundle(bundle, args.out_dir, config.formats)
    log.info("wrote %s", ", ".join(written))
    return 0


def cmd_synth(args) -> int:
    profile = SynthProfile.load(args.profile)
    if args.seed is not None:
        profile = SynthProfile.from_dict({**profile.to_dict(), "seed": args.seed})
    dataset, truth = generate(profile)
    write_outputs(dataset, truth, args.out_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcaging", description="Test case aging analysis.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="ingest and validate a CEO dataset")
    _add_input(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lifespan", help="death determination, aliveness, age histogram, growth curve")
    _add_input(p)
    p.add_argument("--grace-days", type=int, default=lifespan.DEFAULT_GRACE_DAYS)
    p.add_argument("--bin-width", type=int, default=30)
    p.add_argument("--out-dir", help="also write aliveness.json, age_histogram.csv, growth.csv")
    p.set_defaults(func=cmd_lifespan)

    for kind in (curves.ACTIVATION, curves.HAZARD):
        p = sub.add_parser(kind, help=f"{kind} rate per age day as CSV")
        _add_input(p)
        _add_analysis(p)
        p.add_argument("--wallclock", action="store_true", help="index by calendar day instead of age")
        p.add_argument("-o", "--out", help="output CSV (default: stdout)")
        p.set_defaults(func=_series_cmd(kind))

    def add_fit_flags(p):
        p.add_argument("--degrees", type=_int_list, default=(1, 2), help="polynomial degrees, e.g. 1,2,3")
        p.add_argument("--exponential", action="store_true", help="also fit a*exp(b*t)")
        p.add_argument("--grid-max", type=int, default=regfit.DEFAULT_GRID_MAX)
        p.add_argument("--p-threshold", type=float, default=regfit.DEFAULT_P_THRESHOLD)
        p.add_argument("--percent", action="store_true", help="present formulas in percent")

    p = sub.add_parser("fit", help="fit decay models to the hazard series and report half-life")
    _add_input(p)
    _add_analysis(p)
    p.add_argument("--series", help="fit a hazard CSV written by the hazard command instead")
    add_fit_flags(p)
    p.add_argument("-o", "--out", help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("analyze", help="run the whole pipeline and write a report bundle")
    _add_input(p)
    _add_analysis(p)
    add_fit_flags(p)
    p.add_argument("--span", type=float, default=0.15)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--smooth-degree", type=int, choices=(1, 2), default=1)
    p.add_argument("--yearly-mode", choices=("pooled", "mean_of_daily"), default="pooled")
    p.add_argument("--bin-width", type=int, default=30)
    p.add_argument("--formats", type=_format_list, default=FORMATS, help="comma list of csv,json,svg")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic dataset from a profile")
    p.add_argument("--profile", required=True, help="profile JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, help="override the profile seed")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
