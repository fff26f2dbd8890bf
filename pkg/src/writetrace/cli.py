"""Command-line entry point: ``writetrace <command> [options]``.

Options may also come from a JSON file given with ``--config``; flags given on
the command line always take precedence over the file. Exit status is 0 on
success, 1 on data errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .errors import WritetraceError
from .features import (
    SemesterCalendar,
    cohort_daily_average,
    features_to_csv,
    student_features,
    weekly_edit_categories,
)
from .revlog import COUNT_MODES, parse_revision_log, serialize_revision_log, total_chars

log = logging.getLogger("writetrace")

COMMANDS = ("ingest", "features", "decompose", "cluster", "compare", "feedback", "report", "simulate")


def _add_io(p: argparse.ArgumentParser, what: str) -> None:
    p.add_argument("--in", dest="input", type=Path, required=False, help=what)
    p.add_argument("--out", type=Path, required=False, help="output directory (created if missing)")


def _add_study_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--count-mode", choices=COUNT_MODES, default="both",
                   help="count deleted spans as edited characters (both) or only insertions")
    p.add_argument("--cluster-seed", type=int, default=0, help="seed for k-means++ restarts")
    p.add_argument("--scale-min", type=int, default=1, help="lowest questionnaire Likert value")
    p.add_argument("--scale-max", type=int, default=5, help="highest questionnaire Likert value")
    p.add_argument("--no-standardize", action="store_true", help="cluster on raw dimension means, not z-scores")


def _add_test_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--exclude-inactive", action="store_true",
                   help="drop zero-activity days from rank comparisons")
    p.add_argument("--unit", choices=("day", "student"), default="day",
                   help="between-cohort values: daily cohort averages or per-student averages")
    p.add_argument("--no-continuity", action="store_true", help="normal approximation without continuity correction")
    p.add_argument("--zero-method", choices=("wilcox", "pratt"), default="wilcox",
                   help="zero-difference handling in the signed-rank test")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="writetrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="JSON file with option defaults (flags override it)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("ingest", help="validate revision-log CSVs and write normalized copies")
    _add_io(p, "a log CSV or a directory of <student_id>.csv logs")
    p.add_argument("--timezone", default="UTC", help="calendar timezone for normalizing timestamps")

    p = sub.add_parser("features", help="per-student engagement features and weekly edit categories")
    _add_io(p, "study directory")
    _add_study_options(p)

    p = sub.add_parser("decompose", help="additive seasonal decomposition of cohort-average series")
    _add_io(p, "study directory")
    _add_study_options(p)
    p.add_argument("--period", type=int, default=7, help="seasonal period in days (default 7)")
    p.add_argument("--whole-semester", action="store_true", help="decompose the full semester instead of each half")

    p = sub.add_parser("cluster", help="score SRL questionnaires and split each cohort into high/low clusters")
    _add_io(p, "study directory or a single srl.csv")
    _add_study_options(p)

    p = sub.add_parser("compare", help="within- and between-cohort rank tests")
    _add_io(p, "study directory")
    _add_study_options(p)
    _add_test_options(p)

    p = sub.add_parser("feedback", help="render feedback emails and charts for the intervention cohort")
    _add_io(p, "study directory")
    _add_study_options(p)
    p.add_argument("--template", type=Path, help="email template with {{slot}} markers")
    p.add_argument("--dominant-share", type=float, default=0.5, help="weekly share that marks a dominant week")
    p.add_argument("--late-start-week", type=int, default=3, help="first-activity week counted as a late start")

    p = sub.add_parser("report", help="tables 1-6, figures 2-5 and summary.json")
    _add_io(p, "study directory")
    _add_study_options(p)
    _add_test_options(p)
    p.add_argument("--period", type=int, default=7, help="seasonal period in days (default 7)")
    p.add_argument("--seasonality-source", choices=("cohort", "per_student"), default="cohort",
                   help="decompose the cohort-average series or average per-student decompositions")
    p.add_argument("--frequency-mode", choices=("days", "sessions"), default="days",
                   help="weekly edit frequency from active days or 30-minute writing sessions")

    p = sub.add_parser("simulate", help="generate a synthetic two-cohort study")
    p.add_argument("--out", type=Path, required=False, help="output study directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--students", type=int, default=40, help="students per cohort")
    p.add_argument("--multiplier", type=float, default=1.3, help="intervention cohort volume multiplier from the intervention week")
    p.add_argument("--deletion-fraction", type=float, default=0.15)
    p.add_argument("--start-monday", default="2021-09-27", help="Monday of week 1 (YYYY-MM-DD)")
    p.add_argument("--weeks", type=int, default=10)
    p.add_argument("--intervention-week", type=int, default=6)
    p.add_argument("--timezone", default="UTC")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return
    try:
        config = json.loads(known.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(config, dict):
        parser.error("config file must hold a JSON object")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    if "in" in config:
        config["input"] = config.pop("in")
    for key in ("input", "out", "template"):
        if key in config and config[key] is not None:
            config[key] = Path(config[key])
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        valid = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in config.items() if k in valid})


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if args.out is None:
        parser.error(f"{args.command}: --out is required")
    if args.command != "simulate":
        if args.input is None:
            parser.error(f"{args.command}: --in is required")
        if not args.input.exists():
            parser.error(f"{args.command}: input path does not exist: {args.input}")
    if getattr(args, "template", None) is not None and not args.template.exists():
        parser.error(f"template not found: {args.template}")
    if getattr(args, "scale_min", 1) >= getattr(args, "scale_max", 5):
        parser.error("--scale-min must be below --scale-max")
    if getattr(args, "period", 7) < 2:
        parser.error("--period must be at least 2")
    if args.command == "simulate":
        try:
            SemesterCalendar(date.fromisoformat(args.start_monday), args.weeks, args.intervention_week,
                             timezone=args.timezone)
        except ValueError as exc:
            parser.error(str(exc))
        if args.students < 1:
            parser.error("--students must be at least 1")
        if not 0 <= args.deletion_fraction <= 1:
            parser.error("--deletion-fraction must be in [0, 1]")
        if args.multiplier < 0:
            parser.error("--multiplier must be non-negative")
    if getattr(args, "dominant_share", 0.5) <= 0 or getattr(args, "dominant_share", 0.5) >= 1:
        parser.error("--dominant-share must be in (0, 1)")


def _load(args):
    from .report import load_study

    return load_study(args.input, count_mode=args.count_mode, cluster_seed=args.cluster_seed,
                      scale=(args.scale_min, args.scale_max), standardized=not args.no_standardize)


def cmd_ingest(args) -> None:
    paths = sorted(args.input.glob("*.csv")) if args.input.is_dir() else [args.input]
    (args.out / "logs").mkdir(parents=True, exist_ok=True)
    summary = {}
    for path in paths:
        with path.open("rb") as fh:
            lg = parse_revision_log(fh, path.stem, tz=args.timezone)
        (args.out / "logs" / f"{path.stem}.csv").write_text(serialize_revision_log(lg), encoding="utf-8")
        summary[path.stem] = {"events": len(lg), "edited_chars": total_chars(lg), "inserted_chars":
                              total_chars(lg, "insert-only")}
    (args.out / "ingest.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def cmd_features(args) -> None:
    study = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    rows, cats = [], [["cohort", "student_id", "week", "category"]]
    for name, cohort in study.cohorts.items():
        for sid in cohort.student_ids:
            for w in ("h1", "h2", "full"):
                rows.append((f"{name}:{sid}", student_features(cohort.series[sid], w)))
            cats += [[name, sid, c.week, c.category.value] for c in weekly_edit_categories(cohort.series[sid])]
    (args.out / "features.csv").write_text(features_to_csv(rows))
    (args.out / "weekly_categories.csv").write_text("\n".join(",".join(map(str, r)) for r in cats) + "\n")


def cmd_decompose(args) -> None:
    from .timeseries import decompose_series

    if args.period != 7:
        print(f"note: the analysis design fixes a seven-day period; using the requested period {args.period}",
              file=sys.stderr)
    study = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name, cohort in study.cohorts.items():
        if not cohort.series:
            continue
        avg = cohort_daily_average(list(cohort.series.values()), owner=name)
        windows = ("full",) if args.whole_semester else ("h1", "h2")
        for w in windows:
            res = decompose_series(avg.window(w), args.period)
            (args.out / f"decomposition_{name}_{w}.csv").write_text(res.to_csv())
            summary[f"{name}:{w}"] = [float(v) for v in res.seasonal_indices]
    (args.out / "seasonal_indices.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")


def cmd_cluster(args) -> None:
    from .srl import (
        cluster_proportion_test,
        clusters_to_csv,
        dimension_alphas,
        kmeans_2,
        parse_questionnaire_csv,
        score_questionnaire,
    )

    args.out.mkdir(parents=True, exist_ok=True)
    scale = (args.scale_min, args.scale_max)
    if args.input.is_file():
        sources = {"cohort": args.input}
    else:
        sources = {n: args.input / n / "srl.csv" for n in ("control", "intervention")
                   if (args.input / n / "srl.csv").exists()}
    summary, results = {}, {}
    for name, path in sources.items():
        responses = parse_questionnaire_csv(path.read_text(), scale)
        scores = [score_questionnaire(r, scale) for r in responses]
        res = kmeans_2(scores, args.cluster_seed, ids=[r.student_id for r in responses],
                       standardized=not args.no_standardize)
        results[name] = res
        (args.out / f"clusters_{name}.csv").write_text(clusters_to_csv(res, scores))
        summary[name] = {"alpha": dimension_alphas(responses), "avg_within_centroid_distance":
                         res.avg_within_centroid_distance, "sse": res.sse,
                         "sizes": {lvl: sum(a.cluster.value == lvl for a in res.assignments)
                                   for lvl in ("HighSRL", "LowSRL")}}
    if {"control", "intervention"} <= set(results):
        summary["proportion_test"] = cluster_proportion_test(results["control"].assignments,
                                                             results["intervention"].assignments).to_dict()
    (args.out / "clusters.json").write_text(json.dumps(summary, indent=1, sort_keys=True, default=str) + "\n")


def cmd_compare(args) -> None:
    from .report import between_cohort_comparison, within_cohort_comparison

    study = _load(args)
    args.out.mkdir(parents=True, exist_ok=True)
    kw = {"continuity": not args.no_continuity}
    out = {"within": {}, "between": {}}
    for g in study.groups("cohort"):
        if study.members(g):
            out["within"][g] = within_cohort_comparison(study, g, exclude_inactive=args.exclude_inactive,
                                                        zero_method=args.zero_method, **kw).to_dict()
    if all(study.members(g) for g in study.groups("cohort")):
        for period in ("h1", "h2"):
            out["between"][period] = between_cohort_comparison(study, period, unit=args.unit,
                                                               exclude_inactive=args.exclude_inactive,
                                                               **kw).to_dict()
    (args.out / "comparisons.json").write_text(json.dumps(out, indent=1, sort_keys=True, default=str) + "\n")


def cmd_feedback(args) -> None:
    from .feedback import DEFAULT_TEMPLATE, build_feedback_input, write_feedback

    study = _load(args)
    template = args.template.read_text(encoding="utf-8") if args.template else DEFAULT_TEMPLATE
    current = study.intervention
    if not current.series or not study.control.series:
        raise WritetraceError("feedback needs both a reference (control) and a current (intervention) cohort")
    cohort_avg = cohort_daily_average(list(current.series.values()), owner="intervention")
    reference_avg = cohort_daily_average(list(study.control.series.values()), owner="control")
    args.out.mkdir(parents=True, exist_ok=True)
    for sid in current.student_ids:
        inp = build_feedback_input(current.series[sid], cohort_avg, reference_avg, student_id=sid,
                                   dominant_share=args.dominant_share, late_start_week=args.late_start_week)
        write_feedback(inp, args.out, template)


def cmd_report(args) -> None:
    from .report import write_report

    if args.period != 7:
        print(f"note: the analysis design fixes a seven-day period; using the requested period {args.period}",
              file=sys.stderr)
    study = _load(args)
    written = write_report(study, args.out, exclude_inactive=args.exclude_inactive, unit=args.unit,
                           seasonality_source=args.seasonality_source, seasonal_period=args.period,
                           frequency_mode=args.frequency_mode, continuity=not args.no_continuity,
                           zero_method=args.zero_method)
    if not written:
        print("notice: study is empty; no report written", file=sys.stderr)


def cmd_simulate(args) -> None:
    from .simcohort import simulate_study

    cal = SemesterCalendar(date.fromisoformat(args.start_monday), args.weeks, args.intervention_week,
                           timezone=args.timezone)
    simulate_study(args.out, args.seed, cal, args.students, args.multiplier, args.deletion_fraction)


HANDLERS = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "decompose": cmd_decompose,
    "cluster": cmd_cluster,
    "compare": cmd_compare,
    "feedback": cmd_feedback,
    "report": cmd_report,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        _validate(parser, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        HANDLERS[args.command](args)
    except WritetraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
