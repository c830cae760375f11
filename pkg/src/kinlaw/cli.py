"""Command-line interface: ``kinlaw {filter,geom,fit,synth,summarize}``.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 numerical
failure. Failures print one ``error: <Kind>: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import fileio, stats, synth
from .errors import DataError, KinlawError, MissingColumn, NumericalError
from .filtering import filter_trajectory, pchip_resample
from .pipeline import TRIAL, PipelineConfig, analyze, build_report, load_report, profile_for, report_text

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3
FILTER_MARK = "kinlaw-filtered"
PARAMETERS = ("alpha", "beta", "gamma", "r2")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"error: Usage: {message}\n")


def _column_map(items):
    mapping = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or key not in ("t", "x", "y", "z", "segment") or not value:
            raise UsageError(f"bad --column-map entry {item!r}; expected name=header")
        mapping[key] = value
    return mapping


def _add_input_flags(p):
    p.add_argument("input", help="trajectory CSV (header t,x,y,z[,segment])")
    p.add_argument("--column-map", action="append", metavar="NAME=HEADER",
                   help="read column NAME from HEADER; repeatable")
    p.add_argument("--unit-scale", type=float, default=1.0,
                   help="factor converting file positions to meters")
    p.add_argument("--resample-hz", type=float, default=None,
                   help="PCHIP-resample to this rate first (off by default)")
    p.add_argument("--out", default="-", help="output path (default stdout)")


def _add_pipeline_flags(p):
    p.add_argument("--pos-cutoff", type=float, default=6.0, help="position filter cutoff, Hz")
    p.add_argument("--deriv-cutoff", type=float, default=10.0, help="derivative filter cutoff, Hz")
    p.add_argument("--edge-trim", type=float, default=0.0,
                   help="seconds discarded at each trial end after differentiation")


def build_parser():
    parser = _Parser(prog="kinlaw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("filter", help="resample and/or zero-lag filter positions")
    _add_input_flags(p)
    p.add_argument("--pos-cutoff", type=float, default=6.0)
    p.add_argument("--antialias-hz", type=float, default=None,
                   help="zero-lag pre-filter before resampling (off by default)")

    p = sub.add_parser("geom", help="per-sample speed, curvature and torsion")
    _add_input_flags(p)
    _add_pipeline_flags(p)

    p = sub.add_parser("fit", help="fit the power law per segment and per trial")
    _add_input_flags(p)
    _add_pipeline_flags(p)
    p.add_argument("--tau-min", type=float, default=2.0, help="torsion threshold, 1/m")
    p.add_argument("--no-torsion", action="store_true", help="fit speed against curvature only")
    p.add_argument("--config-from", metavar="REPORT",
                   help="replay the configuration echoed in an earlier report")

    p = sub.add_parser("synth", help="generate a synthetic power-law trajectory")
    p.add_argument("--path", choices=("helix", "modulated_helix", "spline"), default="modulated_helix")
    p.add_argument("--a", type=float, default=None, help="helix radius, m")
    p.add_argument("--b", type=float, default=None, help="helix pitch per radian, m")
    p.add_argument("--amplitude", type=float, default=None)
    p.add_argument("--wobble-frequency", type=float, default=None)
    p.add_argument("--length", type=float, default=None, help="path length, m")
    p.add_argument("--duration", type=float, default=None, help="trajectory duration, s")
    p.add_argument("--path-seed", type=int, default=0, help="seed for random spline control points")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=-1.0 / 3.0)
    p.add_argument("--gamma", type=float, default=-1.0 / 6.0)
    p.add_argument("--rate-hz", type=float, default=100.0)
    p.add_argument("--noise", type=float, default=0.0, help="sd of log-speed noise")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segments", type=int, default=0,
                   help="label the output with this many equal-duration segments S1..Sk")
    p.add_argument("--out", default="-", help="trajectory CSV (default stdout)")
    p.add_argument("--truth-out", default=None, help="ground-truth CSV path")

    p = sub.add_parser("summarize", help="statistics over a directory of fit reports")
    p.add_argument("reports", help="directory of *.json fit reports; file stem = trial id")
    p.add_argument("metadata", help="CSV with columns trial,subject,condition[,grs]")
    p.add_argument("--regression", action="store_true", help="OLS of trial values on GRS")
    p.add_argument("--rm-regression", action="store_true",
                   help="common-slope regression on GRS with per-subject intercepts")
    p.add_argument("--rm-anova", action="store_true", help="repeated-measures ANOVA across segments")
    p.add_argument("--trial-value", choices=("segment-mean", "whole"), default="segment-mean",
                   help="trial value for regressions: mean over segment labels of the "
                        "per-label mean fit, or the whole-trial fit")
    p.add_argument("--out", default="-")
    return parser


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _config(args, **extra):
    return PipelineConfig(
        resample_hz=args.resample_hz,
        pos_cutoff_hz=args.pos_cutoff,
        deriv_cutoff_hz=getattr(args, "deriv_cutoff", 10.0),
        unit_scale=args.unit_scale,
        edge_trim_s=getattr(args, "edge_trim", 0.0),
        column_map=_column_map(args.column_map),
        **extra,
    )


def _read(args, config):
    return fileio.read_trajectory_csv(args.input, config.column_map, config.unit_scale)


def cmd_filter(args):
    notes = fileio.read_annotations(args.input)
    if any(n.startswith(FILTER_MARK) for n in notes):
        print(f"warning: {args.input} is already filtered; filtering again squares the "
              "response a second time", file=sys.stderr)
    column_map = _column_map(args.column_map)
    traj = fileio.read_trajectory_csv(args.input, column_map, args.unit_scale)
    if args.resample_hz is not None:
        traj = pchip_resample(traj, args.resample_hz, antialias_hz=args.antialias_hz)
    traj = filter_trajectory(traj, args.pos_cutoff)
    mark = f"{FILTER_MARK}: pos_cutoff_hz={args.pos_cutoff:g} rate_hz={traj.rate_hz:.9g}"
    _emit(fileio.write_trajectory_csv(None, traj, annotations=notes + [mark]), args.out)


def cmd_geom(args):
    config = _config(args)
    profile, _ = profile_for(_read(args, config), config)
    _emit(fileio.write_profile_csv(None, profile), args.out)


def cmd_fit(args):
    if args.config_from:
        config = PipelineConfig.from_dict(load_report(args.config_from)["config"])
    else:
        config = _config(args, tau_min=args.tau_min, include_torsion=not args.no_torsion)
    traj = _read(args, config)
    rows, trial_error = analyze(traj, config)
    if trial_error is not None:
        raise trial_error
    report = build_report(rows, config, fileio.file_digest(args.input))
    _emit(report_text(report), args.out)


def cmd_synth(args):
    shape = {k: v for k, v in (("a", args.a), ("b", args.b), ("amplitude", args.amplitude),
                                ("wobble_frequency", args.wobble_frequency)) if v is not None}
    if args.path == "helix":
        path = synth.helix(length_s=args.length, **shape)
    elif args.path == "modulated_helix":
        path = synth.modulated_helix(length_s=args.length, **shape)
    else:
        if shape:
            raise UsageError("spline paths take no helix shape flags")
        path = synth.spline(seed=args.path_seed, length_s=args.length)
    if args.length is None and args.duration is None and args.path != "spline":
        args.duration = 60.0
    spec = synth.GenSpec(path, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                         rate_hz=args.rate_hz, speed_noise_sd=args.noise, seed=args.seed,
                         duration_s=args.duration)
    traj, truth = synth.generate(spec)
    if args.segments > 0:
        edges = np.linspace(traj.t[0], traj.t[-1], args.segments + 1)
        which = np.clip(np.searchsorted(edges, traj.t, side="right") - 1, 0, args.segments - 1)
        traj = type(traj).from_arrays(traj.t, traj.pos, [f"S{i + 1}" for i in which], traj.rate_hz)
    _emit(fileio.write_trajectory_csv(None, traj), args.out)
    if args.truth_out:
        fileio.write_ground_truth_csv(args.truth_out, truth)


def _read_metadata(path):
    meta = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"trial", "subject", "condition"} - set(reader.fieldnames or ())
        if missing:
            raise MissingColumn(sorted(missing)[0])
        for row in reader:
            grs = (row.get("grs") or "").strip()
            meta[row["trial"].strip()] = (row["subject"].strip(), row["condition"].strip(),
                                          float(grs) if grs else None)
    return meta


def _segment_mean(fits):
    # repetitions of a segment are averaged first, then the segment means
    by_label = defaultdict(list)
    for f in fits:
        by_label[f["segment"]].append(f)
    avg = {}
    for p in PARAMETERS:
        if all(p in f for f in fits):
            avg[p] = float(np.mean([np.mean([f[p] for f in group]) for group in by_label.values()]))
        else:
            avg[p] = None
    return avg


def _records(report_dir, meta, trial_value):
    segment_records, trial_records = [], []
    files = sorted(Path(report_dir).glob("*.json"))
    if not files:
        raise DataError(f"no *.json reports in {report_dir}")
    for path in files:
        trial = path.stem
        if trial not in meta:
            raise DataError(f"trial {trial!r} missing from metadata")
        subject, condition, grs = meta[trial]
        fits = [f for f in load_report(path)["fits"] if "error" not in f]

        def record(seg, values):
            return stats.TrialRecord(subject, condition, seg, values["alpha"], values["beta"],
                                     values.get("gamma"), values["r2"], grs, trial)

        segs = [f for f in fits if f["segment"] != TRIAL]
        segment_records.extend(record(f["segment"], f) for f in segs)
        whole = [f for f in fits if f["segment"] == TRIAL]
        if trial_value == "segment-mean" and segs:
            trial_records.append(record(TRIAL, _segment_mean(segs)))
        elif whole:
            trial_records.append(record(TRIAL, whole[0]))
    return segment_records, trial_records


def _coef_rows(analysis, parameter, result, condition=""):
    rows = []
    for term, c in result.coefficients.items():
        rows.append({"analysis": analysis, "parameter": parameter, "condition": condition,
                     "term": term, "estimate": c.estimate, "std_error": c.std_error,
                     "statistic": c.statistic, "p_value": c.p_value, "dof1": "", "dof2": c.dof,
                     "ci_low": c.ci_low, "ci_high": c.ci_high, "n": result.n})
    rows.append({"analysis": analysis, "parameter": parameter, "condition": condition,
                 "term": "model_F", "statistic": result.f_stat, "p_value": result.p_value,
                 "dof1": result.dof[0], "dof2": result.dof[1], "n": result.n, "r2": result.r2})
    return rows


def cmd_summarize(args):
    meta = _read_metadata(args.metadata)
    seg_recs, trial_recs = _records(args.reports, meta, args.trial_value)
    params = [p for p in PARAMETERS if any(getattr(r, p) is not None for r in seg_recs + trial_recs)]
    out = []
    for p in params:
        for row in stats.cell_summaries(seg_recs + trial_recs, p):
            out.append({"analysis": "mean_ci", "term": "mean", "estimate": row["mean"],
                        **{k: row[k] for k in ("parameter", "condition", "segment", "n",
                                               "ci_low", "ci_high")}})
    reg_params = [p for p in params if p != "r2"]
    if args.regression or args.rm_regression:
        with_grs = [r for r in trial_recs if r.grs is not None]
        for p in reg_params:
            usable = [r for r in with_grs if getattr(r, p) is not None]
            if args.regression:
                res = stats.ols([getattr(r, p) for r in usable], [r.grs for r in usable], names=["grs"])
                out.extend(_coef_rows("ols", p, res))
            if args.rm_regression:
                out.extend(_coef_rows("rm_regression", p, stats.rm_regression(usable, p)))
    if args.rm_anova:
        by_condition = defaultdict(list)
        for r in seg_recs:
            by_condition[r.condition].append(r)
        for condition in sorted(by_condition):
            for p in reg_params:
                res = stats.rm_anova_1way(by_condition[condition], p)
                out.append({"analysis": "rm_anova", "parameter": p, "condition": condition,
                            "term": "segment", "statistic": res.f_stat, "p_value": res.p_value,
                            "dof1": res.dof[0], "dof2": res.dof[1], "n": res.n})
    header = ["analysis", "parameter", "condition", "segment", "term", "estimate", "std_error",
              "statistic", "p_value", "dof1", "dof2", "ci_low", "ci_high", "n", "r2"]
    _emit(fileio.write_table_csv(None, out, header), args.out)


COMMANDS = {
    "filter": cmd_filter,
    "geom": cmd_geom,
    "fit": cmd_fit,
    "synth": cmd_synth,
    "summarize": cmd_summarize,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: Usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ValueError, OSError) as exc:
        kind = type(exc).__name__ if isinstance(exc, KinlawError) else "InvalidInput"
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
