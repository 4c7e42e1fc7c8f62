"""Command-line interface: ``phidiv estimate|test|simulate|constants``.

Exit codes: 0 success, 2 bad input or arguments, 3 a zero probability where
the measure requires strict positivity, 4 a p-value was required but the
variance is degenerate. Diagnostics go to stderr as a single ``error: ...``
line; stdout carries only the requested document.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import montecarlo as mc
from .framework import BDViolation
from .inference import ALTERNATIVES, MODES, EstimateRequest, as_rate_certificate, estimate, result_document, wald_test
from .measures import InvalidMeasure, named_constants, parse_measure
from .pmf import (
    DEFAULT_SMOOTHING,
    CountTable,
    ProbabilityVector,
    empirical_pmf,
    read_count_table,
    read_distribution,
    read_samples,
)

EXIT_OK, EXIT_INPUT, EXIT_BD, EXIT_DEGENERATE = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _level(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid level {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"level must be in (0, 1), got {v}")
    return v


def _measure(text):
    try:
        return parse_measure(text)
    except InvalidMeasure as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _smooth(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid smoothing constant {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("smoothing constant must be positive")
    return v


def _sizes(text):
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}") from None


def _add_inputs(sp, with_data=True):
    for side in ("p", "q"):
        g = sp.add_mutually_exclusive_group()
        if with_data:
            g.add_argument(f"--{side}-counts", metavar="CSV", help=f"counts for {side} ('label,count' CSV)")
            g.add_argument(f"--{side}-samples", metavar="FILE", help=f"sample of {side}, one label per line")
        g.add_argument(f"--{side}-dist", metavar="JSON", help=f"known distribution {side} (JSON)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="phidiv", description="Plug-in phi-divergence estimation and asymptotic inference.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--measure", type=_measure, required=True,
                        help="l2, kl, tsallis:<alpha>, renyi:<alpha>; append ':sym' to symmetrize")
        _add_inputs(sp)
        sp.add_argument("--mode", choices=MODES, help="inferred from the inputs when omitted")
        sp.add_argument("--smooth", type=_smooth, metavar="LAMBDA", nargs="?", const=DEFAULT_SMOOTHING,
                        help=f"additive smoothing of empirical pmfs; bare flag uses {DEFAULT_SMOOTHING} "
                             "(default: strict, zeros rejected)")
        sp.add_argument("--level", type=_level, default=0.95, help="confidence level (default 0.95)")
        sp.add_argument("--sym-variance", choices=("exact", "split"), default="exact",
                        help="variance for symmetrized measures (default exact)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")

    est = sub.add_parser("estimate", help="estimate a divergence with standard error and interval")
    common(est)

    tst = sub.add_parser("test", help="Wald test of D = null")
    common(tst)
    tst.add_argument("--null", type=float, default=0.0, help="null value of the divergence (default 0)")
    tst.add_argument("--alt", choices=ALTERNATIVES, default="two-sided")
    tst.add_argument("--require-p-value", action="store_true",
                     help="exit 4 when the variance is degenerate and no p-value exists")

    sim = sub.add_parser("simulate", help="seeded Monte Carlo validation study")
    sim.add_argument("--paper-defaults", action="store_true",
                     help="p=(0.4,0.25,0.35), q=(0.27,0.32,0.41) with the Tsallis/Renyi/KL measure set")
    sim.add_argument("--p-dist", metavar="JSON")
    sim.add_argument("--q-dist", metavar="JSON")
    sim.add_argument("--measure", type=_measure, action="append", help="repeatable")
    sim.add_argument("--mode", choices=MODES, default="two-sample")
    sim.add_argument("--sizes", type=_sizes, default=mc.DEFAULT_SIZES, help="comma-separated, increasing")
    sim.add_argument("--replications", type=int, default=mc.DEFAULT_REPLICATIONS)
    sim.add_argument("--seed", type=int, help="master seed (defaults to 0 with a warning)")
    sim.add_argument("--level", type=_level, default=0.95)
    sim.add_argument("--sym-variance", choices=("exact", "split"), default="exact")
    sim.add_argument("--format", choices=("json", "csv"), default="json")
    sim.add_argument("--output", "-o")
    sim.add_argument("--draws-dir", help="also dump standardized draws, one file per cell")
    sim.add_argument("--include-draws", action="store_true", help="embed draws in the JSON report")

    con = sub.add_parser("constants", help="named bound constants and variances")
    con.add_argument("--measure", type=_measure, required=True)
    _add_inputs(con, with_data=False)
    return ap


# -- input handling ----------------------------------------------------------


def _load(kind, path):
    try:
        if kind == "dist":
            return read_distribution(path)
        if kind == "counts":
            return read_count_table(path)
        return read_samples(path)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}") from None
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from None


def _side(args, side):
    for kind in ("counts", "samples", "dist"):
        path = getattr(args, f"{side}_{kind}", None)
        if path is not None:
            return kind, _load(kind, path)
    return None, None


def _resolve_inputs(args):
    (pk, pv), (qk, qv) = _side(args, "p"), _side(args, "q")
    if pv is None or qv is None:
        raise CliError("both a p input and a q input are required")
    inferred = {
        ("data", "dist"): "one-sample-p",
        ("dist", "data"): "one-sample-q",
        ("data", "data"): "two-sample",
    }.get(("dist" if pk == "dist" else "data", "dist" if qk == "dist" else "data"))
    if inferred is None:
        raise CliError("at least one of p and q must be observed data (counts or samples)")
    mode = args.mode or inferred
    if mode != inferred:
        raise CliError(f"mode {mode} does not match the inputs (they imply {inferred})")

    # a known distribution fixes the ordering; then count tables; else sorted sample labels
    support = None
    for wanted in ("dist", "counts"):
        for kind, v in ((pk, pv), (qk, qv)):
            if support is None and kind == wanted:
                support = v.support
    if support is None:
        support = tuple(sorted(set(pv.observations) | set(qv.observations)))

    def as_obj(kind, v):
        try:
            if kind == "samples":
                return empirical_pmf(v, support)[1]
            if kind == "counts":
                return v if v.support == support else v.reorder(support)
            if v.support != support:
                pos = {s: i for i, s in enumerate(v.support)}
                if set(pos) != set(support):
                    raise ValueError(f"support {list(v.support)} differs from {list(support)}")
                return ProbabilityVector(support, [v.probs[pos[s]] for s in support])
            return v
        except ValueError as exc:
            raise CliError(str(exc)) from None

    p_obj, q_obj = as_obj(pk, pv), as_obj(qk, qv)
    kw = dict(mode=mode, measure=args.measure, smooth=args.smooth, sym_mode=args.sym_variance)
    if isinstance(p_obj, CountTable):
        kw["p_counts"] = p_obj
    else:
        kw["p_known"] = p_obj
    if isinstance(q_obj, CountTable):
        kw["q_counts"] = q_obj
    else:
        kw["q_known"] = q_obj
    return EstimateRequest(**kw)


def _write(text, output):
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc}") from None
    else:
        sys.stdout.write(text)


def _render(doc, fmt):
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value"])
    for k, v in doc.items():
        w.writerow([k, json.dumps(v) if isinstance(v, (list, dict, bool)) or v is None else v])
    return buf.getvalue()


# -- commands ----------------------------------------------------------------


def cmd_estimate(args) -> int:
    est = estimate(_resolve_inputs(args))
    _write(_render(result_document(est, args.level), args.format), args.output)
    return EXIT_OK


def cmd_test(args) -> int:
    est = estimate(_resolve_inputs(args))
    res = wald_test(est, args.null, args.alt, args.level)
    _write(_render(res.to_dict(), args.format), args.output)
    if res.degenerate:
        print("warning: variance is degenerate; no normal-theory p-value is reported", file=sys.stderr)
        if args.require_p_value:
            print("error: p-value requested but the plug-in variance is degenerate", file=sys.stderr)
            return EXIT_DEGENERATE
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.replications < 1:
        raise CliError(f"replications must be at least 1, got {args.replications}")
    seed = args.seed
    if seed is None:
        seed = 0
        print("warning: no --seed given; using master seed 0", file=sys.stderr)
    if args.paper_defaults:
        base = mc.SimulationConfig.paper_defaults()
        p, q, measures = base.p, base.q, base.measures
        if args.measure:
            measures = tuple(args.measure)
    else:
        if not (args.p_dist and args.q_dist and args.measure):
            raise CliError("simulate needs --paper-defaults or all of --p-dist, --q-dist, --measure")
        p, q, measures = _load("dist", args.p_dist), _load("dist", args.q_dist), tuple(args.measure)
    try:
        cfg = mc.SimulationConfig(p=p, q=q, measures=measures, mode=args.mode, sizes=args.sizes,
                                  replications=args.replications, master_seed=seed,
                                  ci_level=args.level, sym_mode=args.sym_variance)
    except mc.ConfigError as exc:
        raise CliError(str(exc)) from None
    report = mc.run(cfg, keep_draws=bool(args.draws_dir or args.include_draws))
    text = mc.report_json(report, args.include_draws) if args.format == "json" else mc.report_csv(report)
    _write(text, args.output)
    if args.draws_dir:
        mc.emit(report, args.format, io.StringIO(), draws_dir=args.draws_dir)
    return EXIT_OK


def cmd_constants(args) -> int:
    if not (args.p_dist and args.q_dist):
        raise CliError("constants needs --p-dist and --q-dist")
    p, q = _load("dist", args.p_dist), _load("dist", args.q_dist)
    if p.support != q.support:
        raise CliError(f"support mismatch: {list(p.support)} vs {list(q.support)}")
    doc = named_constants(args.measure, p, q).to_dict()
    doc["rate_certificate"] = as_rate_certificate(p, q, args.measure).to_dict()
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"estimate": cmd_estimate, "test": cmd_test, "simulate": cmd_simulate, "constants": cmd_constants}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BDViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BD
    except (ValueError, InvalidMeasure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
