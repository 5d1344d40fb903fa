"""Command line entry point ``vandamp``."""

import argparse
import json
import logging
import sys

from . import diagnostics as dg
from .errors import ConfigError, VandampError
from .problem import DampingSchedule
from .runner import EXIT_IO, EXIT_OK, EXIT_VERDICT, SUITES, parse_config, read_csv, run_scenario, run_suite


def _load(path):
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise SystemExit(_fail(f"cannot read {path}: {exc}", EXIT_IO))


def _fail(msg, code):
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_run(args):
    cfg = _load(args.config)
    res = run_scenario(cfg, args.csv)
    print(json.dumps(res.summary(), sort_keys=True, indent=1))
    if res.error:
        print(f"error: {res.error}", file=sys.stderr)
    return res.exit_code


def cmd_suite(args):
    report = run_suite(args.name, args.out)
    for r in report.scenarios:
        statuses = {k: v["status"] for k, v in r.verdicts.items() if k != "prop1"}
        print(f"{r.config.name}: exit {r.exit_code} {statuses}")
    if report.lemma1:
        ok = sum(c["pass"] for c in report.lemma1)
        print(f"lemma1 lattice: {ok}/{len(report.lemma1)} cells pass")
    print(f"suite {args.name}: {'PASS' if report.passed else 'FAIL'}")
    return report.exit_code


def cmd_lemma1(args):
    sched = DampingSchedule("power", args.K, args.alpha)
    res = dg.lemma1_check(sched, args.tau)
    print(f"tau0 = {dg.tau0(sched)!r}")
    print(f"lhs = {res.lhs!r}")
    print(f"rhs = {res.rhs!r}")
    print(f"tail bound = {res.tail_bound!r} (quadrature cut at T = {res.T_quad!r})")
    print("PASS" if res.passed else "FAIL")
    return EXIT_OK if res.passed else EXIT_VERDICT


def cmd_classify(args):
    cfg = _load(args.config)
    print(cfg.classification.summary())
    print(f"probe scenario: {'yes' if cfg.probe else 'no'}")
    return EXIT_OK


def cmd_fit(args):
    try:
        cols = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot read {args.csv}: {exc}", EXIT_IO)
    fit = dg.decay_fit(cols, "E", args.window, args.nu)
    trend = dg.scaled_energy_trend(cols, args.nu)
    print(f"window [{fit.t_a!r}, {fit.t_b!r}]  slope {fit.slope!r}  r {fit.correlation!r}")
    print(f"decay at nu = {args.nu!r}: {fit.verdict}")
    print(f"scaled trend ratio {trend.ratio!r}: {'pass' if trend.passed else 'fail'}")
    return EXIT_OK if fit.verdict == "consistent" and trend.passed else EXIT_VERDICT


def build_parser():
    p = argparse.ArgumentParser(prog="vandamp", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("run", help="integrate one scenario config")
    s.add_argument("config")
    s.add_argument("--csv", help="CSV output path (overrides [output] path)")
    s.set_defaults(func=cmd_run)
    s = sub.add_parser("suite", help="run a predefined scenario matrix")
    s.add_argument("name", choices=SUITES)
    s.add_argument("--out")
    s.set_defaults(func=cmd_suite)
    s = sub.add_parser("lemma1", help="check the exponential damping integral bound at one point")
    s.add_argument("--K", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.set_defaults(func=cmd_lemma1)
    s = sub.add_parser("classify", help="print the hypothesis report for a config")
    s.add_argument("config")
    s.set_defaults(func=cmd_classify)
    s = sub.add_parser("fit", help="fit the energy decay in a scenario CSV")
    s.add_argument("csv")
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--window", type=float, default=0.5)
    s.set_defaults(func=cmd_fit)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_VERDICT
    except VandampError as exc:
        return _fail(str(exc), EXIT_VERDICT)


if __name__ == "__main__":
    sys.exit(main())
