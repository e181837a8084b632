"""Command-line entry point: ``ghzmag {probability,sensitivity,sweep,verify}``.

Exit codes: 0 success, 1 config error, 2 verification failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import analytic, lindblad, sensitivity, sweep
from .quantum import ProbeState, Scheme

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file path or preset name (fig1..fig4)")
    common.add_argument("--mode", choices=sweep.MODES)
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--format", choices=sweep.FORMATS)
    common.add_argument("--jobs", type=int)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="ghzmag", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("probability", parents=[common], help="time trace of the projection probability")
    sub.add_parser("sensitivity", parents=[common], help="optimal time and uncertainty at one point")
    sub.add_parser("sweep", parents=[common], help="run a parameter grid and write a table")
    sub.add_parser("verify", parents=[common], help="run the numeric oracle suite")
    return parser


def load(args) -> sweep.SweepConfig:
    cfg = sweep.load_config(args.config) if args.config else sweep.SweepConfig()
    for name in ("mode", "output", "format", "jobs", "seed"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    return cfg.validate()


def _single_point(cfg: sweep.SweepConfig):
    if len(cfg.L) != 1 or len(cfg.m) != 1 or len(cfg.gamma) != 1:
        raise sweep.ConfigError("this command needs exactly one L, m and gamma value")
    return cfg.L[0], cfg.m[0], cfg.gamma[0]


def _write(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_probability(cfg: sweep.SweepConfig) -> int:
    L, m, gamma = _single_point(cfg)
    params = cfg.params(L, m, gamma, epsilon=cfg.epsilon)
    times = np.asarray(cfg.times, dtype=float)
    cols = ["t", "scheme", "p_analytic", "p_numeric", "residual", "validity"]
    records = []
    for scheme in cfg.schemes:
        ana = analytic.model_probability(times, params, scheme)
        num = [None] * len(times)
        if cfg.mode != "analytic":
            sim = params if scheme is Scheme.GHZ else replace(params, L=1)
            num = [v for _, v in lindblad.probability_trace(sim, ProbeState(scheme, sim.L), times)]
        for k, t in enumerate(times):
            pa = float(np.atleast_1d(ana.value)[k])
            pn = num[k]
            ok = params.epsilon * t * (L if scheme is Scheme.GHZ else 1) <= 0.1
            records.append({
                "t": float(t), "scheme": scheme.value,
                "p_analytic": pa if cfg.mode != "numeric" else None,
                "p_numeric": pn,
                "residual": None if pn is None else abs(pn - pa),
                "validity": "ok" if ok else "leading-order-suspect",
            })
    if cfg.format == "json":
        text = json.dumps(records, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            w.writerow(["" if r[c] is None else (f"{r[c]:.12g}" if isinstance(r[c], float) else r[c])
                        for c in cols])
        text = buf.getvalue()
    _write(text, cfg.output)
    return EXIT_OK


def cmd_sensitivity(cfg: sweep.SweepConfig) -> int:
    L, m, gamma = _single_point(cfg)
    params = cfg.params(L, m, gamma)
    out = {"L": L, "m": m, "gamma": gamma, "noise": cfg.noise, "T": cfg.T, "schemes": {}}
    results = {}
    for scheme in cfg.schemes:
        budget = sensitivity.MeasurementBudget(cfg.T, L, scheme)
        res = sensitivity.optimize_time(params, budget, points_per_decade=cfg.points_per_decade)
        asym = sensitivity.asymptotic_delta_epsilon(params, budget)
        entry = {
            "t_opt": res.t_opt,
            "delta_eps_norm": res.delta_eps_norm,
            "delta_eps": res.delta_eps if math.isfinite(cfg.T) else None,
            "regime": res.regime,
            "validity": res.validity,
            "asymptotic_delta_eps_norm": asym.delta_eps_norm,
        }
        if cfg.mode != "analytic":
            entry["numeric_delta_eps_norm"] = sweep.numeric_delta_epsilon_norm(
                res.t_opt, params, scheme, cfg.max_steps)
        out["schemes"][scheme.value] = entry
        results[scheme] = res
    if len(results) == 2:
        out["ratio"] = results[Scheme.GHZ].delta_eps_norm / results[Scheme.INDIVIDUAL].delta_eps_norm
    if out["T"] == math.inf:
        out["T"] = None
    _write(json.dumps(out, indent=2) + "\n", cfg.output)
    return EXIT_OK


def cmd_sweep(cfg: sweep.SweepConfig) -> int:
    rows = sweep.run_sweep(cfg)
    if cfg.output:
        sweep.emit(rows, cfg.format, cfg.output)
    else:
        sys.stdout.write(sweep.format_rows(rows, cfg.format))
    return EXIT_OK


def cmd_verify(cfg: sweep.SweepConfig) -> int:
    report = sweep.verify(cfg)
    print(report.text())
    if cfg.output:
        _write(json.dumps(report.as_dict(), indent=2) + "\n", cfg.output)
    return EXIT_OK if report.passed else EXIT_VERIFY


COMMANDS = {
    "probability": cmd_probability,
    "sensitivity": cmd_sensitivity,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args)
    except sweep.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc, FileNotFoundError) else EXIT_IO
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", lindblad.LeadingOrderWarning)
            return COMMANDS[args.command](cfg)
    except sweep.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
