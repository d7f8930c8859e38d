"""Command-line interface.

Reports go to files only; logs go to stderr.  Exit codes: 0 success,
2 usage, 3 config/validation, 4 data, 5 numeric/convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import evalstats, marketdata, mdhsim
from .errors import AlignmentError, ArgumentError, InfovolError
from .garchcore import FitOptions, ModelSpec, filter as garch_filter, fit
from .pipeline import (
    STAGES,
    PipelineConfig,
    comparison_report,
    dependence_report,
    load_fit,
    run_pipeline,
    write_bootstrap,
)
from .series import SCHEMA_VERSION, align, envelope, read_csv, write_csv, write_json

logger = logging.getLogger("infovol")


def _named(values: list[str] | None, what: str) -> dict[str, str]:
    out = {}
    for item in values or []:
        name, sep, path = item.partition("=")
        if not sep:
            name, path = Path(item).stem, item
        if name in out:
            raise ArgumentError(f"duplicate {what} name {name!r}")
        out[name] = path
    return out


def _read_series(path) -> "object":
    p = Path(path)
    if not p.is_file():
        raise ArgumentError(f"series file not found: {p}")
    return read_csv(p)


# -- subcommands -------------------------------------------------------------

def cmd_ingest(args) -> None:
    if not (args.trades or args.quotes):
        raise ArgumentError("ingest needs --trades and/or --quotes")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prices, series, meta = {}, {}, {}
    if args.trades:
        t = marketdata.parse_trades(args.trades)
        prices["vwap"] = marketdata.vwap_bars(t)
        meta["returns_vwap"] = (t.malformed, str(args.trades))
        if args.derive_volume:
            series["signal_volume"] = marketdata.aggregate_signal(t.timestamp, t.quantity, "sum")
            meta["signal_volume"] = (t.malformed, str(args.trades))
    if args.quotes:
        q = marketdata.parse_quotes(args.quotes)
        prices["midquote"] = marketdata.midquote_bars(q)
        meta["returns_midquote"] = (q.malformed, str(args.quotes))
        if args.derive_spread:
            series["signal_spread"] = marketdata.aggregate_signal(q.timestamp, q.ask - q.bid, "mean")
            meta["signal_spread"] = (q.malformed, str(args.quotes))
    elif args.derive_spread:
        raise ArgumentError("--derive-spread needs --quotes")
    for name, spec in _named(args.signal, "signal").items():
        path, _, method = spec.partition(":")
        ticks = marketdata.parse_signal(path)
        series[f"signal_{name}"] = marketdata.aggregate_ticks(ticks, method or "sum")
        meta[f"signal_{name}"] = (ticks.malformed, path)
    if len(prices) == 2:
        prices = dict(zip(prices, align(*prices.values())))
    for k, p in prices.items():
        write_csv(p, out / f"price_{k}.csv")
        series[f"returns_{k}"] = marketdata.log_returns(p)
    # every output series on the common returns grid
    for name, s in zip(series, align(*series.values())):
        malformed, source = meta[name]
        write_csv(s, out / f"{name}.csv")
        write_json(envelope(s, malformed, source=source), out / f"{name}.json")


def cmd_simulate(args) -> None:
    proc = {"constant": lambda: mdhsim.Constant(args.c),
            "poisson": lambda: mdhsim.Poisson(args.lam),
            "lognormal": lambda: mdhsim.LogNormal(args.m, args.s)}[args.process]()
    params = mdhsim.MdhParams(args.sigma1, args.mu2, args.sigma2, proc, args.n, args.seed)
    sample = mdhsim.simulate(params)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("returns", "volume", "info"):
        write_csv(getattr(sample, name), out / f"{name}.csv")
    write_json({"schema_version": SCHEMA_VERSION, "params": params.to_dict(),
                "theoretical_r2v_cov": mdhsim.theoretical_r2v_cov(params),
                "count": params.n}, out / "simulate.json")


def cmd_infoflow(args) -> None:
    returns = {k: _read_series(v) for k, v in _named(args.returns, "returns").items()}
    signals = {k: _read_series(v) for k, v in _named(args.signal, "signal").items()}
    if not returns or not signals:
        raise ArgumentError("infoflow needs at least one --returns and one --signal series")
    lens = {f"returns {k}": len(v) for k, v in returns.items()}
    lens.update({f"signal {k}": len(v) for k, v in signals.items()})
    if len(set(lens.values())) != 1:
        raise AlignmentError("series lengths differ: " + ", ".join(f"{k}={v}" for k, v in lens.items()))
    settings = {"max_lag": args.max_lag, "bins": args.bins, "shuffles": args.shuffles,
                "permutations": args.permutations, "integrate_window": args.integrate_window,
                "adf_max_lag": args.adf_max_lag if args.adf_max_lag is not None else "auto",
                "surrogates": args.surrogates}
    report = dependence_report(returns, signals, settings, args.seed, args.threads)
    write_json(report, args.out)


def cmd_fit(args) -> None:
    r = _read_series(args.returns)
    x = None
    if args.exog:
        x = _read_series(args.exog)
        if len(x) != len(r):
            raise AlignmentError(f"returns has length {len(r)} but exog has length {len(x)}")
    spec = ModelSpec(args.family, exogenous=x is not None)
    n_in = args.in_sample or len(r)
    if not 0 < n_in <= len(r):
        raise ArgumentError(f"--in-sample {n_in} outside [1, {len(r)}]")
    opts = FitOptions(args.max_iter, args.tol, args.restarts, args.seed)
    res = fit(spec, r.slice(0, n_in), x.slice(0, n_in) if x else None, opts,
              exog_name=Path(args.exog).stem if args.exog else None)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / (args.name or spec.name.lower())
    path = garch_filter(spec, res.params, r, None if x is None else x.values / res.exog_scale,
                        res.sigma0_sq)
    write_json({"schema_version": SCHEMA_VERSION, **res.to_dict()}, f"{stem}.json")
    write_csv(path.sigma_sq, f"{stem}_variance.csv")
    if not res.converged:
        logger.warning("%s did not converge; best candidate written", spec.name)


def cmd_evaluate(args) -> None:
    r = _read_series(args.returns)
    exogs = {k: _read_series(v) for k, v in _named(args.exog, "exog").items()}
    for k, v in exogs.items():
        if len(v) != len(r):
            raise AlignmentError(f"returns has length {len(r)} but exog {k} has length {len(v)}")
    fits = {}
    n_in = None
    for p in args.fit:
        res = load_fit(p)
        if n_in is not None and res.n_in != n_in:
            raise ArgumentError("all fits must share the same in-sample length")
        n_in = res.n_in
        sname = None
        if res.spec.exogenous:
            sname = res.exog_name if res.exog_name in exogs else (next(iter(exogs)) if len(exogs) == 1 else None)
            if sname is None:
                raise ArgumentError(f"{p}: pass --exog NAME=PATH for signal {res.exog_name!r}")
        label = f"r_{res.spec.name}" + (f"_{sname}" if sname else "")
        fits[label] = ("r", res, sname)
    n_out = args.out_sample or (len(r) - n_in)
    if n_in + n_out > len(r):
        raise ArgumentError(f"in-sample {n_in} + out-of-sample {n_out} exceeds series length {len(r)}")
    report = comparison_report({"r": r}, exogs, fits, n_in, n_out)
    write_json(report, args.out)


def cmd_bootstrap(args) -> None:
    r = _read_series(args.returns)
    x = _read_series(args.exog)
    if len(x) != len(r):
        raise AlignmentError(f"returns has length {len(r)} but exog has length {len(x)}")
    base = ModelSpec(args.family)
    opts = FitOptions(args.max_iter, args.tol, args.restarts, args.seed)
    bc = evalstats.bootstrap_compare(base, ModelSpec(args.family, True), r, x, args.n_segments,
                                     args.seg_len, args.seed, opts,
                                     exclude_gaps=args.exclude_gaps, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_bootstrap(bc, out / f"bootstrap_{base.name.lower()}")


def cmd_run(args) -> None:
    overrides = {"seed": args.seed, "output_dir": args.output_dir,
                 "threads": args.threads if args.threads != 1 else None}
    cfg = PipelineConfig.load(args.config, overrides)
    run_pipeline(cfg, tuple(args.skip or ()))


# -- parser ------------------------------------------------------------------

def _fit_flags(p, seed_required=True):
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, required=seed_required)


def build_parser() -> argparse.ArgumentParser:
    def global_flags(p, default):
        p.add_argument("-v", "--verbose", action="count", default=default)
        p.add_argument("--threads", type=int, default=1 if default == 0 else default,
                       help="cap on parallel work items")

    # flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="infovol",
                                     description="Information flow and GARCH-family volatility analysis")
    global_flags(parser, 0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="ticks -> minute bars and returns")
    p.add_argument("--trades")
    p.add_argument("--quotes")
    p.add_argument("--signal", action="append", metavar="NAME=PATH[:sum|mean]")
    p.add_argument("--derive-volume", action="store_true")
    p.add_argument("--derive-spread", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", parents=[common], help="simulate the returns/volume mixture model")
    p.add_argument("--process", choices=["constant", "poisson", "lognormal"], default="poisson")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--sigma1", type=float, default=1e-3)
    p.add_argument("--mu2", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=0.5)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("infoflow", parents=[common], help="correlation, transfer entropy, ADF")
    p.add_argument("--returns", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--signal", action="append", required=True, metavar="NAME=PATH")
    p.add_argument("--max-lag", type=int, default=10)
    p.add_argument("--bins", type=int, default=3)
    p.add_argument("--shuffles", type=int, default=100)
    p.add_argument("--permutations", type=int, default=200)
    p.add_argument("--integrate-window", type=int, default=30)
    p.add_argument("--adf-max-lag", type=int)
    p.add_argument("--surrogates", choices=["shuffle", "block"], default="shuffle")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infoflow)

    p = sub.add_parser("fit", parents=[common], help="fit one GARCH-family model")
    p.add_argument("--family", type=str.upper, choices=["GARCH", "EGARCH", "CGARCH", "TGARCH"],
                   required=True)
    p.add_argument("--returns", required=True)
    p.add_argument("--exog")
    p.add_argument("--in-sample", type=int)
    p.add_argument("--name")
    p.add_argument("--out-dir", default=".")
    _fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", parents=[common], help="out-of-sample comparison of fitted models")
    p.add_argument("--returns", required=True)
    p.add_argument("--fit", action="append", required=True)
    p.add_argument("--exog", action="append", metavar="NAME=PATH")
    p.add_argument("--out-sample", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bootstrap", parents=[common], help="segment bootstrap with KS test")
    p.add_argument("--family", type=str.upper, choices=["GARCH", "EGARCH", "CGARCH", "TGARCH"],
                   required=True)
    p.add_argument("--returns", required=True)
    p.add_argument("--exog", required=True)
    p.add_argument("--n-segments", type=int, default=100)
    p.add_argument("--seg-len", type=int, default=1000)
    p.add_argument("--exclude-gaps", action="store_true")
    p.add_argument("--out-dir", default=".")
    _fit_flags(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("run", parents=[common], help="run the full pipeline from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--skip", action="append", choices=[s for s in STAGES if s != "ingest"])
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run)
    return parser


def _setup_logging(verbose: int) -> None:
    env = os.environ.get("INFOVOL_LOG", "").upper()
    level = getattr(logging, env, None) if env else None
    if not isinstance(level, int):
        level = [logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        args.func(args)
    except InfovolError as exc:
        logger.error("%s", exc)
        return getattr(exc, "exit_code", 1)
    except (OSError, json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
