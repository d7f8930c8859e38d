"""Config-driven end-to-end run: ingest, stats, infoflow, fit, evaluate, bootstrap.

Every stage writes its report into the output directory; a manifest records
the effective configuration, input digests and per-stage timings.  Report
files never contain timings, so repeated runs produce identical bytes.
"""
from __future__ import annotations

import copy
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, evalstats, infoflow, marketdata
from .errors import ConfigError, InfovolError
from .garchcore import FitOptions, FitResult, ModelSpec, filter as garch_filter, fit, forecast_oos
from .series import TimeSeries, align, envelope, write_csv, write_json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STAGES = ("ingest", "stats", "infoflow", "fit", "evaluate", "bootstrap")

DEFAULTS = {
    "price_definition": "both",
    "in_sample_length": 50_000,
    "out_sample_length": 8_000,
    "models": ["GARCH", "GARCHX"],
    "threads": 1,
    "inputs": {"signals": []},
    "infoflow": {"max_lag": 10, "bins": 3, "shuffles": 100, "permutations": 200,
                 "integrate_window": 30, "adf_max_lag": "auto", "surrogates": "shuffle"},
    "fit": {"max_iter": 2000, "tol": 1e-8, "restarts": 5},
    "bootstrap": {"n_segments": 100, "seg_len": 1000, "exclude_gaps": False},
    "stats": {"acf_max_lag": 20},
}


class StageError(InfovolError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"stage {stage!r} failed: {cause}")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class PipelineConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        path = Path(path)
        try:
            data = tomllib.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data, path.parent, overrides)

    @classmethod
    def from_dict(cls, data: dict, base_dir=".", overrides: dict | None = None) -> "PipelineConfig":
        merged = _merge(DEFAULTS, data)
        if overrides:
            merged = _merge(merged, {k: v for k, v in overrides.items() if v is not None})
        cfg = cls(merged, Path(base_dir))
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.raw[key]

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def output_dir(self) -> Path:
        return self.path(self.raw["output_dir"])

    @property
    def models(self) -> list[ModelSpec]:
        return [ModelSpec.parse(m) for m in self.raw["models"]]

    def fit_options(self, seed: int) -> FitOptions:
        f = self.raw["fit"]
        return FitOptions(int(f["max_iter"]), float(f["tol"]), int(f["restarts"]), seed)

    def input_files(self) -> dict[str, Path]:
        inp = self.raw["inputs"]
        files = {k: self.path(inp[k]) for k in ("trades", "quotes") if inp.get(k)}
        for s in inp.get("signals", []):
            if s.get("path"):
                files[f"signal:{s['name']}"] = self.path(s["path"])
        return files

    def validate(self) -> None:
        c = self.raw
        if "seed" not in c:
            raise ConfigError("config must set a master 'seed'")
        if not isinstance(c["seed"], int) or c["seed"] < 0:
            raise ConfigError("seed must be a non-negative integer")
        if "output_dir" not in c:
            raise ConfigError("config must set 'output_dir'")
        if c["price_definition"] not in ("vwap", "midquote", "both"):
            raise ConfigError("price_definition must be vwap, midquote or both")
        inp = c["inputs"]
        need = {"vwap": ["trades"], "midquote": ["quotes"], "both": ["trades", "quotes"]}
        for k in need[c["price_definition"]]:
            if not inp.get(k):
                raise ConfigError(f"inputs.{k} is required for price_definition={c['price_definition']}")
        for s in inp.get("signals", []):
            if "name" not in s:
                raise ConfigError("every signal needs a name")
            if bool(s.get("path")) == bool(s.get("derive")):
                raise ConfigError(f"signal {s['name']!r} needs exactly one of 'path' or 'derive'")
            if s.get("derive") not in (None, "volume", "spread"):
                raise ConfigError(f"signal {s['name']!r}: derive must be 'volume' or 'spread'")
            if s.get("derive") == "volume" and not inp.get("trades"):
                raise ConfigError("a derived volume signal needs inputs.trades")
            if s.get("derive") == "spread" and not inp.get("quotes"):
                raise ConfigError("a derived spread signal needs inputs.quotes")
        try:
            models = self.models
        except InfovolError as exc:
            raise ConfigError(str(exc)) from None
        if any(m.exogenous for m in models) and not inp.get("signals"):
            raise ConfigError("exogenous models need at least one signal")
        for name, p in self.input_files().items():
            if not p.is_file():
                raise ConfigError(f"input file for {name} not found: {p}")
        if c["in_sample_length"] < 200 or c["out_sample_length"] < 10:
            raise ConfigError("in_sample_length must be >= 200 and out_sample_length >= 10")

    def snapshot(self) -> dict:
        return json.loads(json.dumps(self.raw, default=str))


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _seed_for(master: int, *labels: str) -> int:
    """Stable per-task seed derived from the master seed and a task label."""
    digest = hashlib.sha256("/".join(labels).encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return int(np.random.SeedSequence([master, *words]).generate_state(1, np.uint64)[0] >> 1)


# -- stages ------------------------------------------------------------------

@dataclass
class Data:
    returns: dict[str, TimeSeries] = field(default_factory=dict)
    signals: dict[str, TimeSeries] = field(default_factory=dict)
    malformed: dict[str, int] = field(default_factory=dict)


def stage_ingest(cfg: PipelineConfig, out: Path) -> Data:
    inp = cfg["inputs"]
    data = Data()
    trades = quotes = None
    if inp.get("trades"):
        trades = marketdata.parse_trades(cfg.path(inp["trades"]))
        data.malformed["trades"] = trades.malformed
    if inp.get("quotes"):
        quotes = marketdata.parse_quotes(cfg.path(inp["quotes"]))
        data.malformed["quotes"] = quotes.malformed
    pdef = cfg["price_definition"]
    prices = {}
    if pdef in ("vwap", "both"):
        prices["vwap"] = marketdata.vwap_bars(trades)
    if pdef in ("midquote", "both"):
        prices["midquote"] = marketdata.midquote_bars(quotes)
    if len(prices) == 2:
        prices = dict(zip(prices, align(*prices.values())))
    returns = {k: marketdata.log_returns(p) for k, p in prices.items()}
    ref = next(iter(returns.values()))
    lo, hi = ref.start - 1, ref.start + len(ref) - 1
    for s in inp.get("signals", []):
        name = s["name"]
        if s.get("derive") == "volume":
            series = marketdata.aggregate_signal(trades.timestamp, trades.quantity, "sum", lo, hi)
        elif s.get("derive") == "spread":
            series = marketdata.aggregate_signal(quotes.timestamp, quotes.ask - quotes.bid, "mean", lo, hi)
        else:
            ticks = marketdata.parse_signal(cfg.path(s["path"]))
            data.malformed[f"signal:{name}"] = ticks.malformed
            series = marketdata.aggregate_ticks(ticks, s.get("method", "sum"), lo, hi)
        data.signals[name] = series
    # everything on the returns grid
    all_series = list(returns.values()) + list(data.signals.values())
    aligned = align(*all_series)
    names = list(returns) + list(data.signals)
    for name, s in zip(names, aligned):
        if name in returns:
            data.returns[name] = s
        else:
            data.signals[name] = s

    d = out / "ingest"
    d.mkdir(parents=True, exist_ok=True)
    for kind, group in (("returns", data.returns), ("signal", data.signals)):
        for name, s in group.items():
            write_csv(s, d / f"{kind}_{name}.csv")
    for name, p in prices.items():
        write_csv(p, d / f"price_{name}.csv")
    summary = {
        "schema_version": SCHEMA_VERSION,
        "series": {f"returns_{k}": {k2: v2 for k2, v2 in envelope(s).items() if k2 not in ("values", "gap_mask")}
                   for k, s in data.returns.items()},
        "malformed_rows": data.malformed,
    }
    summary["series"].update({f"signal_{k}": {k2: v2 for k2, v2 in envelope(s).items()
                                               if k2 not in ("values", "gap_mask")}
                              for k, s in data.signals.items()})
    write_json(summary, d / "ingest.json")
    n = len(next(iter(data.returns.values())))
    need = cfg["in_sample_length"] + cfg["out_sample_length"]
    if n < need:
        raise ConfigError(f"only {n} aligned returns, but in_sample_length + out_sample_length = {need}")
    return data


def stage_stats(cfg, data: Data, out: Path) -> dict:
    lag = int(cfg["stats"]["acf_max_lag"])
    report = {"schema_version": SCHEMA_VERSION, "returns": {}, "signals": {}}
    for name, r in data.returns.items():
        acf = marketdata.autocorrelation(r, lag)
        report["returns"][name] = {
            "descriptive": marketdata.descriptive_stats(r)._asdict(),
            "acf": {"lags": acf.lags.tolist(), "values": acf.acf.tolist(), "band": acf.band},
        }
    for name, s in data.signals.items():
        report["signals"][name] = {"descriptive": marketdata.descriptive_stats(s)._asdict()}
    write_json(report, out / "stats.json")
    return report


def dependence_report(returns: dict, signals: dict, settings: dict, seed: int,
                      threads: int = 1) -> dict:
    """Lagged correlations, TE/ETE in both directions and ADF for each pair."""
    st = settings
    report = {"schema_version": SCHEMA_VERSION, "settings": dict(st), "correlation": {},
              "integrated_correlation": {}, "transfer_entropy": [], "adf": {}}
    bins = int(st["bins"])
    for rname, r in returns.items():
        r2 = r.values ** 2
        report["adf"][f"squared_returns_{rname}"] = infoflow.adf_test(r2, st["adf_max_lag"])._asdict()
        sym_r = infoflow.discretize(r2, bins)
        for sname, s in signals.items():
            key = f"{rname}|{sname}"
            lc = infoflow.permutation_pvalues(r2, s, int(st["max_lag"]), int(st["permutations"]),
                                              _seed_for(seed, "perm", key), threads=threads)
            report["correlation"][key] = {"lags": lc.lags.tolist(), "rho": lc.rho.tolist(),
                                          "p_values": lc.p_values.tolist()}
            w = st.get("integrate_window")
            if w:
                integ = infoflow.integrate_signal(s, int(w))
                cut = int(w) - 1
                lc = infoflow.lagged_crosscorr(r2[cut:], integ.values[cut:], int(st["max_lag"]))
                report["integrated_correlation"][key] = {"window": int(w), "lags": lc.lags.tolist(),
                                                         "rho": lc.rho.tolist()}
            sym_s = infoflow.discretize(s, bins)
            for src, tgt, direction in ((sym_s, sym_r, (sname, f"r2_{rname}")),
                                        (sym_r, sym_s, (f"r2_{rname}", sname))):
                res = infoflow.effective_transfer_entropy(
                    src, tgt, int(st["shuffles"]), _seed_for(seed, "ete", *direction),
                    mode=st.get("surrogates", "shuffle"), names=direction, threads=threads)
                d = res._asdict()
                d["direction"] = list(direction)
                report["transfer_entropy"].append(d)
    for sname, s in signals.items():
        report["adf"][f"signal_{sname}"] = infoflow.adf_test(s, st["adf_max_lag"])._asdict()
    return report


def stage_infoflow(cfg, data: Data, out: Path) -> dict:
    report = dependence_report(data.returns, data.signals, cfg["infoflow"], cfg["seed"], cfg["threads"])
    write_json(report, out / "infoflow.json")
    return report


def _fit_label(rname: str, spec: ModelSpec, signal: str | None) -> str:
    return f"{rname}_{spec.name}" + (f"_{signal}" if signal else "")


def stage_fit(cfg, data: Data, out: Path) -> dict[str, tuple]:
    n_in, n_out = cfg["in_sample_length"], cfg["out_sample_length"]
    d = out / "fits"
    d.mkdir(parents=True, exist_ok=True)
    fits = {}
    for rname, r in data.returns.items():
        r = r.slice(0, n_in + n_out)
        base_fits = {}
        for spec in sorted(cfg.models, key=lambda m: m.exogenous):
            signals = list(data.signals) if spec.exogenous else [None]
            for sname in signals:
                label = _fit_label(rname, spec, sname)
                opts = cfg.fit_options(_seed_for(cfg["seed"], "fit", label))
                x = data.signals[sname].slice(0, n_in + n_out) if sname else None
                base = base_fits.get(spec.family)
                if spec.exogenous and base is None:
                    base = fit(spec.base(), r.slice(0, n_in), None, opts)
                    base_fits[spec.family] = base
                res = fit(spec, r.slice(0, n_in), x.slice(0, n_in) if x else None, opts,
                          base=base, exog_name=sname)
                if not spec.exogenous:
                    base_fits[spec.family] = res
                path = garch_filter(spec, res.params, r, None if x is None else x.values / res.exog_scale,
                                    res.sigma0_sq)
                write_json({"schema_version": SCHEMA_VERSION, "label": label, "returns": rname,
                            **res.to_dict()}, d / f"{label}.json")
                write_csv(path.sigma_sq, d / f"{label}_variance.csv")
                fits[label] = (rname, res, sname)
    return fits


def comparison_report(returns: dict, signals: dict, fits: dict, n_in: int, n_out: int) -> dict:
    """Out-of-sample R^2 / PCC / NLLH per model and LR tests of each extension."""
    report = {"schema_version": SCHEMA_VERSION, "in_sample_length": n_in,
              "out_sample_length": n_out, "models": {}, "lr_tests": {}}
    for label, (rname, res, sname) in fits.items():
        r = returns[rname].slice(0, n_in + n_out)
        x = signals[sname].slice(0, n_in + n_out) if sname else None
        path = forecast_oos(res, r, x, n_in)
        entry = evalstats.evaluate_forecast(path, r.values[n_in:])
        entry.update({"model": res.spec.name, "returns": rname, "signal": sname,
                      "converged": res.converged})
        report["models"][label] = entry
    for label, (rname, res, sname) in fits.items():
        if not res.spec.exogenous:
            continue
        base_label = _fit_label(rname, res.spec.base(), None)
        if base_label not in report["models"]:
            continue
        lr = evalstats.lr_test(report["models"][base_label]["nllh"], report["models"][label]["nllh"], 1)
        report["lr_tests"][label] = {"base": base_label, **lr._asdict()}
    return report


def stage_evaluate(cfg, data: Data, fits: dict, out: Path) -> dict:
    report = comparison_report(data.returns, data.signals, fits,
                               cfg["in_sample_length"], cfg["out_sample_length"])
    write_json(report, out / "comparison.json")
    return report


def write_bootstrap(bc: evalstats.BootstrapComparison, path_stem: Path) -> None:
    with open(f"{path_stem}.csv", "w") as fh:
        fh.write(f"split_point,nllh_{bc.base},nllh_{bc.extended}\n")
        for s, a, b in zip(bc.used_split_points.tolist(), bc.nllh_base.tolist(), bc.nllh_extended.tolist()):
            fh.write(f"{s},{a!r},{b!r}\n")
    write_json(bc.to_dict(), f"{path_stem}.json")


def stage_bootstrap(cfg, data: Data, out: Path) -> dict:
    b = cfg["bootstrap"]
    d = out / "bootstrap"
    d.mkdir(parents=True, exist_ok=True)
    summary = {"schema_version": SCHEMA_VERSION, "comparisons": {}}
    for rname, r in data.returns.items():
        for spec in cfg.models:
            if not spec.exogenous:
                continue
            for sname, x in data.signals.items():
                label = _fit_label(rname, spec, sname)
                seed = _seed_for(cfg["seed"], "bootstrap", label)
                bc = evalstats.bootstrap_compare(
                    spec.base(), spec, r, x, int(b["n_segments"]), int(b["seg_len"]), seed,
                    cfg.fit_options(seed), exclude_gaps=bool(b["exclude_gaps"]), threads=cfg["threads"])
                write_bootstrap(bc, d / label)
                summary["comparisons"][label] = {
                    "ks_stat": bc.ks_stat, "ks_p": bc.ks_p, "failed_segments": bc.failed_segments,
                    "excluded_segments": bc.excluded_segments,
                    "median_nllh_base": float(np.median(bc.nllh_base)),
                    "median_nllh_extended": float(np.median(bc.nllh_extended)),
                }
    write_json(summary, out / "bootstrap.json")
    return summary


def run_pipeline(cfg: PipelineConfig, skip: tuple[str, ...] = ()) -> dict:
    """Run all stages not in ``skip``; returns the manifest.

    Raises StageError naming the failing stage; files written by earlier
    stages are left in place.
    """
    unknown = set(skip) - set(STAGES)
    if unknown:
        raise ConfigError(f"unknown stages {sorted(unknown)}")
    if "ingest" in skip:
        raise ConfigError("the ingest stage feeds every other stage and cannot be skipped")
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "config": cfg.snapshot(),
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)}
                   for name, p in sorted(cfg.input_files().items())},
        "stages": {},
        "timings_seconds": {},
    }

    def run(stage, fn, *args):
        if stage in skip:
            manifest["stages"][stage] = "skipped"
            return None
        t0 = time.perf_counter()
        logger.info("stage %s: start", stage)
        try:
            result = fn(*args)
        except Exception as exc:
            manifest["stages"][stage] = f"failed: {exc}"
            write_json(manifest, out / "manifest.json")
            raise StageError(stage, exc) from exc
        manifest["stages"][stage] = "ok"
        manifest["timings_seconds"][stage] = round(time.perf_counter() - t0, 3)
        return result

    data = run("ingest", stage_ingest, cfg, out)
    run("stats", stage_stats, cfg, data, out)
    run("infoflow", stage_infoflow, cfg, data, out)
    fits = run("fit", stage_fit, cfg, data, out)
    if fits is not None:
        run("evaluate", stage_evaluate, cfg, data, fits, out)
    else:
        manifest["stages"]["evaluate"] = "skipped"
    run("bootstrap", stage_bootstrap, cfg, data, out)
    write_json(manifest, out / "manifest.json")
    return manifest


def load_fit(path) -> FitResult:
    return FitResult.from_dict(json.loads(Path(path).read_text()))
