from __future__ import annotations

import json
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

from infovol import cli
from infovol.errors import ConfigError
from infovol.garchcore import ModelSpec, ParamVector, simulate
from infovol.pipeline import PipelineConfig, StageError, run_pipeline
from infovol.series import TimeSeries, read_csv, write_csv

DATA = Path(str(files("infovol") / "data"))


def small_config(out, **over):
    cfg = {
        "seed": 7, "output_dir": str(out), "in_sample_length": 3000, "out_sample_length": 1000,
        "models": ["GARCH", "GARCHX"],
        "inputs": {"trades": "trades.csv", "quotes": "quotes.csv",
                   "signals": [{"name": "volume", "derive": "volume"},
                               {"name": "tweets", "path": "tweets.csv", "method": "sum"}]},
        "infoflow": {"max_lag": 3, "shuffles": 20, "permutations": 20},
        "fit": {"restarts": 1},
        "bootstrap": {"n_segments": 10, "seg_len": 500},
    }
    cfg.update(over)
    return cfg


REPORTS = ["stats.json", "infoflow.json", "comparison.json", "bootstrap.json", "ingest/ingest.json"]


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = PipelineConfig.from_dict(small_config(out), base_dir=DATA)
    manifest = run_pipeline(cfg)
    return out, manifest


def test_pipeline_writes_every_stage(pipeline_run):
    out, manifest = pipeline_run
    assert all(v == "ok" for v in manifest["stages"].values())
    for name in REPORTS + ["manifest.json"]:
        assert json.loads((out / name).read_text())["schema_version"] == 1
    assert set(manifest["inputs"]) == {"trades", "quotes", "signal:tweets"}
    comp = json.loads((out / "comparison.json").read_text())
    assert set(comp["lr_tests"]) == {f"{p}_GARCHX_{s}" for p in ("vwap", "midquote")
                                     for s in ("volume", "tweets")}
    fits = sorted(p.name for p in (out / "fits").glob("*.json"))
    assert "midquote_GARCH.json" in fits and "vwap_GARCHX_tweets.json" in fits


def test_pipeline_is_deterministic(pipeline_run, tmp_path):
    out, _ = pipeline_run
    cfg = PipelineConfig.from_dict(small_config(tmp_path), base_dir=DATA)
    run_pipeline(cfg, skip=("bootstrap",))
    for name in REPORTS[:3]:
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()
    assert not (tmp_path / "bootstrap.json").exists()


def test_missing_input_rejected_before_any_stage(tmp_path):
    bad = small_config(tmp_path / "out")
    bad["inputs"] = dict(bad["inputs"], quotes="nope.csv")
    with pytest.raises(ConfigError, match="quotes"):
        PipelineConfig.from_dict(bad, base_dir=DATA)
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("patch, msg", [
    ({"seed": -1}, "seed"),
    ({"models": ["GARCHX"], "inputs": {"trades": "trades.csv", "quotes": "quotes.csv", "signals": []}},
     "signal"),
    ({"price_definition": "close"}, "price_definition"),
    ({"models": ["ARCH"]}, "ARCH"),
])
def test_config_validation(tmp_path, patch, msg):
    with pytest.raises(ConfigError, match=msg):
        PipelineConfig.from_dict(small_config(tmp_path, **patch), base_dir=DATA)


def test_ingest_cannot_be_skipped(tmp_path):
    cfg = PipelineConfig.from_dict(small_config(tmp_path), base_dir=DATA)
    with pytest.raises(ConfigError, match="ingest"):
        run_pipeline(cfg, skip=("ingest",))


def test_too_short_sample_names_failing_stage(tmp_path):
    cfg = PipelineConfig.from_dict(small_config(tmp_path, in_sample_length=20_000), base_dir=DATA)
    with pytest.raises(StageError) as info:
        run_pipeline(cfg)
    assert info.value.stage == "ingest"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["stages"]["ingest"].startswith("failed")


# -- CLI ---------------------------------------------------------------------

def test_cli_usage_errors_exit_2(capsys):
    for argv in ([], ["simulate", "--n", "10"], ["fit", "--family", "ARCH", "--returns", "x", "--seed", "1"]):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2


def test_cli_missing_config_exit_3(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "missing.toml")]) == 3


def test_cli_bad_data_exit_4(tmp_path):
    bad = tmp_path / "trades.csv"
    bad.write_text("timestamp,price,quantity\n1000,abc,1\n2000,-5,1\n")
    assert cli.main(["ingest", "--trades", str(bad), "--out-dir", str(tmp_path / "o")]) == 4


def test_cli_simulate_outputs(tmp_path):
    code = cli.main(["simulate", "--process", "poisson", "--lambda", "2", "--sigma1", "0.01",
                     "--mu2", "3", "--n", "500", "--seed", "4", "--out-dir", str(tmp_path)])
    assert code == 0
    meta = json.loads((tmp_path / "simulate.json").read_text())
    assert meta["schema_version"] == 1
    assert meta["theoretical_r2v_cov"] == pytest.approx(0.01 ** 2 * 3 * 2)
    r, v = read_csv(tmp_path / "returns.csv"), read_csv(tmp_path / "volume.csv")
    assert len(r) == len(v) == 500
    assert (tmp_path / "returns.csv").read_text().splitlines()[0] == "minute_epoch,value,is_gap"


@pytest.fixture(scope="module")
def series_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("series")
    rng = np.random.default_rng(0)
    n = 3000
    x = rng.exponential(size=n)
    V = 2e-5
    p = ParamVector(0.0, 0.1 * V, 0.1, 0.5, gamma=0.3 * V)
    r = simulate(ModelSpec("GARCH", True), p, n, exog=x, seed=11)
    write_csv(r, d / "r.csv")
    write_csv(TimeSeries(x, r.start), d / "x.csv")
    write_csv(TimeSeries(x[:-1], r.start), d / "short.csv")
    return d


def test_cli_fit_misaligned_exit_3(series_files, tmp_path, caplog):
    d = series_files
    code = cli.main(["fit", "--family", "garch", "--returns", str(d / "r.csv"), "--exog",
                     str(d / "short.csv"), "--seed", "1", "--out-dir", str(tmp_path)])
    assert code == 3
    assert "returns has length 3000 but exog has length 2999" in caplog.text


def test_cli_fit_evaluate_roundtrip(series_files, tmp_path):
    d = series_files
    common = ["--returns", str(d / "r.csv"), "--in-sample", "2500", "--seed", "3",
              "--restarts", "1", "--out-dir", str(tmp_path)]
    assert cli.main(["fit", "--family", "GARCH", *common]) == 0
    assert cli.main(["fit", "--family", "GARCH", "--exog", str(d / "x.csv"), "--name", "garchx",
                     *common]) == 0
    assert len(read_csv(tmp_path / "garch_variance.csv")) == 3000
    out = tmp_path / "cmp.json"
    assert cli.main(["evaluate", "--returns", str(d / "r.csv"), "--fit", str(tmp_path / "garch.json"),
                     "--fit", str(tmp_path / "garchx.json"), "--exog", f"x={d / 'x.csv'}",
                     "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["out_sample_length"] == 500
    (lr,) = rep["lr_tests"].values()
    assert 0.0 <= lr["p_value"] <= 1.0
    assert lr["p_value"] < 0.05


def test_cli_infoflow_length_mismatch(series_files, tmp_path):
    d = series_files
    code = cli.main(["infoflow", "--returns", f"r={d / 'r.csv'}", "--signal", f"x={d / 'short.csv'}",
                     "--seed", "1", "--out", str(tmp_path / "i.json")])
    assert code == 3


def test_cli_global_flags_either_side():
    p = cli.build_parser()
    a = p.parse_args(["-v", "--threads", "3", "simulate", "--n", "5", "--seed", "1"])
    b = p.parse_args(["simulate", "--n", "5", "--seed", "1", "-v", "--threads", "3"])
    assert (a.verbose, a.threads) == (b.verbose, b.threads) == (1, 3)
