"""The config-driven pipeline on the bundled fixture.

Equivalent to ``infovol run --config src/infovol/data/example.toml
--output-dir /tmp/infovol-demo``.
"""
from __future__ import annotations

import json
from importlib.resources import files
from pathlib import Path

from infovol.pipeline import PipelineConfig, run_pipeline

out = Path("/tmp/infovol-demo")
cfg = PipelineConfig.load(Path(str(files("infovol") / "data" / "example.toml")),
                          {"output_dir": str(out)})
manifest = run_pipeline(cfg)
print("stages:", manifest["stages"])
print("timings:", manifest["timings_seconds"])

comp = json.loads((out / "comparison.json").read_text())
for label, lr in comp["lr_tests"].items():
    print(f"{label:<28} LR {lr['statistic']:8.2f}  p {lr['p_value']:.2e}")

boot = json.loads((out / "bootstrap.json").read_text())
for label, b in boot["comparisons"].items():
    print(f"{label:<28} KS p {b['ks_p']:.3f}")
