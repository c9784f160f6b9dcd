"""
Probability of failure under the four operating scenarios.

Current and aging rate are uncertain (+/-10 %). For each scenario the p_f
curve is the collocation mean of the 0/1 indicator "peak temperature has
exceeded the limit by now".

    python demos/03_failure_probability.py
"""
import numpy as np

from linefail import MeshSpec, RunConfig, ScenarioConfig
from linefail.ensemble import random_params_at, run_pcm

names = {1: "normal", 2: "seasonal wind gusts", 3: "rising demand", 4: "warming air"}

for sid, label in names.items():
    cfg = RunConfig(mesh=MeshSpec(n_elements=100), scenario=ScenarioConfig.preset(sid), n_steps=600, snapshot_every=600)
    cfg = cfg.with_params({"a": 5e-10 if sid == 2 else 1e-9, "I_b": 1300.0})
    ens = run_pcm(cfg, random_params_at(cfg, ["I_b", "a"]), 5)
    pf = ens.stats["pf"]
    t = ens.stats["t_full"]
    first = t[np.argmax(pf > 0)] if pf.any() else np.nan
    half = t[np.argmax(pf >= 0.5)] if (pf >= 0.5).any() else np.nan
    print(f"S{sid} {label:20s} first failures {first:5.2f} yr, p_f = 0.5 at {half:5.2f} yr, p_f(6 yr) = {pf[-1]:.2f}")
