"""
Collocation against plain sampling, one uncertain input (base current).

A 100-point Gauss rule is the reference. The mean temperature field after
one year from a few collocation points is compared with a Monte Carlo
estimate from 200 samples.

    python demos/04_collocation_vs_sampling.py
"""
from linefail import MeshSpec, RunConfig
from linefail.ensemble import random_params_at, run_mc, run_pcm
from linefail.stochastic import relative_error

base = RunConfig(mesh=MeshSpec(n_elements=100), n_steps=100, snapshot_every=100)
base = base.with_params({"a": 1e-9, "I_b": 1300.0})
params = random_params_at(base, ["I_b"])


def mean_field(ens):
    return ens.field_stats()[100][0]


ref = mean_field(run_pcm(base, params, 100))
for n in (2, 3, 4, 5):
    print(f"collocation, {n} points: eps = {relative_error(mean_field(run_pcm(base, params, n)), ref):.2e}")
mc = run_mc(base, params, 200, seed=2024)
print(f"Monte Carlo, 200 samples: eps = {relative_error(mean_field(mc), ref):.2e}")
