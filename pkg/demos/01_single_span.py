"""
A single conductor span, followed year by year until it overheats.

The span has a Gaussian notch at mid-length. Elastic energy and slow aging
build up damage there, damage raises the local resistance, and the extra
Joule heat pushes the peak temperature past the 373 K annealing limit.

    python demos/01_single_span.py
"""
import numpy as np

from linefail import MeshSpec, RunConfig, run

cfg = RunConfig(mesh=MeshSpec(n_elements=100), n_steps=600, snapshot_every=100)
cfg = cfg.with_params({"a": 1e-9, "I_b": 1300.0})

res = run(cfg)
print(f"failed: {res.failed}, after {res.failure_time} years ({res.steps_run} steps)")

# peak temperature once per year
years = np.arange(100, res.steps_run + 1, 100)
for k in years:
    print(f"  year {k // 100}: max theta {res.max_theta[:k].max():7.2f} K, max phi {res.max_phi[k - 1]:.4f}")

# where is the damage?
last = res.snapshots[max(res.snapshots)]
i = int(np.argmax(last.phi))
print(f"damage peaks at x = {res.node_x[i]:.1f} m (span is {cfg.mesh.L:.0f} m)")
print(f"voltage drop over the span at the end: {res.delta_V[-1]:.3f} V")
