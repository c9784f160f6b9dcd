"""Staggered quasi-static time loop for one conductor span.

Each step runs, in order: tension from the sag chain, displacement, strain
history, damage, fatigue, temperature, voltage.  The run stops at the first
step whose peak temperature exceeds ``theta_lim``; that step is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Dict, Mapping, Optional

import numpy as np

from . import physics
from .environment import LoadParams, SagChain, ScenarioConfig, loads_at, tension_at
from .fem import Mesh1D, build_mesh, solve_tridiagonal
from .physics import FieldState, HeatExchange, MaterialParams
from .units import convert_units


class SimulationError(RuntimeError):
    def __init__(self, step: int, time: float, cause: Exception):
        self.step = step
        self.time = time
        self.cause = cause
        super().__init__(f"step {step} (t = {time:.4g} yr): {type(cause).__name__}: {cause}")

    def __reduce__(self):  # keep step context across worker processes
        return (type(self), (self.step, self.time, self.cause))


@dataclass(frozen=True)
class MeshSpec:
    L: float = 200.0  # m
    n_elements: int = 1000
    d: float = 0.04  # m, nominal diameter
    A_sigma: float = 2.5

    @property
    def A0(self) -> float:
        return np.pi * self.d**2 / 4.0

    def build(self) -> Mesh1D:
        return build_mesh(self.L, self.n_elements, self.A0, self.A_sigma)


@dataclass(frozen=True)
class RunConfig:
    mesh: MeshSpec = MeshSpec()
    material: MaterialParams = MaterialParams()
    scenario: ScenarioConfig = ScenarioConfig()
    H0: float = 40e3  # N
    pressure: float = 1.0  # atm
    n_steps: int = 4000
    theta_lim: float = 373.0  # K
    snapshot_every: int = 500

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.H0 <= 0:
            raise ValueError("pre-tension H0 must be positive")
        if self.theta_lim <= self.scenario.loads.theta_b + self.scenario.loads.theta_A:
            raise ValueError("theta_lim must exceed the peak air temperature")

    @property
    def dt(self) -> float:
        return self.scenario.dt

    def with_params(self, values: Mapping[str, float]) -> "RunConfig":
        """Copy with named parameters replaced, wherever they live in the config tree."""
        blocks = {"mesh": {}, "material": {}, "loads": {}, "top": {}}
        for name, value in values.items():
            blocks[param_block(name)][name] = value
        mesh = replace(self.mesh, **blocks["mesh"]) if blocks["mesh"] else self.mesh
        mat = replace(self.material, **blocks["material"]) if blocks["material"] else self.material
        scen = self.scenario.with_loads(**blocks["loads"]) if blocks["loads"] else self.scenario
        return replace(self, mesh=mesh, material=mat, scenario=scen, **blocks["top"])


_BLOCK_FIELDS = {
    "mesh": {f.name for f in fields(MeshSpec)},
    "material": {f.name for f in fields(MaterialParams)},
    "loads": {f.name for f in fields(LoadParams)},
    "top": {"H0", "pressure", "theta_lim"},
}


def param_block(name: str) -> str:
    for block, names in _BLOCK_FIELDS.items():
        if name in names:
            return block
    raise KeyError(f"unknown parameter {name!r}")


def get_param(config: RunConfig, name: str) -> float:
    block = param_block(name)
    src = {"mesh": config.mesh, "material": config.material, "loads": config.scenario.loads, "top": config}[block]
    return getattr(src, name)


@dataclass
class RunResult:
    time: np.ndarray
    max_phi: np.ndarray
    max_fatigue: np.ndarray
    max_theta: np.ndarray
    delta_V: np.ndarray
    theta_air: np.ndarray
    wind: np.ndarray
    current: np.ndarray
    tension: np.ndarray
    node_x: np.ndarray
    final_state: FieldState
    snapshots: Dict[int, FieldState] = field(default_factory=dict)
    failure_time: Optional[float] = None
    failure_step: Optional[int] = None
    n_steps: int = 0
    dt: float = 0.01
    theta_lim: float = 373.0
    max_overshoot: float = 0.0

    @property
    def failed(self) -> bool:
        return self.failure_step is not None

    @property
    def steps_run(self) -> int:
        return self.time.size

    def series(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.time,
            "max_phi": self.max_phi,
            "max_fatigue": self.max_fatigue,
            "max_theta": self.max_theta,
            "delta_V": self.delta_V,
        }


def limit_state(theta_max, theta_lim: float):
    """Safety margin; negative means the temperature limit is exceeded."""
    return theta_lim - np.asarray(theta_max, dtype=float)


def failure_indicator(result: RunResult, theta_lim: Optional[float] = None, n_steps: Optional[int] = None):
    """Absorbing 0/1 failure series over the full planned horizon.

    Zero while the limit state is non-negative, one from the first violation
    to the last planned step, whatever the temperature does afterwards.
    """
    lim = result.theta_lim if theta_lim is None else theta_lim
    n = result.n_steps if n_steps is None else n_steps
    h = np.zeros(n)
    bad = np.flatnonzero(limit_state(result.max_theta, lim) < 0.0)
    if bad.size:
        h[bad[0]:] = 1.0
    return h


def _solve(sys):
    return solve_tridiagonal(sys)


def run(config: RunConfig) -> RunResult:
    mesh = config.mesh.build()
    mat = config.material
    scen = config.scenario
    dt = config.dt
    n = config.n_steps
    ld0 = loads_at(0.0, 0, scen)
    # pre-tension H0 is set at the initial air temperature
    chain = SagChain.from_conductor(
        config.mesh.L, config.H0, mat.rho, config.mesh.A0, mat.alpha_L, config.mesh.d, theta_ref=ld0.theta_air
    )
    d_in = convert_units(config.mesh.d, "m", "in")

    out = {k: np.empty(n) for k in ("t", "phi", "F", "theta", "dV", "air", "wind", "I", "H")}
    snapshots: Dict[int, FieldState] = {}

    state = FieldState.initial(mesh.n_nodes, ld0.theta_air)
    try:
        state.voltage = _solve(physics.build_voltage(mesh, state.phi, state.theta, ld0.current, mat))
    except Exception as exc:  # noqa: BLE001
        raise SimulationError(0, 0.0, exc) from exc
    theta_mean = ld0.theta_air
    failure_step = None
    overshoot = 0.0
    k = 0

    for k in range(1, n + 1):
        t = k * dt
        try:
            ld = loads_at(t, k, scen)
            H = tension_at(theta_mean, ld.wind, chain)
            u = _solve(physics.build_mechanical(mesh, state.phi, H, mat))
            state = replace(state, u=u, time=t)
            state.history = physics.update_history(state, mesh, mat)
            phi_raw = _solve(physics.build_damage(mesh, state.history, state.fatigue, mat))
            state.phi, over = physics.clamp_damage(phi_raw)
            overshoot = max(overshoot, over)
            state.fatigue = physics.step_fatigue(state, mesh, mat, dt)
            hx = HeatExchange(config.pressure, ld.wind, ld.theta_air, d_in)
            theta = _solve(physics.build_thermal(mesh, state.phi, state.voltage, state.theta, hx, mat))
            state.theta = theta
            state.voltage = _solve(physics.build_voltage(mesh, state.phi, theta, ld.current, mat))
        except Exception as exc:  # noqa: BLE001 - re-raised with step context
            raise SimulationError(k, t, exc) from exc

        i = k - 1
        out["t"][i] = t
        out["phi"][i] = state.phi.max()
        out["F"][i] = state.fatigue.max()
        out["theta"][i] = state.theta.max()
        out["dV"][i] = np.abs(state.voltage[-1] - state.voltage[0])
        out["air"][i] = ld.theta_air
        out["wind"][i] = ld.wind
        out["I"][i] = ld.current
        out["H"][i] = H
        theta_mean = float(state.theta.mean())

        if k % config.snapshot_every == 0:
            snapshots[k] = state.copy()
        if out["theta"][i] > config.theta_lim:
            failure_step = k
            break

    m = k
    return RunResult(
        time=out["t"][:m],
        max_phi=out["phi"][:m],
        max_fatigue=out["F"][:m],
        max_theta=out["theta"][:m],
        delta_V=out["dV"][:m],
        theta_air=out["air"][:m],
        wind=out["wind"][:m],
        current=out["I"][:m],
        tension=out["H"][:m],
        node_x=mesh.node_x.copy(),
        final_state=state.copy(),
        snapshots=snapshots,
        failure_time=None if failure_step is None else failure_step * dt,
        failure_step=failure_step,
        n_steps=n,
        dt=dt,
        theta_lim=config.theta_lim,
        max_overshoot=overshoot,
    )
