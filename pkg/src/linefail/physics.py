"""Constitutive relations and system builders for the coupled conductor fields.

Fields are nodal vectors on a :class:`~linefail.fem.Mesh1D`:

* ``u``        axial displacement [m]
* ``phi``      phase-field damage [-], 0 virgin, 1 fully broken
* ``fatigue``  aging variable [N/m], drives damage as it approaches g_c
* ``theta``    temperature [K]
* ``voltage``  electric potential [V]
* ``history``  running maximum of the strain energy density Y (du/dx)^2 [Pa]
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .fem import (
    ElementKernel,
    LinearSystem,
    Mesh1D,
    apply_dirichlet,
    assemble,
    lumped_mass,
)
from .units import convert_units

# q_C correlation prefactor, handbook units (W/in^2 with p in atm, v in ft/s, d in in)
HANDBOOK_COEFF = 0.0128


class MaterialSeveredError(RuntimeError):
    """The degraded stiffness or conductivity vanishes over an element."""

    def __init__(self, x: float, what: str = "stiffness"):
        self.x = x
        self.what = what
        super().__init__(f"material severed: {what} vanishes near x = {x:.4g} m")

    def __reduce__(self):
        return (type(self), (self.x, self.what))


@dataclass(frozen=True)
class MaterialParams:
    """Material constants (SI).  Defaults are the aluminium reference conductor."""

    Y: float = 69e9
    gamma: float = 0.02
    g_c: float = 10e3
    rho: float = 2700.0
    a: float = 1e-10
    kappa: float = 237.0
    sigma_E0: float = 3.77e7
    alpha: float = 3.9e-3
    alpha_L: float = 23e-6
    theta0: float = 288.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"material parameter {f.name} must be positive, got {v!r}")

    def replace(self, **changes) -> "MaterialParams":
        return replace(self, **changes)


@dataclass
class FieldState:
    u: np.ndarray
    phi: np.ndarray
    fatigue: np.ndarray
    theta: np.ndarray
    voltage: np.ndarray
    history: np.ndarray
    time: float = 0.0

    @classmethod
    def initial(cls, n_nodes: int, theta_air: float) -> "FieldState":
        z = np.zeros(n_nodes)
        return cls(z.copy(), z.copy(), z.copy(), np.full(n_nodes, float(theta_air)), z.copy(), z.copy())

    def copy(self) -> "FieldState":
        return FieldState(
            self.u.copy(),
            self.phi.copy(),
            self.fatigue.copy(),
            self.theta.copy(),
            self.voltage.copy(),
            self.history.copy(),
            self.time,
        )


@dataclass(frozen=True)
class HeatExchange:
    """Forced-convection inputs in handbook units."""

    pressure: float  # atm
    wind_v: float  # ft/s
    theta_air: float  # K
    diameter: float  # in

    @property
    def coefficient(self) -> float:
        return cooling_coefficient(self)


def degradation(phi):
    return (1.0 - np.asarray(phi)) ** 2


def potentials(phi, delta: float = 0.0):
    """Damage and fatigue potentials with their derivatives.

    Returns ``(H, dH, Hf, dHf)``; the quadratic/linear branches hold on
    [0, 1] and are continued linearly (slope ``delta``) or as constants outside.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    phi = np.asarray(phi, dtype=float)
    lo, hi = phi < 0.0, phi > 1.0
    mid = ~(lo | hi)
    H = np.select([mid, hi, lo], [0.5 * phi**2, 0.5 + delta * (phi - 1.0), -delta * phi])
    dH = np.select([mid, hi, lo], [phi, np.full_like(phi, delta), np.full_like(phi, -delta)])
    Hf = np.select([mid, hi, lo], [-phi, np.full_like(phi, -1.0), np.zeros_like(phi)])
    dHf = np.select([mid, hi, lo], [np.full_like(phi, -1.0), np.zeros_like(phi), np.zeros_like(phi)])
    if phi.ndim == 0:
        return float(H), float(dH), float(Hf), float(dHf)
    return H, dH, Hf, dHf


def cooling_coefficient(hx: HeatExchange) -> float:
    """Convective film coefficient in W/(m^2 K) from the handbook correlation."""
    if hx.wind_v < 0 or hx.diameter <= 0 or hx.theta_air <= 0 or hx.pressure < 0:
        raise ValueError(f"invalid heat-exchange inputs: {hx}")
    c = HANDBOOK_COEFF * np.sqrt(hx.pressure * hx.wind_v) / (hx.theta_air**0.123 * np.sqrt(hx.diameter))
    return float(convert_units(c, "W/in2", "W/m2"))


def conductivity(phi, theta, params: MaterialParams):
    """Damage- and temperature-degraded electrical conductivity [S/m]."""
    denom = 1.0 + params.alpha * (np.asarray(theta, dtype=float) - params.theta0)
    if np.any(denom <= 0.0):
        raise ValueError("temperature below the resistivity model's validity limit (1 + alpha*dT <= 0)")
    return degradation(phi) * params.sigma_E0 / denom


def _check_severed(mesh: Mesh1D, coeff_qp: np.ndarray, what: str):
    per_el = coeff_qp.min(axis=1)
    top = per_el.max()
    bad = per_el <= 1e-12 * top if top > 0 else np.ones_like(per_el, dtype=bool)
    if np.any(bad):
        e = int(np.argmax(bad))
        raise MaterialSeveredError(0.5 * (mesh.node_x[e] + mesh.node_x[e + 1]), what)


def build_mechanical(mesh: Mesh1D, phi, H_load: float, params: MaterialParams) -> LinearSystem:
    """Bar equilibrium: fixed at x=0, horizontal tension ``H_load`` pulling at x=L."""
    phi_qp = mesh.at_qp(phi)
    stiff = degradation(phi_qp) * params.Y * mesh.area_qp
    _check_severed(mesh, stiff, "stiffness")
    dphi = mesh.gradient(phi)
    # gradient-squared damage term enters the load with the sign of the discrete form
    load_b = params.gamma * params.g_c * mesh.area_qp * (dphi**2)[:, None]
    sys = assemble(mesh, ElementKernel(stiffness=stiff, load_b=load_b))
    sys.rhs[-1] += H_load
    return apply_dirichlet(sys, 0, 0.0)


def strain_energy(mesh: Mesh1D, u, params: MaterialParams) -> np.ndarray:
    du = mesh.nodal_gradient(u)
    return params.Y * du * du


def update_history(state: FieldState, mesh: Mesh1D, params: MaterialParams) -> np.ndarray:
    return np.maximum(state.history, strain_energy(mesh, state.u, params))


def build_damage(mesh: Mesh1D, history, fatigue, params: MaterialParams) -> LinearSystem:
    """Quasi-static damage equation with natural (zero-gradient) ends."""
    A = mesh.area_qp
    H_qp = mesh.at_qp(history)
    F_qp = mesh.at_qp(fatigue)
    kernel = ElementKernel(
        stiffness=params.gamma * params.g_c * A,
        mass=(H_qp + params.g_c / params.gamma) * A,
        load_n=(H_qp + F_qp / params.gamma) * A,
    )
    return assemble(mesh, kernel)


def clamp_damage(phi):
    """Project onto [0, 1]; also return the largest excursion outside it."""
    phi = np.asarray(phi, dtype=float)
    over = float(max(0.0, phi.max() - 1.0, -phi.min()))
    return np.clip(phi, 0.0, 1.0), over


def fatigue_rate(state: FieldState, mesh: Mesh1D, params: MaterialParams) -> np.ndarray:
    """Nodal aging rate [N/(m yr)]; non-negative for damage in [0, 1]."""
    phi = state.phi
    stress = np.abs(params.Y * mesh.nodal_gradient(state.u))
    return (
        params.rho
        * params.a
        * (state.theta / params.theta0)
        * (1.0 - phi)
        * stress
        * phi
        / params.gamma
    )


def step_fatigue(state: FieldState, mesh: Mesh1D, params: MaterialParams, dt: float) -> np.ndarray:
    """Forward-Euler aging update with a row-sum lumped mass matrix."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rate_qp = mesh.at_qp(fatigue_rate(state, mesh, params))
    w = assemble(mesh, ElementKernel(load_n=rate_qp * mesh.area_qp)).rhs
    m = lumped_mass(mesh)
    return np.maximum(state.fatigue + dt * w / m, 0.0)


def build_thermal(
    mesh: Mesh1D,
    phi,
    voltage,
    theta_prev,
    hx: HeatExchange,
    params: MaterialParams,
) -> LinearSystem:
    """Steady heat balance: conduction, Joule source, convective sink; insulated ends."""
    c = cooling_coefficient(hx)
    if c <= 0.0:
        raise ValueError("no convective cooling (zero wind): steady thermal problem is singular")
    A = mesh.area_qp
    sigma = conductivity(mesh.at_qp(phi), mesh.at_qp(theta_prev), params)
    dV = mesh.gradient(voltage)
    kernel = ElementKernel(
        stiffness=params.kappa * A,
        mass=c * mesh.surf_qp,
        load_n=sigma * A * (dV**2)[:, None] + c * mesh.surf_qp * hx.theta_air,
    )
    return assemble(mesh, kernel)


def build_voltage(mesh: Mesh1D, phi, theta, current: float, params: MaterialParams) -> LinearSystem:
    """Current conservation: V=0 at x=0, total current |I| injected at x=L."""
    phi_qp = mesh.at_qp(phi)
    sigma_T = conductivity(np.zeros_like(phi_qp), mesh.at_qp(theta), params)
    coeff = degradation(phi_qp) * sigma_T * mesh.area_qp
    per_el = coeff.min(axis=1)
    if per_el.min() <= 1e-9 * per_el.max():
        e = int(np.argmin(per_el))
        warnings.warn(
            f"conductor nearly severed near x = {0.5 * (mesh.node_x[e] + mesh.node_x[e + 1]):.4g} m; "
            "voltage system is close to singular",
            RuntimeWarning,
            stacklevel=2,
        )
    sys = assemble(mesh, ElementKernel(stiffness=coeff))
    sys.rhs[-1] += abs(current)
    return apply_dirichlet(sys, 0, 0.0)


def element_current(mesh: Mesh1D, phi, theta, voltage, params: MaterialParams) -> np.ndarray:
    """Current carried by each element, sigma_E * A * dV/dx integrated as the solver sees it."""
    phi_qp = mesh.at_qp(phi)
    coeff = degradation(phi_qp) * conductivity(np.zeros_like(phi_qp), mesh.at_qp(theta), params) * mesh.area_qp
    return coeff.mean(axis=1) * mesh.gradient(voltage)
