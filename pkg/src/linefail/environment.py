"""Environmental loading: cyclic weather and current, scenarios, sag/tension chain."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .units import convert_units

G = 9.80665  # m/s^2

SCENARIOS = {
    1: "normal operating conditions",
    2: "high seasonal winds",
    3: "increasing electric demand",
    4: "increasing air temperature",
}

# fraction of the year covered by the scenario-2 wind event: iterations 25..30 of 100
GUST_WINDOW = (0.25, 0.30)


class SagChainError(ValueError):
    """Cable contracted to (or below) the span: the sag relation has no solution."""


@dataclass(frozen=True)
class LoadParams:
    theta_b: float = 288.0  # K
    theta_A: float = 10.0  # K
    w_b: float = 2.0  # ft/s
    w_A: float = 1.0  # ft/s
    I_b: float = 1500.0  # A
    I_A: float = 100.0  # A
    w_max: float = 100.0  # ft/s, scenario 2
    I_r: float = 0.1  # A per step, scenario 3
    theta_r: float = 0.001  # K per step, scenario 4

    def __post_init__(self):
        for name in ("theta_A", "w_A", "I_A", "w_b", "w_max", "I_r", "theta_r"):
            if getattr(self, name) < 0:
                raise ValueError(f"load parameter {name} must be non-negative")
        if self.theta_b <= 0:
            raise ValueError("theta_b must be positive (K)")


@dataclass(frozen=True)
class ScenarioConfig:
    id: int = 1
    loads: LoadParams = LoadParams()
    dt: float = 0.01  # years

    def __post_init__(self):
        if self.id not in SCENARIOS:
            raise ValueError(f"unknown scenario id {self.id!r}; expected one of {sorted(SCENARIOS)}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @classmethod
    def preset(cls, scenario_id: int, dt: float = 0.01, **load_overrides) -> "ScenarioConfig":
        """Reference loads for a scenario; scenario 2 runs with a warmer base of 293 K."""
        base = {"theta_b": 293.0} if scenario_id == 2 else {}
        base.update(load_overrides)
        return cls(id=scenario_id, loads=LoadParams(**base), dt=dt)

    @property
    def steps_per_year(self) -> int:
        return int(round(1.0 / self.dt))

    def with_loads(self, **changes) -> "ScenarioConfig":
        return replace(self, loads=replace(self.loads, **changes))


@dataclass(frozen=True)
class LoadState:
    theta_air: float  # K
    wind: float  # ft/s
    current: float  # A (negative by convention of the cycle)
    tension: float = float("nan")  # N, filled in once the sag chain is evaluated


def in_gust_window(step: int, steps_per_year: int) -> bool:
    k = step % steps_per_year
    lo = int(round(GUST_WINDOW[0] * steps_per_year))
    hi = int(round(GUST_WINDOW[1] * steps_per_year))
    return lo <= k <= hi


def loads_at(t: float, step: int, scenario: ScenarioConfig) -> LoadState:
    """Air temperature, wind and current at time ``t`` (years), time-step ``step``."""
    if t < 0:
        raise ValueError("time must be non-negative")
    p = scenario.loads
    theta_b, I_b = p.theta_b, p.I_b
    sid = scenario.id
    if sid == 3:
        I_b = p.I_b + p.I_r * step
    elif sid == 4:
        theta_b = p.theta_b + p.theta_r * step
    elif sid not in SCENARIOS:
        raise ValueError(f"unknown scenario id {sid!r}")

    s1 = np.sin(2.0 * np.pi * t)
    theta_air = theta_b + p.theta_A * s1
    wind = p.w_b + p.w_A * s1
    if sid == 2 and in_gust_window(step, scenario.steps_per_year):
        wind = p.w_max
    current = -I_b - p.I_A * np.sin(4.0 * np.pi * t)
    return LoadState(float(theta_air), float(max(wind, 0.0)), float(current))


def wind_weight(v, d, W_b: float = 0.0) -> float:
    """Total weight per length [N/m] with the wind load of speed ``v`` [mph] on diameter ``d`` [in]."""
    if v < 0:
        raise ValueError("wind speed must be non-negative")
    P_w = 0.0025 * v * v  # lb/ft^2
    W_w = convert_units(P_w * d / 12.0, "lb/ft", "N/m")
    return float(np.hypot(W_b, W_w))


@dataclass(frozen=True)
class SagChain:
    span: float  # m
    H0: float  # N
    W_b: float  # N/m
    alpha_L: float  # 1/K
    diameter: float  # m
    theta_ref: float = 288.0  # K, temperature at which H0 is set

    @classmethod
    def from_conductor(cls, span, H0, rho, A0, alpha_L, diameter, theta_ref=288.0) -> "SagChain":
        return cls(span, H0, rho * G * A0, alpha_L, diameter, theta_ref)

    @property
    def D0(self) -> float:
        return self.W_b * self.span**2 / (8.0 * self.H0)

    @property
    def L0(self) -> float:
        return self.span + 8.0 * self.D0**2 / (3.0 * self.span)

    @property
    def min_delta_theta(self) -> float:
        """Temperature change below which the cable would be shorter than the span."""
        return (self.span / self.L0 - 1.0) / self.alpha_L


def tension_at(theta_mean: float, v: float, chain: SagChain) -> float:
    """Horizontal tension [N] at conductor temperature ``theta_mean`` [K] and wind ``v`` [ft/s]."""
    L = chain.L0 * (1.0 + chain.alpha_L * (theta_mean - chain.theta_ref))
    if L <= chain.span:
        raise SagChainError(
            f"sag-chain breakdown: cable length {L:.6g} m <= span {chain.span:.6g} m; "
            f"temperature change from {chain.theta_ref:g} K must exceed {chain.min_delta_theta:.4g} K"
        )
    D = np.sqrt(3.0 * chain.span * (L - chain.span) / 8.0)
    W = wind_weight(convert_units(v, "ft/s", "mph"), convert_units(chain.diameter, "m", "in"), chain.W_b)
    return float(W * chain.span**2 / (8.0 * D))


def load_trace(scenario: ScenarioConfig, n_steps: int) -> dict:
    """Loads at steps 1..n_steps, as the time loop sees them."""
    rows = [loads_at(k * scenario.dt, k, scenario) for k in range(1, n_steps + 1)]
    return {
        "t": np.array([k * scenario.dt for k in range(1, n_steps + 1)]),
        "theta_air": np.array([r.theta_air for r in rows]),
        "wind": np.array([r.wind for r in rows]),
        "current": np.array([r.current for r in rows]),
    }
