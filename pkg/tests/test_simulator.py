import pickle

import numpy as np
import pytest

from linefail import MeshSpec, RunConfig, ScenarioConfig, SimulationError, failure_indicator, run
from linefail.environment import load_trace
from linefail.simulator import RunResult, get_param, limit_state


def fake_result(max_theta, n_steps):
    m = len(max_theta)
    z = np.zeros(m)
    return RunResult(
        time=np.arange(1, m + 1) * 0.01,
        max_phi=z, max_fatigue=z, max_theta=np.asarray(max_theta, float), delta_V=z,
        theta_air=z, wind=z, current=z, tension=z,
        node_x=np.zeros(3), final_state=None, n_steps=n_steps, theta_lim=373.0,
    )


@pytest.mark.parametrize("theta,g", [(373.0, 0.0), (300.0, 73.0), (380.0, -7.0)])
def test_limit_state(theta, g):
    assert limit_state(theta, 373.0) == g


def test_indicator_never_failing():
    assert not failure_indicator(fake_result([300.0] * 5, 10)).any()


def test_indicator_absorbs():
    h = failure_indicator(fake_result([300, 380, 350, 360], 8))
    np.testing.assert_array_equal(h, [0, 1, 1, 1, 1, 1, 1, 1])


def test_config_validation():
    with pytest.raises(ValueError, match="n_steps"):
        RunConfig(n_steps=0)
    with pytest.raises(ValueError, match="theta_lim"):
        RunConfig(theta_lim=298.0)
    with pytest.raises(KeyError):
        RunConfig().with_params({"colour": 1.0})


def test_parameter_routing():
    cfg = RunConfig().with_params({"A_sigma": 3.0, "g_c": 9e3, "I_b": 1200.0, "H0": 3e4})
    assert (cfg.mesh.A_sigma, cfg.material.g_c, cfg.scenario.loads.I_b, cfg.H0) == (3.0, 9e3, 1200.0, 3e4)
    assert get_param(cfg, "I_b") == 1200.0


@pytest.fixture(scope="module")
def desk_run():
    from conftest import desk_config

    return run(desk_config(n_steps=400, snapshot_every=50))


def test_failure_truncates_series(desk_run):
    r = desk_run
    assert r.failed and r.failure_step == r.steps_run
    assert r.failure_time == pytest.approx(r.failure_step * r.dt)
    assert r.max_theta[-1] > r.theta_lim and np.all(r.max_theta[:-1] <= r.theta_lim)
    assert all(v.size == r.steps_run for v in r.series().values())


def test_series_match_snapshots(desk_run):
    for k, s in desk_run.snapshots.items():
        assert desk_run.max_theta[k - 1] == s.theta.max()
        assert desk_run.max_phi[k - 1] == s.phi.max()
        assert desk_run.delta_V[k - 1] == pytest.approx(abs(s.voltage[-1] - s.voltage[0]), rel=1e-15)


def test_damage_localizes_at_notch(desk_run):
    mid = desk_run.node_x.size // 2
    s = desk_run.snapshots[max(desk_run.snapshots)]
    for f in (s.phi, s.fatigue, s.theta):
        assert np.argmax(f) == mid
        np.testing.assert_allclose(f, f[::-1], rtol=1e-10)


def test_fields_stay_admissible(desk_run):
    for s in desk_run.snapshots.values():
        assert s.phi.min() >= 0 and s.phi.max() <= 1
        assert s.fatigue.min() >= 0 and s.theta.min() > 0


def test_recorded_loads_are_the_scenario_trace():
    from conftest import desk_config

    cfg = desk_config(scenario=3, n_steps=50)
    r = run(cfg)
    tr = load_trace(cfg.scenario, 50)
    np.testing.assert_array_equal(r.current, tr["current"])
    np.testing.assert_array_equal(r.theta_air, tr["theta_air"])


def test_uniform_conductor_follows_the_seasons():
    cfg = RunConfig(mesh=MeshSpec(n_elements=40, A_sigma=np.inf), n_steps=100, snapshot_every=1)
    r = run(cfg)
    assert not r.failed
    phi = r.final_state.phi
    # uniform elastic energy gives a uniform damage level, nothing localizes
    assert np.ptp(phi) < 1e-10 * phi.max()
    # damage at step k sees the history of step k and the fatigue of step k-1
    h, F, m = r.snapshots[100].history[0], r.snapshots[99].fatigue[0], cfg.material
    assert phi[0] == pytest.approx((h + F / m.gamma) / (h + m.g_c / m.gamma), rel=1e-10)
    excess = r.max_theta - r.theta_air
    assert excess.min() > 0
    # warmest part of the run lines up with the warm, calm part of the year
    assert 40 <= int(np.argmax(r.max_theta)) <= 80


def test_higher_current_fails_no_later():
    from conftest import desk_config

    t = [run(desk_config(I_b=I, n_steps=800)).failure_time for I in (1250.0, 1350.0)]
    assert t[1] <= t[0]


def test_same_config_same_answer():
    from conftest import desk_config

    a, b = run(desk_config(n_steps=60)), run(desk_config(n_steps=60))
    np.testing.assert_array_equal(a.max_theta, b.max_theta)


def test_solver_error_carries_step_context():
    cfg = RunConfig(mesh=MeshSpec(n_elements=10), n_steps=5).with_params({"theta0": 1000.0})
    with pytest.raises(SimulationError) as err:
        run(cfg)
    assert err.value.step == 0 and "step 0" in str(err.value)
    again = pickle.loads(pickle.dumps(err.value))
    assert (again.step, str(again)) == (0, str(err.value))


def test_scenario_is_part_of_the_config():
    cfg = RunConfig(scenario=ScenarioConfig.preset(2))
    assert cfg.scenario.loads.theta_b == 293.0 and cfg.dt == 0.01
