"""Time integration: tableaux, relaxation, and the energy experiment."""

import json
import math
import types

import numpy as np
import pytest

from activeflux import operators as ops
from activeflux import solver
from activeflux.solver import (
    RK4,
    RK4X2,
    SSPRK33,
    EnergyBlowUpError,
    EnergyTrace,
    ExperimentConfig,
    RKMethod,
    Scheme,
    make_scheme,
    project_initial,
    relaxation_gamma,
    resolve_method,
    rk_step,
    run_experiment,
)


def _r4(z):
    """Stability polynomial of the classical fourth-order method."""
    return 1.0 + z + z**2 / 2 + z**3 / 6 + z**4 / 24


def _scalar_scheme(lam):
    return types.SimpleNamespace(rhs=lambda u: lam * u)


# ---------------------------------------------------------------------------
# tableaux
# ---------------------------------------------------------------------------


def test_rk4_scalar_decay_one_step():
    u, _ = rk_step(_scalar_scheme(-1.0), RK4, np.array([1.0]), 0.1)
    assert u[0] == pytest.approx(_r4(-0.1), rel=1e-15)
    assert u[0] == pytest.approx(0.90483749999999997, abs=1e-15)


@pytest.mark.parametrize("z", [-3.0, -0.5, 2.0j, -1.0 + 1.5j, 0.3 - 2.2j])
def test_rk4x2_realizes_composed_stability_function(z):
    u, _ = rk_step(_scalar_scheme(z), RK4X2, np.array([1.0 + 0.0j]), 1.0)
    assert u[0] == pytest.approx(_r4(z / 2) ** 2, rel=1e-14)


def test_rk4x2_shape_and_order():
    assert RK4X2.stages == 8
    assert RK4X2.order == 4
    b, c, a = np.array(RK4X2.b), np.array(RK4X2.c), np.array(RK4X2.a)
    # first few order conditions
    assert b.sum() == pytest.approx(1.0, abs=1e-15)
    assert (b @ c) == pytest.approx(0.5, abs=1e-15)
    assert (b @ c**2) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert (b @ (a @ c)) == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert (b @ c**3) == pytest.approx(0.25, abs=1e-15)


def test_rk4x2_stable_on_negative_real_axis_where_rk4_is_not():
    # z = -3 arises for the one-sided scheme at dt = dx/2
    assert abs(_r4(-3.0)) > 1.0
    assert abs(_r4(-1.5) ** 2) < 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(a=((0.0, 0.5), (0.0, 0.0)), b=(0.5, 0.5), c=(0.5, 0.0)),  # not explicit
        dict(a=((0.0, 0.0), (0.5, 0.0)), b=(0.5, 0.5), c=(0.0, 0.9)),  # c != row sums
        dict(a=((0.0, 0.0), (0.5, 0.0)), b=(0.5, 0.4), c=(0.0, 0.5)),  # sum(b) != 1
        dict(a=((0.0,), (0.5, 0.0)), b=(0.5, 0.5), c=(0.0, 0.5)),  # ragged
    ],
)
def test_tableau_validation_rejects(kwargs):
    with pytest.raises(ValueError):
        RKMethod(name="bad", **kwargs)


def test_from_butcher_json_roundtrip(tmp_path):
    path = tmp_path / "midpoint.json"
    path.write_text(
        json.dumps(
            {"name": "midpoint", "order": 2, "a": [[0, 0], [0.5, 0]], "b": [0, 1], "c": [0, 0.5]}
        )
    )
    m = RKMethod.from_butcher_json(str(path))
    assert m.name == "midpoint" and m.stages == 2 and m.order == 2
    u, _ = rk_step(_scalar_scheme(-1.0), m, np.array([1.0]), 0.1)
    assert u[0] == pytest.approx(1 - 0.1 + 0.005, rel=1e-15)


@pytest.mark.parametrize(
    "text",
    [
        "not json at all",
        json.dumps([1, 2, 3]),
        json.dumps({"a": [[0]], "b": [1]}),  # missing c
        json.dumps({"a": [[0, 0], [0.5, 0]], "b": [0.5, 0.4], "c": [0, 0.5]}),
    ],
)
def test_from_butcher_json_rejects_malformed(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ValueError):
        RKMethod.from_butcher_json(str(path))


def test_from_butcher_json_missing_file():
    with pytest.raises(ValueError):
        RKMethod.from_butcher_json("/nonexistent/tableau.json")


def test_resolve_method():
    assert resolve_method(RK4) is RK4
    assert resolve_method("rk4") is RK4
    assert resolve_method("ssprk33") is SSPRK33
    assert resolve_method("rk4x2") is RK4X2
    with pytest.raises(ValueError):
        resolve_method("euler")


def test_resolve_method_custom_file(tmp_path):
    path = tmp_path / "heun.json"
    path.write_text(json.dumps({"a": [[0, 0], [1, 0]], "b": [0.5, 0.5], "c": [0, 1]}))
    m = resolve_method(f"custom:{path}")
    assert isinstance(m, RKMethod) and m.stages == 2


# ---------------------------------------------------------------------------
# schemes
# ---------------------------------------------------------------------------


def test_make_scheme_central():
    g = ops.build_grid(8, 0.0, 2 * np.pi)
    s = make_scheme(g, "central", 2.0)
    np.testing.assert_allclose(s.D_effective.dense(), ops.central_D(g).dense())
    rng = np.random.default_rng(3)
    u = rng.normal(size=16)
    np.testing.assert_allclose(s.rhs(u), -2.0 * (ops.central_D(g) @ u), atol=1e-14)
    M = ops.diagonal_mass(g)
    assert s.energy(u) == pytest.approx(u @ (M @ u), rel=1e-14)


def test_make_scheme_upwind_follows_the_wind():
    g = ops.build_grid(8, 0.0, 2 * np.pi)
    fwd = make_scheme(g, "upwind", 1.0)
    np.testing.assert_allclose(fwd.D_effective.dense(), ops.upwind_D_minus(g).dense())
    rev = make_scheme(g, "upwind", -1.0)
    np.testing.assert_allclose(rev.D_effective.dense(), ops.upwind_D_plus(g).dense())


def test_make_scheme_rejects_bad_input():
    g = ops.build_grid(8, 0.0, 2 * np.pi)
    with pytest.raises(ValueError):
        make_scheme(g, "upwind", 0.0)
    with pytest.raises(ValueError):
        make_scheme(g, "lax-wendroff", 1.0)


# ---------------------------------------------------------------------------
# relaxation
# ---------------------------------------------------------------------------


def _one_step(variant, rk=RK4X2, n=24):
    g = ops.build_grid(n, 0.0, 2 * np.pi)
    s = make_scheme(g, variant, 1.0)
    u0 = project_initial(g, solver.default_initial)
    dt = 0.5 * g.dx
    u1, stages = rk_step(s, rk, u0, dt)
    return s, u0, u1, stages, dt


def test_relaxation_matches_energy_to_stage_estimate():
    s, u0, u1, stages, dt = _one_step("upwind")
    gamma = relaxation_gamma(u0, u1, stages, s.M_energy, dt)
    e = 2.0 * dt * sum(st.b * float(st.y @ (s.M_energy @ st.f)) for st in stages)
    relaxed = u0 + gamma * (u1 - u0)
    assert s.energy(relaxed) - s.energy(u0) == pytest.approx(gamma * e, rel=1e-10)
    assert e < 0.0  # one-sided scheme dissipates
    assert 0.9 < gamma < 1.1


def test_relaxation_conserves_central_energy_exactly():
    s, u0, u1, stages, dt = _one_step("central")
    gamma = relaxation_gamma(u0, u1, stages, s.M_energy, dt)
    relaxed = u0 + gamma * (u1 - u0)
    assert abs(s.energy(relaxed) - s.energy(u0)) < 1e-13 * s.energy(u0)


def test_relaxation_gamma_degenerate_update_returns_one():
    s, u0, _, stages, dt = _one_step("central")
    assert relaxation_gamma(u0, u0, stages, s.M_energy, dt) == 1.0


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def test_project_initial_exact_for_polynomials():
    g = ops.build_grid(9, 0.0, 3.0)

    def f(x):
        return x**7 - 2.0 * x**4 + x

    def F(x):  # antiderivative
        return x**8 / 8 - 2.0 * x**5 / 5 + x**2 / 2

    dofs = project_initial(g, f)
    pts, avgs = ops.point_values(dofs), ops.cell_averages(dofs)
    np.testing.assert_allclose(pts, f(g.interfaces), rtol=1e-14)
    exact = (F(g.interfaces + g.dx) - F(g.interfaces)) / g.dx
    np.testing.assert_allclose(avgs, exact, rtol=1e-13)


def test_project_initial_accepts_scalar_only_callables():
    g = ops.build_grid(6, 0.0, 2 * np.pi)
    vec = project_initial(g, np.sin)
    scl = project_initial(g, lambda x: math.sin(x))
    np.testing.assert_allclose(scl, vec, atol=1e-15)


def test_default_initial():
    assert solver.default_initial(0.0) == pytest.approx(1.0)
    assert solver.default_initial(np.pi / 2) == pytest.approx(np.e, rel=1e-15)


# ---------------------------------------------------------------------------
# the energy experiment
# ---------------------------------------------------------------------------


def test_central_relaxed_run_conserves_energy():
    trace, u = run_experiment(ExperimentConfig(variant="central"))
    assert u.shape == (100,)
    assert trace.max_drift <= 1e-12 * trace.initial_energy
    # relaxed steps advance by gamma*dt, so the landing is exact only up to
    # |gamma - 1| * dt on the final clipped step
    assert trace.times[-1] == pytest.approx(2 * np.pi, abs=1e-4)
    assert np.all((trace.gammas > 0.9) & (trace.gammas < 1.1))


def test_upwind_relaxed_run_dissipates_monotonically():
    trace, _ = run_experiment(ExperimentConfig(variant="upwind"))
    e0 = trace.initial_energy
    assert trace.max_increment <= 1e-13 * e0
    assert trace.total_change < 0.0
    assert np.all((trace.gammas > 0.9) & (trace.gammas < 1.1))


def test_unrelaxed_central_drift_shrinks_like_high_order():
    """Without relaxation the conservation defect is a time-integration
    artifact; halving dt must shrink it by at least the order-4 factor 16
    (in practice ~32, one extra power from accumulation)."""
    drifts = []
    for f in (0.5, 0.25):
        trace, _ = run_experiment(
            ExperimentConfig(variant="central", rk="rk4", relaxation=False, dt_factor=f)
        )
        drifts.append(trace.max_drift)
    assert drifts[0] / drifts[1] >= 12.0


def test_upwind_classical_rk4_at_half_cfl_blows_up():
    """The one-sided scheme puts z = -3 on the negative real axis at
    dt = dx/2, outside the classical method's stability interval."""
    with pytest.raises(EnergyBlowUpError):
        run_experiment(ExperimentConfig(variant="upwind", rk="rk4", relaxation=False))


def test_relaxation_flags_unstable_base_step():
    with pytest.raises(EnergyBlowUpError, match="non-positive"):
        run_experiment(ExperimentConfig(variant="upwind", rk="ssprk33", relaxation=True))


def test_oversized_step_trips_energy_guard():
    with pytest.raises(EnergyBlowUpError, match="exceeded"):
        run_experiment(
            ExperimentConfig(variant="central", rk="rk4", relaxation=False, dt_factor=2.0)
        )


def test_config_validation():
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(t_end=0.0))
    with pytest.raises(ValueError):
        run_experiment(ExperimentConfig(dt_factor=-0.5))


def test_final_partial_step_lands_on_t_end():
    g_dx = 2 * np.pi / 50
    dt = 0.5 * g_dx
    t_end = 3.5 * dt
    trace, _ = run_experiment(
        ExperimentConfig(variant="central", rk="rk4", relaxation=False, t_end=t_end)
    )
    assert len(trace.times) == 5  # three full steps plus the clipped half step
    assert trace.times[-1] == pytest.approx(t_end, rel=1e-15)


def test_energy_trace_properties():
    tr = EnergyTrace(
        times=np.array([0.0, 1.0, 2.0]),
        energies=np.array([1.0, 1.5, 1.2]),
        gammas=np.array([1.0, 1.0, 1.0]),
    )
    assert tr.initial_energy == 1.0
    assert tr.max_drift == pytest.approx(0.5)
    assert tr.total_change == pytest.approx(0.2)
    assert tr.max_increment == pytest.approx(0.5)


def test_reversed_wind_still_dissipates():
    trace, _ = run_experiment(
        ExperimentConfig(variant="upwind", advection_speed=-1.0, t_end=1.0)
    )
    assert trace.total_change < 0.0
    assert trace.max_increment <= 1e-13 * trace.initial_energy
