import csv
import json
import math

import numpy as np
import pytest

from nlsint import GridSpec, SolverConfig, catalog, convergence_study, parse, propagate, residual_of_candidate
from nlsint.simulator import (
    ConvergenceError,
    ConvergenceRow,
    initial_state,
    mass,
    reference_values,
    write_convergence_csv,
    write_field_csv,
)

CASE1 = catalog("case1")
XG = GridSpec(-20.0, 20.0, 513, 0.0, 1.0, 101)


def test_soliton_is_an_exact_solution():
    assert residual_of_candidate(CASE1, CASE1.psi_ref).max_abs <= 1e-14


def test_wrong_candidate_fails():
    scn = CASE1.with_coefficients(v="x^2")
    assert not residual_of_candidate(scn, scn.psi_ref).passed


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(dt=0.1, boundary="periodic")
    with pytest.raises(ValueError, match="multiple"):
        propagate(CASE1, initial_state(CASE1, XG), SolverConfig(dt=0.3), 1.0, x_grid=XG)


def test_soliton_propagation_and_norm():
    fld = propagate(CASE1, initial_state(CASE1, XG), SolverConfig(dt=0.01), 1.0, x_grid=XG, save_every=10)
    assert fld.values.shape == (11, 513)
    assert np.allclose(fld.grid.t, np.linspace(0, 1, 11))
    err = np.max(np.abs(fld.values[-1] - reference_values(CASE1, XG.x, 1.0)))
    assert err <= 5e-3
    m = mass(fld.values, XG.dx)
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-12


def test_backends_agree():
    psi0 = initial_state(CASE1, XG)
    a = propagate(CASE1, psi0, SolverConfig(dt=0.05), 0.5, x_grid=XG, backend="numba")
    b = propagate(CASE1, psi0, SolverConfig(dt=0.05), 0.5, x_grid=XG, backend="numpy")
    assert np.max(np.abs(a.values - b.values)) <= 1e-12


def test_backward_in_time_recovers_initial_state():
    cfg = SolverConfig(dt=0.01)
    psi0 = initial_state(CASE1, XG)
    fwd = propagate(CASE1, psi0, cfg, 0.5, x_grid=XG)
    back = propagate(CASE1, fwd.values[-1], cfg, 0.0, t_start=0.5, x_grid=XG)
    assert back.grid.t[0] == 0.0 and back.grid.t[-1] == 0.5
    assert np.max(np.abs(back.values[0] - psi0)) <= 1e-7


def test_gain_loss_mass_balance():
    # gamma = -alpha/2 gives d|psi|^2/dt = -2 gamma |psi|^2 = alpha |psi|^2
    scn = catalog("case2", alpha=0.2)
    xg = GridSpec(-10.0, 10.0, 401, 0.0, 1.0, 2)
    psi0 = np.exp(-(xg.x**2)) + 0j

    def ratio(dt):
        fld = propagate(scn, psi0, SolverConfig(dt=dt), 1.0, x_grid=xg, save_every=int(round(1 / dt)))
        return mass(fld.values[-1], xg.dx)[0] / mass(fld.values[0], xg.dx)[0]

    e1, e2 = (abs(ratio(dt) - math.exp(0.2)) for dt in (2e-3, 1e-3))
    assert e2 <= 1e-6 * math.exp(0.2)
    assert 3.5 <= e1 / e2 <= 4.5  # O(dt^2) from the midpoint rule


def test_convergence_study_is_second_order():
    scn = CASE1.with_grid(GridSpec(-20.0, 20.0, 257, 0.0, 1.0, 11))
    rows = convergence_study(scn, SolverConfig(dt=0.04), 3, 0.4)
    assert [r.n_x for r in rows] == [257, 513, 1025]
    assert rows[0].order is None
    for r in rows[1:]:
        assert 1.8 <= r.order <= 2.2 and not r.anomaly


def test_convergence_flags_floor_anomaly(monkeypatch):
    import nlsint.simulator as sim

    errors = iter([1e-11, 1e-13])
    real = sim.propagate

    def fake(scn, psi0, cfg, t_end, **kw):
        fld = real(scn, psi0, cfg, t_end, **kw)
        ref = reference_values(scn, fld.grid.x, t_end)
        vals = np.array(fld.values)
        vals[-1] = ref + next(errors)
        return type(fld)(fld.grid, vals)

    monkeypatch.setattr(sim, "propagate", fake)
    scn = CASE1.with_grid(GridSpec(-20.0, 20.0, 65, 0.0, 1.0, 11))
    rows = sim.convergence_study(scn, SolverConfig(dt=0.2), 2, 0.4)
    assert rows[1].anomaly


def test_nonconvergence_raises():
    scn = CASE1
    xg = GridSpec(-20.0, 20.0, 129, 0.0, 1.0, 2)
    psi0 = 50 * initial_state(scn, xg)
    with pytest.raises(ConvergenceError) as exc:
        propagate(scn, psi0, SolverConfig(dt=0.5, max_iter=3), 1.0, x_grid=xg)
    assert exc.value.iterations == 3 and exc.value.t == 0.5


def test_csv_outputs(tmp_path):
    xg = GridSpec(-20.0, 20.0, 65, 0.0, 1.0, 2)
    fld = propagate(CASE1, initial_state(CASE1, xg), SolverConfig(dt=0.5), 1.0, x_grid=xg)
    path = write_field_csv(fld, tmp_path / "psi.csv", {"scenario": "case1"})
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["x", "t", "re", "im", "abs"]
    assert len(rows) == 1 + 3 * 65
    assert float(rows[1][0]) == -20.0
    meta = json.loads((tmp_path / "psi.json").read_text())
    assert meta["scenario"] == "case1" and meta["grid"]["n_t"] == 3

    conv = [ConvergenceRow(65, 0.625, 0.1, 1e-3, None, False), ConvergenceRow(129, 0.3125, 0.05, 2.5e-4, 2.0, False)]
    rows = list(csv.reader(open(write_convergence_csv(conv, tmp_path / "conv.csv"))))
    assert rows[1][4] == "" and float(rows[2][4]) == 2.0


def test_analytic_boundaries_on_eq19():
    scn = catalog("eq19")
    xg = GridSpec(0.7, 3.0, 921, 0.5, 2.0, 2)
    fld = propagate(scn, initial_state(scn, xg), SolverConfig(dt=1e-3, boundary="analytic"), 0.6, x_grid=xg,
                    save_every=100)
    err = np.max(np.abs(fld.values[-1] - reference_values(scn, xg.x, 0.6)))
    assert err <= 1e-3


def test_zero_candidate():
    assert residual_of_candidate(CASE1, (parse("0"), parse("0"))).max_abs == 0.0


def test_minimal_convergence_table():
    scn = CASE1.with_grid(GridSpec(-20.0, 20.0, 129, 0.0, 1.0, 2))
    rows = convergence_study(scn, SolverConfig(dt=0.1), 2, 0.2)
    assert len(rows) == 2
    with pytest.raises(ValueError):
        convergence_study(scn, SolverConfig(dt=0.1), 1, 0.2)
