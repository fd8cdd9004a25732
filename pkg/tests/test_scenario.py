import json

import numpy as np
import pytest

from nlsint import GridSpec, catalog, evaluate, residual_of_candidate, catalog_names, check_scenario, load_scenario, parse, save_scenario
from nlsint.scenario import AUTO, Scenario, ScenarioError

SMALL = GridSpec(-2.0, 2.0, 101, 0.0, 1.0, 21)


def test_catalog_names():
    assert catalog_names() == ["case1", "case2", "case3", "case4", "case5", "hd-case1", "hd-case2", "eq19"]
    with pytest.raises(ScenarioError, match="unknown catalog entry"):
        catalog("case9")


def test_hd_case2_rejects_degenerate_p():
    with pytest.raises(ScenarioError, match="p = 1/2"):
        catalog("hd-case2", p=0.5)


def test_hd_case1_potential_term():
    scn = catalog("hd-case1", n=2)
    x = np.array([1.5, 2.5])
    v = scn.coefficients["v"]
    assert np.allclose(evaluate(v, {"x": x, "t": 0.0}, scn.params), 0.0)  # n(n-2) = 0 at n = 2
    v3 = catalog("hd-case1", n=3)
    assert np.allclose(evaluate(v3.coefficients["v"], {"x": x, "t": 0.0}, v3.params), 3 / (4 * x**2))


@pytest.mark.parametrize("name", ["case1", "case2", "case3", "case4", "case5", "hd-case1", "hd-case2"])
def test_catalog_entries_pass_on_their_grid(name):
    scn = catalog(name)
    grid = GridSpec(scn.grid.x_min, scn.grid.x_max, 201, scn.grid.t_min, scn.grid.t_max, 21)
    assert all(r.passed for r in check_scenario(scn.with_grid(grid)))


def test_case5_gets_painleve_check_and_closed_form_v():
    reports = check_scenario(catalog("case5"), SMALL)
    assert [r.condition for r in reports] == ["fg", "gamma", "v"]  # gamma is not zero here
    res = catalog("case5").resolve(SMALL)
    assert res.v_kind == "analytic" and "v" in res.built


def test_case3_adds_painleve():
    reports = check_scenario(catalog("case3"), SMALL)
    assert [r.condition for r in reports] == ["fg", "gamma", "v", "painleve"]
    assert all(r.passed for r in reports)


def test_quadrature_v_is_rebuilt_per_grid():
    scn = Scenario("q", {"g": parse("1 + x^2")}, grid=SMALL)
    a = scn.resolve(SMALL)
    b = scn.resolve(GridSpec(-2.0, 2.0, 51, 0.0, 1.0, 21))
    assert a.v_kind == "quadrature"
    assert a.coeffs.v.grid.n_x == 101 and b.coeffs.v.grid.n_x == 51


def test_json_round_trip(tmp_path):
    for name in catalog_names():
        scn = catalog(name)
        path = tmp_path / f"{name}.json"
        save_scenario(scn, path)
        back = load_scenario(path)
        assert back.to_json() == scn.to_json()
        assert json.loads(path.read_text())["name"] == name


def test_json_modulus_phase_and_auto(tmp_path):
    doc = {
        "name": "mp",
        "params": {},
        "coefficients": {"g": "1", "f": "auto", "gamma": "auto", "v": "auto", "h": None},
        "free": {"c1": "1", "c2": "1"},
        "grid": {"x_min": -20, "x_max": 20, "n_x": 401, "t_min": 0, "t_max": 1, "n_t": 11},
        "psi_ref": {"abs": "sqrt(2)*sech(x)", "phase": "t"},
    }
    path = tmp_path / "mp.json"
    path.write_text(json.dumps(doc))
    scn = load_scenario(path)
    assert scn.coefficients["f"] == AUTO
    assert residual_of_candidate(scn, scn.psi_ref).max_abs <= 1e-14


@pytest.mark.parametrize(
    "doc, match",
    [
        ({"coefficients": {"g": "1"}}, "grid"),
        ({"coefficients": {"f": "1"}, "grid": {"x_min": 0, "x_max": 1, "n_x": 5}}, "g must be given"),
        ({"coefficients": {"g": "1", "w": "1"}, "grid": {"x_min": 0, "x_max": 1, "n_x": 5}}, "unknown coefficient"),
    ],
)
def test_json_errors(tmp_path, doc, match):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match=match):
        load_scenario(path)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError, match="invalid JSON"):
        load_scenario(path)


def test_with_grid_keeps_singular_points():
    scn = catalog("case4")
    g = scn.with_grid(GridSpec(1.0, 2.0, 11)).grid
    assert g.singular_x == (0.0,)
