import math
from pathlib import Path

import numpy as np
import pytest

import harvest

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


def squeezed(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    g = np.zeros((4, 4))
    g[:2, :2] = g[2:, 2:] = c * np.eye(2)
    g[:2, 2:] = g[2:, :2] = np.diag([s, -s])
    return g


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_squeezed_state(r):
    g = squeezed(r)
    assert harvest.simon_value(g) == pytest.approx(4 * math.sinh(2 * r) ** 2, rel=1e-12)
    assert harvest.nu_minus(g) == pytest.approx(math.exp(-2 * r), rel=1e-12)
    assert harvest.negativity(g) > 0
    assert harvest.check_uncertainty(g)
    assert np.allclose(harvest.partial_transpose(harvest.partial_transpose(g)), g)


def test_vacuum_and_witness():
    assert harvest.simon_value(np.eye(4)) == pytest.approx(0.0, abs=1e-14)
    assert harvest.mode_number_expectation(np.eye(2)) == pytest.approx(0.0, abs=1e-14)
    assert not harvest.check_uncertainty(0.5 * np.eye(4))
    rep = harvest.p_function_witness(2.0 * np.eye(4))
    assert rep is not None and not rep["rank_deficient"]
    assert harvest.p_function_witness(squeezed(0.5)) is None
    w = harvest.weyl_expectation(np.eye(4), np.zeros(4), np.array([1.0, 0, 0, 0]))
    assert w == pytest.approx(math.exp(-0.25))


def test_asymmetric_matrix_raises():
    g = np.eye(4)
    g[0, 1] = 0.3
    with pytest.raises(harvest.HarvestError):
        harvest.check_uncertainty(g)


def test_scenario_round_trip_and_sweep():
    sc = harvest.Scenario.load(str(SCENARIOS / "thermal_harvest.ini"))
    again = harvest.Scenario.from_string(sc.to_string())
    assert again.lambdas == sc.lambdas
    rows = sc.sweep()
    assert len(rows) == len(sc.lambdas)
    assert rows[0]["p_s"] < 0
    assert any(r["p_s"] > 0 for r in rows)
    assert sc.sweep_csv() == again.sweep_csv()
    g = sc.covariance(0.0)
    assert np.allclose(g[:2, 2:], 0.0)


def test_critical_perturb_and_signal():
    sc = harvest.Scenario.load(str(SCENARIOS / "thermal_harvest.ini"))
    lam = sc.critical(0.0, 0.03, 1e-4, 30)
    assert lam is not None and 0.015 < lam < 0.016
    c = sc.perturb()
    assert c["p0"] < 0 and c["p2"] < 0
    total, system, probe = sc.signal(0.01, "b")
    assert total == pytest.approx(system + probe)
    assert total > 0


def test_cli_exit_codes():
    code, out, _ = harvest.cli(["sweep", str(SCENARIOS / "potential_well.ini")])
    assert code == 0
    assert out.startswith("lambda,p_s,")
    code, _, _ = harvest.cli(["nonsense"])
    assert code == 2
    with pytest.raises(harvest.HarvestError):
        harvest.Scenario.from_string("[lattice]\ndt = 0.5\n[couplings]\nrho_a = 4, 3, 0.8, 0.1, 1\n")
