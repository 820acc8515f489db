import csv
import math

import numpy as np
import pytest

from affinelag.analysis import EtaField, eta_field
from affinelag.flow import (
    FlowDomainError,
    NonFiniteStateError,
    drift_report,
    integrate_reduced,
    step_count,
    write_csv,
)
from affinelag.symexpr import SymbolTable

from conftest import example

LV_PARAMS = {"a": 2.0, "b": 1.0}


def lotka_volterra(h, t1=10.0, start=(1.0, 1.0)):
    P = example("lotka_volterra")
    return integrate_reduced(eta_field(P.S, P.oracle), P.L.table, dict(zip("xy", start)), 0.0, t1, h, LV_PARAMS)


def test_hamiltonian_is_conserved():
    traj = lotka_volterra(1e-3)
    P = example("lotka_volterra")
    H = P.parse("a*ln(y) + b*ln(x) - x - y")
    assert drift_report(traj, {"H": H}).observables["H"] < 1e-8


def test_equilibrium_is_constant():
    traj = lotka_volterra(1e-2, start=(1.0, 2.0))
    assert np.max(np.abs(traj.states - [1.0, 2.0])) < 1e-12


def test_constant_observable_has_no_drift():
    traj = lotka_volterra(1e-1)
    assert drift_report(traj, [example("lotka_volterra").parse("a + 3")]).observables == {"a + 3": 0.0}


def test_harmonic_oscillator_period():
    P = example("harmonic_oscillator")
    traj = integrate_reduced(eta_field(P.S, P.oracle), P.L.table, {"q": 1.0, "p": 0.0}, 0.0, 2 * math.pi, 1e-4)
    assert np.max(np.abs(traj.states[-1] - [1.0, 0.0])) < 1e-6
    assert traj.t[-1] == 2 * math.pi


def test_regular_four_invariant():
    P = example("regular_four")
    start = {"q1": 0.3, "q2": 1.0, "q3": -0.5, "q4": 0.2}
    traj = integrate_reduced(eta_field(P.S, P.oracle), P.L.table, start, 0.0, 1.0, 1e-3)
    assert drift_report(traj, [P.parse("q2^2 - q4^2")]).observables["q2^2 - q4^2"] < 1e-8


def _endpoint_ratio(h):
    ref = lotka_volterra(h / 4).states[-1]
    coarse = np.max(np.abs(lotka_volterra(h).states[-1] - ref))
    fine = np.max(np.abs(lotka_volterra(h / 2).states[-1] - ref))
    return coarse / fine


@pytest.mark.parametrize("h", [0.1, 0.05])
def test_fourth_order_convergence(h):
    assert 12 <= _endpoint_ratio(h) <= 20


def test_constraint_residuals_are_second_order():
    P = example("lotka_volterra")
    r1 = drift_report(lotka_volterra(0.02, t1=2.0), {}, P.L).constraints
    r2 = drift_report(lotka_volterra(0.01, t1=2.0), {}, P.L).constraints
    assert set(r1) == {"Phi_x", "Phi_y"}
    for k in r1:
        assert 3.0 < r1[k] / r2[k] < 5.0


def test_sample_grid():
    traj = lotka_volterra(0.3, t1=1.0)
    assert len(traj.t) == step_count(0.0, 1.0, 0.3) + 1 == 5
    assert traj.t[-1] == 1.0
    assert np.all(np.diff(traj.t) > 0)
    assert len(lotka_volterra(0.1, t1=1.0).t) == 11


def test_step_count_validation():
    assert step_count(0.0, 10.0, 1e-3) == 10000
    with pytest.raises(ValueError):
        step_count(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        step_count(1.0, 1.0, 0.1)


def test_csv_export(tmp_path):
    traj = lotka_volterra(0.25, t1=1.0)
    path = tmp_path / "lv.csv"
    write_csv(traj, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "x", "y"]
    assert len(rows) == len(traj.t) + 1
    back = np.array([[float(v) for v in r] for r in rows[1:]])
    assert np.array_equal(back[:, 0], traj.t)
    assert np.array_equal(back[:, 1:], traj.states)


T = SymbolTable.build(["x"], domain=["x > 0"])


def test_initial_state_outside_domain():
    P = example("lotka_volterra")
    with pytest.raises(FlowDomainError, match="x > 0"):
        integrate_reduced(eta_field(P.S, P.oracle), P.L.table, {"x": -1.0, "y": 1.0}, 0.0, 1.0, 0.1, LV_PARAMS)


def test_stage_leaving_domain_is_rejected():
    with pytest.raises(FlowDomainError, match="x > 0"):
        integrate_reduced(EtaField([T.parse("-10")]), T, {"x": 0.5}, 0.0, 1.0, 0.1)


def test_blow_up_is_reported():
    with pytest.raises((FlowDomainError, NonFiniteStateError), match="x\\^2"):
        integrate_reduced(EtaField([T.parse("x^2")]), T, {"x": 1.0}, 0.0, 2.0, 0.01)


def test_missing_inputs():
    P = example("lotka_volterra")
    d = eta_field(P.S, P.oracle)
    with pytest.raises(ValueError, match="missing y"):
        integrate_reduced(d, P.L.table, {"x": 1.0}, 0.0, 1.0, 0.1, LV_PARAMS)
    with pytest.raises(ValueError, match="parameter"):
        integrate_reduced(d, P.L.table, {"x": 1.0, "y": 1.0}, 0.0, 1.0, 0.1)
