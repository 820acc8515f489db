"""Fixed-step RK4 integration of the regular reduced field, with drift diagnostics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .analysis import EtaField
from .geometry import AffineLagrangian, primary_constraints, structure_matrices
from .symexpr import DomainError, Expr, SymbolTable, compile_exprs, eval_at, free_symbols, to_text


class FlowDomainError(DomainError):
    """A Runge-Kutta stage left the domain of the drift."""


class NonFiniteStateError(ArithmeticError):
    pass


@dataclass
class Trajectory:
    table: SymbolTable
    t: np.ndarray
    states: np.ndarray  # shape (samples, n)
    step: float
    params: dict = field(default_factory=dict)
    method: str = "rk4"
    seed: int | None = None

    @property
    def coords(self) -> list[str]:
        return [q.name for q in self.table.coords]

    def bindings(self, k: int) -> dict[str, float]:
        out = dict(self.params)
        out[self.table.time.name] = float(self.t[k])
        out.update(zip(self.coords, map(float, self.states[k])))
        return out


def step_count(t0: float, t1: float, h: float) -> int:
    """Number of RK4 steps; the step is shrunk so the grid ends exactly at t1."""
    if not h > 0:
        raise ValueError("step must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    x = (t1 - t0) / h
    r = round(x)
    if r >= 1 and abs(x - r) <= 1e-9 * x:
        return r
    return math.ceil(x)


def _explain(drift: Sequence[Expr], bindings: dict) -> str:
    for i, e in enumerate(drift):
        try:
            eval_at(e, bindings, min_denominator=1e-300)
        except DomainError as exc:
            return f"component {i} ({to_text(e)}): {exc}"
    return "drift left its domain"


def integrate_reduced(
    dyn: EtaField,
    table: SymbolTable,
    initial: Mapping[str, float] | Sequence[float],
    t0: float,
    t1: float,
    h: float,
    params: Mapping[str, float] | None = None,
) -> Trajectory:
    """Classic fourth-order Runge-Kutta for ``q' = drift(t, q)`` with compensated summation."""
    params = dict(params or {})
    names = [q.name for q in table.coords]
    if isinstance(initial, Mapping):
        missing = [nm for nm in names if nm not in initial]
        if missing:
            raise ValueError(f"initial state is missing {', '.join(missing)}")
        y = np.array([float(initial[nm]) for nm in names])
    else:
        y = np.array([float(x) for x in initial])
        if y.shape != (len(names),):
            raise ValueError(f"initial state needs {len(names)} values")
    needed = set()
    for e in dyn.drift:
        needed |= free_symbols(e)
    unbound = sorted(s.name for s in needed if s in set(table.params) and s.name not in params)
    if unbound:
        raise ValueError(f"parameter value(s) required: {', '.join(unbound)}")
    pnames = [p for p in table.params if p.name in params]
    f = compile_exprs(dyn.drift, (table.time,) + table.coords + tuple(pnames))
    pvals = [params[p.name] for p in pnames]

    ineqs = table.inequalities()
    gaps = compile_exprs([lhs - rhs_ for lhs, _, rhs_ in ineqs], (table.time,) + table.coords + tuple(pnames))
    holds = {">": lambda d: d > 0, ">=": lambda d: d >= 0, "<": lambda d: d < 0, "<=": lambda d: d <= 0, "!=": lambda d: d != 0}

    def inside(t, q):
        if not ineqs:
            return
        for (lhs, op, rhs_), d in zip(ineqs, gaps(t, *q, *pvals)):
            if not holds[op](d):
                raise FlowDomainError(f"at t={float(t):g}: state leaves the domain {to_text(lhs)} {op} {to_text(rhs_)}")

    def rhs(t, q):
        inside(t, q)
        try:
            out = np.array(f(t, *q, *pvals))
        except DomainError:
            b = dict(params)
            b[table.time.name] = t
            b.update(zip(names, map(float, q)))
            raise FlowDomainError(f"at t={float(t):g}: {_explain(dyn.drift, b)}") from None
        return out

    N = step_count(t0, t1, h)
    heff = (t1 - t0) / N
    ts = t0 + heff * np.arange(N + 1)
    ts[-1] = t1
    out = np.empty((N + 1, len(names)))
    out[0] = y
    comp = np.zeros_like(y)  # Kahan compensation keeps roundoff below the O(h^4) error
    for k in range(N):
        t = ts[k]
        k1 = rhs(t, y)
        k2 = rhs(t + heff / 2, y + heff / 2 * k1)
        k3 = rhs(t + heff / 2, y + heff / 2 * k2)
        k4 = rhs(t + heff, y + heff * k3)
        inc = heff / 6 * (k1 + 2 * k2 + 2 * k3 + k4) - comp
        nxt = y + inc
        comp = (nxt - y) - inc
        y = nxt
        if not np.all(np.isfinite(y)):
            raise NonFiniteStateError(f"state became nonfinite at t={float(ts[k + 1]):g}")
        inside(ts[k + 1], y)
        out[k + 1] = y
    return Trajectory(table, ts, out, heff, params)


@dataclass
class DriftReport:
    observables: dict[str, float]
    constraints: dict[str, float]


def _evaluate(traj: Trajectory, exprs: Sequence[Expr], extra: Sequence = ()) -> np.ndarray:
    table = traj.table
    pnames = [p for p in table.params if p.name in traj.params]
    args = (table.time,) + table.coords + tuple(pnames) + tuple(extra)
    f = compile_exprs(list(exprs), args)
    return f, [traj.params[p.name] for p in pnames]


def drift_report(
    traj: Trajectory,
    observables: Mapping[str, Expr] | Sequence[Expr],
    L: AffineLagrangian | None = None,
) -> DriftReport:
    """Max ``|f(t_k) - f(t_0)|`` per observable, plus primary-constraint residuals.

    The residuals evaluate ``A_ij v^j - omega_i`` with the velocities taken
    from central differences of the samples, so they shrink like ``h^2``.
    """
    if not isinstance(observables, Mapping):
        observables = {to_text(e): e for e in observables}
    obs: dict[str, float] = {}
    if observables:
        f, pv = _evaluate(traj, list(observables.values()))
        vals = np.array([f(traj.t[k], *traj.states[k], *pv) for k in range(len(traj.t))])
        for j, name in enumerate(observables):
            obs[name] = float(np.max(np.abs(vals[:, j] - vals[0, j])))
    cons: dict[str, float] = {}
    if L is not None and len(traj.t) >= 3:
        S = structure_matrices(L)
        phis = primary_constraints(S)
        f, pv = _evaluate(traj, phis, L.table.velocities)
        h = traj.step
        worst = np.zeros(len(phis))
        for k in range(1, len(traj.t) - 1):
            v = (traj.states[k + 1] - traj.states[k - 1]) / (2 * h)
            r = np.abs(np.array(f(traj.t[k], *traj.states[k], *pv, *v)))
            worst = np.maximum(worst, r)
        cons = {f"Phi_{q.name}": float(w) for q, w in zip(L.table.coords, worst)}
    return DriftReport(obs, cons)


def write_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + traj.coords)
        for t, row in zip(traj.t, traj.states):
            w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])
