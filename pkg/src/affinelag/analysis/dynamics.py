"""Reduced dynamics: the regular field eta, or a constrained SODE with free functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..geometry import AffineLagrangian, StructureData, primary_constraints, structure_matrices
from ..symexpr import (
    ZERO,
    Const,
    Expr,
    Sym,
    SymbolTable,
    ZeroOracle,
    add,
    canonical_constraint,
    differentiate,
    free_symbols,
    mul,
    simplify,
    substitute,
    symbol,
    to_text,
)
from ..symlinalg import SymMatrix, rref, solve_linear
from .sector import TYPE_I, Classification, structure_oracle


@dataclass
class EtaField:
    drift: list[Expr]


@dataclass
class ConstrainedSODE:
    velocities: list[Expr]  # q-dot components
    accelerations: list[Expr]  # v-dot components, may contain free functions
    kernel_directions: list[list[Expr]]
    free_function_names: list[str]
    manifold: list[Expr]
    secondary: list[Expr] = field(default_factory=list)
    holonomic: list[Expr] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class Reducer:
    """Normal forms modulo a list of constraints on (t, q, v).

    Constraints affine in the velocities are solved for pivot velocities;
    holonomic ones are solved for one coordinate when they are linear in it.
    Rows that turn out inconsistent in the velocity solve are holonomic
    consequences and are collected in ``derived``.
    """

    def __init__(self, table: SymbolTable, constraints: Sequence[Expr], oracle: ZeroOracle, max_rounds: int = 64):
        self.table = table
        self.oracle = oracle
        self.q_subs: dict[Sym, Expr] = {}
        self.v_subs: dict[Sym, Expr] = {}
        self.unsolved: list[Expr] = []
        self.derived: list[Expr] = []
        self._build([simplify(c) for c in constraints], max_rounds)

    def reduce_q(self, f: Expr) -> Expr:
        return simplify(substitute(f, self.q_subs)) if self.q_subs else simplify(f)

    def reduce(self, f: Expr) -> Expr:
        g = substitute(f, self.v_subs) if self.v_subs else f
        return self.reduce_q(g)

    def is_zero(self, f: Expr) -> bool:
        g = self.reduce(f)
        return g == ZERO or self.oracle.is_zero(g)

    def _zero(self, g: Expr) -> bool:
        return g == ZERO or self.oracle.decide(g)

    def _solve_q(self, g: Expr):
        options = []
        for q in self.table.coords:
            c = simplify(differentiate(g, q))
            if c == ZERO or q in free_symbols(c):
                continue
            options.append((not isinstance(c, Const), q, c))
        # constant coefficients first, then the lowest coordinate index
        for nonconst, q, c in sorted(options, key=lambda o: o[0]):
            if nonconst and self._zero(c):
                continue
            return q, simplify(q - g / c)
        return None

    def _build(self, work: list[Expr], max_rounds: int):
        vels = self.table.velocities
        velset = set(vels)
        n = len(vels)
        for _ in range(max_rounds):
            progress = False
            for f in work:
                g = self.reduce_q(f)
                if free_symbols(g) & velset or self._zero(g):
                    continue
                if any(self.oracle.is_zero(simplify(g - u)) for u in self.unsolved):
                    continue
                sol = self._solve_q(g)
                if sol is None:
                    self.unsolved.append(g)
                    continue
                q, val = sol
                self.q_subs = {k: simplify(substitute(x, {q: val})) for k, x in self.q_subs.items()}
                self.q_subs[q] = val
                progress = True
                break
            if progress:
                continue
            rows, rhs = [], []
            for f in work:
                g = self.reduce_q(f)
                if not free_symbols(g) & velset:
                    continue
                coeffs = [simplify(differentiate(g, v)) for v in vels]
                if any(free_symbols(c) & velset for c in coeffs):
                    if g not in self.unsolved:
                        self.unsolved.append(g)
                    continue
                rest = simplify(g - add(*(mul(c, v) for c, v in zip(coeffs, vels))))
                rows.append(coeffs)
                rhs.append(simplify(-rest))
            if not rows:
                self.v_subs = {}
                return
            ech = rref(SymMatrix(rows, n).hstack(rhs), self.oracle, reduce=self.reduce_q, pivot_cols=n)
            fresh = []
            for row in ech.rows[len(ech.pivots):]:
                r = row[n]
                if not self._zero(r):
                    c = canonical_constraint(r)
                    if c not in self.derived and c not in work and c not in fresh:
                        fresh.append(c)
            free = [j for j in range(n) if j not in ech.pivots]
            self.v_subs = {
                vels[pc]: simplify(row[n] - add(*(mul(row[j], vels[j]) for j in free)))
                for row, pc in zip(ech.rows, ech.pivots)
            }
            if not fresh:
                return
            self.derived.extend(fresh)
            work = work + fresh
        raise RuntimeError("constraint reduction did not converge")


def _known_part(f: Expr, table: SymbolTable) -> Expr:
    """Total derivative of ``f`` without the acceleration terms."""
    parts = [differentiate(f, table.time)]
    syms = free_symbols(f)
    for q, v in zip(table.coords, table.velocities):
        if q in syms:
            parts.append(mul(v, differentiate(f, q)))
    return simplify(add(*parts))


def _free_names(table: SymbolTable, k: int) -> list[str]:
    taken = table.names()
    out, i = [], 1
    while len(out) < k:
        if f"C{i}" not in taken:
            out.append(f"C{i}")
        i += 1
    return out


def eta_field(S: StructureData, oracle: ZeroOracle | None = None) -> EtaField:
    oracle = structure_oracle(S, oracle)
    return EtaField(solve_linear(S.A, S.omega, oracle).particular)


def constrained_sode(
    L: AffineLagrangian, S: StructureData | None = None, oracle: ZeroOracle | None = None, max_rounds: int | None = None
) -> ConstrainedSODE:
    S = S or structure_matrices(L)
    oracle = structure_oracle(S, oracle)
    table = L.table
    n = L.n
    vels = table.velocities
    primary = primary_constraints(S)
    C = list(primary)
    holonomic: list[Expr] = []
    secondary: list[Expr] = []
    warnings: list[str] = []
    rounds = max_rounds or 4 * n + 4
    ech = None
    for _ in range(rounds):
        R = Reducer(table, C, oracle)
        new_h = [h for h in R.derived if h not in holonomic]
        if new_h:
            holonomic.extend(new_h)
            C.extend(new_h)
            continue
        rows = [[simplify(differentiate(f, v)) for v in vels] for f in C]
        rhs = [simplify(-_known_part(f, table)) for f in C]
        ech = rref(SymMatrix(rows, n).hstack(rhs), oracle, reduce=R.reduce, pivot_cols=n)
        fresh = []
        for row in ech.rows[len(ech.pivots):]:
            r = row[n]
            if r == ZERO or oracle.decide(r):
                continue
            c = canonical_constraint(r)
            if c in C or c in fresh:
                continue
            fresh.append(c)
        if not fresh:
            break
        if any(isinstance(c, Const) for c in fresh):
            warnings.append("consistency conditions are contradictory; no dynamics exists")
            break
        secondary.extend(fresh)
        C.extend(fresh)
    else:
        warnings.append("constraint algorithm did not stabilise")
    if ech is None:
        ech = rref(SymMatrix([[differentiate(f, v) for v in vels] for f in C], n), oracle, reduce=R.reduce)
        ech.rows = [r + [ZERO] for r in ech.rows]
    if R.unsolved:
        warnings.append(
            "constraints left unsolved during reduction: " + ", ".join(to_text(u) for u in R.unsolved)
        )
    free = [j for j in range(n) if j not in ech.pivots]
    names = _free_names(table, len(free))
    Csyms = {j: symbol(nm) for j, nm in zip(free, names)}
    acc = [ZERO] * n
    directions = []
    for j in free:
        acc[j] = Csyms[j]
    for row, pc in zip(ech.rows, ech.pivots):
        acc[pc] = simplify(row[n] - add(*(mul(row[j], Csyms[j]) for j in free)))
    for j in free:
        directions.append([simplify(differentiate(a, Csyms[j])) for a in acc])
    qdot = [R.v_subs.get(v, v) for v in vels]
    return ConstrainedSODE(
        velocities=qdot,
        accelerations=acc,
        kernel_directions=directions,
        free_function_names=names,
        manifold=primary + holonomic + secondary,
        secondary=secondary,
        holonomic=holonomic,
        warnings=warnings,
    )


def reduced_dynamics(
    L: AffineLagrangian, C: Classification, S: StructureData | None = None, oracle: ZeroOracle | None = None
):
    S = S or structure_matrices(L)
    if C.tag == TYPE_I:
        return eta_field(S, oracle)
    return constrained_sode(L, S, oracle)


@dataclass
class DynamicsVerdict:
    ok: bool
    failing: str | None = None
    residual: Expr | None = None

    def __bool__(self):
        return self.ok


def verify_candidate_dynamics(
    L: AffineLagrangian, candidate: ConstrainedSODE, oracle: ZeroOracle | None = None
) -> DynamicsVerdict:
    """Check that a candidate field is a SODE tangent to its constraint manifold."""
    S = structure_matrices(L)
    oracle = structure_oracle(S, oracle)
    table = L.table
    constraints = list(candidate.manifold) + [p for p in primary_constraints(S) if p not in candidate.manifold]
    R = Reducer(table, constraints, oracle)
    for q, v, qd in zip(table.coords, table.velocities, candidate.velocities):
        d = R.reduce(qd - v)
        if not (d == ZERO or oracle.is_zero(d)):
            return DynamicsVerdict(False, f"second-order condition for {q.name}", d)
    for f in constraints:
        parts = [differentiate(f, table.time)]
        for q, qd in zip(table.coords, candidate.velocities):
            parts.append(mul(qd, differentiate(f, q)))
        for v, a in zip(table.velocities, candidate.accelerations):
            parts.append(mul(a, differentiate(f, v)))
        d = R.reduce(add(*parts))
        if not (d == ZERO or oracle.is_zero(d)):
            return DynamicsVerdict(False, f"tangency to {to_text(f)}", d)
    return DynamicsVerdict(True)
