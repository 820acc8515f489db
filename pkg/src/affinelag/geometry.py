"""Affine Lagrangians and their coordinate geometry.

A Lagrangian affine in the velocities, ``L = m_i v^i - V``, comes from the
1-form ``m_i dq^i - V dt``.  Everything the classification needs is read off
from two objects: the antisymmetric matrix ``A_ij = dm_j/dq^i - dm_i/dq^j``
and the covector ``omega_i = dV/dq^i + dm_i/dt``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .symexpr import (
    ZERO,
    Expr,
    Sym,
    SymbolTable,
    ZeroOracle,
    add,
    as_expr,
    differentiate,
    free_symbols,
    is_affine_in,
    mul,
    simplify,
    symbol,
    to_text,
)
from .symexpr.numeric import ProbeConfig
from .symlinalg import SymMatrix

# jet coordinates of the gauge parameter g(t): g, its first and second derivative
G, G_T, G_TT = symbol("g"), symbol("g_t"), symbol("g_tt")
JETS = (G, G_T, G_TT)


class LagrangianError(ValueError):
    """Input data does not define an affine Lagrangian."""


def _forbidden(table: SymbolTable) -> set[Sym]:
    return set(table.velocities) | set(table.accelerations) | set(table.momenta) | set(JETS)


@dataclass(frozen=True)
class OneForm:
    table: SymbolTable
    m: tuple[Expr, ...]
    V: Expr

    def __post_init__(self):
        if len(self.m) != self.table.n:
            raise LagrangianError(
                f"one-form has {len(self.m)} dq-coefficients but there are {self.table.n} coordinates"
            )
        bad = _forbidden(self.table)
        for label, e in [(f"m[{i}]", x) for i, x in enumerate(self.m)] + [("V", self.V)]:
            hit = free_symbols(e) & bad
            if hit:
                names = ", ".join(sorted(s.name for s in hit))
                raise LagrangianError(f"{label} = {to_text(e)} contains jet symbol(s) {names}")


@dataclass(frozen=True)
class AffineLagrangian:
    form: OneForm

    @property
    def table(self) -> SymbolTable:
        return self.form.table

    @property
    def n(self) -> int:
        return self.table.n

    @property
    def m(self) -> tuple[Expr, ...]:
        return self.form.m

    @property
    def V(self) -> Expr:
        return self.form.V

    @property
    def expr(self) -> Expr:
        return add(*(mul(mi, v) for mi, v in zip(self.m, self.table.velocities)), -self.V)

    def scaled(self, c) -> "AffineLagrangian":
        return make_lagrangian(self.table, [c * x for x in self.m], c * self.V)

    def oracle(self, config: ProbeConfig = ProbeConfig()) -> ZeroOracle:
        return ZeroOracle(self.table.sampler(), config)

    def __str__(self):
        return to_text(self.expr)


@dataclass(frozen=True)
class StructureData:
    table: SymbolTable
    A: SymMatrix
    omega: tuple[Expr, ...]


def make_lagrangian(table: SymbolTable, m: Sequence, V, autonomous: bool = False) -> AffineLagrangian:
    m = tuple(simplify(table.parse(x) if isinstance(x, str) else as_expr(x)) for x in m)
    V = simplify(table.parse(V) if isinstance(V, str) else as_expr(V))
    if autonomous:
        for e in m + (V,):
            if table.time in free_symbols(e):
                raise LagrangianError(f"autonomous problem depends on {table.time.name}: {to_text(e)}")
    return AffineLagrangian(OneForm(table, m, V))


def build_lagrangian(spec) -> AffineLagrangian:
    """Lagrangian of a loaded problem (see :mod:`affinelag.problem`)."""
    table = spec.table()
    if spec.mode == "hamiltonian":
        return from_hamiltonian(table.parse(spec.H), spec.pairs, table)
    return make_lagrangian(table, spec.m, spec.V, autonomous=spec.autonomous)


def structure_matrices(L: AffineLagrangian) -> StructureData:
    q, m = L.table.coords, L.m
    n = L.n
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a = simplify(differentiate(m[j], q[i]) - differentiate(m[i], q[j]))
            rows[i][j] = a
            rows[j][i] = simplify(-a)
    omega = tuple(
        simplify(differentiate(L.V, q[i]) + differentiate(m[i], L.table.time)) for i in range(n)
    )
    return StructureData(L.table, SymMatrix(rows, n), omega)


def primary_constraints(S: StructureData) -> list[Expr]:
    """``Phi_i = A_ij v^j - omega_i``."""
    v = S.table.velocities
    n = S.table.n
    return [
        simplify(add(*(mul(S.A[i, j], v[j]) for j in range(n)), -S.omega[i])) for i in range(n)
    ]


def constraint_along(S: StructureData, Y: Sequence[Expr]) -> Expr:
    """``Phi_Y = Y^i Phi_i``, the constraint attached to a vertical field."""
    return simplify(add(*(mul(y, phi) for y, phi in zip(Y, primary_constraints(S)))))


def total_time_derivative(f: Expr, table: SymbolTable, order: int = 0, jets: Sequence[Sym] = JETS) -> Expr:
    """Total derivative along the contact structure.

    Order 0 differentiates functions of (t, q): ``df/dt + v^i df/dq^i``.
    Order 1 also accepts velocity dependence and adds ``a^i df/dv^i``.  Jet
    symbols in ``jets`` are chained, each one's derivative being the next.
    """
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    syms = free_symbols(f)
    acc = syms & set(table.accelerations)
    if acc:
        raise ValueError(f"acceleration symbol(s) in input: {', '.join(sorted(s.name for s in acc))}")
    vel = syms & set(table.velocities)
    if vel and order == 0:
        raise ValueError("order-0 total derivative needs a function of (t, q) only")
    parts = [differentiate(f, table.time)]
    for q, v in zip(table.coords, table.velocities):
        if q in syms:
            parts.append(mul(v, differentiate(f, q)))
    if order == 1:
        for v, a in zip(table.velocities, table.accelerations):
            if v in vel:
                parts.append(mul(a, differentiate(f, v)))
    for lo, hi in zip(jets, jets[1:]):
        if lo in syms:
            parts.append(mul(hi, differentiate(f, lo)))
    if jets and jets[-1] in syms:
        raise ValueError(f"jet symbol {jets[-1].name} has no registered derivative")
    return simplify(add(*parts))


def variational_derivatives(L: AffineLagrangian) -> list[Expr]:
    """``L_i = d/dt(dL/dv^i) - dL/dq^i``."""
    e = L.expr
    out = []
    for q, v in zip(L.table.coords, L.table.velocities):
        p = differentiate(e, v)
        out.append(simplify(total_time_derivative(p, L.table, 1) - differentiate(e, q)))
    return out


def from_hamiltonian(H: Expr, pairs: int, table: SymbolTable) -> AffineLagrangian:
    """Phase-space Lagrangian ``p_j v^j - H`` on coordinates ``(q_1..q_m, p_1..p_m)``."""
    if table.n != 2 * pairs:
        raise LagrangianError(f"expected {2 * pairs} coordinates (q then p), got {table.n}")
    bad = free_symbols(H) & _forbidden(table)
    if bad:
        raise LagrangianError(f"Hamiltonian contains velocity or jet symbols: {sorted(s.name for s in bad)}")
    p = table.coords[pairs:]
    return make_lagrangian(table, list(p) + [ZERO] * pairs, H)


def extend_with_multipliers(L: AffineLagrangian, phis: Sequence[Expr], mode: str = "values") -> AffineLagrangian:
    """Append multipliers ``lam1..lamk`` enforcing holonomic constraints ``phis``.

    ``values`` adds ``lam^a phi_a``; ``velocities`` adds ``lam^a dphi_a/dt``.
    """
    if mode not in ("values", "velocities"):
        raise ValueError("mode must be 'values' or 'velocities'")
    bad = _forbidden(L.table)
    for phi in phis:
        if free_symbols(phi) & bad:
            raise LagrangianError(f"holonomic constraint {to_text(phi)} depends on velocities")
    taken = L.table.names()
    names, k = [], 1
    while len(names) < len(phis):
        cand = f"lam{k}"
        if cand not in taken:
            names.append(cand)
        k += 1
    table = L.table.with_coords(names)
    lams = table.coords[L.n :]
    m = list(L.m) + [ZERO] * len(phis)
    V = L.V
    if mode == "values":
        V = V - add(*(mul(lam, phi) for lam, phi in zip(lams, phis)))
    else:
        for i, q in enumerate(L.table.coords):
            m[i] = m[i] + add(*(mul(lam, differentiate(phi, q)) for lam, phi in zip(lams, phis)))
        V = V - add(*(mul(lam, differentiate(phi, L.table.time)) for lam, phi in zip(lams, phis)))
    return make_lagrangian(table, m, V)


def canonical_bracket(f: Expr, g: Expr, table: SymbolTable) -> Expr:
    """``{f, g}`` with ``{q^i, p_j} = delta^i_j`` on momentum phase space."""
    parts = []
    for q, p in zip(table.coords, table.momenta):
        parts.append(differentiate(f, q) * differentiate(g, p))
        parts.append(-(differentiate(f, p) * differentiate(g, q)))
    return simplify(add(*parts))


def legendre_constraints(L: AffineLagrangian) -> tuple[list[Expr], SymMatrix]:
    """Momentum constraints ``p_j - m_j`` and their bracket matrix."""
    phis = [simplify(p - mj) for p, mj in zip(L.table.momenta, L.m)]
    n = L.n
    rows = [[canonical_bracket(phis[j], phis[k], L.table) for k in range(n)] for j in range(n)]
    return phis, SymMatrix(rows, n)


def is_affine_lagrangian(e: Expr, table: SymbolTable) -> bool:
    return is_affine_in(e, table.velocities)


__all__ = [
    "G",
    "G_T",
    "G_TT",
    "JETS",
    "AffineLagrangian",
    "LagrangianError",
    "OneForm",
    "StructureData",
    "build_lagrangian",
    "canonical_bracket",
    "constraint_along",
    "extend_with_multipliers",
    "from_hamiltonian",
    "legendre_constraints",
    "make_lagrangian",
    "primary_constraints",
    "structure_matrices",
    "total_time_derivative",
    "variational_derivatives",
]
