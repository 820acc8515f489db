"""Holonomic sector and the four-way classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..geometry import StructureData, total_time_derivative
from ..symexpr import (
    ZERO,
    Expr,
    ZeroOracle,
    add,
    canonical_constraint,
    differentiate,
    mul,
    simplify,
    to_rational,
    to_text,
)
from ..symlinalg import InconsistentSystemError, generic_rank, nullspace_basis, solve_linear

TYPE_I, TYPE_II1, TYPE_II2, TYPE_II3 = "TypeI", "TypeII1", "TypeII2", "TypeII3"


def structure_oracle(S: StructureData, oracle: ZeroOracle | None) -> ZeroOracle:
    return oracle if oracle is not None else ZeroOracle(S.table.sampler())


def dot(a, b) -> Expr:
    return simplify(add(*(mul(x, y) for x, y in zip(a, b))))


@dataclass
class HolonomicSector:
    kernel_basis: list[list[Expr]]
    raw_constraints: list[Expr]  # Phi_Y = -omega . Y, as produced by the kernel vector
    holonomic_constraints: list[Expr]  # canonical representatives
    identically_satisfied: list[bool]
    rank: int = 0


def holonomic_sector(S: StructureData, oracle: ZeroOracle | None = None) -> HolonomicSector:
    oracle = structure_oracle(S, oracle)
    rank = generic_rank(S.A, oracle)
    basis = nullspace_basis(S.A, oracle) if rank < S.table.n else []
    raw, canon, trivial = [], [], []
    for Y in basis:
        phi = simplify(-dot(S.omega, Y))
        zero = phi == ZERO or oracle.is_zero(phi)
        raw.append(ZERO if zero else phi)
        canon.append(ZERO if zero else canonical_constraint(phi))
        trivial.append(zero)
    return HolonomicSector(basis, raw, canon, trivial, rank)


@dataclass
class Classification:
    tag: str
    witnesses: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    # the II.2 match when it exists alongside a II.1 witness
    also: dict | None = None

    def describe(self) -> str:
        parts = [self.tag]
        for k, v in self.witnesses.items():
            if isinstance(v, list):
                parts.append(f"{k}=({', '.join(to_text(x) for x in v)})")
            elif v is not None:
                parts.append(f"{k}={to_text(v)}")
        return " ".join(parts)


def _rational_combination(target: Expr, basis: list[Expr]) -> list[Fraction] | None:
    """Rational constants c with target = sum c_a basis_a identically, if any."""
    forms = [to_rational(e) for e in [target] + basis]
    common: dict = {}
    for r in forms:
        for f, k in r.den.items():
            common[f] = max(common.get(f, 0), k)
    polys = []
    for r in forms:
        p = r.num
        for f, k in common.items():
            extra = k - r.den.get(f, 0)
            if extra:
                p = p * (f**extra)
        polys.append(p)
    rhs, cols = polys[0], polys[1:]
    monos = set(rhs.terms)
    for p in cols:
        monos |= set(p.terms)
    monos = sorted(monos, key=repr)
    k = len(cols)
    rows = [[p.terms.get(mono, Fraction(0)) for p in cols] + [rhs.terms.get(mono, Fraction(0))] for mono in monos]
    # exact Gauss-Jordan over the rationals
    piv_cols, r = [], 0
    for c in range(k):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(row[k] != 0 for row in rows[r:]):
        return None
    sol = [Fraction(0)] * k
    for row, c in zip(rows, piv_cols):
        sol[c] = row[k]
    return sol


@dataclass
class SecondaryMatch:
    Y: list[Expr]
    Ybar: list[Expr] | None
    phi: Expr
    residual: Expr | None = None


def match_secondary(
    S: StructureData, sector: HolonomicSector, index: int, oracle: ZeroOracle
) -> SecondaryMatch:
    """Try to write d(phi_Y)/dt as a primary constraint Phi_Ybar.

    The velocity parts match when ``A^T Ybar = grad phi``; what is left is
    ``d phi/dt + Ybar . omega``, which must vanish or be a rational
    combination of the holonomic constraints (absorbed into Ybar along the
    kernel).
    """
    Y = sector.kernel_basis[index]
    phi = sector.raw_constraints[index]
    q = S.table.coords
    grad = [simplify(differentiate(phi, qi)) for qi in q]
    try:
        sol = solve_linear(S.A.T(), grad, oracle)
    except InconsistentSystemError as exc:
        return SecondaryMatch(Y, None, phi, exc.residual)
    Ybar = sol.particular
    residual = simplify(differentiate(phi, S.table.time) + dot(Ybar, S.omega))
    if residual == ZERO or oracle.is_zero(residual):
        return SecondaryMatch(Y, Ybar, phi)
    live = [(i, p) for i, p in enumerate(sector.raw_constraints) if p != ZERO]
    coeffs = _rational_combination(residual, [p for _, p in live]) if live else None
    if coeffs is None:
        return SecondaryMatch(Y, None, phi, residual)
    for (i, _), c in zip(live, coeffs):
        if c:
            Ybar = [simplify(a + c * b) for a, b in zip(Ybar, sector.kernel_basis[i])]
    return SecondaryMatch(Y, Ybar, phi)


def classify(
    S: StructureData, sector: HolonomicSector | None = None, oracle: ZeroOracle | None = None
) -> Classification:
    oracle = structure_oracle(S, oracle)
    if sector is None:
        sector = holonomic_sector(S, oracle)
    if not sector.kernel_basis:
        return Classification(TYPE_I)
    stacked = S.A.hstack(S.omega)
    Zs = nullspace_basis(stacked, oracle)
    first_fail: SecondaryMatch | None = None
    ii2: SecondaryMatch | None = None
    for i, trivial in enumerate(sector.identically_satisfied):
        if trivial:
            continue
        match = match_secondary(S, sector, i, oracle)
        if match.Ybar is not None:
            ii2 = match
            break
        if first_fail is None:
            first_fail = match
    if Zs:
        out = Classification(TYPE_II1, {"Z": Zs[0]})
        if len(Zs) > 1:
            out.warnings.append(f"{len(Zs)} independent II.1 witnesses; the first is used")
        if ii2 is not None:
            out.also = {"Y": ii2.Y, "Ybar": ii2.Ybar, "phi": ii2.phi}
            out.warnings.append("II.1 and II.2 witnesses coexist; tagged by the first satisfied case (II.1)")
        return out
    if ii2 is not None:
        return Classification(TYPE_II2, {"Y": ii2.Y, "Ybar": ii2.Ybar, "phi": ii2.phi})
    out = Classification(
        TYPE_II3,
        {"Y": first_fail.Y, "phi": first_fail.phi, "residual": first_fail.residual},
    )
    out.warnings.append(
        "no secondary constraint matched a primary one within the rational-combination ansatz"
    )
    return out


def secondary_of(S: StructureData, phi: Expr) -> Expr:
    """``chi = d(phi)/dt`` for a holonomic constraint."""
    return total_time_derivative(phi, S.table, 0)
