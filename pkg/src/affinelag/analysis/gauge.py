"""Gauge symmetries and their Noether functions."""

from __future__ import annotations

from dataclasses import dataclass

from ..geometry import G, G_T, G_TT, AffineLagrangian, total_time_derivative, variational_derivatives
from ..symexpr import ZERO, Expr, ZeroOracle, add, differentiate, mul, simplify, to_text
from .sector import TYPE_II1, TYPE_II2, Classification, dot


class GaugeVerificationError(RuntimeError):
    """An extracted symmetry failed its own identity; indicates an internal bug."""


@dataclass(frozen=True)
class GaugeSymmetry:
    R: int
    X0: tuple[Expr, ...]
    X1: tuple[Expr, ...]
    F0: Expr
    F1: Expr

    def field(self) -> list[Expr]:
        """Components of ``X_g = g X0 + g_t X1``."""
        return [simplify(G * a + G_T * b) for a, b in zip(self.X0, self.X1)]

    def noether(self) -> Expr:
        return simplify(G * self.F0 + G_T * self.F1)


@dataclass
class GaugeVerdict:
    ok: bool
    failing: str | None = None
    residual: Expr | None = None
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def gauge_symmetry(
    L: AffineLagrangian, C: Classification, oracle: ZeroOracle | None = None
) -> GaugeSymmetry | None:
    n = L.n
    zeros = (ZERO,) * n
    if C.tag == TYPE_II1:
        Z = tuple(C.witnesses["Z"])
        G_ = GaugeSymmetry(0, Z, zeros, dot(L.m, Z), ZERO)
    elif C.tag == TYPE_II2:
        Y = tuple(C.witnesses["Y"])
        Ybar = tuple(C.witnesses["Ybar"])
        phi = C.witnesses["phi"]
        G_ = GaugeSymmetry(1, Ybar, Y, simplify(phi + dot(L.m, Ybar)), dot(L.m, Y))
    else:
        return None
    verdict = verify_gauge(L, G_, oracle)
    if not verdict:
        raise GaugeVerificationError(
            f"gauge identity fails in the {verdict.failing} part: {to_text(verdict.residual)}"
        )
    return G_


def symmetry_defect(L: AffineLagrangian, G_: GaugeSymmetry) -> Expr:
    """``X_g^1 L - dF_g/dt`` with g, g_t, g_tt as independent jet symbols."""
    T = L.table
    X = G_.field()
    e = L.expr
    parts = []
    for q, v, x in zip(T.coords, T.velocities, X):
        parts.append(mul(x, differentiate(e, q)))
        parts.append(mul(total_time_derivative(x, T, 0), differentiate(e, v)))
    parts.append(-total_time_derivative(G_.noether(), T, 0))
    return simplify(add(*parts))


def noether_identity(L: AffineLagrangian, G_: GaugeSymmetry) -> Expr:
    """``<dL, X0> - d/dt <dL, X1>`` with ``<dL, X> = L_i X^i``."""
    Ls = variational_derivatives(L)
    first = dot(Ls, G_.X0)
    second = dot(Ls, G_.X1)
    return simplify(first - total_time_derivative(second, L.table, 1))


def verify_gauge(L: AffineLagrangian, G_: GaugeSymmetry, oracle: ZeroOracle | None = None) -> GaugeVerdict:
    oracle = oracle if oracle is not None else L.oracle()
    defect = symmetry_defect(L, G_)
    for label, jet in (("g", G), ("g_t", G_T), ("g_tt", G_TT)):
        coeff = simplify(differentiate(defect, jet))
        v = oracle.check(coeff)
        if not v.is_zero:
            return GaugeVerdict(False, label, coeff, v.witness)
    ident = noether_identity(L, G_)
    v = oracle.check(ident)
    if not v.is_zero:
        return GaugeVerdict(False, "noether", ident, v.witness)
    return GaugeVerdict(True)
