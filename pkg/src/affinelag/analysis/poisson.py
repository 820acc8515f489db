"""Poisson bracket of the regular case."""

from __future__ import annotations

from ..geometry import StructureData
from ..symexpr import Expr, ZeroOracle, add, differentiate, mul, simplify
from ..symlinalg import SymMatrix, inverse
from .sector import structure_oracle


class SingularMatrixError(ValueError):
    """The bracket needs an invertible A (Type I)."""


def poisson_tensor(S: StructureData, oracle: ZeroOracle | None = None) -> SymMatrix:
    try:
        return inverse(S.A, structure_oracle(S, oracle))
    except ZeroDivisionError:
        raise SingularMatrixError("A is singular; the Poisson bracket needs a Type I problem") from None


def poisson_bracket(
    S: StructureData, f: Expr, g: Expr, oracle: ZeroOracle | None = None, P: SymMatrix | None = None
) -> Expr:
    """``{f, g} = P^jk df/dq^j dg/dq^k`` with ``P`` the inverse of A."""
    P = P if P is not None else poisson_tensor(S, oracle)
    q = S.table.coords
    df = [differentiate(f, x) for x in q]
    dg = [differentiate(g, x) for x in q]
    n = len(q)
    return simplify(add(*(mul(P[j, k], df[j], dg[k]) for j in range(n) for k in range(n))))
