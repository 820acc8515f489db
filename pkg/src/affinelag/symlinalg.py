"""Linear algebra over the field of symbolic functions.

Elimination is Gauss-Jordan with every intermediate entry brought to the
rational normal form, so entries stay cancelled and never swell.  Zero
decisions for pivots go through a :class:`ZeroOracle`, which makes the
result a *generic* rank: the pivots' numerator factors are reported as the
degeneracy locus where the pointwise rank may drop.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .symexpr import (
    ONE,
    ZERO,
    Const,
    Expr,
    ZeroOracle,
    as_expr,
    clear_denominators,
    eval_at,
    free_symbols,
    numerator_factors,
    simplify,
    to_text,
)


class RankMismatchError(RuntimeError):
    def __init__(self, symbolic: int, numeric: int, point: dict):
        self.symbolic = symbolic
        self.numeric = numeric
        self.point = point
        super().__init__(
            f"symbolic rank {symbolic} disagrees with numeric rank {numeric} at {point}"
        )


class InconsistentSystemError(ValueError):
    def __init__(self, row: int, residual: Expr):
        self.row = row
        self.residual = residual
        super().__init__(f"inconsistent linear system: row {row} reduces to 0 = {to_text(residual)}")


class SymMatrix:
    """Dense matrix of expressions; immutable once built."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows: Sequence[Sequence], ncols: int | None = None):
        self.rows = tuple(tuple(as_expr(e) for e in r) for r in rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        if any(len(r) != ncols for r in self.rows):
            raise ValueError("ragged matrix")
        self.ncols = ncols

    @classmethod
    def zeros(cls, n: int, m: int) -> "SymMatrix":
        return cls([[ZERO] * m for _ in range(n)], m)

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)], n)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, SymMatrix) and self.rows == other.rows and self.ncols == other.ncols

    def __hash__(self):
        return hash((self.rows, self.ncols))

    def T(self) -> "SymMatrix":
        n, m = self.shape
        return SymMatrix([[self.rows[i][j] for i in range(n)] for j in range(m)], n)

    def scale(self, c) -> "SymMatrix":
        c = as_expr(c)
        return SymMatrix([[simplify(c * e) for e in r] for r in self.rows], self.ncols)

    def hstack(self, column: Sequence) -> "SymMatrix":
        return SymMatrix([r + (as_expr(c),) for r, c in zip(self.rows, column)], self.ncols + 1)

    def apply(self, vec: Sequence) -> list[Expr]:
        """Matrix-vector product ``M @ vec``, simplified."""
        return [simplify(sum((a * as_expr(x) for a, x in zip(r, vec)), ZERO)) for r in self.rows]

    def to_text(self) -> list[list[str]]:
        return [[to_text(e) for e in r] for r in self.rows]

    def __repr__(self):
        return f"SymMatrix({self.to_text()})"


@dataclass
class Echelon:
    """Reduced row echelon form with bookkeeping."""

    rows: list[list[Expr]]
    pivots: list[int]  # pivot column of each leading row
    locus: list[Expr] = field(default_factory=list)


def _default_oracle(oracle: ZeroOracle | None) -> ZeroOracle:
    return oracle if oracle is not None else ZeroOracle()


def rref(
    M: SymMatrix,
    oracle: ZeroOracle | None = None,
    reduce: Callable[[Expr], Expr] | None = None,
    pivot_cols: int | None = None,
) -> Echelon:
    """Gauss-Jordan elimination.

    Only the first ``pivot_cols`` columns are eligible as pivots, which lets
    callers eliminate an augmented matrix.  ``reduce`` is applied to each
    entry before it is tested, e.g. to work modulo known relations.
    """
    oracle = _default_oracle(oracle)
    fix = (lambda e: simplify(reduce(e))) if reduce else simplify
    rows = [[fix(e) for e in r] for r in M.rows]
    n, m = M.shape
    limit = m if pivot_cols is None else pivot_cols
    pivots: list[int] = []
    locus: list[Expr] = []
    r = 0
    for c in range(limit):
        if r >= n:
            break
        # structurally nonzero constants first, then the first decided-nonzero entry
        choice = next(
            (i for i in range(r, n) if isinstance(rows[i][c], Const) and rows[i][c].value != 0), None
        )
        if choice is None:
            choice = next(
                (i for i in range(r, n) if rows[i][c] != ZERO and not oracle.decide(rows[i][c])), None
            )
        if choice is None:
            continue
        rows[r], rows[choice] = rows[choice], rows[r]
        p = rows[r][c]
        for f in numerator_factors(p):
            if f not in locus:
                locus.append(f)
        inv = 1 / p
        rows[r] = [ZERO if j < c else fix(inv * e) for j, e in enumerate(rows[r])]
        rows[r][c] = ONE
        for i in range(n):
            if i == r:
                continue
            k = rows[i][c]
            if k == ZERO:
                continue
            rows[i] = [fix(a - k * b) for a, b in zip(rows[i], rows[r])]
            rows[i][c] = ZERO
        pivots.append(c)
        r += 1
    return Echelon(rows, pivots, locus)


def _numeric_rank(M: SymMatrix, point: dict) -> int:
    vals = np.array([[eval_at(e, point, min_denominator=1e-8) for e in r] for r in M.rows], dtype=float)
    if vals.size == 0:
        return 0
    s = np.linalg.svd(vals, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > 1e-8 * s[0]))


def generic_rank(M: SymMatrix, oracle: ZeroOracle | None = None) -> int:
    """Rank over the function field, cross-checked at random numeric points."""
    oracle = _default_oracle(oracle)
    rank = len(rref(M, oracle).pivots)
    syms = set()
    for r in M.rows:
        for e in r:
            syms |= free_symbols(e)
    if syms:
        rng = random.Random(f"{oracle.config.seed}:rank:{M.to_text()}")
        samples = oracle.sampler.points(syms, rng, oracle.config.points, lambda pt: _numeric_rank(M, pt))
    else:
        samples = [({}, _numeric_rank(M, {}))]
    best, witness = -1, {}
    for pt, nr in samples:
        if nr > best:
            best, witness = nr, pt
    if best != rank:
        raise RankMismatchError(rank, best, witness)
    return rank


def degeneracy_locus(M: SymMatrix, oracle: ZeroOracle | None = None) -> list[Expr]:
    return rref(M, oracle).locus


def nullspace_basis(M: SymMatrix, oracle: ZeroOracle | None = None) -> list[list[Expr]]:
    """Basis of the left kernel ``{Y : Y^i M_ij = 0}``.

    Free variables are taken in increasing index order and each vector is
    scaled to coprime polynomial entries with a positive first entry.
    """
    return _kernel(M.T(), oracle)


def right_kernel(M: SymMatrix, oracle: ZeroOracle | None = None) -> list[list[Expr]]:
    """Basis of ``{x : M x = 0}`` with the same canonical scaling."""
    return _kernel(M, oracle)


def _kernel(M: SymMatrix, oracle) -> list[list[Expr]]:
    ech = rref(M, oracle)
    m = M.ncols
    free = [j for j in range(m) if j not in ech.pivots]
    basis = []
    for f in free:
        vec = [ZERO] * m
        vec[f] = ONE
        for row, pc in zip(ech.rows, ech.pivots):
            vec[pc] = simplify(-row[f])
        basis.append(clear_denominators(vec))
    return basis


@dataclass
class LinearSolution:
    particular: list[Expr]
    kernel: list[list[Expr]]
    locus: list[Expr] = field(default_factory=list)


def solve_linear(
    M: SymMatrix,
    b: Sequence,
    oracle: ZeroOracle | None = None,
    reduce: Callable[[Expr], Expr] | None = None,
) -> LinearSolution:
    """Solve ``M x = b``; free components of the particular solution are zero.

    Raises :class:`InconsistentSystemError` with the first nonzero residual
    when a row reduces to ``0 = r``.
    """
    oracle = _default_oracle(oracle)
    n, m = M.shape
    if len(b) != n:
        raise ValueError("right-hand side length does not match the matrix")
    ech = rref(M.hstack(b), oracle, reduce=reduce, pivot_cols=m)
    for i in range(len(ech.pivots), n):
        res = ech.rows[i][m]
        if res != ZERO and not oracle.decide(res):
            raise InconsistentSystemError(i, res)
    x = [ZERO] * m
    for row, pc in zip(ech.rows, ech.pivots):
        x[pc] = row[m]
    free = [j for j in range(m) if j not in ech.pivots]
    kernel = []
    for f in free:
        vec = [ZERO] * m
        vec[f] = ONE
        for row, pc in zip(ech.rows, ech.pivots):
            vec[pc] = simplify(-row[f])
        kernel.append(clear_denominators(vec))
    return LinearSolution(x, kernel, ech.locus)


def inverse(M: SymMatrix, oracle: ZeroOracle | None = None) -> SymMatrix:
    n, m = M.shape
    if n != m:
        raise ValueError("only square matrices have inverses")
    aug = SymMatrix([r + I for r, I in zip(M.rows, SymMatrix.identity(n).rows)], 2 * n)
    ech = rref(aug, oracle, pivot_cols=n)
    if len(ech.pivots) != n:
        raise ZeroDivisionError("matrix is singular")
    return SymMatrix([r[n:] for r in ech.rows], n)


__all__ = [
    "Echelon",
    "InconsistentSystemError",
    "LinearSolution",
    "RankMismatchError",
    "SymMatrix",
    "degeneracy_locus",
    "generic_rank",
    "inverse",
    "nullspace_basis",
    "right_kernel",
    "rref",
    "solve_linear",
]
