import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affinelag.symexpr import ZERO, ProbeConfig, SymbolTable, ZeroOracle, as_expr, simplify
from affinelag.symlinalg import (
    InconsistentSystemError,
    RankMismatchError,
    SymMatrix,
    degeneracy_locus,
    generic_rank,
    inverse,
    nullspace_basis,
    rref,
    solve_linear,
)

from conftest import example, rank_of_rows

T = SymbolTable.build(["x", "y"])


def consts(rows):
    return SymMatrix([[as_expr(Fraction(x)) for x in r] for r in rows])


def test_example_ranks():
    assert generic_rank(example("regular_four").S.A) == 4
    assert generic_rank(example("type_ii2").S.A) == 2
    assert generic_rank(SymMatrix.zeros(3, 3)) == 0


def test_type_ii1_left_kernel():
    A = example("type_ii1").S.A
    assert nullspace_basis(A) == [[as_expr(x) for x in v] for v in ([1, 0, 1, 0], [1, 0, 0, 1])]


def test_time_dependent_left_kernel():
    assert nullspace_basis(example("type_ii2_time").S.A) == [[ZERO, ZERO, as_expr(1)]]


def test_identity_has_no_kernel():
    assert nullspace_basis(SymMatrix.identity(3)) == []


def test_time_dependent_solve():
    P = example("type_ii2_time")
    tt = P.L.table
    sol = solve_linear(P.S.A.T(), [tt.parse("-1"), tt.parse("t + 1"), ZERO], P.oracle)
    want = [tt.parse("-1"), tt.parse("-1/(t+1)"), ZERO]
    assert all(simplify(a - b) == ZERO for a, b in zip(sol.particular, want))
    assert sol.kernel == [[ZERO, ZERO, as_expr(1)]]
    assert [str(f) for f in sol.locus] == ["t + 1"]


def test_type_ii3_solve_is_inconsistent():
    P = example("type_ii3")
    with pytest.raises(InconsistentSystemError) as info:
        solve_linear(P.S.A.T(), [as_expr(-1), as_expr(1), as_expr(2)], P.oracle)
    assert info.value.residual != ZERO


def test_identity_solve():
    b = [T.parse("x*y"), T.parse("sin(x)"), T.parse("3")]
    sol = solve_linear(SymMatrix.identity(3), b)
    assert sol.particular == b and sol.kernel == []


def test_degeneracy_locus():
    assert [str(f) for f in degeneracy_locus(example("type_ii2_time").S.A)] == ["t + 1"]
    assert degeneracy_locus(SymMatrix.identity(2)) == []


def test_inverse_of_lotka_volterra_structure():
    A = example("lotka_volterra").S.A
    P = inverse(A)
    assert P.to_text() == [["0", "x*y"], ["-x*y", "0"]]
    with pytest.raises(ZeroDivisionError):
        inverse(SymMatrix.zeros(2, 2))


def test_rank_mismatch_is_reported():
    # exact elimination keeps the tiny 10^-20*x entry (rank 2) while the
    # singular value threshold discards it (rank 1)
    M = SymMatrix([[T.parse("x"), T.parse("y")], [T.parse("2*x"), T.parse("2*y + 10^-20*x")]])
    with pytest.raises(RankMismatchError) as info:
        generic_rank(M, ZeroOracle(T.sampler(), ProbeConfig(seed=1, tol=1e-30)))
    assert info.value.point


def _random_int_matrix(rng: random.Random):
    r, c = rng.randint(1, 6), rng.randint(1, 6)
    k = rng.randint(1, min(r, c))
    # low rank products exercise the kernel path as often as the full rank one
    B = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(r)]
    C = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(c)] for _ in range(k)]
    return [[sum(B[i][l] * C[l][j] for l in range(k)) for j in range(c)] for i in range(r)]


@pytest.mark.parametrize("seed", range(20))
def test_rank_matches_exact_integer_elimination(seed):
    rows = _random_int_matrix(random.Random(seed))
    M = consts(rows)
    assert generic_rank(M) == rank_of_rows(rows)
    assert generic_rank(M.T()) == generic_rank(M)


@pytest.mark.parametrize("seed", range(20))
def test_kernel_vectors_annihilate(seed):
    M = consts(_random_int_matrix(random.Random(100 + seed)))
    basis = nullspace_basis(M)
    assert len(basis) == M.shape[0] - generic_rank(M)
    for Y in basis:
        assert all(e == ZERO for e in M.T().apply(Y))
        first = next(e for e in Y if e != ZERO)
        assert first.value > 0


symbolic_entries = st.sampled_from(["0", "1", "x", "y", "x*y", "x + y", "1/x", "x^2 - y", "sin(x)", "2*x - 3"])


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.lists(symbolic_entries, min_size=3, max_size=3), min_size=1, max_size=4),
    st.fractions(min_value=-4, max_value=4, max_denominator=3).filter(bool),
)
def test_rank_transpose_and_scaling(rows, c):
    M = SymMatrix([[T.parse(e) for e in r] for r in rows])
    rk = generic_rank(M)
    assert generic_rank(M.T()) == rk
    assert generic_rank(M.scale(c)) == rk


@settings(max_examples=25, deadline=None)
@given(st.lists(st.lists(symbolic_entries, min_size=3, max_size=3), min_size=2, max_size=4), st.lists(symbolic_entries, min_size=4, max_size=4))
def test_solutions_substitute_back(rows, rhs):
    M = SymMatrix([[T.parse(e) for e in r] for r in rows])
    b = [T.parse(e) for e in rhs[: len(rows)]]
    oracle = ZeroOracle(T.sampler())
    try:
        sol = solve_linear(M, b, oracle)
    except InconsistentSystemError as exc:
        assert not oracle.is_zero(exc.residual)
        return
    assert all(oracle.is_zero(simplify(r - e)) for r, e in zip(M.apply(sol.particular), b))
    for k in sol.kernel:
        assert all(oracle.is_zero(e) for e in M.apply(k))


def test_rref_pivots_prefer_constants():
    M = SymMatrix([[T.parse("x"), T.parse("1")], [T.parse("2"), T.parse("y")]])
    ech = rref(M)
    assert ech.pivots == [0, 1]
    assert ech.locus == [T.parse("x*y - 2")]
