import time
from dataclasses import dataclass
from fractions import Fraction

import pytest

from affinelag.analysis import Classification, classify, holonomic_sector
from affinelag.geometry import AffineLagrangian, StructureData, build_lagrangian, structure_matrices
from affinelag.problem import load_problem
from affinelag.symexpr import ProbeConfig, ZeroOracle, parse_expr, simplify


@dataclass
class Pipeline:
    L: AffineLagrangian
    S: StructureData
    oracle: ZeroOracle
    C: Classification

    def parse(self, text: str, *extra: str):
        return parse_expr(text, self.L.table.names() | {"g", "g_t", "g_tt", *extra})


def run(L: AffineLagrangian, seed: int = 0) -> Pipeline:
    S = structure_matrices(L)
    oracle = ZeroOracle(L.table.sampler(), ProbeConfig(seed))
    return Pipeline(L, S, oracle, classify(S, holonomic_sector(S, oracle), oracle))


_cache: dict[str, Pipeline] = {}


def example(name: str) -> Pipeline:
    if name not in _cache:
        _cache[name] = run(build_lagrangian(load_problem(name)))
    return _cache[name]


@pytest.fixture
def ex():
    return example


def same_ray(u, v, oracle) -> bool:
    """True when ``u = c v`` for a nonzero scalar function c."""
    k = next(i for i, x in enumerate(v) if not oracle.is_zero(x))
    ratio = simplify(u[k] / v[k])
    if oracle.is_zero(ratio):
        return False
    return all(oracle.is_zero(simplify(a - ratio * b)) for a, b in zip(u, v))


def rank_of_rows(rows) -> int:
    """Exact rank over the rationals (integer-fraction elimination)."""
    M = [[Fraction(x) for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(M[0]) if M else 0
    while rank < len(M) and col < ncols:
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


# --- acceptance summary ---------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
SUITE_BUDGET = 60.0


def pytest_sessionstart(session):
    session.config._affinelag_start = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - session.config._affinelag_start
    session.config._affinelag_elapsed = elapsed
    if elapsed > SUITE_BUDGET and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    elapsed = getattr(config, "_affinelag_elapsed", time.perf_counter() - config._affinelag_start)
    verdict = "PASS" if elapsed <= SUITE_BUDGET else "FAIL"
    terminalreporter.write_line(f"criterion 9 (suite runtime): {verdict}  {elapsed:.1f} s of {SUITE_BUDGET:.0f} s")
