import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from affinelag.analysis import (
    TYPE_I,
    TYPE_II1,
    TYPE_II2,
    TYPE_II3,
    ConstrainedSODE,
    EtaField,
    GaugeSymmetry,
    SingularMatrixError,
    constrained_sode,
    eta_field,
    gauge_symmetry,
    holonomic_sector,
    poisson_bracket,
    poisson_tensor,
    reduced_dynamics,
    symmetry_defect,
    verify_candidate_dynamics,
    verify_gauge,
)
from affinelag.analysis.sector import dot
from affinelag.geometry import JETS, from_hamiltonian, make_lagrangian, structure_matrices
from affinelag.symexpr import ZERO, SymbolTable, add, differentiate, mul, power, simplify

from conftest import example, run, same_ray


def vec(P, *texts):
    return [P.parse(s, "C", "C1", "C2") for s in texts]


def zero(P, e):
    return e == ZERO or P.oracle.is_zero(simplify(e))


# --- lotka_volterra -------------------------------------------------------


def test_lotka_volterra_is_type_i():
    P = example("lotka_volterra")
    assert P.C.tag == TYPE_I
    sector = holonomic_sector(P.S, P.oracle)
    assert sector.kernel_basis == [] and sector.holonomic_constraints == []


def test_lotka_volterra_drift():
    P = example("lotka_volterra")
    drift = eta_field(P.S, P.oracle).drift
    want = vec(P, "x*(a - y)", "-y*(b - x)")
    assert all(simplify(d - w) == ZERO for d, w in zip(drift, want))


def test_lotka_volterra_brackets():
    P = example("lotka_volterra")
    x, y = P.L.table.coords
    assert poisson_bracket(P.S, x, y, P.oracle) == P.parse("x*y")
    H = P.L.V
    assert simplify(poisson_bracket(P.S, x, H, P.oracle) - P.parse("x*(a - y)")) == ZERO
    assert poisson_bracket(P.S, H, H, P.oracle) == ZERO


def test_bracket_needs_type_i():
    with pytest.raises(SingularMatrixError):
        poisson_tensor(example("type_ii2").S)


# --- regular_four ---------------------------------------------------------


def test_regular_four():
    P = example("regular_four")
    assert P.C.tag == TYPE_I
    assert eta_field(P.S, P.oracle).drift == vec(P, "q3", "-q4", "q4", "-q2")


# --- type_ii1 -------------------------------------------------------------


def test_type_ii1_classification():
    P = example("type_ii1")
    assert P.C.tag == TYPE_II1
    assert same_ray(P.C.witnesses["Z"], vec(P, "2", "0", "1", "1"), P.oracle)
    assert P.C.also is not None
    assert any("coexist" in w for w in P.C.warnings)


def test_type_ii1_kernel_and_holonomic():
    P = example("type_ii1")
    sector = holonomic_sector(P.S, P.oracle)
    assert sector.kernel_basis == [vec(P, "1", "0", "1", "0"), vec(P, "1", "0", "0", "1")]
    assert sector.holonomic_constraints == vec(P, "q2", "q2")


def test_type_ii1_gauge():
    P = example("type_ii1")
    G = gauge_symmetry(P.L, P.C, P.oracle)
    assert G.R == 0 and G.X1 == (ZERO,) * 4
    assert same_ray(list(G.X0), vec(P, "2", "0", "1", "1"), P.oracle)
    scale = simplify(G.X0[0] / 2)
    assert zero(P, G.noether() - scale * P.parse("2*g*q2"))
    assert verify_gauge(P.L, G, P.oracle)


def test_type_ii1_dynamics():
    P = example("type_ii1")
    d = reduced_dynamics(P.L, P.C, P.S, P.oracle)
    assert isinstance(d, ConstrainedSODE)
    assert d.free_function_names == ["C1", "C2"]
    assert d.velocities == vec(P, "q3 - q4 + v_q3 + v_q4", "0", "v_q3", "v_q4")
    assert d.accelerations == vec(P, "C1 + C2 + v_q3 - v_q4", "0", "C1", "C2")
    assert verify_candidate_dynamics(P.L, d, P.oracle)


def test_type_ii1_printed_dynamics_verifies():
    P = example("type_ii1")
    m = constrained_sode(P.L, P.S, P.oracle).manifold
    parse = lambda s: P.parse(s, "C3", "C4")
    cand = ConstrainedSODE(
        [parse(s) for s in ("v_q3 + v_q4 - q4 + q3", "0", "v_q3", "v_q4")],
        [parse(s) for s in ("C3 + C4 - v_q4 + v_q3", "0", "C3", "C4")],
        [],
        ["C3", "C4"],
        m,
    )
    assert verify_candidate_dynamics(P.L, cand, P.oracle)


# --- type_ii2 -------------------------------------------------------------


def test_type_ii2_classification():
    P = example("type_ii2")
    assert P.C.tag == TYPE_II2
    sector = holonomic_sector(P.S, P.oracle)
    assert sector.kernel_basis == [vec(P, "1", "1", "1")]
    assert sector.holonomic_constraints == vec(P, "q1 - q2")
    assert same_ray(P.C.witnesses["Y"], vec(P, "1", "1", "1"), P.oracle)


def test_type_ii2_gauge():
    P = example("type_ii2")
    G = gauge_symmetry(P.L, P.C, P.oracle)
    assert G.R == 1
    assert same_ray(list(G.X0), vec(P, "1", "1", "0"), P.oracle)
    assert same_ray(list(G.X1), vec(P, "1", "1", "1"), P.oracle)
    assert same_ray([G.F0, G.F1], vec(P, "q1 - q3", "-q3"), P.oracle)
    assert verify_gauge(P.L, G, P.oracle)


def test_type_ii2_dynamics():
    P = example("type_ii2")
    d = reduced_dynamics(P.L, P.C, P.S, P.oracle)
    assert d.free_function_names == ["C1"]
    assert d.velocities == vec(P, "v_q3 + q3", "v_q3 + q3", "v_q3")
    assert d.accelerations == vec(P, "C1 + v_q3", "C1 + v_q3", "C1")
    assert P.parse("q1 - q2") in d.manifold
    assert verify_candidate_dynamics(P.L, d, P.oracle)


# --- type_ii2_time --------------------------------------------------------


def test_time_dependent_type_ii2():
    P = example("type_ii2_time")
    assert P.C.tag == TYPE_II2
    G = gauge_symmetry(P.L, P.C, P.oracle)
    assert all(zero(P, a - b) for a, b in zip(G.X0, vec(P, "-1", "-1/(t+1)", "0")))
    assert list(G.X1) == vec(P, "0", "0", "1")
    assert zero(P, G.noether() - P.parse("g*(q2 - t*q1/(t+1))"))
    assert verify_gauge(P.L, G, P.oracle)


def test_time_dependent_printed_dynamics_verifies():
    P = example("type_ii2_time")
    m = constrained_sode(P.L, P.S, P.oracle).manifold
    parse = lambda s: P.parse(s, "C")
    cand = ConstrainedSODE(
        [parse(s) for s in ("-q3", "-(q2 + q3)/(t+1)", "v_q3")],
        [parse(s) for s in ("-v_q3", "-(2*v_q2 + v_q3)/(t+1)", "C")],
        [],
        ["C"],
        m,
    )
    assert verify_candidate_dynamics(P.L, cand, P.oracle)


# --- type_ii3 -------------------------------------------------------------


def test_type_ii3():
    P = example("type_ii3")
    assert P.C.tag == TYPE_II3
    assert P.C.witnesses["residual"] is not None
    assert gauge_symmetry(P.L, P.C, P.oracle) is None
    sector = holonomic_sector(P.S, P.oracle)
    assert same_ray(sector.kernel_basis[0], vec(P, "1", "-1", "-1"), P.oracle)
    assert sector.holonomic_constraints == vec(P, "q1 - q2 - 2*q3")


def _type_ii3_candidate(P, qdot1="q3"):
    m = constrained_sode(P.L, P.S, P.oracle).manifold
    return ConstrainedSODE(vec(P, qdot1, "q3", "0"), vec(P, "v_q3", "v_q3", "0"), [], [], m)


def test_type_ii3_printed_dynamics_verifies():
    P = example("type_ii3")
    d = constrained_sode(P.L, P.S, P.oracle)
    assert d.secondary == vec(P, "v_q3")
    assert d.velocities == vec(P, "q3", "q3", "0")
    assert verify_candidate_dynamics(P.L, _type_ii3_candidate(P), P.oracle)


# --- mutations ------------------------------------------------------------


def test_perturbed_noether_function_fails():
    P = example("type_ii1")
    G = gauge_symmetry(P.L, P.C, P.oracle)
    bad = GaugeSymmetry(G.R, G.X0, G.X1, G.F0 + P.parse("q1"), G.F1)
    verdict = verify_gauge(P.L, bad, P.oracle)
    assert not verdict and verdict.failing == "g"
    assert verdict.residual == P.parse("-v_q1")


def test_perturbed_dynamics_fails():
    P = example("type_ii3")
    verdict = verify_candidate_dynamics(P.L, _type_ii3_candidate(P, "q2"), P.oracle)
    assert not verdict


@pytest.mark.parametrize("name", ["type_ii1", "type_ii2", "type_ii2_time"])
@pytest.mark.parametrize("slot", ["acceleration", "velocity"])
def test_any_component_mutation_fails(name, slot):
    P = example(name)
    d = constrained_sode(P.L, P.S, P.oracle)
    for i in range(P.L.n):
        qd, acc = list(d.velocities), list(d.accelerations)
        if slot == "acceleration":
            acc[i] = acc[i] + P.parse("q1 + 1")
        else:
            qd[i] = qd[i] + P.parse("q1 + 1")
        cand = ConstrainedSODE(qd, acc, d.kernel_directions, d.free_function_names, d.manifold)
        if slot == "acceleration" and all(differentiate(f, P.L.table.velocities[i]) == ZERO for f in d.manifold):
            continue  # unconstrained direction, any value is allowed
        assert not verify_candidate_dynamics(P.L, cand, P.oracle)


# --- properties -----------------------------------------------------------

CORPUS = ["lotka_volterra", "regular_four", "type_ii1", "type_ii2", "type_ii2_time", "type_ii3", "harmonic_oscillator"]
scales = st.fractions(min_value=-6, max_value=6, max_denominator=5).filter(bool)


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.sampled_from(CORPUS), scales)
def test_classification_is_scale_invariant(name, c):
    P = example(name)
    Q = run(P.L.scaled(c))
    assert Q.C.tag == P.C.tag
    if P.C.tag == TYPE_I:
        a, b = eta_field(P.S, P.oracle).drift, eta_field(Q.S, Q.oracle).drift
        assert all(simplify(u - v) == ZERO for u, v in zip(a, b))


def _exact_shift(L, F):
    T = L.table
    m = [mi + differentiate(F, q) for mi, q in zip(L.m, T.coords)]
    return make_lagrangian(T, m, L.V - differentiate(F, T.time))


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.sampled_from(["type_ii1", "type_ii2", "type_ii2_time"]),
    scales,
    st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)), max_size=3),
)
def test_every_extracted_gauge_symmetry_verifies(name, c, mons):
    L = example(name).L
    t, q1, q2 = L.table.time, L.table.coords[0], L.table.coords[1]
    F = add(*(mul(k, power(t, i), power(q1, j), power(q2, l)) for k, i, j, l in mons))
    P = run(_exact_shift(L.scaled(c), F))
    assert P.C.tag == example(name).C.tag
    G = gauge_symmetry(P.L, P.C, P.oracle)
    defect = symmetry_defect(P.L, G)
    for jet in JETS:
        assert zero(P, differentiate(defect, jet))
    assert verify_gauge(P.L, G, P.oracle)


@pytest.mark.parametrize("name", CORPUS)
def test_classification_witness_invariants(name):
    P = example(name)
    n = P.L.n
    if P.C.tag == TYPE_I:
        assert n % 2 == 0
        d = eta_field(P.S, P.oracle).drift
        assert all(zero(P, x - w) for x, w in zip(P.S.A.apply(d), P.S.omega))
    if P.C.tag == TYPE_II1:
        Z = P.C.witnesses["Z"]
        assert all(zero(P, e) for e in P.S.A.T().apply(Z)) and zero(P, dot(P.S.omega, Z))
    if P.C.tag == TYPE_II2:
        Y, Ybar, phi = P.C.witnesses["Y"], P.C.witnesses["Ybar"], P.C.witnesses["phi"]
        grad = [differentiate(phi, q) for q in P.L.table.coords]
        assert all(zero(P, a - g) for a, g in zip(P.S.A.T().apply(Ybar), grad))
        assert zero(P, dot(Ybar, P.S.omega) + differentiate(phi, P.L.table.time))
        assert zero(P, phi + dot(P.S.omega, Y))


def _random_closed_form(seed):
    rng = random.Random(seed)
    T = SymbolTable.build(["q1", "q2", "q3", "q4"])
    q = T.coords
    m = []
    for i in range(4):
        parts = [mul(rng.randint(-2, 2), q[j]) for j in range(4)]
        if i % 2 == 0:
            parts.append(mul(rng.choice([-1, 1]), q[rng.randrange(4)], q[rng.randrange(4)]))
        m.append(add(*parts))
    V = add(*(mul(rng.randint(-2, 2), q[i], q[j]) for i in range(4) for j in range(i, 4)))
    return make_lagrangian(T, m, V)


def _type_i_instances():
    out = [example("lotka_volterra"), example("regular_four"), example("harmonic_oscillator")]
    T = SymbolTable.build(["q1", "q2", "p1", "p2"])
    for H in ("p1^2/2 + q1^4 - q2*p2", "sin(q1)*p2 + t*p1", "exp(q2)*p1*p2"):
        out.append(run(from_hamiltonian(T.parse(H), 2, T)))
    seed = 0
    while len(out) < 22:
        P = run(_random_closed_form(seed))
        seed += 1
        if P.C.tag == TYPE_I:
            out.append(P)
    return out


TYPE_I_CASES = _type_i_instances()


@pytest.mark.parametrize("k", range(len(TYPE_I_CASES)))
def test_poisson_properties(k):
    P = TYPE_I_CASES[k]
    S, n = P.S, P.L.n
    q = P.L.table.coords
    Pm = poisson_tensor(S, P.oracle)
    rng = random.Random(k)
    f, g, h = (add(*(mul(rng.randint(-2, 2), q[rng.randrange(n)], q[rng.randrange(n)]) for _ in range(2)), q[i % n]) for i in range(3))
    br = lambda u, w: poisson_bracket(S, u, w, P.oracle, Pm)
    assert zero(P, br(f, g) + br(g, f))
    assert zero(P, br(f, g * h) - g * br(f, h) - h * br(f, g))
    # the cyclic sum is totally antisymmetric, so distinct sorted triples suffice
    for i in range(n):
        for j in range(i + 1, n):
            for kk in range(j + 1, n):
                jac = add(
                    *(
                        mul(Pm[i, l], differentiate(Pm[j, kk], q[l]))
                        + mul(Pm[j, l], differentiate(Pm[kk, i], q[l]))
                        + mul(Pm[kk, l], differentiate(Pm[i, j], q[l]))
                        for l in range(n)
                    )
                )
                assert zero(P, jac)


@pytest.mark.parametrize("k", range(len(TYPE_I_CASES)))
def test_drift_is_bracket_with_omega(k):
    P = TYPE_I_CASES[k]
    q = P.L.table.coords
    d = eta_field(P.S, P.oracle).drift
    Pm = poisson_tensor(P.S, P.oracle)
    for j in range(P.L.n):
        via = add(*(mul(Pm[j, l], P.S.omega[l]) for l in range(P.L.n)))
        assert zero(P, via - d[j])
        assert zero(P, poisson_bracket(P.S, q[j], q[(j + 1) % P.L.n], P.oracle, Pm) - Pm[j, (j + 1) % P.L.n])


def test_classify_is_total_on_degenerate_inputs():
    T = SymbolTable.build(["q1", "q2", "q3"])
    P = run(make_lagrangian(T, [0, 0, 0], 0))
    assert P.C.tag == TYPE_II1
    sector = holonomic_sector(P.S, P.oracle)
    assert len(sector.kernel_basis) == 3 and all(sector.identically_satisfied)
    assert isinstance(reduced_dynamics(P.L, P.C, P.S, P.oracle), ConstrainedSODE)
    P = run(make_lagrangian(T, [T.parse("q2"), 0, 0], T.parse("q3")))
    assert P.C.tag in (TYPE_II1, TYPE_II2, TYPE_II3)


def test_eta_type():
    P = example("harmonic_oscillator")
    d = reduced_dynamics(P.L, P.C, P.S, P.oracle)
    assert isinstance(d, EtaField) and d.drift == vec(P, "p", "-q")
    assert structure_matrices(P.L).A.to_text() == [["0", "-1"], ["1", "0"]]
