"""Full analysis pipeline and its JSON report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .analysis import (
    TYPE_I,
    TYPE_II1,
    ConstrainedSODE,
    EtaField,
    GaugeVerificationError,
    classify,
    gauge_symmetry,
    holonomic_sector,
    noether_identity,
    poisson_bracket,
    poisson_tensor,
    reduced_dynamics,
    symmetry_defect,
    verify_candidate_dynamics,
)
from .analysis.sector import dot
from .geometry import (
    JETS,
    AffineLagrangian,
    build_lagrangian,
    primary_constraints,
    structure_matrices,
    variational_derivatives,
)
from .problem import ProblemSpec
from .symexpr import ZERO, Expr, ProbeConfig, ZeroOracle, differentiate, parse_expr, simplify, to_text
from .symlinalg import degeneracy_locus


@dataclass
class AnalysisResult:
    report: dict
    ok: bool
    failures: list[str] = field(default_factory=list)


def _txt(v):
    if isinstance(v, Expr):
        return to_text(v)
    if isinstance(v, (list, tuple)):
        return [_txt(x) for x in v]
    if isinstance(v, dict):
        return {k: _txt(x) for k, x in v.items()}
    return v


class _Checks:
    def __init__(self, oracle: ZeroOracle):
        self.oracle = oracle
        self.items: list[dict] = []

    def zero(self, name: str, exprs) -> bool:
        ok = all(e == ZERO or self.oracle.is_zero(e) for e in exprs)
        self.items.append({"name": name, "pass": ok})
        return ok

    def flag(self, name: str, ok: bool) -> bool:
        self.items.append({"name": name, "pass": bool(ok)})
        return ok

    @property
    def failures(self) -> list[str]:
        return [c["name"] for c in self.items if not c["pass"]]


def _reparses(texts: list[str], exprs: list[Expr], L: AffineLagrangian) -> list[Expr]:
    names = L.table.names() | {"g", "g_t", "g_tt"}
    return [simplify(parse_expr(s, names) - e) for s, e in zip(texts, exprs)]


def analyze(spec: ProblemSpec, config: ProbeConfig = ProbeConfig()) -> AnalysisResult:
    L = build_lagrangian(spec)
    table = L.table
    oracle = ZeroOracle(table.sampler(), config)
    checks = _Checks(oracle)
    warnings: list[str] = []
    n = L.n

    S = structure_matrices(L)
    A = S.A
    checks.zero("A antisymmetric", [simplify(A[i, j] + A[j, i]) for i in range(n) for j in range(n)])
    q = table.coords
    cyc = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                cyc.append(
                    simplify(
                        differentiate(A[i, j], q[k]) + differentiate(A[j, k], q[i]) + differentiate(A[k, i], q[j])
                    )
                )
    checks.zero("A closed (cyclic identity)", cyc)
    prim = primary_constraints(S)
    ELs = variational_derivatives(L)
    checks.zero("Phi_i + L_i = 0", [simplify(p + e) for p, e in zip(prim, ELs)])

    sector = holonomic_sector(S, oracle)
    locus = degeneracy_locus(A, oracle)
    checks.zero("kernel vectors annihilate A", [e for Y in sector.kernel_basis for e in A.T().apply(Y)])
    checks.zero(
        "holonomic constraints equal -omega.Y",
        [simplify(raw + dot(S.omega, Y)) for raw, Y in zip(sector.raw_constraints, sector.kernel_basis)],
    )

    C = classify(S, sector, oracle)
    warnings.extend(C.warnings)
    checks.flag("TypeI iff A has full rank", (C.tag == TYPE_I) == (sector.rank == n))
    if C.tag == TYPE_I:
        checks.flag("TypeI implies even dimension", n % 2 == 0)
    if C.tag == TYPE_II1:
        Z = C.witnesses["Z"]
        checks.zero("II.1 witness annihilates A and omega", A.T().apply(Z) + [dot(S.omega, Z)])

    gauge = None
    try:
        gauge = gauge_symmetry(L, C, oracle)
    except GaugeVerificationError as exc:
        checks.flag("gauge identity", False)
        warnings.append(str(exc))
    if gauge is not None:
        defect = symmetry_defect(L, gauge)
        checks.zero("gauge identity (coefficients of g, g_t, g_tt)", [simplify(differentiate(defect, j)) for j in JETS])
        checks.zero("Noether identity", [noether_identity(L, gauge)])

    dyn = reduced_dynamics(L, C, S, oracle)
    poisson = None
    if isinstance(dyn, EtaField):
        checks.zero("A.drift = omega", [simplify(x - w) for x, w in zip(A.apply(dyn.drift), S.omega)])
        P = poisson_tensor(S, oracle)
        poisson = [
            f"{{{q[i].name},{q[j].name}}} = {to_text(poisson_bracket(S, q[i], q[j], oracle, P))}"
            for i in range(n)
            for j in range(i + 1, n)
        ]
        dynamics = {"kind": "eta", "drift": _txt(dyn.drift)}
    else:
        verdict = verify_candidate_dynamics(L, dyn, oracle)
        checks.flag("constrained SODE tangent to its manifold", verdict.ok)
        warnings.extend(dyn.warnings)
        dynamics = {
            "kind": "constrained_sode",
            "velocities": _txt(dyn.velocities),
            "accelerations": _txt(dyn.accelerations),
            "free_functions": dyn.free_function_names,
            "kernel_directions": _txt(dyn.kernel_directions),
            "manifold": _txt(dyn.manifold),
        }

    holonomic = []
    for h, triv in zip(sector.holonomic_constraints, sector.identically_satisfied):
        if not triv and h not in holonomic:
            holonomic.append(h)
    secondary = list(dyn.secondary) if isinstance(dyn, ConstrainedSODE) else []
    derived = [h for h in (dyn.holonomic if isinstance(dyn, ConstrainedSODE) else []) if h not in holonomic]
    constraints = {
        "primary": _txt(prim),
        "holonomic": _txt(holonomic),
        "secondary": _txt(derived + secondary),
    }
    # every printed constraint must read back as the expression it came from
    printed = prim + holonomic + derived + secondary
    checks.zero("printed constraints re-parse", _reparses([to_text(e) for e in printed], printed, L))

    witnesses = {k: _txt(v) for k, v in C.witnesses.items()}
    if C.also:
        witnesses["also_TypeII2"] = _txt(C.also)
    report = {
        "problem": spec.to_json(),
        "lagrangian": to_text(L.expr),
        "structure": {"A": A.to_text(), "omega": _txt(list(S.omega))},
        "rank": sector.rank,
        "degeneracy_locus": _txt(locus),
        "kernel_basis": _txt(sector.kernel_basis),
        "constraints": constraints,
        "classification": {"tag": C.tag, "witnesses": witnesses},
        "gauge": None
        if gauge is None
        else {
            "R": gauge.R,
            "X0": _txt(list(gauge.X0)),
            "X1": _txt(list(gauge.X1)),
            "F0": to_text(gauge.F0),
            "F1": to_text(gauge.F1),
            "F_g": to_text(gauge.noether()),
        },
        "dynamics": dynamics,
        "poisson": poisson,
        "checks": {
            "invariants": checks.items,
            "probabilistic_zero_count": len(oracle.probabilistic),
            "probabilistic_zeros": list(oracle.probabilistic),
            "seed": config.seed,
            "probe_points": config.points,
            "tol": config.tol,
        },
        "warnings": warnings,
    }
    return AnalysisResult(report, not checks.failures, checks.failures)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
