"""Numeric evaluation, compilation to Python callables, and zero testing."""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .expr import ZERO, Add, Const, Expr, Func, Mul, Pow, Sym, free_symbols, terms
from .printing import to_text
from .ratform import is_rational_zero


class DomainError(ArithmeticError):
    """Evaluation left the domain of an elementary function."""


class UnboundSymbolError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound symbol {self.name!r}"


class DomainExhaustedError(RuntimeError):
    """The sampler could not find valid probe points."""


class PivotUndecidableError(RuntimeError):
    """Two probe seeds disagreed about whether an expression vanishes."""


def _bind(bindings: Mapping) -> dict[str, float]:
    return {(k.name if isinstance(k, Sym) else str(k)): v for k, v in bindings.items()}


def eval_at(e: Expr, bindings: Mapping, min_denominator: float = 1e-300) -> float:
    """Evaluate ``e`` in double precision.

    Raises :class:`DomainError` for ln of a nonpositive value, fractional
    powers of negative values, or division by a magnitude below
    ``min_denominator``.  Never returns NaN or infinity.
    """
    env = _bind(bindings)
    memo: dict[int, float] = {}

    def ev(x: Expr) -> float:
        if isinstance(x, Const):
            return float(x.value)
        if isinstance(x, Sym):
            try:
                return float(env[x.name])
            except KeyError:
                raise UnboundSymbolError(x.name) from None
        k = id(x)
        if k in memo:
            return memo[k]
        try:
            if isinstance(x, Add):
                r = math.fsum(ev(t) for t in x.args)
            elif isinstance(x, Mul):
                r = 1.0
                for f in x.args:
                    r *= ev(f)
            elif isinstance(x, Pow):
                b = ev(x.base)
                if x.exp < 0 and abs(b) < min_denominator:
                    raise DomainError(f"division by ~0 in {to_text(x)}")
                if x.exp.denominator != 1:
                    if b < 0:
                        raise DomainError(f"fractional power of negative value in {to_text(x)}")
                    r = b ** float(x.exp)
                else:
                    r = b ** x.exp.numerator
            elif isinstance(x, Func):
                a = ev(x.arg)
                if x.tag == "ln":
                    if a <= 0:
                        raise DomainError(f"ln of nonpositive value in {to_text(x)}")
                    r = math.log(a)
                elif x.tag == "exp":
                    r = math.exp(a)
                elif x.tag == "sin":
                    r = math.sin(a)
                elif x.tag == "cos":
                    r = math.cos(a)
                else:
                    raise ValueError(f"unsupported function {x.tag!r}")
            else:
                raise TypeError(f"not an expression: {x!r}")
        except (OverflowError, ZeroDivisionError) as exc:
            raise DomainError(f"{exc} in {to_text(x)}") from None
        if not math.isfinite(r):
            raise DomainError(f"nonfinite value in {to_text(x)}")
        memo[k] = r
        return r

    return ev(e)


# -- compilation ---------------------------------------------------------------


def _fpow(b: float, e: float) -> float:
    if b < 0:
        raise DomainError("fractional power of negative value")
    return b**e


def _log(a: float) -> float:
    if a <= 0:
        raise DomainError("ln of nonpositive value")
    return math.log(a)


def compile_exprs(exprs: Sequence[Expr], args: Sequence[Sym]) -> Callable[..., tuple]:
    """Compile expressions into ``f(*args) -> tuple`` with shared subexpressions."""
    names = {s: f"a{i}" for i, s in enumerate(args)}
    lines: list[str] = []
    seen: dict[Expr, str] = {}

    def emit(x: Expr) -> str:
        if isinstance(x, Const):
            return repr(float(x.value))
        if isinstance(x, Sym):
            if x not in names:
                raise UnboundSymbolError(x.name)
            return names[x]
        if x in seen:
            return seen[x]
        if isinstance(x, Add):
            code = " + ".join(emit(t) for t in x.args)
        elif isinstance(x, Mul):
            code = " * ".join(emit(f) for f in x.args)
        elif isinstance(x, Pow):
            b = emit(x.base)
            if x.exp.denominator == 1:
                code = f"{b} ** {x.exp.numerator}"
            else:
                code = f"_fpow({b}, {float(x.exp)!r})"
        elif isinstance(x, Func):
            a = emit(x.arg)
            code = {"ln": "_log", "exp": "_exp", "sin": "_sin", "cos": "_cos"}[x.tag] + f"({a})"
        else:
            raise TypeError(f"not an expression: {x!r}")
        var = f"t{len(seen)}"
        lines.append(f"    {var} = {code}")
        seen[x] = var
        return var

    outs = [emit(e) for e in exprs]
    src = (
        f"def _compiled({', '.join(names[s] for s in args)}):\n"
        + "\n".join(lines)
        + ("\n" if lines else "")
        + f"    return ({', '.join(outs)}{',' if len(outs) == 1 else ''})\n"
    )
    ns = {"_fpow": _fpow, "_log": _log, "_exp": math.exp, "_sin": math.sin, "_cos": math.cos}
    exec(compile(src, "<affinelag-compiled>", "exec"), ns)
    raw = ns["_compiled"]

    def call(*a):
        try:
            out = raw(*map(float, a))
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise DomainError(str(exc)) from None
        if not all(map(math.isfinite, out)):
            raise DomainError("nonfinite value")
        return out

    call.source = src
    return call


# -- sampling and zero testing --------------------------------------------------


@dataclass(frozen=True)
class ProbeConfig:
    seed: int = 0
    points: int = 16
    tol: float = 1e-9


@dataclass(frozen=True)
class Verdict:
    kind: str  # "zero-structural" | "zero-probabilistic" | "nonzero"
    witness: dict | None = None
    value: float | None = None

    @property
    def is_zero(self) -> bool:
        return self.kind != "nonzero"

    def __bool__(self):
        return self.is_zero


STRUCTURAL = Verdict("zero-structural")


class Sampler:
    """Draws probe points honouring symbol assumptions and domain inequalities."""

    def __init__(self, assumptions: Mapping | None = None, inequalities: Sequence = ()):
        self.assumptions = {(k.name if isinstance(k, Sym) else k): v for k, v in (assumptions or {}).items()}
        self.inequalities = list(inequalities)  # (lhs Expr, op, rhs Expr)
        extra: set[Sym] = set()
        for lhs, _, rhs in self.inequalities:
            extra |= free_symbols(lhs) | free_symbols(rhs)
        self._extra = sorted(extra, key=lambda s: s.key)

    def _draw(self, name: str, rng: random.Random) -> float:
        kind = self.assumptions.get(name)
        if kind == "positive":
            return math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        while True:
            x = rng.uniform(-3.0, 3.0)
            if kind != "nonzero" or abs(x) > 1e-3:
                return x

    def _admissible(self, point: dict) -> bool:
        for lhs, op, rhs in self.inequalities:
            try:
                a = eval_at(lhs, point)
                b = eval_at(rhs, point)
            except (DomainError, UnboundSymbolError):
                return False
            ok = {">": a > b, ">=": a >= b, "<": a < b, "<=": a <= b, "!=": a != b}[op]
            if not ok:
                return False
        return True

    def points(self, syms, rng: random.Random, count: int, check: Callable[[dict], object] | None = None):
        """Yield ``count`` admissible points; ``check`` may raise DomainError to reject."""
        names = sorted({s.name for s in syms} | {s.name for s in self._extra})
        failures = 0
        produced = 0
        while produced < count:
            point = {n: self._draw(n, rng) for n in names}
            result = None
            if self._admissible(point):
                try:
                    result = check(point) if check else None
                except DomainError:
                    result = _REJECT
            else:
                result = _REJECT
            if result is _REJECT:
                failures += 1
                if failures >= 100 * max(count, 1):
                    raise DomainExhaustedError(
                        f"could not find {count} valid sample points after {failures} attempts"
                    )
                continue
            produced += 1
            yield point, result


_REJECT = object()


class ZeroOracle:
    """Decides whether expressions vanish identically, logging probabilistic calls.

    The structural route is exact (normal form, then rational normal form);
    the probabilistic route evaluates at seeded random points.  Seeds are
    derived from the printed expression, so verdicts do not depend on call
    order.
    """

    def __init__(self, sampler: Sampler | None = None, config: ProbeConfig = ProbeConfig()):
        self.sampler = sampler or Sampler()
        self.config = config
        self._lock = threading.Lock()
        self.probabilistic: list[str] = []

    def _rng(self, text: str, salt: int = 0) -> random.Random:
        return random.Random(f"{self.config.seed + salt}:{text}")

    def check(self, e: Expr, salt: int = 0, record: bool = True) -> Verdict:
        if e == ZERO or is_rational_zero(e):
            return STRUCTURAL
        text = to_text(e)
        syms = free_symbols(e)
        parts = terms(e)
        tol = self.config.tol

        def probe(point):
            v = eval_at(e, point, min_denominator=1e-8)
            scale = max([1.0] + [abs(eval_at(t, point, min_denominator=1e-8)) for t in parts])
            return v, scale

        for point, (value, scale) in self.sampler.points(syms, self._rng(text, salt), self.config.points, probe):
            if abs(value) > tol * scale:
                return Verdict("nonzero", witness=dict(point), value=value)
        if record:
            with self._lock:
                self.probabilistic.append(text)
        return Verdict("zero-probabilistic")

    def is_zero(self, e: Expr) -> bool:
        return self.check(e).is_zero

    def decide(self, e: Expr) -> bool:
        """Zero decision for elimination pivots; a probabilistic zero is re-probed."""
        v = self.check(e)
        if v.kind == "zero-probabilistic":
            second = self.check(e, salt=1, record=False)
            if not second.is_zero:
                raise PivotUndecidableError(f"conflicting zero verdicts for {to_text(e)}")
        return v.is_zero


def is_zero(e: Expr, config: ProbeConfig = ProbeConfig(), sampler: Sampler | None = None) -> Verdict:
    return ZeroOracle(sampler, config).check(e)


__all__ = [
    "DomainError",
    "DomainExhaustedError",
    "PivotUndecidableError",
    "ProbeConfig",
    "Sampler",
    "UnboundSymbolError",
    "Verdict",
    "ZeroOracle",
    "compile_exprs",
    "eval_at",
    "is_zero",
]
