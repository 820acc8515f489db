"""Rational normal form: numerator polynomial over factored denominators.

Non-polynomial pieces (symbols, function applications, fractional-power
roots) are treated as independent atoms.  Two expressions whose difference
has a zero numerator here are equal as rational functions of their atoms,
which is the exact half of the zero test; identities that need relations
between atoms (``sin^2 + cos^2``) fall through to numeric probing.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Expr,
    Func,
    Mul,
    Pow,
    Sym,
    add,
    func,
    mul,
    power,
)

Monomial = tuple  # sorted tuple of (atom, exponent>0)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for atom, k in b:
        d[atom] = d.get(atom, 0) + k
    return tuple(sorted(d.items(), key=lambda it: it[0].key))


def _mono_div(a: Monomial, b: Monomial) -> Monomial | None:
    d = dict(a)
    for atom, k in b:
        have = d.get(atom, 0)
        if have < k:
            return None
        if have == k:
            del d[atom]
        else:
            d[atom] = have - k
    return tuple(sorted(d.items(), key=lambda it: it[0].key))


class Poly:
    """Sparse multivariate polynomial with rational coefficients over atoms."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): Fraction(c)})

    @classmethod
    def atom(cls, a: Expr) -> "Poly":
        return cls({((a, 1),): Fraction(1)})

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(not m for m in self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if isinstance(other, (int, Fraction)):
            return Poly({m: c * other for m, c in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    def __pow__(self, k: int) -> "Poly":
        result = Poly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def atoms(self) -> set:
        return {a for m in self.terms for a, _ in m}

    def _order(self, atoms) -> dict:
        ranked = sorted(atoms, key=lambda a: a.key)
        return {a: i for i, a in enumerate(ranked)}

    def _lead(self, index: dict):
        n = len(index)

        def dense(m):
            v = [0] * n
            for a, k in m:
                v[index[a]] = k
            return tuple(v)

        return max(self.terms.items(), key=lambda mc: dense(mc[0]))

    def divide_exact(self, other: "Poly") -> "Poly | None":
        """Quotient when ``other`` divides ``self`` exactly, else None."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return Poly()
        if other.is_monomial():
            (om, oc), = other.terms.items()
            out = {}
            for m, c in self.terms.items():
                q = _mono_div(m, om)
                if q is None:
                    return None
                out[q] = c / oc
            return Poly(out)
        index = self._order(self.atoms() | other.atoms())
        lm, lc = other._lead(index)
        rem = self
        quot: dict = {}
        # bounded by the number of terms that can ever appear
        for _ in range(10_000):
            if rem.is_zero():
                return Poly(quot)
            rm, rc = rem._lead(index)
            q = _mono_div(rm, lm)
            if q is None:
                return None
            qc = rc / lc
            quot[q] = quot.get(q, 0) + qc
            rem = rem - other * Poly({q: qc})
        return None

    def content(self) -> Fraction:
        """Positive rational c with self/c having coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        nums = [c.numerator for c in self.terms.values()]
        dens = [c.denominator for c in self.terms.values()]
        return Fraction(abs(reduce(gcd, nums)), reduce(lcm, dens))

    def monomial_gcd(self) -> Monomial:
        monos = list(self.terms)
        if not monos:
            return ()
        common = dict(monos[0])
        for m in monos[1:]:
            d = dict(m)
            common = {a: min(k, d[a]) for a, k in common.items() if a in d}
        return tuple(sorted(common.items(), key=lambda it: it[0].key))

    def to_expr(self) -> Expr:
        parts = []
        for m, c in self.terms.items():
            parts.append(mul(Const(c), *(power(a, k) for a, k in m)))
        return add(*parts)

    def leading_sign(self) -> int:
        """Sign of the first term in printed (normalized) order."""
        e = self.to_expr()
        first = e.args[0] if isinstance(e, Add) else e
        if isinstance(first, Const):
            return 1 if first.value > 0 else -1
        if isinstance(first, Mul) and isinstance(first.args[0], Const):
            return 1 if first.args[0].value > 0 else -1
        return 1


def _primitive_factors(p: Poly) -> tuple[Fraction, list[Poly]]:
    """Split ``p`` as c * product(factors) with monomial atoms pulled out.

    Each returned factor is primitive with a positive leading term, so equal
    factors from different sources compare equal.
    """
    if p.is_zero():
        raise ZeroDivisionError("division by zero")
    c = p.content()
    if p.leading_sign() < 0:
        c = -c
    q = p * (1 / c)
    factors: list[Poly] = []
    g = q.monomial_gcd()
    if g:
        q = q.divide_exact(Poly({g: Fraction(1)}))
        for atom, k in g:
            factors.extend([Poly.atom(atom)] * k)
        if q.leading_sign() < 0:
            q, c = -q, -c
    if not q.is_const():
        factors.append(q)
    return c, factors


class RatForm:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: dict | None = None):
        self.num = num
        self.den = {f: k for f, k in (den or {}).items() if k}
        if num.is_zero():
            self.den = {}

    @classmethod
    def const(cls, c) -> "RatForm":
        return cls(Poly.const(c))

    def _scale_num(self, target: dict) -> Poly:
        n = self.num
        for f, k in target.items():
            extra = k - self.den.get(f, 0)
            if extra:
                n = n * (f**extra)
        return n

    def __add__(self, other: "RatForm") -> "RatForm":
        if not self.den and not other.den:
            return RatForm(self.num + other.num)
        target = dict(self.den)
        for f, k in other.den.items():
            target[f] = max(target.get(f, 0), k)
        return RatForm(self._scale_num(target) + other._scale_num(target), target).cancel()

    def __mul__(self, other: "RatForm") -> "RatForm":
        den = dict(self.den)
        for f, k in other.den.items():
            den[f] = den.get(f, 0) + k
        return RatForm(self.num * other.num, den).cancel()

    def inverse(self) -> "RatForm":
        c, factors = _primitive_factors(self.num)
        num = Poly.const(1 / c)
        for f, k in self.den.items():
            num = num * (f**k)
        den: dict = {}
        for f in factors:
            den[f] = den.get(f, 0) + 1
        return RatForm(num, den).cancel()

    def __pow__(self, k: int) -> "RatForm":
        if k < 0:
            return self.inverse() ** (-k)
        return RatForm(self.num**k, {f: m * k for f, m in self.den.items()})

    def cancel(self) -> "RatForm":
        num = self.num
        den = dict(self.den)
        for f in list(den):
            while den[f]:
                q = num.divide_exact(f)
                if q is None:
                    break
                num = q
                den[f] -= 1
        return RatForm(num, den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def to_expr(self) -> Expr:
        dens = [power(f.to_expr(), -k) for f, k in sorted(self.den.items(), key=lambda fk: fk[0].to_expr().key)]
        if all(f.is_monomial() for f in self.den):
            # monomial denominators read better distributed over the terms
            return add(*(mul(t, *dens) for t in _terms_of(self.num)))
        return mul(self.num.to_expr(), *dens)


def _terms_of(p: Poly) -> list[Expr]:
    return [Poly({m: c}).to_expr() for m, c in p.terms.items()]


def _root_atom(base: Expr, q: int):
    r = power(simplify(base), Fraction(1, q))
    if isinstance(r, Pow) and r.exp == Fraction(1, q):
        return RatForm(Poly.atom(r))
    return to_rational(r)


def to_rational(e: Expr, _cache: dict | None = None) -> RatForm:
    cache = {} if _cache is None else _cache
    hit = cache.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = RatForm.const(e.value)
    elif isinstance(e, Sym):
        out = RatForm(Poly.atom(e))
    elif isinstance(e, Func):
        f = func(e.tag, simplify(e.arg))
        out = RatForm(Poly.atom(f)) if isinstance(f, Func) else to_rational(f, cache)
    elif isinstance(e, Add):
        out = RatForm.const(0)
        for t in e.args:
            out = out + to_rational(t, cache)
    elif isinstance(e, Mul):
        out = RatForm.const(1)
        for f in e.args:
            out = out * to_rational(f, cache)
    elif isinstance(e, Pow):
        p, q = e.exp.numerator, e.exp.denominator
        base = to_rational(e.base, cache) if q == 1 else _root_atom(e.base, q)
        out = base**p
    else:
        raise TypeError(f"not an expression: {e!r}")
    cache[e] = out
    return out


def simplify(e: Expr) -> Expr:
    """Expanded numerator over a cancelled, factored denominator."""
    if isinstance(e, (Const, Sym)):
        return e
    return to_rational(e).to_expr()


def is_rational_zero(e: Expr) -> bool:
    return to_rational(e).is_zero()


def numerator_denominator(e: Expr) -> tuple[Expr, Expr]:
    r = to_rational(e)
    den = mul(*(power(f.to_expr(), k) for f, k in r.den.items())) if r.den else ONE
    return r.num.to_expr(), den


def canonical_constraint(e: Expr) -> Expr:
    """Clear denominators, make coefficients coprime integers, lead positive.

    Constraint functions are only meaningful up to nonzero multiples; this
    picks one representative so equal constraints print identically.
    """
    num = to_rational(e).num
    if num.is_zero():
        return ZERO
    c = num.content()
    if num.leading_sign() < 0:
        c = -c
    return (num * (1 / c)).to_expr()


def leading_sign(e: Expr) -> int:
    num = to_rational(e).num
    if num.is_zero():
        return 0
    return num.leading_sign()


def numerator_factors(e: Expr) -> list[Expr]:
    """Distinct non-constant primitive factors of the numerator of ``e``."""
    num = to_rational(e).num
    if num.is_zero() or num.is_const():
        return []
    _, factors = _primitive_factors(num)
    out: list[Expr] = []
    for f in factors:
        x = f.to_expr()
        if x not in out:
            out.append(x)
    return out


def clear_denominators(vec) -> list[Expr]:
    """Scale a vector by one common factor so its entries are coprime polynomials.

    The first nonzero entry ends up with a positive leading term.
    """
    forms = [to_rational(e) for e in vec]
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
    nonzero = [p for p in polys if not p.is_zero()]
    if not nonzero:
        return [ZERO for _ in polys]
    nums = [c.numerator for p in nonzero for c in p.terms.values()]
    dens = [c.denominator for p in nonzero for c in p.terms.values()]
    scale = Fraction(reduce(lcm, dens), abs(reduce(gcd, nums)))
    if nonzero[0].leading_sign() < 0:
        scale = -scale
    return [(p * scale).to_expr() for p in polys]
