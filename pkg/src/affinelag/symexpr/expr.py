"""Immutable expression trees over exact rationals.

Every constructor in this module returns a normalized tree: constants are
reduced fractions, sums and products are flat and sorted, like terms and
equal-base factors are merged.  Nodes are hash-consed only through their
structural ``__eq__``/``__hash__``; symbols are additionally interned.
"""

from __future__ import annotations

import re
import threading
from fractions import Fraction
from typing import Iterable, Union

FUNCTIONS = ("ln", "exp", "sin", "cos", "sqrt")

Number = Union[int, Fraction]


class Expr:
    __slots__ = ("_hash", "_key")

    # arithmetic sugar; all of it routes through the normalizing constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __hash__(self):
        return self._hash

    def __str__(self):
        from .printing import to_text

        return to_text(self)

    @property
    def key(self) -> tuple:
        return self._key

    def children(self) -> tuple["Expr", ...]:
        return ()

    def is_const(self) -> bool:
        return False


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        value = Fraction(value)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash(("c", value)))
        object.__setattr__(self, "_key", (0, (value,)))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value

    def __repr__(self):
        return f"Const({self.value})"

    def is_const(self):
        return True


def _natural_key(name: str) -> tuple:
    return tuple(int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name) if p)


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("s", name)))
        object.__setattr__(self, "_key", (1, (_natural_key(name), name)))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return self is other or (isinstance(other, Sym) and other.name == self.name)

    def __repr__(self):
        return f"Sym({self.name!r})"


class Func(Expr):
    __slots__ = ("tag", "arg")

    def __init__(self, tag: str, arg: Expr):
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_hash", hash(("f", tag, arg)))
        object.__setattr__(self, "_key", (2, (tag, arg.key)))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Func)
            and other._hash == self._hash
            and other.tag == self.tag
            and other.arg == self.arg
        )

    def __repr__(self):
        return f"Func({self.tag!r}, {self.arg!r})"

    def children(self):
        return (self.arg,)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: Fraction):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", Fraction(exp))
        object.__setattr__(self, "_hash", hash(("p", base, self.exp)))
        object.__setattr__(self, "_key", (3, (base.key, self.exp)))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Pow)
            and other._hash == self._hash
            and other.exp == self.exp
            and other.base == self.base
        )

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp})"

    def children(self):
        return (self.base,)


class _Nary(Expr):
    __slots__ = ("args",)
    _tag = ""
    _rank = 0

    def __init__(self, args: tuple):
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "_hash", hash((self._tag, self.args)))
        object.__setattr__(self, "_key", (self._rank, tuple(a.key for a in self.args)))

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    __hash__ = Expr.__hash__

    def __eq__(self, other):
        return (
            self is other
            or type(other) is type(self)
            and other._hash == self._hash
            and other.args == self.args
        )

    def __repr__(self):
        return f"{type(self).__name__}({', '.join(map(repr, self.args))})"

    def children(self):
        return self.args


class Mul(_Nary):
    __slots__ = ()
    _tag = "m"
    _rank = 4


class Add(_Nary):
    __slots__ = ()
    _tag = "a"
    _rank = 5


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)

_registry: dict[str, Sym] = {}
_registry_lock = threading.Lock()


def symbol(name: str) -> Sym:
    """Return the interned symbol called ``name``."""
    with _registry_lock:
        s = _registry.get(name)
        if s is None:
            s = _registry[name] = Sym(name)
        return s


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, str):
        return symbol(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an expression (floats are not exact)")


# -- normalizing constructors -------------------------------------------------


def _split_coeff(term: Expr) -> tuple[Fraction, Expr]:
    if isinstance(term, Const):
        return term.value, ONE
    if isinstance(term, Mul) and isinstance(term.args[0], Const):
        rest = term.args[1:]
        return term.args[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return Fraction(1), term


def _term_order(rest: Expr) -> tuple:
    # lexicographic on factor bases, so monomials sharing a leading symbol sit together
    factors = rest.args if isinstance(rest, Mul) else (rest,)
    bases = sorted((_base_exp(f)[0].key, -_base_exp(f)[1]) for f in factors)
    return (rest == ONE, tuple(bases))


def add(*terms: Expr) -> Expr:
    collected: dict[Expr, Fraction] = {}
    stack = list(terms)
    stack.reverse()
    while stack:
        t = as_expr(stack.pop())
        if isinstance(t, Add):
            stack.extend(reversed(t.args))
            continue
        c, rest = _split_coeff(t)
        if c:
            collected[rest] = collected.get(rest, Fraction(0)) + c
    items = sorted(((r, c) for r, c in collected.items() if c), key=lambda rc: _term_order(rc[0]))
    out = [_scaled(c, r) for r, c in items]
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if rest == ONE:
        return Const(c)
    if c == 1:
        return rest
    if isinstance(rest, Mul):
        return Mul((Const(c),) + rest.args)
    return Mul((Const(c), rest))


def _base_exp(f: Expr) -> tuple[Expr, Fraction]:
    if isinstance(f, Pow):
        return f.base, f.exp
    return f, Fraction(1)


def mul(*factors: Expr) -> Expr:
    coeff = Fraction(1)
    powers: dict[Expr, Fraction] = {}
    stack = [as_expr(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.args))
        elif isinstance(f, Const):
            coeff *= f.value
        else:
            b, e = _base_exp(f)
            powers[b] = powers.get(b, Fraction(0)) + e
    if coeff == 0:
        return ZERO
    kept: list[Expr] = []
    refold: list[Expr] = []
    for b, e in powers.items():
        if e == 0:
            continue
        p = power(b, e)
        if not isinstance(p, Const) and (p == b or (isinstance(p, Pow) and p.base == b and p.exp == e)):
            kept.append(p)
        else:
            # merged exponent folded into a constant, product or new base
            refold.append(p)
    if refold:
        return mul(Const(coeff), *kept, *refold)
    kept.sort(key=lambda x: x.key)
    if not kept:
        return Const(coeff)
    if coeff == 1:
        return kept[0] if len(kept) == 1 else Mul(tuple(kept))
    if len(kept) == 1 and isinstance(kept[0], Add):
        # a rational multiple of a sum is distributed, so -(x + y) is -x - y
        return add(*(mul(Const(coeff), t) for t in kept[0].args))
    return Mul((Const(coeff),) + tuple(kept))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def _exact_root(n: int, q: int) -> int | None:
    if n < 0:
        return None
    r = round(n ** (1.0 / q)) if n else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**q == n:
            return cand
    return None


def power(base: Expr, exponent) -> Expr:
    base = as_expr(base)
    if isinstance(exponent, Const):
        exponent = exponent.value
    if isinstance(exponent, Expr):
        raise ValueError("exponents must be rational constants")
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Const):
        b = base.value
        if b == 0:
            if e < 0:
                raise ZeroDivisionError("division by zero")
            return ZERO
        if b == 1:
            return ONE
        if e.denominator == 1:
            return Const(b ** e.numerator)
        if b > 0:
            q = e.denominator
            rn, rd = _exact_root(b.numerator, q), _exact_root(b.denominator, q)
            if rn is not None and rd is not None:
                return Const(Fraction(rn, rd) ** e.numerator)
        return Pow(base, e)
    if isinstance(base, Pow):
        # fractional powers are only defined for nonnegative bases, so merging
        # is value-preserving unless it would strip an even integer power
        if e.denominator == 1 or base.exp.denominator != 1:
            return power(base.base, base.exp * e)
        return Pow(base, e)
    if isinstance(base, Mul) and e.denominator == 1:
        return mul(*(power(f, e) for f in base.args))
    if isinstance(base, Func) and base.tag == "exp":
        return func("exp", mul(Const(e), base.arg))
    return Pow(base, e)


def func(tag: str, arg: Expr) -> Expr:
    arg = as_expr(arg)
    if tag not in FUNCTIONS:
        raise ValueError(f"unsupported function {tag!r}")
    if tag == "sqrt":
        return power(arg, Fraction(1, 2))
    if tag == "ln":
        if arg == ONE:
            return ZERO
        if isinstance(arg, Func) and arg.tag == "exp":
            return arg.arg
    elif tag == "exp":
        if arg == ZERO:
            return ONE
        if isinstance(arg, Func) and arg.tag == "ln":
            return arg.arg
    elif tag == "sin":
        if arg == ZERO:
            return ZERO
    elif tag == "cos":
        if arg == ZERO:
            return ONE
    return Func(tag, arg)


def ln(x) -> Expr:
    return func("ln", x)


def exp(x) -> Expr:
    return func("exp", x)


def sin(x) -> Expr:
    return func("sin", x)


def cos(x) -> Expr:
    return func("cos", x)


def sqrt(x) -> Expr:
    return func("sqrt", x)


def rebuild(e: Expr, args: Iterable[Expr]) -> Expr:
    """Reassemble ``e`` from new children through the normalizing constructors."""
    args = list(args)
    if isinstance(e, Add):
        return add(*args)
    if isinstance(e, Mul):
        return mul(*args)
    if isinstance(e, Pow):
        return power(args[0], e.exp)
    if isinstance(e, Func):
        return func(e.tag, args[0])
    return e


def normalize(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up; the result satisfies every tree invariant."""
    if isinstance(e, (Const, Sym)):
        return e
    return rebuild(e, (normalize(a) for a in e.children()))


def free_symbols(e: Expr) -> set[Sym]:
    out: set[Sym] = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Sym):
            out.add(x)
        else:
            stack.extend(x.children())
    return out


def has_symbol(e: Expr, syms) -> bool:
    syms = set(syms)
    return bool(free_symbols(e) & syms)


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace symbols by expressions simultaneously."""
    if not mapping:
        return e
    cache: dict[Expr, Expr] = {}

    def go(x: Expr) -> Expr:
        if isinstance(x, Sym):
            return mapping.get(x, x)
        if isinstance(x, Const):
            return x
        r = cache.get(x)
        if r is None:
            r = cache[x] = rebuild(x, (go(a) for a in x.children()))
        return r

    return go(e)


def coefficient_and_rest(term: Expr) -> tuple[Fraction, Expr]:
    """Split a term into its rational coefficient and the remaining monomial."""
    return _split_coeff(term)


def terms(e: Expr) -> tuple[Expr, ...]:
    return e.args if isinstance(e, Add) else (e,)
