"""Symbolic differentiation."""

from __future__ import annotations

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
    cos,
    free_symbols,
    mul,
    neg,
    power,
    sin,
)


def differentiate(e: Expr, s: Sym) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``s``."""
    if not isinstance(s, Sym):
        raise TypeError("can only differentiate with respect to a symbol")
    cache: dict[Expr, Expr] = {}
    seen: dict[Expr, bool] = {}

    def depends(x: Expr) -> bool:
        hit = seen.get(x)
        if hit is None:
            hit = seen[x] = s in free_symbols(x)
        return hit

    def d(x: Expr) -> Expr:
        if isinstance(x, Const):
            return ZERO
        if isinstance(x, Sym):
            return ONE if x == s else ZERO
        hit = cache.get(x)
        if hit is not None:
            return hit
        if not depends(x):
            out = ZERO
        elif isinstance(x, Add):
            out = add(*(d(t) for t in x.args))
        elif isinstance(x, Mul):
            parts = []
            for i, f in enumerate(x.args):
                df = d(f)
                if df != ZERO:
                    parts.append(mul(df, *x.args[:i], *x.args[i + 1 :]))
            out = add(*parts)
        elif isinstance(x, Pow):
            out = mul(Const(x.exp), power(x.base, x.exp - 1), d(x.base))
        elif isinstance(x, Func):
            du = d(x.arg)
            if x.tag == "ln":
                out = mul(du, power(x.arg, -1))
            elif x.tag == "exp":
                out = mul(du, x)
            elif x.tag == "sin":
                out = mul(du, cos(x.arg))
            elif x.tag == "cos":
                out = neg(mul(du, sin(x.arg)))
            else:
                raise ValueError(f"unsupported function {x.tag!r}")
        else:
            raise TypeError(f"not an expression: {x!r}")
        cache[x] = out
        return out

    return d(e)


def gradient(e: Expr, syms) -> list[Expr]:
    return [differentiate(e, s) for s in syms]


def is_affine_in(e: Expr, syms) -> bool:
    """True when ``e`` has no second derivatives in ``syms`` (structurally)."""
    syms = list(syms)
    for a in syms:
        da = differentiate(e, a)
        for b in syms:
            if differentiate(da, b) != ZERO:
                return False
    return True

