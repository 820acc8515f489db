"""Render expressions in the same grammar the parser reads, with minimal parentheses."""

from __future__ import annotations

from fractions import Fraction

from .expr import Add, Const, Expr, Func, Mul, Pow, Sym


def _frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _exp_text(e: Fraction) -> str:
    return str(e.numerator) if e.denominator == 1 else f"({e.numerator}/{e.denominator})"


def _base_text(b: Expr) -> str:
    if isinstance(b, Const):
        if b.value.denominator == 1 and b.value >= 0:
            return str(b.value.numerator)
        return f"({_frac(b.value)})"
    if isinstance(b, (Sym, Func)):
        return to_text(b)
    return f"({to_text(b)})"


def _positive_power(b: Expr, e: Fraction) -> str:
    if e == 1:
        return _factor_text(b)
    if e == Fraction(1, 2):
        return f"sqrt({to_text(b)})"
    return f"{_base_text(b)}^{_exp_text(e)}"


def _factor_text(f: Expr) -> str:
    if isinstance(f, Add):
        return f"({to_text(f)})"
    if isinstance(f, Pow):
        return _positive_power(f.base, f.exp)
    return to_text(f)


def _product(coeff: Fraction, factors) -> str:
    num: list[str] = []
    den: list[str] = []
    for f in factors:
        if isinstance(f, Pow) and f.exp < 0:
            den.append(_positive_power(f.base, -f.exp))
        else:
            num.append(_factor_text(f))
    sign = "-" if coeff < 0 else ""
    c = abs(coeff)
    if c.numerator != 1 or not num:
        num.insert(0, str(c.numerator))
    if c.denominator != 1:
        den.insert(0, str(c.denominator))
    text = "*".join(num)
    if den:
        if len(den) == 1:
            text += "/" + den[0]
        else:
            text += "/(" + "*".join(den) + ")"
    return sign + text


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return _frac(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.tag}({to_text(e.arg)})"
    if isinstance(e, Pow):
        return _product(Fraction(1), (e,))
    if isinstance(e, Mul):
        if isinstance(e.args[0], Const):
            return _product(e.args[0].value, e.args[1:])
        return _product(Fraction(1), e.args)
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.args):
            negative = (isinstance(t, Const) and t.value < 0) or (
                isinstance(t, Mul) and isinstance(t.args[0], Const) and t.args[0].value < 0
            )
            if i == 0:
                parts.append(to_text(t))
            elif negative:
                parts.append(" - " + to_text(-t))
            else:
                parts.append(" + " + to_text(t))
        return "".join(parts)
    raise TypeError(f"not an expression: {e!r}")
