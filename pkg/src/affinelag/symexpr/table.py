"""Symbol tables: the fibred coordinates (t, q, v, a) plus parameters and auxiliaries."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .expr import Expr, Sym, symbol
from .numeric import Sampler
from .parse import parse_expr

ASSUMPTIONS = ("positive", "nonzero", "real")
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INEQ = re.compile(r"(>=|<=|!=|>|<)")


class SymbolTableError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolTable:
    time: Sym
    coords: tuple[Sym, ...]
    params: tuple[Sym, ...] = ()
    assumptions: dict = field(default_factory=dict)  # symbol name -> assumption
    domain: tuple[str, ...] = ()
    aux: tuple[Sym, ...] = ()

    def __post_init__(self):
        names = [s.name for s in self.all_symbols()]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise SymbolTableError(f"duplicate symbol names: {', '.join(sorted(dup))}")
        for n in names:
            if not IDENT.match(n):
                raise SymbolTableError(f"invalid identifier {n!r}")
        for n, a in self.assumptions.items():
            if a not in ASSUMPTIONS:
                raise SymbolTableError(f"unknown assumption {a!r} for {n}")

    @classmethod
    def build(cls, coords, params=(), time="t", assumptions=None, domain=()) -> "SymbolTable":
        return cls(
            time=symbol(time),
            coords=tuple(symbol(c) for c in coords),
            params=tuple(symbol(p) for p in params),
            assumptions=dict(assumptions or {}),
            domain=tuple(domain),
        )

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def velocities(self) -> tuple[Sym, ...]:
        return tuple(symbol("v_" + q.name) for q in self.coords)

    @property
    def accelerations(self) -> tuple[Sym, ...]:
        return tuple(symbol("a_" + q.name) for q in self.coords)

    @property
    def momenta(self) -> tuple[Sym, ...]:
        return tuple(symbol("p_" + q.name) for q in self.coords)

    def velocity(self, q: Sym) -> Sym:
        return symbol("v_" + q.name)

    def base_symbols(self) -> tuple[Sym, ...]:
        return (self.time,) + self.coords + self.params

    def all_symbols(self) -> tuple[Sym, ...]:
        return (
            self.base_symbols() + self.velocities + self.accelerations + self.momenta + self.aux
        )

    def names(self) -> set[str]:
        return {s.name for s in self.all_symbols()}

    def with_aux(self, *names: str) -> "SymbolTable":
        have = {s.name for s in self.aux}
        new = tuple(symbol(n) for n in names if n not in have)
        return replace(self, aux=self.aux + new)

    def with_coords(self, extra) -> "SymbolTable":
        return replace(self, coords=self.coords + tuple(symbol(c) for c in extra))

    def parse(self, text: str) -> Expr:
        return parse_expr(text, self)

    def inequalities(self) -> list[tuple[Expr, str, Expr]]:
        out = []
        for text in self.domain:
            parts = _INEQ.split(text)
            if len(parts) != 3:
                raise SymbolTableError(f"domain assumption must be a single inequality: {text!r}")
            lhs, op, rhs = parts
            out.append((self.parse(lhs), op, self.parse(rhs)))
        return out

    def sampler(self) -> Sampler:
        assumptions = dict(self.assumptions)
        rest = []
        for lhs, op, rhs in self.inequalities():
            # "x > 0" is folded into the draw itself instead of rejection
            if isinstance(lhs, Sym) and op == ">" and rhs.is_const() and rhs.value == 0:
                assumptions.setdefault(lhs.name, "positive")
            else:
                rest.append((lhs, op, rhs))
        return Sampler(assumptions, rest)
