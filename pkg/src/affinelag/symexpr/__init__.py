"""Exact symbolic expressions: construction, parsing, calculus, zero testing."""

from .calculus import differentiate, gradient, is_affine_in
from .expr import (
    FUNCTIONS,
    MINUS_ONE,
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
    as_expr,
    cos,
    exp,
    free_symbols,
    func,
    has_symbol,
    ln,
    mul,
    neg,
    normalize,
    power,
    sin,
    sqrt,
    substitute,
    symbol,
    terms,
)
from .numeric import (
    DomainError,
    DomainExhaustedError,
    PivotUndecidableError,
    ProbeConfig,
    Sampler,
    UnboundSymbolError,
    Verdict,
    ZeroOracle,
    compile_exprs,
    eval_at,
    is_zero,
)
from .parse import ParseError, UnknownIdentifierError, parse_expr
from .printing import to_text
from .ratform import (
    canonical_constraint,
    clear_denominators,
    is_rational_zero,
    leading_sign,
    numerator_denominator,
    numerator_factors,
    simplify,
    to_rational,
)
from .table import SymbolTable, SymbolTableError

__all__ = [name for name in dir() if not name.startswith("_")]
