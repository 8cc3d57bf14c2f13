"""Symbolic scalar engine: parse, canonicalize, substitute, differentiate, evaluate."""

from .calculus import differentiate, substitute
from .core import (
    DOMAINS,
    FUNCTIONS,
    HALF,
    I,
    MINUS_ONE,
    ONE,
    PI,
    ZERO,
    Expr,
    Function,
    ImagUnit,
    Num,
    Pi,
    Power,
    Product,
    Sum,
    Symbol,
    as_expr,
    canonicalize,
    free_symbol_names,
    free_symbols,
    from_complex,
    is_constant,
    is_real,
    real_bounds,
    simplify,
    symbol,
)
from .evaluate import Binding, eval_numeric
from .parser import parse_expr
from .printer import to_string

__all__ = [
    "Binding", "DOMAINS", "Expr", "FUNCTIONS", "Function", "HALF", "I", "ImagUnit",
    "MINUS_ONE", "Num", "ONE", "PI", "Pi", "Power", "Product", "Sum", "Symbol", "ZERO",
    "as_expr", "canonicalize", "differentiate", "eval_numeric", "free_symbol_names",
    "free_symbols", "from_complex", "is_constant", "is_real", "parse_expr", "real_bounds",
    "simplify", "substitute", "symbol", "to_string",
]
