"""Substitution and exact differentiation."""

from __future__ import annotations

import math
from collections.abc import Mapping

from ..errors import DomainError
from .core import (
    HALF,
    MINUS_ONE,
    ONE,
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
    add,
    as_expr,
    fn,
    free_symbols,
    mul,
    power,
    simplify,
)
from .evaluate import Binding, check_domain


def substitute(e: Expr, binding: Mapping) -> Expr:
    """Replace bound symbols by literals and re-simplify; unbound ones stay."""
    if not isinstance(binding, Binding):
        binding = Binding(binding)
    e = as_expr(e)
    cache: dict = {}

    def go(x: Expr) -> Expr:
        if x in cache:
            return cache[x]
        if isinstance(x, Symbol):
            if x.name in binding:
                v = binding[x.name]
                check_domain(x, v)
                r = as_expr(v)
            else:
                r = x
        elif isinstance(x, Sum):
            r = add([go(t) for t in x.terms])
        elif isinstance(x, Product):
            r = mul([go(f) for f in x.factors])
        elif isinstance(x, Power):
            r = power(go(x.base), go(x.exponent))
        elif isinstance(x, Function):
            r = fn(x.kind, go(x.arg))
        else:
            r = x
        cache[x] = r
        return r

    return simplify(go(e))


def _contains(e: Expr, name: str) -> bool:
    return any(s.name == name for s in free_symbols(e))


def _has_complex_symbol(e: Expr) -> bool:
    return any(s.domain == "complex" for s in free_symbols(e))


def differentiate(e: Expr, sym) -> Expr:
    """Exact derivative with respect to a real-domain symbol.

    Raises :class:`DomainError` when the symbol is complex, when the path to
    the symbol crosses ``abs``, or crosses ``conj`` of a complex symbol.
    """
    e = simplify(as_expr(e))
    name = sym.name if isinstance(sym, Symbol) else str(sym)
    for s in free_symbols(e):
        if s.name == name and s.domain == "complex":
            raise DomainError(f"cannot differentiate with respect to complex symbol {name!r}")
    if isinstance(sym, Symbol) and sym.domain == "complex":
        raise DomainError(f"cannot differentiate with respect to complex symbol {name!r}")
    cache: dict = {}

    def d(x: Expr) -> Expr:
        if not _contains(x, name):
            return ZERO
        if x in cache:
            return cache[x]
        if isinstance(x, Symbol):
            r = ONE
        elif isinstance(x, Sum):
            r = add([d(t) for t in x.terms])
        elif isinstance(x, Product):
            terms = []
            fs = x.factors
            for k, f in enumerate(fs):
                df = d(f)
                if df != ZERO:
                    terms.append(mul((df,) + fs[:k] + fs[k + 1 :]))
            r = add(terms) if terms else ZERO
        elif isinstance(x, Power):
            b, ex = x.base, x.exponent
            if not _contains(ex, name):
                r = mul((ex, power(b, add((ex, MINUS_ONE))), d(b)))
            elif not free_symbols(b) and isinstance(b, Num) and b.value > 0:
                r = mul((x, Num(math.log(b.value)), d(ex)))
            elif not free_symbols(b) and isinstance(b, Pi):
                r = mul((x, Num(math.log(math.pi)), d(ex)))
            else:
                raise DomainError("derivative of a power whose base and exponent both vary needs log, which is outside the grammar")
        elif isinstance(x, Function):
            a = x.arg
            da = d(a)
            k = x.kind
            if k == "sin":
                r = mul((fn("cos", a), da))
            elif k == "cos":
                r = mul((MINUS_ONE, fn("sin", a), da))
            elif k == "exp":
                r = mul((x, da))
            elif k == "sqrt":
                r = mul((HALF, power(x, MINUS_ONE), da))
            elif k == "conj":
                if _has_complex_symbol(a):
                    raise DomainError("cannot differentiate through conj of a complex-domain symbol")
                r = fn("conj", da)
            else:
                raise DomainError("cannot differentiate through abs")
        elif isinstance(x, (Num, ImagUnit, Pi)):
            r = ZERO
        else:
            raise TypeError(type(x))
        cache[x] = r
        return r

    return simplify(d(e))
