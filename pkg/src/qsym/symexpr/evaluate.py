"""Numeric evaluation and variable binding."""

from __future__ import annotations

import cmath
from collections.abc import Mapping
from fractions import Fraction

import numpy as np

from ..errors import DomainError, NumericError, UnboundSymbol
from .core import (
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
    free_symbols,
    is_real,
    real_bounds,
)


class Binding(Mapping):
    """Immutable map from symbol name to a numeric value.

    Values may be Python/numpy numbers or symbol-free :class:`Expr` constants
    (e.g. ``parse_expr("pi/2")``) so that exact substitution is possible.
    """

    __slots__ = ("_data",)

    def __init__(self, data=None, **kwargs):
        d = dict(data or {})
        d.update(kwargs)
        out = {}
        for k, v in d.items():
            if isinstance(v, Expr):
                if free_symbols(v):
                    raise DomainError(f"binding for {k!r} is not a constant: {v}")
            elif isinstance(v, str):
                v = as_expr(v)
                if free_symbols(v):
                    raise DomainError(f"binding for {k!r} is not a constant: {v}")
            elif isinstance(v, (complex, np.complexfloating)):
                v = complex(v)
            elif isinstance(v, np.floating):
                v = float(v)
            elif isinstance(v, np.integer):
                v = int(v)
            out[str(k)] = v
        self._data = out

    def __getitem__(self, key):
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"Binding({self._data!r})"

    def __hash__(self):
        return hash(tuple(sorted((k, repr(v)) for k, v in self._data.items())))

    def complex_value(self, name: str) -> complex:
        v = self._data[name]
        if isinstance(v, Expr):
            return eval_numeric(v, {})
        return complex(v)


def check_domain(sym: Symbol, value) -> None:
    """Reject values outside a symbol's declared domain."""
    if sym.domain == "complex":
        return
    if isinstance(value, Expr):
        if is_real(value):
            b = real_bounds(value)
            z = complex(b[0])
        else:
            z = eval_numeric(value, {})
            if abs(z.imag) > 1e-12 * max(1.0, abs(z)):
                raise DomainError(f"{sym.domain} symbol {sym.name!r} bound to non-real value {value}")
    else:
        z = complex(value)
        if z.imag != 0:
            raise DomainError(f"{sym.domain} symbol {sym.name!r} bound to non-real value {value!r}")
    if sym.domain == "unit" and not (-1e-12 <= z.real <= 1 + 1e-12):
        raise DomainError(f"unit-interval symbol {sym.name!r} bound to {z.real!r} outside [0, 1]")


def _lit(v) -> complex:
    return complex(float(v)) if isinstance(v, Fraction) else complex(v)


def eval_numeric(e: Expr, binding: Mapping | None = None) -> complex:
    """Evaluate to a double-precision complex.

    Conventions: sqrt and non-integer powers use the principal branch, so the
    square root of a negative real is imaginary; ``0^0 = 1``; ``0`` raised to a
    power with non-positive real part raises :class:`NumericError`.
    """
    binding = binding if binding is not None else {}
    cache: dict = {}
    try:
        return _ev(as_expr(e), binding, cache)
    except (OverflowError, ZeroDivisionError) as exc:
        raise NumericError(str(exc)) from exc


def _ev(e: Expr, b, cache) -> complex:
    if isinstance(e, Num):
        return _lit(e.value)
    if isinstance(e, ImagUnit):
        return 1j
    if isinstance(e, Pi):
        return complex(cmath.pi)
    if isinstance(e, Symbol):
        if e.name not in b:
            raise UnboundSymbol(e.name)
        v = b[e.name]
        if isinstance(v, Expr):
            v = _ev(v, {}, {})
        check_domain(e, v)
        return complex(v)
    if e in cache:
        return cache[e]
    if isinstance(e, Sum):
        r = sum((_ev(t, b, cache) for t in e.terms), 0j)
    elif isinstance(e, Product):
        r = 1 + 0j
        for f in e.factors:
            r *= _ev(f, b, cache)
    elif isinstance(e, Power):
        base = _ev(e.base, b, cache)
        if isinstance(e.exponent, Num) and isinstance(e.exponent.value, int):
            n = e.exponent.value
            if base == 0:
                if n == 0:
                    r = 1 + 0j
                elif n > 0:
                    r = 0j
                else:
                    raise NumericError("0 raised to a negative power")
            else:
                r = base**n
        else:
            ex = _ev(e.exponent, b, cache)
            if base == 0:
                if ex == 0:
                    r = 1 + 0j
                elif ex.real > 0:
                    r = 0j
                else:
                    raise NumericError("0 raised to a power with non-positive real part")
            else:
                r = base**ex
    elif isinstance(e, Function):
        a = _ev(e.arg, b, cache)
        k = e.kind
        if k == "sin":
            r = cmath.sin(a)
        elif k == "cos":
            r = cmath.cos(a)
        elif k == "exp":
            r = cmath.exp(a)
        elif k == "sqrt":
            r = cmath.sqrt(a)
        elif k == "conj":
            r = a.conjugate()
        else:
            r = complex(abs(a))
    else:
        raise TypeError(type(e))
    if r.imag == 0:
        # signed zeros would select the wrong side of the principal branch cut
        r = complex(r.real, 0.0)
    cache[e] = r
    return r
