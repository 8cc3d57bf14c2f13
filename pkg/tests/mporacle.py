"""High-precision reference evaluation used to discard ill-conditioned samples."""

from __future__ import annotations

import mpmath

from qsym.symexpr.core import Function, ImagUnit, Num, Pi, Power, Product, Sum, Symbol

mpmath.mp.dps = 40


def mp_eval(e, binding):
    if isinstance(e, Num):
        v = e.value
        return mpmath.mpf(v.numerator) / v.denominator if hasattr(v, "denominator") else mpmath.mpf(v)
    if isinstance(e, ImagUnit):
        return mpmath.mpc(0, 1)
    if isinstance(e, Pi):
        return +mpmath.pi
    if isinstance(e, Symbol):
        return mpmath.mpmathify(binding[e.name])
    if isinstance(e, Sum):
        return mpmath.fsum(mp_eval(t, binding) for t in e.terms)
    if isinstance(e, Product):
        r = mpmath.mpf(1)
        for f in e.factors:
            r *= mp_eval(f, binding)
        return r
    if isinstance(e, Power):
        b = mpmath.mpc(mp_eval(e.base, binding))
        x = mp_eval(e.exponent, binding)
        if b == 0:
            if x == 0:
                return mpmath.mpf(1)
            if mpmath.re(x) > 0:
                return mpmath.mpf(0)
            raise ZeroDivisionError
        if isinstance(e.exponent, Num) and isinstance(e.exponent.value, int):
            return b ** int(e.exponent.value)
        return mpmath.power(b, x)
    if isinstance(e, Function):
        a = mpmath.mpc(mp_eval(e.arg, binding))
        return {
            "sin": mpmath.sin,
            "cos": mpmath.cos,
            "exp": mpmath.exp,
            "sqrt": mpmath.sqrt,
            "conj": mpmath.conj,
            "abs": lambda z: mpmath.mpf(abs(z)),
        }[e.kind](a)
    raise TypeError(type(e))


def well_conditioned(e, binding, value: complex, rtol: float = 1e-12) -> bool:
    """True when the double-precision value of ``e`` matches a 40-digit evaluation."""
    try:
        ref = complex(mp_eval(e, binding))
    except (ZeroDivisionError, ValueError, OverflowError):
        return False
    scale = max(1.0, abs(ref))
    return abs(ref - value) <= rtol * scale
