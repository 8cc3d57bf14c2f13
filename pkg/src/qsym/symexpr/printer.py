"""Render expressions in the parser's grammar (parse(to_string(e)) == e)."""

from __future__ import annotations

from fractions import Fraction

from .core import Expr, Function, ImagUnit, Num, Pi, Power, Product, Sum, Symbol

# binding strength of the printed form
_SUM, _NEG, _PROD, _POW, _ATOM = 1, 2, 3, 4, 5


def _num_str(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _num_level(v) -> int:
    if v < 0:
        return _NEG
    if isinstance(v, Fraction):
        return _PROD
    return _ATOM


def to_string(e: Expr) -> str:
    return _fmt(e)[0]


def _wrap(e: Expr, need: int) -> str:
    s, level = _fmt(e)
    return f"({s})" if level < need else s


def _is_negative_term(t: Expr) -> bool:
    if isinstance(t, Num):
        return t.value < 0
    return isinstance(t, Product) and isinstance(t.factors[0], Num) and t.factors[0].value < 0


def _negate(t: Expr) -> Expr:
    if isinstance(t, Num):
        return Num(-t.value)
    c = -t.factors[0].value
    rest = t.factors[1:]
    if c == 1 and not isinstance(c, float):
        return rest[0] if len(rest) == 1 else Product(rest)
    return Product((Num(c),) + rest)


def _fmt(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _num_str(e.value), _num_level(e.value)
    if isinstance(e, ImagUnit):
        return "i", _ATOM
    if isinstance(e, Pi):
        return "pi", _ATOM
    if isinstance(e, Symbol):
        return e.name, _ATOM
    if isinstance(e, Function):
        return f"{e.kind}({to_string(e.arg)})", _ATOM
    if isinstance(e, Sum):
        parts = [_wrap(e.terms[0], _SUM)]
        for t in e.terms[1:]:
            if _is_negative_term(t):
                parts.append(" - " + _wrap(_negate(t), _PROD))
            else:
                parts.append(" + " + _wrap(t, _PROD))
        return "".join(parts), _SUM
    if isinstance(e, Product):
        return _fmt_product(e)
    if isinstance(e, Power):
        if e.exponent == Num(-1):
            return "1/" + _wrap(e.base, _POW if not isinstance(e.base, Num) else _ATOM), _PROD
        base = _wrap(e.base, _ATOM)
        ex = e.exponent
        if isinstance(ex, (Symbol, Pi, ImagUnit)) or (
            isinstance(ex, Num) and isinstance(ex.value, int) and ex.value >= 0
        ):
            exs = _fmt(ex)[0]
        else:
            exs = f"({to_string(ex)})"
        return f"{base}^{exs}", _POW
    raise TypeError(type(e))


def _fmt_product(e: Product) -> tuple[str, int]:
    factors = list(e.factors)
    sign = ""
    coef = None
    if isinstance(factors[0], Num):
        c = factors.pop(0).value
        if c < 0:
            sign, c = "-", -c
        if not (c == 1 and not isinstance(c, float)):
            coef = c
    num = [f for f in factors if not (isinstance(f, Power) and f.exponent == Num(-1))]
    den = [f.base for f in factors if isinstance(f, Power) and f.exponent == Num(-1)]
    pieces = []
    if coef is not None:
        pieces.append(_num_str(coef))
    pieces.extend(_wrap(f, _POW) for f in num)
    s = "*".join(pieces) if pieces else "1"
    for d in den:
        s += "/" + _wrap(d, _POW if not isinstance(d, Num) else _ATOM)
    if sign:
        return sign + s, _NEG
    return s, _PROD
