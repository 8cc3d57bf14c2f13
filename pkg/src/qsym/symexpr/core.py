"""Expression nodes and canonicalizing constructors.

Two canonicalization strengths share one set of constructors:

* light (``full=False``): flatten Sum/Product, fold numeric literals, drop
  additive zeros and multiplicative ones, ``0*x -> 0``, reduce powers of ``i``,
  order children. Used by parsing and by the Python operator overloads.
* full (``full=True``): everything above plus the bounded rewrite set used by
  :func:`qsym.symexpr.simplify` (like-term collection, exponent merging,
  ``sin^2+cos^2``, conj distribution, exact trig values at multiples of pi/12).
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import numpy as np

from ..errors import DomainError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "conj", "abs")
DOMAINS = ("real", "complex", "unit")

# sort ranks: literals < i < pi < symbols < compound nodes
_R_NUM, _R_I, _R_PI, _R_SYM, _R_SUM, _R_PROD, _R_POW, _R_FN = range(8)
_NUM_TYPE_ORDER = {int: 0, Fraction: 1, float: 2}


class Expr:
    """Immutable expression node. Equality is structural; ordering is total."""

    __slots__ = ("_key", "_hash")

    def _make_key(self) -> tuple:
        raise NotImplementedError

    @property
    def key(self) -> tuple:
        try:
            return self._key
        except AttributeError:
            k = self._make_key()
            object.__setattr__(self, "_key", k)
            return k

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (Number, np.number)):
                return self == as_expr(other)
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash(self.key)
            object.__setattr__(self, "_hash", h)
            return h

    def __lt__(self, other: Expr) -> bool:
        return self.key < other.key

    # arithmetic builds light-canonical trees
    def __add__(self, other):
        return add((self, as_expr(other)))

    def __radd__(self, other):
        return add((as_expr(other), self))

    def __sub__(self, other):
        return add((self, mul((MINUS_ONE, as_expr(other)))))

    def __rsub__(self, other):
        return add((as_expr(other), mul((MINUS_ONE, self))))

    def __mul__(self, other):
        return mul((self, as_expr(other)))

    def __rmul__(self, other):
        return mul((as_expr(other), self))

    def __truediv__(self, other):
        return mul((self, power(as_expr(other), MINUS_ONE)))

    def __rtruediv__(self, other):
        return mul((as_expr(other), power(self, MINUS_ONE)))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return mul((MINUS_ONE, self))

    def __pos__(self):
        return self

    def conjugate(self):
        return fn("conj", self)

    def __repr__(self):
        from .printer import to_string

        return f"Expr({to_string(self)!r})"

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    @property
    def children(self) -> tuple:
        return ()

    @property
    def is_number(self) -> bool:
        return False


class Num(Expr):
    """Real numeric literal: int, Fraction (exact) or float."""

    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", _normalize_number(value))

    def _make_key(self):
        v = self.value
        return (_R_NUM, float(v), _NUM_TYPE_ORDER[type(v)], repr(v))

    @property
    def is_number(self) -> bool:
        return True

    @property
    def is_exact(self) -> bool:
        return not isinstance(self.value, float)


class ImagUnit(Expr):
    __slots__ = ()

    def _make_key(self):
        return (_R_I,)


class Pi(Expr):
    __slots__ = ()

    def _make_key(self):
        return (_R_PI,)


class Symbol(Expr):
    __slots__ = ("name", "domain")

    def __init__(self, name: str, domain: str = "real"):
        if domain not in DOMAINS:
            raise DomainError(f"unknown symbol domain {domain!r}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "domain", domain)

    def _make_key(self):
        return (_R_SYM, self.name, self.domain)


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))

    def _make_key(self):
        return (_R_SUM, tuple(t.key for t in self.terms))

    @property
    def children(self):
        return self.terms


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))

    def _make_key(self):
        return (_R_PROD, tuple(f.key for f in self.factors))

    @property
    def children(self):
        return self.factors


class Power(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: Expr):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    def _make_key(self):
        return (_R_POW, self.base.key, self.exponent.key)

    @property
    def children(self):
        return (self.base, self.exponent)


class Function(Expr):
    __slots__ = ("kind", "arg")

    def __init__(self, kind: str, arg: Expr):
        if kind not in FUNCTIONS:
            raise DomainError(f"unknown function {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "arg", arg)

    def _make_key(self):
        return (_R_FN, self.kind, self.arg.key)

    @property
    def children(self):
        return (self.arg,)


def _normalize_number(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else v
    if isinstance(v, float):
        return 0.0 if v == 0.0 else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return _normalize_number(float(v))
    raise TypeError(f"not a real literal: {v!r}")


I = ImagUnit()
PI = Pi()
ZERO = Num(0)
ONE = Num(1)
MINUS_ONE = Num(-1)
HALF = Num(Fraction(1, 2))


def as_expr(x) -> Expr:
    """Coerce Python/numpy numbers (including complex) and strings to Expr."""
    if isinstance(x, Expr):
        return x
    if isinstance(x, (bool, int, Fraction, float, np.integer, np.floating)):
        return Num(x)
    if isinstance(x, (complex, np.complexfloating)):
        return from_complex(complex(x))
    if isinstance(x, str):
        from .parser import parse_expr

        return parse_expr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def from_complex(z: complex) -> Expr:
    re, im = float(z.real), float(z.imag)
    if im == 0.0:
        return Num(re)
    imag = Product((Num(im), I)) if im != 1.0 else I
    if re == 0.0:
        return imag
    return Sum((Num(re), imag))


def symbol(name: str, domain: str = "real") -> Symbol:
    return Symbol(name, domain)


# ---------------------------------------------------------------- helpers


def _is_exact_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0


def _is_int(e: Expr) -> bool:
    return isinstance(e, Num) and isinstance(e.value, int)


def _finite(v) -> bool:
    if isinstance(v, float):
        return math.isfinite(v)
    if isinstance(v, complex):
        return math.isfinite(v.real) and math.isfinite(v.imag)
    return True


def _num_pow(b, e):
    """Fold b**e for real literals; None when the result is not safely foldable."""
    try:
        if isinstance(e, int) and not isinstance(b, float):
            if b == 0 and e < 0:
                return None
            return Fraction(b) ** e if e < 0 else b**e
        if isinstance(e, Fraction) and not isinstance(b, float):
            return None
        if b == 0:
            if e > 0:
                return 0.0 if isinstance(b, float) or isinstance(e, float) else 0
            return None
        r = complex(b) ** complex(e) if (b < 0 and not _int_valued(e)) else float(b) ** float(e)
    except (OverflowError, ZeroDivisionError, ValueError):
        return None
    if not _finite(r):
        return None
    return r


def _int_valued(v) -> bool:
    return float(v).is_integer()


def free_symbols(e: Expr) -> frozenset:
    return _free_symbols(e)


@lru_cache(maxsize=1 << 16)
def _free_symbols(e: Expr) -> frozenset:
    if isinstance(e, Symbol):
        return frozenset((e,))
    out = frozenset()
    for c in e.children:
        out |= _free_symbols(c)
    return out


def free_symbol_names(e: Expr) -> frozenset:
    return frozenset(s.name for s in _free_symbols(e))


def is_constant(e: Expr) -> bool:
    return not _free_symbols(e)


@lru_cache(maxsize=1 << 16)
def has_float(e: Expr) -> bool:
    if isinstance(e, Num):
        return isinstance(e.value, float)
    return any(has_float(c) for c in e.children)


# ---------------------------------------------------------------- intervals

_INF = math.inf


def _imul(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


@lru_cache(maxsize=1 << 16)
def real_bounds(e: Expr):
    """Conservative real interval (lo, hi) containing every value of ``e``.

    Returns None when ``e`` is not provably real.
    """
    if isinstance(e, Num):
        v = float(e.value)
        return (v, v)
    if isinstance(e, Pi):
        return (math.pi, math.pi)
    if isinstance(e, ImagUnit):
        return None
    if isinstance(e, Symbol):
        if e.domain == "real":
            return (-_INF, _INF)
        if e.domain == "unit":
            return (0.0, 1.0)
        return None
    if isinstance(e, Sum):
        lo = hi = 0.0
        for t in e.terms:
            b = real_bounds(t)
            if b is None:
                return None
            lo += b[0]
            hi += b[1]
        return (lo, hi)
    if isinstance(e, Product):
        lo = hi = 1.0
        for f in e.factors:
            b = real_bounds(f)
            if b is None:
                return None
            cands = [_imul(x, y) for x in (lo, hi) for y in b]
            lo, hi = min(cands), max(cands)
        return (lo, hi)
    if isinstance(e, Power):
        bb = real_bounds(e.base)
        if bb is None:
            return None
        if _is_int(e.exponent):
            n = e.exponent.value
            if n % 2 == 0:
                if bb[0] >= 0 or bb[1] <= 0:
                    ends = sorted(abs(x) for x in bb)
                    if n < 0 and ends[0] == 0:
                        return (0.0, _INF)
                    try:
                        vals = sorted((ends[0] ** n, ends[1] ** n))
                    except (OverflowError, ZeroDivisionError):
                        return (0.0, _INF)
                    return (vals[0], vals[1])
                return (0.0, _INF)
            return (-_INF, _INF)
        eb = real_bounds(e.exponent)
        if eb is not None and bb[0] >= 0:
            return (0.0, _INF)
        return None
    if isinstance(e, Function):
        k = e.kind
        if k == "abs":
            return (0.0, _INF)
        ab = real_bounds(e.arg)
        if ab is None:
            return None
        if k in ("sin", "cos"):
            return (-1.0, 1.0)
        if k == "exp":
            try:
                return (math.exp(ab[0]) if ab[0] > -_INF else 0.0, math.exp(ab[1]) if ab[1] < _INF else _INF)
            except OverflowError:
                return (0.0, _INF)
        if k == "sqrt":
            if ab[0] >= 0:
                return (math.sqrt(ab[0]), math.sqrt(ab[1]) if ab[1] < _INF else _INF)
            return None
        if k == "conj":
            return ab
    return None


def is_real(e: Expr) -> bool:
    return real_bounds(e) is not None


def is_nonnegative(e: Expr) -> bool:
    b = real_bounds(e)
    return b is not None and b[0] >= 0


# ---------------------------------------------------------------- constructors


def _coef_and_rest(term: Expr):
    """Split a term into (numeric coefficient, non-numeric remainder or None)."""
    if isinstance(term, Num):
        return term.value, None
    if isinstance(term, Product) and isinstance(term.factors[0], Num):
        rest = term.factors[1:]
        return term.factors[0].value, (rest[0] if len(rest) == 1 else Product(rest))
    return 1, term


def _with_coef(c, rest: Expr | None) -> Expr:
    if rest is None:
        return Num(c)
    if c == 1 and not isinstance(c, float):
        return rest
    if c == 0 and not isinstance(c, float):
        return ZERO
    if isinstance(rest, Product):
        return Product((Num(c),) + rest.factors)
    return Product((Num(c), rest))


def add(terms, full: bool = False) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const = 0
    saw_const = False
    others: list[Expr] = []
    for t in flat:
        if isinstance(t, Num):
            const = const + t.value
            saw_const = True
        else:
            others.append(t)
    if not _finite(const):
        return Sum(sorted(flat))
    if full:
        others = _collect(others)
        if others and isinstance(others[0], Num):
            const = const + others[0].value
            others = others[1:]
    if not others:
        return Num(const) if saw_const or full else ZERO
    out = sorted(others)
    if const != 0:
        out.insert(0, Num(const))
    if len(out) == 1:
        return out[0]
    return Sum(out)


def _collect(terms: list[Expr]) -> list[Expr]:
    """Like-term collection and the sin^2+cos^2 rule; returns term list."""
    acc: dict[Expr | None, object] = {}
    order: list[Expr | None] = []
    for t in terms:
        c, rest = _coef_and_rest(t)
        if rest in acc:
            acc[rest] = acc[rest] + c
        else:
            acc[rest] = c
            order.append(rest)
    changed = True
    while changed:
        changed = False
        for rest in list(order):
            if rest is None or rest not in acc:
                continue
            for idx, sq in _trig_square_sites(rest, "sin"):
                partner = _replace_factor(rest, idx, Power(Function("cos", sq.base.arg), Num(2)))
                if partner in acc and acc[partner] == acc[rest]:
                    c = acc.pop(rest)
                    acc.pop(partner)
                    order.remove(rest)
                    order.remove(partner)
                    reduced = _remove_factor(rest, idx)
                    if reduced in acc:
                        acc[reduced] = acc[reduced] + c
                    else:
                        acc[reduced] = c
                        order.append(reduced)
                    changed = True
                    break
            if changed:
                break
    out = [_with_coef(acc[rest], rest) for rest in order if acc[rest] != 0]
    return sorted(out)


def _factors_of(e: Expr) -> tuple:
    return e.factors if isinstance(e, Product) else (e,)


def _trig_square_sites(rest: Expr, kind: str):
    for i, f in enumerate(_factors_of(rest)):
        if (
            isinstance(f, Power)
            and f.exponent == Num(2)
            and isinstance(f.base, Function)
            and f.base.kind == kind
        ):
            yield i, f


def _replace_factor(rest: Expr, idx: int, new: Expr) -> Expr:
    fs = list(_factors_of(rest))
    fs[idx] = new
    return fs[0] if len(fs) == 1 else Product(sorted(fs))


def _remove_factor(rest: Expr, idx: int):
    fs = list(_factors_of(rest))
    del fs[idx]
    if not fs:
        return None
    return fs[0] if len(fs) == 1 else Product(fs)


def mul(factors, full: bool = False) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        if isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    coef = 1
    i_count = 0
    others: list[Expr] = []
    for f in flat:
        if isinstance(f, Num):
            coef = coef * f.value
        elif isinstance(f, ImagUnit):
            i_count += 1
        else:
            others.append(f)
    if not _finite(coef):
        return Product(sorted(flat))
    if coef == 0:
        return Num(coef)
    i_count %= 4
    if i_count >= 2:
        coef = -coef
        i_count -= 2
    if i_count:
        others.append(I)
    if full:
        merged, extra = _merge_factors(others)
        coef = coef * extra
        others = []
        i_count = 0
        for f in merged:
            for g in _factors_of(f):
                if isinstance(g, Num):
                    coef = coef * g.value
                elif isinstance(g, ImagUnit):
                    i_count += 1
                else:
                    others.append(g)
        if not _finite(coef):
            return Product(sorted(flat))
        if coef == 0:
            return Num(coef)
        if i_count % 4 >= 2:
            coef = -coef
        if i_count % 2:
            others.append(I)
        if len(others) == 1 and isinstance(others[0], Sum) and not (coef == 1 and not isinstance(coef, float)):
            return add([mul((Num(coef), t), full=True) for t in others[0].terms], full=True)
    if not others:
        return Num(coef)
    out = sorted(others)
    if not (coef == 1 and not isinstance(coef, float)):
        out.insert(0, Num(coef))
    if len(out) == 1:
        return out[0]
    return Product(out)


def _merge_factors(factors: list[Expr]):
    """Group equal bases (adding exponents) and merge exp factors."""
    exps: list[Expr] = []
    groups: dict[Expr, list[Expr]] = {}
    order: list[Expr] = []
    for f in factors:
        if isinstance(f, Function) and f.kind == "exp":
            exps.append(f.arg)
            continue
        if isinstance(f, Power):
            b, e = f.base, f.exponent
        else:
            b, e = f, ONE
        if b in groups:
            groups[b].append(e)
        else:
            groups[b] = [e]
            order.append(b)
    out: list[Expr] = []
    extra = 1
    for b in order:
        es = groups[b]
        e = es[0] if len(es) == 1 else add(es, full=True)
        p = power(b, e, full=True) if len(es) > 1 else (b if e == ONE else Power(b, e))
        if isinstance(p, Num):
            extra = extra * p.value
        elif isinstance(p, Product):
            out.extend(p.factors)
        else:
            out.append(p)
    if exps:
        arg = exps[0] if len(exps) == 1 else add(exps, full=True)
        p = fn("exp", arg, full=True) if len(exps) > 1 else Function("exp", arg)
        if isinstance(p, Num):
            extra = extra * p.value
        elif isinstance(p, Product):
            out.extend(p.factors)
        elif isinstance(p, Sum):
            out.append(p)
        else:
            out.append(p)
    return out, extra


def power(base: Expr, exponent: Expr, full: bool = False) -> Expr:
    if isinstance(exponent, Num):
        ev = exponent.value
        if ev == 0:
            return ONE
        if ev == 1 and not isinstance(ev, float):
            return base
        if isinstance(base, Num):
            r = _num_pow(base.value, ev)
            if r is not None:
                return from_complex(r) if isinstance(r, complex) else Num(r)
        if isinstance(base, ImagUnit) and isinstance(ev, int):
            return (ONE, I, MINUS_ONE, Product((MINUS_ONE, I)))[ev % 4]
    if isinstance(base, Num) and base.value == 1 and not isinstance(base.value, float):
        return ONE
    if full:
        if _is_int(exponent):
            n = exponent.value
            if isinstance(base, Power):
                return power(base.base, mul((base.exponent, exponent), full=True), full=True)
            if isinstance(base, Product):
                return mul([power(f, exponent, full=True) for f in base.factors], full=True)
            if isinstance(base, Function):
                if base.kind == "sqrt" and n % 2 == 0:
                    return power(base.arg, Num(n // 2), full=True)
                if base.kind == "exp":
                    return fn("exp", mul((exponent, base.arg), full=True), full=True)
        if is_constant(base) and is_constant(exponent) and (has_float(base) or has_float(exponent)):
            return _fold_numeric(Power(base, exponent))
    return Power(base, exponent)


def _fold_numeric(e: Expr) -> Expr:
    from .evaluate import eval_numeric

    try:
        z = eval_numeric(e, {})
    except Exception:
        return e
    if not _finite(z):
        return e
    return from_complex(z)


# exact sin/cos at k*pi/12 for k multiple of 2 or 3
_SQRT_HALF = Function("sqrt", HALF)
_SQRT_3_4 = Function("sqrt", Num(Fraction(3, 4)))


def _sin_table(k: int):
    k %= 24
    table = {
        0: ZERO,
        2: HALF,
        3: _SQRT_HALF,
        4: _SQRT_3_4,
        6: ONE,
        8: _SQRT_3_4,
        9: _SQRT_HALF,
        10: HALF,
        12: ZERO,
    }
    if k in table:
        return table[k]
    if k > 12 and (k - 12) in table:
        return mul((MINUS_ONE, table[k - 12]))
    return None


def _pi_multiple(arg: Expr):
    """Return q (Fraction) if arg == q*pi exactly, else None."""
    if _is_exact_zero(arg):
        return Fraction(0)
    if isinstance(arg, Pi):
        return Fraction(1)
    if (
        isinstance(arg, Product)
        and len(arg.factors) == 2
        and isinstance(arg.factors[0], Num)
        and arg.factors[0].is_exact
        and isinstance(arg.factors[1], Pi)
    ):
        return Fraction(arg.factors[0].value)
    return None


def _i_pi_multiple(arg: Expr):
    """Return q if arg == q*i*pi exactly."""
    fs = _factors_of(arg)
    coef = Fraction(1)
    rest = []
    for f in fs:
        if isinstance(f, Num) and f.is_exact:
            coef *= Fraction(f.value)
        else:
            rest.append(f)
    if len(rest) == 2 and any(isinstance(f, ImagUnit) for f in rest) and any(isinstance(f, Pi) for f in rest):
        return coef
    return None


def _negative_coef(e: Expr) -> bool:
    if isinstance(e, Num):
        return e.value < 0
    if isinstance(e, Product) and isinstance(e.factors[0], Num):
        return e.factors[0].value < 0
    return False


def fn(kind: str, arg: Expr, full: bool = False) -> Expr:
    if kind not in FUNCTIONS:
        raise DomainError(f"unknown function {kind!r}")
    if kind == "conj":
        if isinstance(arg, Num) or isinstance(arg, Pi):
            return arg
        if isinstance(arg, ImagUnit):
            return Product((MINUS_ONE, I))
        if isinstance(arg, Function) and arg.kind == "conj":
            return arg.arg
        if isinstance(arg, Symbol) and arg.domain != "complex":
            return arg
    if isinstance(arg, Num):
        v = arg.value
        if not isinstance(v, float):
            if kind in ("sin",) and v == 0:
                return ZERO
            if kind in ("cos", "exp") and v == 0:
                return ONE
            if kind == "abs":
                return Num(abs(v))
            if kind == "sqrt":
                r = _exact_sqrt(v)
                if r is not None:
                    return r
        else:
            return _fold_numeric(Function(kind, arg))
    if full:
        r = _fn_full(kind, arg)
        if r is not None:
            return r
        if is_constant(arg) and has_float(arg):
            return _fold_numeric(Function(kind, arg))
    return Function(kind, arg)


def _exact_sqrt(v):
    v = Fraction(v)
    if v < 0:
        r = _exact_sqrt(-v)
        base = r if r is not None else Function("sqrt", Num(-v))
        return mul((base, I))
    n, d = v.numerator, v.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Num(Fraction(rn, rd))
    return None


def _fn_full(kind: str, arg: Expr):
    if kind in ("sin", "cos"):
        q = _pi_multiple(arg)
        if q is not None and (q * 12).denominator == 1:
            k = int(q * 12)
            val = _sin_table(k if kind == "sin" else k + 6)
            if val is not None:
                return val
        if _negative_coef(arg):
            pos = mul((MINUS_ONE, arg), full=True)
            if kind == "cos":
                return fn("cos", pos, full=True)
            return mul((MINUS_ONE, fn("sin", pos, full=True)), full=True)
        return None
    if kind == "exp":
        q = _i_pi_multiple(arg)
        if q is not None and (q * 12).denominator == 1:
            k = int(q * 12)
            c, s = _sin_table(k + 6), _sin_table(k)
            if c is not None and s is not None:
                return add((c, mul((s, I), full=True)), full=True)
        return None
    if kind == "sqrt":
        return None
    if kind == "abs":
        if is_nonnegative(arg):
            return arg
        b = real_bounds(arg)
        if b is not None and b[1] <= 0:
            return mul((MINUS_ONE, arg), full=True)
        return None
    if kind == "conj":
        return _conj_full(arg)
    return None


def _conj_full(arg: Expr):
    if is_real(arg):
        return arg
    if isinstance(arg, ImagUnit):
        return Product((MINUS_ONE, I))
    if isinstance(arg, Sum):
        return add([fn("conj", t, full=True) for t in arg.terms], full=True)
    if isinstance(arg, Product):
        return mul([fn("conj", f, full=True) for f in arg.factors], full=True)
    if isinstance(arg, Power):
        if _is_int(arg.exponent):
            return power(fn("conj", arg.base, full=True), arg.exponent, full=True)
        if is_nonnegative(arg.base) and is_real(arg.exponent):
            return arg
        return None
    if isinstance(arg, Function):
        if arg.kind == "conj":
            return arg.arg
        if arg.kind in ("exp", "sin", "cos"):
            return fn(arg.kind, fn("conj", arg.arg, full=True), full=True)
        if arg.kind == "abs":
            return arg
        if arg.kind == "sqrt" and is_nonnegative(arg.arg):
            return arg
    return None


def rebuild(e: Expr, full: bool) -> Expr:
    """Re-run the constructors bottom-up at the given strength."""
    if isinstance(e, (Num, ImagUnit, Pi, Symbol)):
        return e
    if isinstance(e, Sum):
        return add([rebuild(t, full) for t in e.terms], full)
    if isinstance(e, Product):
        return mul([rebuild(f, full) for f in e.factors], full)
    if isinstance(e, Power):
        return power(rebuild(e.base, full), rebuild(e.exponent, full), full)
    if isinstance(e, Function):
        return fn(e.kind, rebuild(e.arg, full), full)
    raise TypeError(type(e))


def canonicalize(e: Expr) -> Expr:
    return rebuild(e, full=False)


@lru_cache(maxsize=1 << 17)
def _simplify_once(e: Expr) -> Expr:
    if isinstance(e, (Num, ImagUnit, Pi, Symbol)):
        return e
    if isinstance(e, Sum):
        return add([_simplify_once(t) for t in e.terms], True)
    if isinstance(e, Product):
        return mul([_simplify_once(f) for f in e.factors], True)
    if isinstance(e, Power):
        return power(_simplify_once(e.base), _simplify_once(e.exponent), True)
    return fn(e.kind, _simplify_once(e.arg), True)


def simplify(e) -> Expr:
    """Apply the bounded rewrite set until a fixed point (idempotent, total)."""
    e = as_expr(e)
    for _ in range(16):
        s = _simplify_once(e)
        if s == e:
            return s
        e = s
    return e
