"""Dense matrices and vectors over SymExpr.

A :class:`SymMatrix` wraps a 2-D numpy array in one of two storages: complex128
when every entry is a plain double (the numeric fast path) or object dtype
holding :class:`~qsym.symexpr.Expr` entries. Both behave as one type; indexing
always yields ``Expr`` and mixed operations promote to object storage.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DomainError, IndexOutOfRange, NotNumeric, ShapeError
from .symexpr import (
    HALF,
    I,
    ONE,
    ZERO,
    Binding,
    Expr,
    Num,
    Symbol,
    as_expr,
    eval_numeric,
    free_symbols,
    from_complex,
    real_bounds,
    simplify,
    substitute,
)
from .symexpr.core import Function, add as _add, fn, mul as _mul

_as_expr_array = np.frompyfunc(as_expr, 1, 1)
_simplify_array = np.frompyfunc(simplify, 1, 1)


def _to_object(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return arr
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for k, z in enumerate(arr.reshape(-1)):
        flat[k] = from_complex(complex(z))
    return out


class SymMatrix:
    """Dense row-major matrix whose entries are SymExpr."""

    __slots__ = ("data", "_numeric_cache")
    __array_priority__ = 1000
    __hash__ = None

    def __init__(self, data):
        if isinstance(data, SymMatrix):
            arr = data.data
        elif isinstance(data, np.ndarray) and data.dtype.kind in "biufc":
            arr = np.asarray(data, dtype=np.complex128)
        else:
            arr = np.asarray(data, dtype=object)
            if arr.dtype != object:
                arr = arr.astype(object)
            arr = _as_expr_array(arr).astype(object) if arr.size else arr
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"matrix must be 2-D with positive extents, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "_numeric_cache", None)

    def __setattr__(self, name, value):
        raise AttributeError("SymMatrix is immutable")

    # -- shape / access
    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def is_symbolic(self) -> bool:
        return self.data.dtype == object

    @property
    def entries(self) -> list[Expr]:
        return [self[i, j] for i in range(self.rows) for j in range(self.cols)]

    def __getitem__(self, idx):
        i, j = idx
        v = self.data[i, j]
        return v if isinstance(v, Expr) else from_complex(complex(v))

    def object_array(self) -> np.ndarray:
        return _to_object(self.data)

    def free_symbols(self) -> frozenset:
        if not self.is_symbolic:
            return frozenset()
        out = frozenset()
        for e in self.data.reshape(-1):
            out |= free_symbols(e)
        return out

    def is_numeric(self) -> bool:
        """True when every entry is a constant (evaluable without a binding)."""
        return not self.free_symbols()

    def to_numpy(self, binding=None) -> np.ndarray:
        """Complex128 array; symbolic entries are evaluated under ``binding``."""
        if not self.is_symbolic:
            return self.data
        if binding is None and self._numeric_cache is not None:
            return self._numeric_cache
        out = np.empty(self.shape, dtype=np.complex128)
        flat = out.reshape(-1)
        b = binding or {}
        try:
            for k, e in enumerate(self.data.reshape(-1)):
                flat[k] = eval_numeric(e, b)
        except KeyError as exc:
            raise NotNumeric(f"matrix has unbound symbol {exc}") from exc
        if binding is None:
            object.__setattr__(self, "_numeric_cache", out)
        return out

    def __array__(self, dtype=None, copy=None):
        arr = self.to_numpy() if self.is_numeric() else self.data
        return arr if dtype is None else arr.astype(dtype)

    # -- structure
    def equals(self, other: "SymMatrix") -> bool:
        """Structural equality of entries (``1`` and ``1.0`` differ)."""
        other = as_matrix(other)
        if self.shape != other.shape:
            return False
        if not self.is_symbolic and not other.is_symbolic:
            return bool(np.array_equal(self.data, other.data))
        return all(a == b for a, b in zip(self.object_array().reshape(-1), other.object_array().reshape(-1)))

    __eq__ = equals

    def allclose(self, other, atol: float = 1e-12, binding=None) -> bool:
        a = self.to_numpy(binding)
        b = as_matrix(other).to_numpy(binding)
        return a.shape == b.shape and bool(np.allclose(a, b, atol=atol, rtol=0))

    def simplify(self) -> "SymMatrix":
        if not self.is_symbolic:
            return self
        return type(self)._wrap(_simplify_array(self.data).astype(object))

    def substitute(self, binding) -> "SymMatrix":
        if not self.is_symbolic:
            return self
        b = binding if isinstance(binding, Binding) else Binding(binding)
        out = np.empty(self.shape, dtype=object)
        for idx, e in np.ndenumerate(self.data):
            out[idx] = substitute(e, b)
        return type(self)._wrap(out)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "SymMatrix":
        m = cls.__new__(cls)
        object.__setattr__(m, "data", arr)
        object.__setattr__(m, "_numeric_cache", None)
        return m

    # -- algebra
    @property
    def T(self) -> "SymMatrix":
        return SymMatrix._wrap(self.data.T.copy())

    def conj(self) -> "SymMatrix":
        return SymMatrix._wrap(np.conjugate(self.data) if not self.is_symbolic else _conj_obj(self.data))

    def dagger(self) -> "SymMatrix":
        return dagger(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1, other))

    def __neg__(self):
        return scale(-1, self)

    def __mul__(self, scalar):
        return scale(scalar, self)

    __rmul__ = __mul__

    def __repr__(self):
        if not self.is_symbolic:
            return f"SymMatrix(numeric {self.rows}x{self.cols})"
        rows = ["[" + ", ".join(str(e) for e in row) + "]" for row in self.data]
        return "SymMatrix([" + ", ".join(rows) + "])"


class SymVector(SymMatrix):
    """Column vector; interchangeable with a dim x 1 SymMatrix."""

    __slots__ = ()

    def __init__(self, data):
        super().__init__(data)
        if self.cols != 1:
            raise ShapeError(f"vector must be a single column, got shape {self.shape}")

    @property
    def dim(self) -> int:
        return self.rows

    def __getitem__(self, idx):
        if isinstance(idx, tuple):
            return super().__getitem__(idx)
        return super().__getitem__((idx, 0))

    def to_numpy(self, binding=None) -> np.ndarray:
        return super().to_numpy(binding)

    def vector(self, binding=None) -> np.ndarray:
        return self.to_numpy(binding).reshape(-1)


def _conj_obj(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx, e in np.ndenumerate(arr):
        out[idx] = fn("conj", e)
    return out


def as_matrix(x) -> SymMatrix:
    return x if isinstance(x, SymMatrix) else SymMatrix(x)


def as_vector(x) -> SymVector:
    if isinstance(x, SymVector):
        return x
    m = as_matrix(x)
    return SymVector._wrap(m.data.reshape(-1, 1)) if m.cols == 1 or m.rows == 1 else SymVector(m.data)


def _pair(a: SymMatrix, b: SymMatrix):
    if a.is_symbolic or b.is_symbolic:
        return a.object_array(), b.object_array()
    return a.data, b.data


# ---------------------------------------------------------------- constructors


def ket(index: int, dim: int) -> SymVector:
    if not 0 <= index < dim:
        raise IndexOutOfRange(f"basis index {index} outside 0..{dim - 1}")
    arr = np.array([ZERO] * dim, dtype=object).reshape(-1, 1)
    arr[index, 0] = ONE
    return SymVector._wrap(arr)


def bra(index: int, dim: int) -> SymMatrix:
    return dagger(ket(index, dim))


def proj(index: int, dim: int) -> SymMatrix:
    return matmul(ket(index, dim), bra(index, dim))


def identity(dim: int, exact: bool = True) -> SymMatrix:
    if not exact:
        return SymMatrix(np.eye(dim, dtype=np.complex128))
    arr = np.full((dim, dim), ZERO, dtype=object)
    for k in range(dim):
        arr[k, k] = ONE
    return SymMatrix._wrap(arr)


def zeros(rows: int, cols: int) -> SymMatrix:
    return SymMatrix._wrap(np.full((rows, cols), ZERO, dtype=object))


def _entry_name(base: str, r: int, c: int | None, big: bool) -> str:
    if c is None:
        return f"{base}{r}" if not big else f"{base}_{r}"
    return f"{base}{r}{c}" if not big else f"{base}_{r}_{c}"


def symbolic_matrix(basename: str, rows: int, cols: int = 1, kind: str = "general") -> SymMatrix:
    """Matrix of fresh symbols named ``basename`` + row + column index.

    kinds: ``general`` (complex entries), ``vector`` (complex column),
    ``hermitian`` (real diagonal, lower triangle = conj of upper) and
    ``bistochastic`` (free real (n-1)x(n-1) block; last row and column fixed
    so every row and column sums to 1).
    """
    big = rows > 10 or cols > 10
    if kind == "vector":
        if cols != 1:
            raise ShapeError("vector kind requires cols == 1")
        return SymVector._wrap(
            np.array([Symbol(_entry_name(basename, r, None, big), "complex") for r in range(rows)], dtype=object).reshape(-1, 1)
        )
    if kind == "general":
        arr = np.empty((rows, cols), dtype=object)
        for r in range(rows):
            for c in range(cols):
                arr[r, c] = Symbol(_entry_name(basename, r, c, big), "complex")
        return SymMatrix._wrap(arr)
    if rows != cols:
        raise ShapeError(f"{kind} matrix must be square, got {rows}x{cols}")
    n = rows
    arr = np.empty((n, n), dtype=object)
    if kind == "hermitian":
        for r in range(n):
            arr[r, r] = Symbol(_entry_name(basename, r, r, big), "real")
            for c in range(r + 1, n):
                s = Symbol(_entry_name(basename, r, c, big), "complex")
                arr[r, c] = s
                arr[c, r] = fn("conj", s)
        return SymMatrix._wrap(arr)
    if kind == "bistochastic":
        for r in range(n - 1):
            for c in range(n - 1):
                arr[r, c] = Symbol(_entry_name(basename, r, c, big), "real")
        for r in range(n - 1):
            arr[r, n - 1] = simplify(ONE - _add([arr[r, c] for c in range(n - 1)]))
        for c in range(n - 1):
            arr[n - 1, c] = simplify(ONE - _add([arr[r, c] for r in range(n - 1)]))
        arr[n - 1, n - 1] = simplify(ONE - _add([arr[n - 1, c] for c in range(n - 1)]))
        return SymMatrix._wrap(arr)
    raise DomainError(f"unknown symbolic matrix kind {kind!r}")


def symbolic_vector(basename: str, dim: int) -> SymVector:
    return symbolic_matrix(basename, dim, 1, "vector")


def special_unitary(theta, alpha, beta) -> SymMatrix:
    """SU(2) element [[e^{ia}cos t, e^{ib}sin t], [-e^{-ib}sin t, e^{-ia}cos t]]."""
    t, a, b = (as_expr(x) for x in (theta, alpha, beta))
    for p in (t, a, b):
        if real_bounds(p) is None:
            raise DomainError(f"special_unitary parameter {p} is not real")
    ea = fn("exp", _mul((I, a)))
    eb = fn("exp", _mul((I, b)))
    ema = fn("exp", _mul((Num(-1), I, a)))
    emb = fn("exp", _mul((Num(-1), I, b)))
    c, s = fn("cos", t), fn("sin", t)
    arr = np.array(
        [[_mul((ea, c)), _mul((eb, s))], [_mul((Num(-1), emb, s)), _mul((ema, c))]],
        dtype=object,
    )
    return SymMatrix._wrap(arr).simplify()


# ---------------------------------------------------------------- algebra


def kronecker(*factors) -> SymMatrix:
    if len(factors) == 1 and isinstance(factors[0], (list, tuple)):
        factors = tuple(factors[0])
    if len(factors) < 2:
        raise ShapeError("kronecker needs at least two factors")
    ms = [as_matrix(f) for f in factors]
    if any(m.is_symbolic for m in ms):
        arrs = [m.object_array() for m in ms]
    else:
        arrs = [m.data for m in ms]
    return SymMatrix._wrap(reduce(np.kron, arrs))


def matmul(a, b) -> SymMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    x, y = _pair(a, b)
    return SymMatrix._wrap(x @ y)


def dagger(a) -> SymMatrix:
    a = as_matrix(a)
    if a.is_symbolic:
        return SymMatrix._wrap(_conj_obj(a.data).T.copy())
    return SymMatrix._wrap(a.data.conj().T.copy())


def trace(a) -> Expr:
    a = as_matrix(a)
    if a.rows != a.cols:
        raise ShapeError(f"trace of non-square {a.shape}")
    if not a.is_symbolic:
        return from_complex(complex(np.trace(a.data)))
    return _add([a.data[k, k] for k in range(a.rows)])


def scale(e, a) -> SymMatrix:
    a = as_matrix(a)
    if not isinstance(e, Expr) and not a.is_symbolic and isinstance(e, (int, float, complex, np.number)):
        return SymMatrix._wrap(complex(e) * a.data)
    e = as_expr(e)
    return SymMatrix._wrap(np.vectorize(lambda x: _mul((e, x)), otypes=[object])(a.object_array()))


def add(a, b) -> SymMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"cannot add {a.shape} and {b.shape}")
    x, y = _pair(a, b)
    return SymMatrix._wrap(x + y)


def simplify_matrix(a) -> SymMatrix:
    return as_matrix(a).simplify()


def is_zero_matrix(a) -> bool:
    a = as_matrix(a).simplify()
    if not a.is_symbolic:
        return not np.any(a.data)
    return all(e == ZERO for e in a.data.reshape(-1))


def sqrt_half() -> Expr:
    return Function("sqrt", HALF)


__all__ = [
    "SymMatrix", "SymVector", "add", "as_matrix", "as_vector", "bra", "dagger", "identity",
    "is_zero_matrix", "ket", "kronecker", "matmul", "proj", "scale", "simplify_matrix",
    "special_unitary", "sqrt_half", "symbolic_matrix", "symbolic_vector", "trace", "zeros",
]

