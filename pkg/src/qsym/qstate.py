"""States over multi-subsystem registers and their structural maps.

Index convention: subsystem 0 is leftmost in the Kronecker product, so it is
the most significant digit of a basis index. For two qubits the basis order is
``|00>, |01>, |10>, |11>`` and index ``(i1, i2)`` flattens to ``i1 * d2 + i2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DomainError, EmptyKeepSet, IndexOutOfRange, NotNumeric, ShapeError
from .symlinalg import SymMatrix, as_matrix, as_vector, dagger, matmul
from .symexpr import simplify

TOL = 1e-9


@dataclass(frozen=True)
class RegisterShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ShapeError(f"subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def qubits(cls, n: int) -> "RegisterShape":
        return cls((2,) * n)

    @classmethod
    def for_dim(cls, dim: int) -> "RegisterShape":
        """Qubit register when ``dim`` is a power of two, else one subsystem."""
        n = dim.bit_length() - 1
        if dim >= 2 and 1 << n == dim:
            return cls.qubits(n)
        return cls((dim,))

    @property
    def total(self) -> int:
        return reduce(lambda a, b: a * b, self.dims, 1)

    def __len__(self):
        return len(self.dims)

    def check_indices(self, idx) -> tuple[int, ...]:
        out = tuple(sorted({int(k) for k in idx}))
        for k in out:
            if not 0 <= k < len(self.dims):
                raise IndexOutOfRange(f"subsystem {k} outside 0..{len(self.dims) - 1}")
        return out


class QState:
    """A pure (vector) or mixed (density matrix) state on a register."""

    __slots__ = ("shape", "body", "kind")

    def __init__(self, body, shape: RegisterShape | tuple | None = None, kind: str | None = None, validate: bool = True):
        m = as_matrix(body) if not isinstance(body, np.ndarray) else SymMatrix(body)
        if kind is None:
            kind = "pure" if m.cols == 1 else "mixed"
        if kind == "pure":
            m = as_vector(m)
            dim = m.rows
        elif kind == "mixed":
            if m.rows != m.cols:
                raise ShapeError(f"density matrix must be square, got {m.shape}")
            dim = m.rows
        else:
            raise DomainError(f"unknown state kind {kind!r}")
        if shape is None:
            shape = RegisterShape.for_dim(dim)
        elif not isinstance(shape, RegisterShape):
            shape = RegisterShape(tuple(shape))
        if shape.total != dim:
            raise ShapeError(f"register {shape.dims} has dimension {shape.total}, body has {dim}")
        self.shape = shape
        self.body = m
        self.kind = kind
        if validate and not m.is_symbolic:
            self.validate()

    @classmethod
    def pure(cls, vec, shape=None, validate: bool = True) -> "QState":
        return cls(vec, shape, "pure", validate)

    @classmethod
    def mixed(cls, rho, shape=None, validate: bool = True) -> "QState":
        return cls(rho, shape, "mixed", validate)

    @classmethod
    def basis(cls, index: int, shape) -> "QState":
        shape = shape if isinstance(shape, RegisterShape) else RegisterShape(tuple(shape))
        if not 0 <= index < shape.total:
            raise IndexOutOfRange(f"basis index {index} outside 0..{shape.total - 1}")
        v = np.zeros(shape.total, dtype=np.complex128)
        v[index] = 1.0
        return cls(v, shape, "pure", validate=False)

    @classmethod
    def zero(cls, n_qubits: int) -> "QState":
        return cls.basis(0, RegisterShape.qubits(n_qubits))

    @property
    def dim(self) -> int:
        return self.shape.total

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    @property
    def is_symbolic(self) -> bool:
        return bool(self.body.free_symbols())

    def numeric(self, binding=None) -> np.ndarray:
        """Vector (pure) or matrix (mixed) as complex128."""
        try:
            arr = self.body.to_numpy(binding)
        except NotNumeric:
            raise
        return arr.reshape(-1) if self.is_pure else arr

    def density(self) -> SymMatrix:
        if not self.is_pure:
            return self.body
        if not self.body.is_symbolic:
            v = self.body.data.reshape(-1)
            return SymMatrix(np.outer(v, v.conj()))
        return matmul(self.body, dagger(self.body))

    def to_mixed(self) -> "QState":
        return self if not self.is_pure else QState(self.density(), self.shape, "mixed", validate=False)

    def bind(self, binding) -> "QState":
        return QState(self.body.substitute(binding), self.shape, self.kind)

    def validate(self) -> "QState":
        if self.body.free_symbols():
            raise NotNumeric("state has free symbols; bind before validating")
        a = self.numeric()
        if self.is_pure:
            nrm = float(np.vdot(a, a).real)
            if abs(nrm - 1.0) > TOL:
                raise DomainError(f"state vector norm^2 is {nrm}, not 1")
            return self
        if np.max(np.abs(a - a.conj().T)) > TOL:
            raise DomainError("density matrix is not Hermitian")
        tr = complex(np.trace(a))
        if abs(tr - 1.0) > TOL:
            raise DomainError(f"density matrix trace is {tr}, not 1")
        lo = float(np.linalg.eigvalsh(a).min())
        if lo < -TOL:
            raise DomainError(f"density matrix has negative eigenvalue {lo}")
        return self

    def __repr__(self):
        return f"QState({self.kind}, dims={self.shape.dims})"


def as_state(x, shape=None) -> QState:
    return x if isinstance(x, QState) else QState(x, shape)


def _tensor(arr: np.ndarray, dims) -> np.ndarray:
    return arr.reshape(tuple(dims) + tuple(dims))


def partial_trace(rho, keep) -> QState:
    """Reduced density matrix on ``keep`` (kept subsystems stay in register order)."""
    st = as_state(rho)
    keep = tuple(keep)
    if not keep:
        raise EmptyKeepSet("partial_trace needs at least one kept subsystem")
    keep = st.shape.check_indices(keep)
    dims = st.shape.dims
    n = len(dims)
    gone = [k for k in range(n) if k not in keep]
    kdims = tuple(dims[k] for k in keep)
    kd = reduce(lambda a, b: a * b, kdims, 1)
    new_shape = RegisterShape(kdims)
    if st.is_pure and not st.body.is_symbolic:
        psi = st.body.data.reshape(dims)
        psi = np.moveaxis(psi, keep, range(len(keep))).reshape(kd, -1)
        return QState(psi @ psi.conj().T, new_shape, "mixed", validate=False)
    mat = st.density()
    if not mat.is_symbolic:
        t = _tensor(mat.data, dims)
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        rows = [letters[k] for k in range(n)]
        cols = [letters[k] if k in gone else letters[n + k] for k in range(n)]
        out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
        red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
        return QState(red.reshape(kd, kd), new_shape, "mixed", validate=False)
    t = _tensor(mat.data, dims)
    # move traced axes to the end and sum their diagonals one subsystem at a time
    for k in sorted(gone, reverse=True):
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=nk + k)
    red = t.reshape(kd, kd)
    red = np.vectorize(simplify, otypes=[object])(red)
    return QState(SymMatrix(red), new_shape, "mixed", validate=False)


def partial_transpose(rho, subsystems) -> SymMatrix:
    st = as_state(rho)
    subs = st.shape.check_indices(subsystems)
    dims = st.shape.dims
    n = len(dims)
    mat = st.density()
    t = _tensor(mat.data, dims)
    axes = list(range(2 * n))
    for k in subs:
        axes[k], axes[n + k] = axes[n + k], axes[k]
    out = np.transpose(t, axes).reshape(st.dim, st.dim).copy()
    return SymMatrix._wrap(out)


def reshuffle(m, dims: tuple[int, int] | None = None, col_dims: tuple[int, int] | None = None) -> SymMatrix:
    """Realignment: ``out[(i1,j1),(i2,j2)] = in[(i1,i2),(j1,j2)]``.

    ``dims = (d1, d2)`` declares the bipartite factorisation of the row index
    and ``col_dims`` that of the column index (default: same as ``dims``).
    Without ``dims`` a d^2 x d^2 matrix is split evenly.
    """
    m = as_matrix(m)
    if dims is None:
        if m.rows != m.cols:
            raise ShapeError(f"reshuffle needs declared dims for shape {m.shape}")
        d = int(round(m.rows ** 0.5))
        dims = (d, d)
    d1, d2 = (int(x) for x in dims)
    c1, c2 = (int(x) for x in (col_dims if col_dims is not None else dims))
    if min(d1, d2, c1, c2) < 1 or d1 * d2 != m.rows or c1 * c2 != m.cols:
        raise ShapeError(f"shape {m.shape} does not factor as ({d1}x{d2}) by ({c1}x{c2})")
    t = m.data.reshape(d1, d2, c1, c2)
    out = t.transpose(0, 2, 1, 3).reshape(d1 * c1, d2 * c2).copy()
    return SymMatrix._wrap(out)


def _numeric_state(x) -> tuple[np.ndarray, bool]:
    st = as_state(x)
    if st.body.free_symbols():
        raise NotNumeric("fidelity requires numeric states")
    return st.numeric(), st.is_pure


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.where(w < 0, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def _fidelity_arrays(a: np.ndarray, a_pure: bool, b: np.ndarray, b_pure: bool) -> float:
    if a_pure and b_pure:
        return float(abs(np.vdot(a, b)) ** 2)
    if a_pure:
        return float(np.vdot(a, b @ a).real)
    if b_pure:
        return float(np.vdot(b, a @ b).real)
    # nuclear norm of sqrt(a) sqrt(b): SVD avoids taking square roots of
    # round-off eigenvalues when either state is rank deficient
    sv = np.linalg.svd(psd_sqrt(a) @ psd_sqrt(b), compute_uv=False)
    return float(np.sum(sv) ** 2)


def fidelity(rho, sigma) -> float:
    a, ap = _numeric_state(rho)
    b, bp = _numeric_state(sigma)
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"fidelity between dimensions {a.shape[0]} and {b.shape[0]}")
    return _fidelity_arrays(a, ap, b, bp)


def truncated_fidelity(rho, sigma, m: int) -> float:
    """Fidelity of the unnormalised rank-m principal part of ``rho`` with ``sigma``.

    Exactly ``m`` eigencomponents are kept; ties at the cut are resolved by
    the ordering returned by the Hermitian eigensolver.
    """
    a, ap = _numeric_state(rho)
    b, bp = _numeric_state(sigma)
    dim = a.shape[0]
    if b.shape[0] != dim:
        raise ShapeError(f"fidelity between dimensions {dim} and {b.shape[0]}")
    if not 1 <= m <= dim:
        raise ShapeError(f"truncation rank {m} outside 1..{dim}")
    if ap:
        return _fidelity_arrays(a, True, b, bp)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w, v = w[-m:], v[:, -m:]
    rho_m = (v * np.clip(w, 0.0, None)) @ v.conj().T
    return _fidelity_arrays(rho_m, False, b, bp)


__all__ = [
    "QState", "RegisterShape", "as_state", "fidelity", "partial_trace", "partial_transpose",
    "psd_sqrt", "reshuffle", "truncated_fidelity",
]

