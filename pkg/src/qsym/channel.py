"""Quantum channels in Kraus, superoperator and Choi form.

Conventions (shared with :func:`qsym.qstate.reshuffle`):

* ``vec`` stacks rows, so ``vec(A rho B) = (A kron B^T) vec(rho)`` and the
  superoperator of a Kraus set is ``M = sum_i K_i kron conj(K_i)``.
* The Choi matrix is ``reshuffle(M)`` with index order output (x) input:
  ``choi[(a,k),(b,l)] = M[(a,b),(k,l)] = sum_i K_i[a,k] conj(K_i[b,l])``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DomainError, NegativeEigenvalue, NonHermitianChoi, NotNumeric, ShapeError
from .qstate import QState, RegisterShape, as_state, reshuffle
from .symexpr import I, ONE, ZERO, Expr, Num, Symbol, as_expr, eval_numeric, is_constant, parse_expr, simplify
from .symexpr.core import fn, mul as _mul
from .symlinalg import SymMatrix, as_matrix, dagger, matmul

CHOI_CUTOFF = 1e-12
HERMITIAN_TOL = 1e-9
TP_TOL = 1e-9

def _simplified(m: SymMatrix) -> SymMatrix:
    return m.simplify() if m.is_symbolic else m


class Channel:
    """A linear map on operators, stored in whichever forms have been requested."""

    __slots__ = ("dim_in", "dim_out", "form", "trace_preserving", "_forms")

    def __init__(self, form: str, value, dim_in: int, dim_out: int, trace_preserving: bool = True, validate: bool = True):
        if form not in ("kraus", "super", "choi"):
            raise DomainError(f"unknown channel form {form!r}")
        self.dim_in = int(dim_in)
        self.dim_out = int(dim_out)
        self.form = form
        self.trace_preserving = bool(trace_preserving)
        self._forms = {form: value}
        if validate:
            self.validate()

    # -- constructors
    @classmethod
    def from_kraus(cls, kraus, trace_preserving: bool = True, validate: bool = True) -> "Channel":
        ks = [as_matrix(k) for k in kraus]
        if not ks:
            raise ShapeError("a Kraus list needs at least one operator")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise ShapeError("Kraus operators have inconsistent shapes")
        return cls("kraus", tuple(ks), shape[1], shape[0], trace_preserving, validate)

    @classmethod
    def from_superoperator(cls, m, dim_in: int | None = None, dim_out: int | None = None, trace_preserving: bool = True) -> "Channel":
        m = as_matrix(m)
        din = dim_in if dim_in is not None else _isqrt(m.cols)
        dout = dim_out if dim_out is not None else _isqrt(m.rows)
        if m.shape != (dout * dout, din * din):
            raise ShapeError(f"superoperator shape {m.shape} does not match dims {din}->{dout}")
        return cls("super", m, din, dout, trace_preserving, validate=False)

    @classmethod
    def from_choi(cls, c, dim_in: int | None = None, dim_out: int | None = None, trace_preserving: bool = True, validate: bool = True) -> "Channel":
        c = as_matrix(c)
        if c.rows != c.cols:
            raise ShapeError("Choi matrix must be square")
        din = dim_in if dim_in is not None else _isqrt(c.rows)
        dout = dim_out if dim_out is not None else c.rows // din
        if din * dout != c.rows:
            raise ShapeError(f"Choi dimension {c.rows} does not match dims {din}->{dout}")
        return cls("choi", c, din, dout, trace_preserving, validate)

    # -- forms (memoised; filling a slot twice stores an equal value)
    @property
    def is_symbolic(self) -> bool:
        v = self._forms[self.form]
        if self.form == "kraus":
            return any(k.free_symbols() for k in v)
        return bool(v.free_symbols())

    @property
    def kraus(self) -> tuple[SymMatrix, ...]:
        got = self._forms.get("kraus")
        if got is None:
            got = _choi_to_kraus(self.choi, self.dim_in, self.dim_out)
            self._forms["kraus"] = got
        return got

    @property
    def superoperator(self) -> SymMatrix:
        got = self._forms.get("super")
        if got is None:
            if "kraus" in self._forms:
                got = _kraus_to_super(self._forms["kraus"])
            else:
                got = reshuffle(self._forms["choi"], (self.dim_out, self.dim_in))
            self._forms["super"] = got
        return got

    @property
    def choi(self) -> SymMatrix:
        got = self._forms.get("choi")
        if got is None:
            got = reshuffle(self.superoperator, (self.dim_out, self.dim_out), (self.dim_in, self.dim_in))
            self._forms["choi"] = got
        return got

    def as_form(self, form: str) -> "Channel":
        value = {"kraus": lambda: self.kraus, "super": lambda: self.superoperator, "choi": lambda: self.choi}[form]()
        out = Channel(form, value, self.dim_in, self.dim_out, self.trace_preserving, validate=False)
        out._forms.update(self._forms)
        return out

    def bind(self, binding) -> "Channel":
        v = self._forms[self.form]
        if self.form == "kraus":
            new = tuple(k.substitute(binding) for k in v)
        else:
            new = v.substitute(binding)
        return Channel(self.form, new, self.dim_in, self.dim_out, self.trace_preserving)

    def kraus_numeric(self, binding=None) -> list[np.ndarray]:
        return [k.to_numpy(binding) for k in self.kraus]

    def validate(self) -> "Channel":
        """Check CP / TP conditions on numeric channels; symbolic ones pass untouched."""
        if self.is_symbolic:
            return self
        if self.form == "kraus":
            if self.trace_preserving:
                s = sum(k.to_numpy().conj().T @ k.to_numpy() for k in self._forms["kraus"])
                if np.max(np.abs(s - np.eye(self.dim_in))) > TP_TOL:
                    raise DomainError("Kraus operators do not satisfy sum K^dag K = I")
            return self
        c = self.choi.to_numpy()
        if np.max(np.abs(c - c.conj().T)) > HERMITIAN_TOL:
            raise NonHermitianChoi("Choi matrix is not Hermitian")
        lo = float(np.linalg.eigvalsh((c + c.conj().T) / 2).min())
        if lo < -HERMITIAN_TOL:
            raise NegativeEigenvalue(lo)
        if self.trace_preserving:
            y = np.einsum("akal->kl", c.reshape(self.dim_out, self.dim_in, self.dim_out, self.dim_in))
            if np.max(np.abs(y - np.eye(self.dim_in))) > TP_TOL:
                raise DomainError("Choi matrix marginal over the output is not the identity")
        return self

    def __repr__(self):
        return f"Channel({self.form}, {self.dim_in}->{self.dim_out})"


def _isqrt(x: int) -> int:
    r = int(round(x ** 0.5))
    if r * r != x:
        raise ShapeError(f"{x} is not a perfect square")
    return r


def _kraus_to_super(ks) -> SymMatrix:
    if any(k.is_symbolic for k in ks):
        total = None
        for k in ks:
            a = k.object_array()
            term = np.kron(a, _conj_obj(a))
            total = term if total is None else total + term
        return SymMatrix._wrap(total)
    return SymMatrix(sum(np.kron(k.data, k.data.conj()) for k in ks))


def _conj_obj(a: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape, dtype=object)
    for idx, e in np.ndenumerate(a):
        out[idx] = fn("conj", e)
    return out


def _choi_to_kraus(choi: SymMatrix, din: int, dout: int) -> tuple[SymMatrix, ...]:
    if choi.free_symbols():
        raise NotNumeric("Kraus extraction needs a numeric channel (symbolic eigendecomposition is unsupported)")
    c = choi.to_numpy()
    if np.max(np.abs(c - c.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianChoi("Choi matrix is not Hermitian within 1e-9")
    w, v = np.linalg.eigh((c + c.conj().T) / 2)
    if w.min() < -HERMITIAN_TOL:
        raise NegativeEigenvalue(float(w.min()))
    out = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam < CHOI_CUTOFF:
            continue
        out.append(SymMatrix(np.sqrt(lam) * vec.reshape(dout, din)))
    if not out:
        out.append(SymMatrix(np.zeros((dout, din), dtype=np.complex128)))
    return tuple(out)


def superoperator(kraus) -> Channel:
    """Superoperator-form channel ``sum K (x) conj(K)`` from a Kraus list or channel."""
    if isinstance(kraus, Channel):
        return kraus.as_form("super")
    ch = Channel.from_kraus(kraus, trace_preserving=False, validate=False)
    return Channel("super", ch.superoperator, ch.dim_in, ch.dim_out, trace_preserving=False, validate=False)


def superoperator_to_kraus(m) -> Channel:
    """Kraus form via Hermitian eigendecomposition of the Choi matrix."""
    ch = m if isinstance(m, Channel) else Channel.from_superoperator(m, trace_preserving=False)
    if ch.superoperator.free_symbols():
        raise NotNumeric("superoperator_to_kraus needs a numeric superoperator")
    ks = _choi_to_kraus(ch.choi, ch.dim_in, ch.dim_out)
    return Channel("kraus", ks, ch.dim_in, ch.dim_out, ch.trace_preserving, validate=False)


def _state_matrix(rho) -> tuple[SymMatrix, RegisterShape | None]:
    if isinstance(rho, QState):
        return rho.density(), rho.shape
    m = as_matrix(rho)
    if m.cols == 1:
        return as_state(m).density(), None
    return m, None


def apply_channel(c: Channel, rho) -> QState:
    """Image of a state under a channel, as a mixed QState."""
    m, shape = _state_matrix(rho)
    if m.shape != (c.dim_in, c.dim_in):
        raise ShapeError(f"channel expects dimension {c.dim_in}, state has {m.shape}")
    if shape is None or shape.total != c.dim_out:
        shape = RegisterShape.for_dim(c.dim_out)
    symbolic = m.is_symbolic and bool(m.free_symbols()) or c.is_symbolic
    if not symbolic:
        r = m.to_numpy()
        if c.form == "kraus" or "kraus" in c._forms and c.form != "super":
            out = sum(k @ r @ k.conj().T for k in c.kraus_numeric())
        else:
            out = (c.superoperator.to_numpy() @ r.reshape(-1)).reshape(c.dim_out, c.dim_out)
        return QState(out, shape, "mixed", validate=False)
    if c.form == "kraus":
        total = None
        for k in c.kraus:
            term = matmul(matmul(k, m), dagger(k))
            total = term if total is None else total + term
        out = total
    else:
        vec = SymMatrix._wrap(m.object_array().reshape(-1, 1))
        out = SymMatrix._wrap(matmul(c.superoperator, vec).data.reshape(c.dim_out, c.dim_out))
    return QState(out.simplify(), shape, "mixed", validate=False)


def product_superoperator(c1: Channel, c2: Channel) -> Channel:
    """Superoperator of ``c1 (x) c2`` on the composite register (index-interleaved kron)."""
    m1, m2 = c1.superoperator, c2.superoperator
    o1, i1, o2, i2 = c1.dim_out, c1.dim_in, c2.dim_out, c2.dim_in
    if m1.is_symbolic or m2.is_symbolic:
        big = np.kron(m1.object_array(), m2.object_array())
    else:
        big = np.kron(m1.data, m2.data)
    t = big.reshape(o1, o1, o2, o2, i1, i1, i2, i2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
    out = np.ascontiguousarray(t).reshape((o1 * o2) ** 2, (i1 * i2) ** 2)
    return Channel(
        "super", SymMatrix._wrap(out), i1 * i2, o1 * o2, c1.trace_preserving and c2.trace_preserving, validate=False
    )


def product_channel(*channels: Channel) -> Channel:
    """Left fold of :func:`product_superoperator` over two or more channels."""
    if len(channels) < 2:
        raise ShapeError("product_channel needs at least two channels")
    return reduce(product_superoperator, channels)


def kraus_product(c1: Channel, c2: Channel) -> Channel:
    """Kraus form of ``c1 (x) c2``: all pairwise Kronecker products."""
    ks = [SymMatrix(np.kron(a.to_numpy(), b.to_numpy())) if not (a.is_symbolic or b.is_symbolic)
          else SymMatrix._wrap(np.kron(a.object_array(), b.object_array()))
          for a in c1.kraus for b in c2.kraus]
    return Channel.from_kraus(ks, c1.trace_preserving and c2.trace_preserving, validate=False)


# ---------------------------------------------------------------- noise models


def _noise_param(p) -> tuple[Expr, bool]:
    """Return (parameter, is_symbolic); bare real symbols move to the unit domain."""
    if isinstance(p, str):
        p = parse_expr(p)
    if isinstance(p, Expr):
        if isinstance(p, Symbol):
            if p.domain == "complex":
                raise DomainError(f"noise parameter {p.name} must be real")
            return Symbol(p.name, "unit"), True
        if not is_constant(p):
            return p, True
        z = eval_numeric(p, {})
        p = z.real if abs(z.imag) < 1e-15 else z
    if isinstance(p, complex) or not 0.0 <= float(p) <= 1.0:
        raise DomainError(f"noise parameter {p} outside [0, 1]")
    return as_expr(p), False


def _sqrt(e: Expr) -> Expr:
    return fn("sqrt", e, full=True)


def _m(rows) -> SymMatrix:
    return SymMatrix(np.array(rows, dtype=object))


def _finish(ks, symbolic: bool) -> Channel:
    if symbolic:
        return Channel("kraus", tuple(k.simplify() for k in ks), 2, 2, True, validate=False)
    return Channel.from_kraus([SymMatrix(k.to_numpy()) for k in ks])


def depolarizing(p) -> Channel:
    """rho -> (1-p) rho + p I/2, Kraus sqrt(1-3p/4) I and sqrt(p/4) X, Y, Z."""
    e, sym = _noise_param(p)
    a = _sqrt(simplify(ONE - _mul((Num(3) / Num(4), e))))
    b = _sqrt(simplify(_mul((Num(1) / Num(4), e))))
    nb = _mul((Num(-1), b))
    ks = [
        _m([[a, ZERO], [ZERO, a]]),
        _m([[ZERO, b], [b, ZERO]]),
        _m([[ZERO, _mul((nb, I))], [_mul((b, I)), ZERO]]),
        _m([[b, ZERO], [ZERO, nb]]),
    ]
    return _finish(ks, sym)


def amplitude_damping(gamma) -> Channel:
    e, sym = _noise_param(gamma)
    ks = [_m([[ONE, ZERO], [ZERO, _sqrt(simplify(ONE - e))]]), _m([[ZERO, _sqrt(e)], [ZERO, ZERO]])]
    return _finish(ks, sym)


def phase_damping(lam) -> Channel:
    e, sym = _noise_param(lam)
    ks = [_m([[ONE, ZERO], [ZERO, _sqrt(simplify(ONE - e))]]), _m([[ZERO, ZERO], [ZERO, _sqrt(e)]])]
    return _finish(ks, sym)


def bit_flip(p) -> Channel:
    e, sym = _noise_param(p)
    a, b = _sqrt(simplify(ONE - e)), _sqrt(e)
    ks = [_m([[a, ZERO], [ZERO, a]]), _m([[ZERO, b], [b, ZERO]])]
    return _finish(ks, sym)


def phase_flip(p) -> Channel:
    e, sym = _noise_param(p)
    a, b = _sqrt(simplify(ONE - e)), _sqrt(e)
    ks = [_m([[a, ZERO], [ZERO, a]]), _m([[b, ZERO], [ZERO, _mul((Num(-1), b))]])]
    return _finish(ks, sym)


NOISE_MODELS = {
    "depolarizing": depolarizing,
    "amplitude_damping": amplitude_damping,
    "phase_damping": phase_damping,
    "bit_flip": bit_flip,
    "phase_flip": phase_flip,
}


def noise_model(kind: str, param) -> Channel:
    """Single-qubit noise channel in Kraus form; ``param`` may be numeric or symbolic."""
    try:
        factory = NOISE_MODELS[kind.strip().lower()]
    except KeyError:
        raise DomainError(f"unknown noise model {kind!r}; choose from {sorted(NOISE_MODELS)}") from None
    return factory(param)


def identity_channel(dim: int = 2) -> Channel:
    return Channel.from_kraus([SymMatrix(np.eye(dim, dtype=np.complex128))])


def kraus_completeness(c: Channel) -> SymMatrix:
    """``sum K^dag K`` (simplified when symbolic)."""
    total = None
    for k in c.kraus:
        term = matmul(dagger(k), k)
        total = term if total is None else total + term
    return _simplified(total)


__all__ = [
    "Channel", "NOISE_MODELS", "amplitude_damping", "apply_channel", "bit_flip", "depolarizing",
    "identity_channel", "kraus_completeness", "kraus_product", "noise_model", "phase_damping",
    "phase_flip", "product_channel", "product_superoperator", "superoperator", "superoperator_to_kraus",
]

