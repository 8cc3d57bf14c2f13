"""Gates, circuits and circuit templates.

Wire 0 is the most significant bit of a basis index, matching the Kronecker
convention of :mod:`qsym.qstate`. A gate's ``targets`` list fixes which wire
carries which bit of the gate block: ``targets[0]`` is the block's most
significant bit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import _kernels
from .errors import (
    CapabilityError,
    DomainError,
    DuplicateWire,
    GraphError,
    NotAPermutation,
    NotNumeric,
    ShapeError,
    SizeLimit,
    WireOutOfRange,
)
from .qstate import QState, RegisterShape, as_state
from .symexpr import (
    HALF,
    I,
    ONE,
    PI,
    ZERO,
    Binding,
    Expr,
    Num,
    as_expr,
    eval_numeric,
    free_symbol_names,
    parse_expr,
    simplify,
    substitute,
)
from .symexpr.core import Function, fn, mul as _mul
from .symlinalg import SymMatrix, as_matrix

MAX_DENSE_QUBITS = 12
MAX_APPLY_QUBITS = 20

_SQ = Function("sqrt", HALF)


def _obj(rows) -> SymMatrix:
    return SymMatrix(np.array(rows, dtype=object))


def _half(theta: Expr) -> Expr:
    return _mul((HALF, theta))


def _rx(t):
    c, s = fn("cos", _half(t)), fn("sin", _half(t))
    ms = _mul((Num(-1), I, s))
    return _obj([[c, ms], [ms, c]])


def _ry(t):
    c, s = fn("cos", _half(t)), fn("sin", _half(t))
    return _obj([[c, _mul((Num(-1), s))], [s, c]])


def _rz(t):
    return _obj([[fn("exp", _mul((Num(-1), I, _half(t)))), ZERO], [ZERO, fn("exp", _mul((I, _half(t))))]])


def _p(t):
    return _obj([[ONE, ZERO], [ZERO, fn("exp", _mul((I, t)))]])


def _nrx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _nry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _nrz(t):
    return np.array([[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]])


def _np(t):
    return np.array([[1, 0], [0, cmath.exp(1j * t)]])


@dataclass(frozen=True)
class GateDef:
    name: str
    num_targets: int
    num_params: int
    symbolic: Callable
    numeric: Callable
    generator: str | None = None  # Pauli generator for single-angle rotations

    def matrix(self, params=()) -> SymMatrix:
        return self.symbolic(*params) if self.num_params else self.symbolic()


def _fixed(rows):
    m = _obj(rows).simplify()
    arr = m.to_numpy()
    return (lambda: m), (lambda: arr)


def _defs() -> dict[str, GateDef]:
    out = {}

    def fixed(name, k, rows):
        s, n = _fixed(rows)
        out[name] = GateDef(name, k, 0, s, n)

    m1 = Num(-1)
    fixed("I", 1, [[1, 0], [0, 1]])
    fixed("X", 1, [[0, 1], [1, 0]])
    fixed("Y", 1, [[0, _mul((m1, I))], [I, 0]])
    fixed("Z", 1, [[1, 0], [0, -1]])
    fixed("H", 1, [[_SQ, _SQ], [_SQ, _mul((m1, _SQ))]])
    fixed("S", 1, [[1, 0], [0, I]])
    fixed("SDG", 1, [[1, 0], [0, _mul((m1, I))]])
    fixed("T", 1, [[1, 0], [0, fn("exp", _mul((I, PI, Num(1) / Num(4))))]])
    fixed("TDG", 1, [[1, 0], [0, fn("exp", _mul((m1, I, PI, Num(1) / Num(4))))]])
    fixed("CNOT", 2, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    fixed("CZ", 2, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]])
    fixed("SWAP", 2, [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    out["RX"] = GateDef("RX", 1, 1, _rx, _nrx, "X")
    out["RY"] = GateDef("RY", 1, 1, _ry, _nry, "Y")
    out["RZ"] = GateDef("RZ", 1, 1, _rz, _nrz, "Z")
    out["P"] = GateDef("P", 1, 1, _p, _np, "P")
    return out


BUILTIN_GATES: dict[str, GateDef] = _defs()
_ALIASES = {"CX": "CNOT", "ID": "I", "PHASE": "P"}
MEASURE = "MEASURE"


def canonical_name(name: str) -> str:
    up = name.strip().upper()
    return _ALIASES.get(up, up)


def builtin(name: str) -> GateDef | None:
    return BUILTIN_GATES.get(canonical_name(name))


def gate_matrix(name: str, *params) -> SymMatrix:
    d = builtin(name)
    if d is None:
        raise DomainError(f"unknown gate {name!r}")
    if len(params) != d.num_params:
        raise ShapeError(f"gate {d.name} takes {d.num_params} parameters, got {len(params)}")
    return d.matrix(tuple(as_expr(p) if not isinstance(p, str) else parse_expr(p) for p in params))


def _as_param(p) -> Expr:
    if isinstance(p, str):
        return parse_expr(p)
    return as_expr(p)


@dataclass(frozen=True)
class GateApp:
    """One operation in a circuit.

    ``name`` is a builtin gate, ``"measure"`` (computational-basis measurement
    of ``targets[0]`` into classical bit ``cbit``) or any other label paired
    with an explicit ``matrix`` payload. ``condition`` names a classical bit
    that must read 1 for the operation to fire.
    """

    name: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[Expr, ...] = ()
    matrix: SymMatrix | None = None
    condition: str | None = None
    cbit: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        object.__setattr__(self, "params", tuple(_as_param(p) for p in self.params))
        wires = self.targets + self.controls
        if len(set(wires)) != len(wires):
            raise DuplicateWire(f"gate {self.name} repeats a wire in {wires}")
        if not self.targets:
            raise ShapeError(f"gate {self.name} has no targets")
        if any(w < 0 for w in wires):
            raise WireOutOfRange(f"gate {self.name} uses a negative wire")
        k = len(self.targets)
        if self.is_measure:
            object.__setattr__(self, "name", "measure")
            if k != 1 or self.controls or self.params or self.matrix is not None:
                raise ShapeError("measure acts on exactly one target with no controls or params")
            if not self.cbit:
                raise DomainError("measure needs a classical bit name")
            return
        if self.matrix is not None:
            m = as_matrix(self.matrix)
            if m.shape != (1 << k, 1 << k):
                raise ShapeError(f"gate {self.name}: matrix shape {m.shape} does not match {k} targets")
            object.__setattr__(self, "matrix", m)
            return
        d = builtin(self.name)
        if d is None:
            raise DomainError(f"unknown gate {self.name!r} and no matrix given")
        object.__setattr__(self, "name", d.name)
        if d.num_targets != k:
            raise ShapeError(f"gate {d.name} acts on {d.num_targets} wires, got {k}")
        if d.num_params != len(self.params):
            raise ShapeError(f"gate {d.name} takes {d.num_params} parameters, got {len(self.params)}")

    @property
    def is_measure(self) -> bool:
        return self.name.strip().upper() == MEASURE

    @property
    def definition(self) -> GateDef | None:
        return None if self.matrix is not None or self.is_measure else BUILTIN_GATES[self.name]

    @property
    def wires(self) -> tuple[int, ...]:
        return self.controls + self.targets

    @property
    def free_symbols(self) -> frozenset[str]:
        out = frozenset()
        for p in self.params:
            out |= free_symbol_names(p)
        if self.matrix is not None:
            out |= frozenset(s.name for s in self.matrix.free_symbols())
        return out

    def block(self) -> SymMatrix:
        """Target block (without controls) as a SymMatrix."""
        if self.is_measure:
            raise CapabilityError("measurement has no unitary block")
        if self.matrix is not None:
            return self.matrix
        return self.definition.matrix(self.params)

    def block_numeric(self, binding=None) -> np.ndarray:
        if self.is_measure:
            raise CapabilityError("measurement has no unitary block")
        if self.matrix is not None:
            if self.matrix.free_symbols() and binding is None:
                raise NotNumeric(f"gate {self.name} has unbound symbols")
            try:
                return self.matrix.to_numpy(binding)
            except (KeyError, NotNumeric) as exc:
                raise NotNumeric(f"gate {self.name} has unbound symbols") from exc
        d = self.definition
        if not d.num_params:
            return d.numeric()
        vals = []
        for p in self.params:
            try:
                z = eval_numeric(p, binding or {})
            except KeyError as exc:
                raise NotNumeric(f"gate {self.name} parameter {p} is unbound") from exc
            if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
                raise DomainError(f"gate {self.name} angle {z} is not real")
            vals.append(z.real)
        return d.numeric(*vals)

    def bind(self, binding) -> "GateApp":
        if not self.free_symbols:
            return self
        b = binding if isinstance(binding, Binding) else Binding(binding)
        params = tuple(substitute(p, b) for p in self.params)
        matrix = self.matrix.substitute(b) if self.matrix is not None else None
        return GateApp(self.name, self.targets, self.controls, params, matrix, self.condition, self.cbit)

    def with_(self, **kw) -> "GateApp":
        fields = dict(
            name=self.name, targets=self.targets, controls=self.controls, params=self.params,
            matrix=self.matrix, condition=self.condition, cbit=self.cbit,
        )
        fields.update(kw)
        return GateApp(**fields)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[GateApp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        n = int(self.num_qubits)
        if n < 1:
            raise ShapeError("a circuit needs at least one qubit")
        object.__setattr__(self, "num_qubits", n)
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, GateApp):
                raise TypeError(f"expected GateApp, got {type(g).__name__}")
            for w in g.wires:
                if w >= n:
                    raise WireOutOfRange(f"gate {g.name} uses wire {w} but the circuit has {n} qubits")
        object.__setattr__(self, "gates", gates)

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def free_symbols(self) -> frozenset[str]:
        out = frozenset()
        for g in self.gates:
            out |= g.free_symbols
        return out

    @property
    def parameter_names(self) -> list[str]:
        """Free symbol names in lexicographic order (the parameter-vector order)."""
        return sorted(self.free_symbols)

    @property
    def has_measurements(self) -> bool:
        return any(g.is_measure for g in self.gates)

    @property
    def classical_bits(self) -> list[str]:
        seen: list[str] = []
        for g in self.gates:
            if g.is_measure and g.cbit not in seen:
                seen.append(g.cbit)
        return seen

    @property
    def is_unitary(self) -> bool:
        return not any(g.is_measure or g.condition for g in self.gates)

    def append(self, name: str, targets, params=(), controls=(), **kw) -> "Circuit":
        g = GateApp(name, tuple(targets), tuple(controls), tuple(params), **kw)
        return Circuit(self.num_qubits, self.gates + (g,))

    def extend(self, gates: Iterable[GateApp]) -> "Circuit":
        return Circuit(self.num_qubits, self.gates + tuple(gates))

    def bind(self, binding) -> "Circuit":
        b = binding if isinstance(binding, Binding) else Binding(binding)
        return Circuit(self.num_qubits, tuple(g.bind(b) for g in self.gates))


# ---------------------------------------------------------------- embedding


def _check_wires(targets, controls, n):
    wires = list(targets) + list(controls)
    if len(set(wires)) != len(wires):
        raise DuplicateWire(f"repeated wire in {wires}")
    for w in wires:
        if not 0 <= w < n:
            raise WireOutOfRange(f"wire {w} outside 0..{n - 1}")


def _embed(arr: np.ndarray, wires: list[int], n: int) -> np.ndarray:
    k = len(wires)
    rest = [w for w in range(n) if w not in wires]
    if arr.dtype == object:
        eye = np.full((1 << (n - k), 1 << (n - k)), ZERO, dtype=object)
        for j in range(eye.shape[0]):
            eye[j, j] = ONE
    else:
        eye = np.eye(1 << (n - k), dtype=np.complex128)
    big = np.kron(arr, eye).reshape((2,) * (2 * n))
    order = list(wires) + rest
    perm = [order.index(w) for w in range(n)]
    return big.transpose(perm + [n + p for p in perm]).reshape(1 << n, 1 << n).copy()


def _as_block(u) -> SymMatrix:
    if isinstance(u, str):
        return gate_matrix(u)
    return as_matrix(u)


def gate(u, targets, n: int) -> SymMatrix:
    """Embed block ``u`` on ``targets`` of an ``n``-qubit register."""
    m = _as_block(u)
    targets = [int(t) for t in targets]
    _check_wires(targets, [], n)
    k = len(targets)
    if m.shape != (1 << k, 1 << k):
        raise ShapeError(f"block of shape {m.shape} does not act on {k} wires")
    if n > MAX_DENSE_QUBITS:
        raise SizeLimit(f"dense embedding limited to {MAX_DENSE_QUBITS} qubits")
    return SymMatrix._wrap(_embed(m.data, targets, n))


def _controlled_block(arr: np.ndarray, c: int) -> np.ndarray:
    d = arr.shape[0]
    big = 1 << c
    if arr.dtype == object:
        out = np.full((big * d, big * d), ZERO, dtype=object)
        for j in range((big - 1) * d):
            out[j, j] = ONE
    else:
        out = np.eye(big * d, dtype=np.complex128)
    out[(big - 1) * d :, (big - 1) * d :] = arr
    return out


def cgate(u, targets, controls, n: int) -> SymMatrix:
    """Embed ``u`` on ``targets``, active when every control wire is 1."""
    m = _as_block(u)
    targets = [int(t) for t in targets]
    controls = [int(c) for c in controls]
    _check_wires(targets, controls, n)
    k = len(targets)
    if m.shape != (1 << k, 1 << k):
        raise ShapeError(f"block of shape {m.shape} does not act on {k} wires")
    if n > MAX_DENSE_QUBITS:
        raise SizeLimit(f"dense embedding limited to {MAX_DENSE_QUBITS} qubits")
    block = _controlled_block(m.data, len(controls))
    return SymMatrix._wrap(_embed(block, controls + targets, n))


def _check_perm(perm, n: int) -> list[int]:
    perm = [int(p) for p in perm]
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise NotAPermutation(f"{perm} is not a permutation of 0..{n - 1}")
    return perm


def permutation_indices(perm, n: int) -> np.ndarray:
    """``idx`` with ``(P v)[idx[j]] = v[j]``: input wire i's bit lands on wire perm[i]."""
    perm = _check_perm(perm, n)
    j = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(j)
    for i in range(n):
        bit = (j >> (n - 1 - i)) & 1
        out |= bit << (n - 1 - perm[i])
    return out


def permute_register(perm, n: int) -> SymMatrix:
    """Permutation matrix moving the bit on wire ``i`` to wire ``perm[i]``."""
    perm = _check_perm(perm, n)
    if n > MAX_DENSE_QUBITS:
        raise SizeLimit(f"dense permutation limited to {MAX_DENSE_QUBITS} qubits")
    idx = permutation_indices(perm, n)
    p = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    p[idx, np.arange(1 << n)] = 1.0
    return SymMatrix(p)


def permute_state(psi: np.ndarray, perm, n: int) -> np.ndarray:
    idx = permutation_indices(perm, n)
    out = np.empty_like(psi)
    out[idx] = psi
    return out


# ---------------------------------------------------------------- templates


def qft_template(n: int) -> Circuit:
    """Hadamard + controlled-phase ladder, then wire-reversal swaps."""
    if n < 1:
        raise ShapeError("QFT needs at least one qubit")
    gates = []
    for j in range(n):
        gates.append(GateApp("H", (j,)))
        for k in range(j + 1, n):
            angle = _mul((PI, Num(1) / Num(2 ** (k - j))))
            gates.append(GateApp("P", (j,), (k,), (angle,)))
    for j in range(n // 2):
        gates.append(GateApp("SWAP", (j, n - 1 - j)))
    return Circuit(n, tuple(gates))


def qft_unitary(n: int, exact: bool = False) -> SymMatrix:
    """DFT matrix ``F[j,k] = w^{jk} / sqrt(2^n)``; ``exact`` keeps SymExpr entries."""
    if not 1 <= n <= MAX_DENSE_QUBITS:
        raise SizeLimit(f"QFT unitary supported for 1..{MAX_DENSE_QUBITS} qubits, got {n}")
    d = 1 << n
    if not exact:
        jk = np.outer(np.arange(d), np.arange(d)) % d
        return SymMatrix(np.exp(2j * np.pi * jk / d) / math.sqrt(d))
    norm = fn("sqrt", Num(1) / Num(d), full=True)
    arr = np.empty((d, d), dtype=object)
    for j in range(d):
        for k in range(d):
            ph = fn("exp", _mul((Num(2) * Num((j * k) % d) / Num(d), I, PI)), full=True)
            arr[j, k] = simplify(_mul((ph, norm)))
    return SymMatrix._wrap(arr)


def _normalize_edges(graph):
    edges = []
    seen = set()
    for e in graph:
        e = tuple(e)
        if len(e) == 2:
            u, v, w = e[0], e[1], 1
        elif len(e) == 3:
            u, v, w = e
        else:
            raise GraphError(f"edge {e} must be (u, v) or (u, v, weight)")
        u, v = int(u), int(v)
        if u < 0 or v < 0:
            raise GraphError(f"edge {e} has a negative vertex")
        if u == v:
            raise GraphError(f"self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        edges.append((u, v, w))
    return edges


def qaoa_template(graph, p: int, num_nodes: int | None = None) -> Circuit:
    """p-layer QAOA for weighted MaxCut-style ZZ costs.

    Parameters are real symbols ``gamma_1..gamma_p`` and ``beta_1..beta_p``.
    """
    if p < 1:
        raise ShapeError("QAOA needs p >= 1 layers")
    edges = _normalize_edges(graph)
    top = max([max(u, v) for u, v, _ in edges], default=-1) + 1
    n = top if num_nodes is None else int(num_nodes)
    if n < top or n < 1:
        raise GraphError(f"graph needs {top} vertices, got num_nodes={num_nodes}")
    gates = [GateApp("H", (q,)) for q in range(n)]
    for layer in range(1, p + 1):
        gamma = parse_expr(f"gamma_{layer}")
        beta = parse_expr(f"beta_{layer}")
        for u, v, w in edges:
            angle = simplify(_mul((Num(2), as_expr(w), gamma)))
            gates.append(GateApp("CNOT", (u, v)))
            gates.append(GateApp("RZ", (v,), (), (angle,)))
            gates.append(GateApp("CNOT", (u, v)))
        for q in range(n):
            gates.append(GateApp("RX", (q,), (), (simplify(_mul((Num(2), beta))),)))
    return Circuit(n, tuple(gates))


def maxcut_cost(graph, bits) -> float:
    """Weighted cut value of a bitstring (wire-0-first)."""
    total = 0.0
    for u, v, w in _normalize_edges(graph):
        if bits[u] != bits[v]:
            total += float(w)
    return total


# ---------------------------------------------------------------- evaluation


def _require_unitary(c: Circuit):
    if not c.is_unitary:
        raise CapabilityError("circuit contains measurements or classical conditions; use a backend")


def _apply_object(arr: np.ndarray, u: np.ndarray, targets, controls, n: int) -> np.ndarray:
    """Gate-local application on an object-dtype tensor whose leading n axes are wires."""
    k = len(targets)
    if controls:
        out = arr.copy()
        idx = tuple(1 if w in controls else slice(None) for w in range(n))
        free = [w for w in range(n) if w not in controls]
        sub = [free.index(t) for t in targets]
        out[idx] = _apply_object(arr[idx], u, sub, [], len(free))
        return out
    ut = u.reshape((2,) * (2 * k))
    moved = np.tensordot(ut, arr, axes=(list(range(k, 2 * k)), list(targets)))
    return np.moveaxis(moved, list(range(k)), list(targets))


_simp = np.frompyfunc(simplify, 1, 1)


def circuit_unitary(c: Circuit, binding=None, exact: bool = False) -> SymMatrix:
    """Ordered product of embedded gates (first gate rightmost).

    Parameter-free circuits take the numeric path unless ``exact`` asks for
    SymExpr entries (e.g. ``sqrt(1/2)`` instead of 0.7071...).
    """
    _require_unitary(c)
    n = c.num_qubits
    if n > MAX_DENSE_QUBITS:
        raise SizeLimit(f"dense circuit unitary limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    if binding is not None:
        c = c.bind(binding)
    d = 1 << n
    if not c.free_symbols and not exact:
        u = np.eye(d, dtype=np.complex128).reshape(-1)
        for g in c.gates:
            u = _kernels.apply_matrix(u, g.block_numeric(), g.targets, g.controls, 2 * n)
        return SymMatrix(u.reshape(d, d))
    arr = np.full((d, d), ZERO, dtype=object)
    for j in range(d):
        arr[j, j] = ONE
    t = arr.reshape((2,) * n + (d,))
    for g in c.gates:
        t = _apply_object(t, g.block().object_array(), g.targets, g.controls, n)
        t = _simp(t).astype(object)
    return SymMatrix._wrap(np.ascontiguousarray(t).reshape(d, d))


def apply_gates(psi: np.ndarray, gates, n: int, binding=None) -> np.ndarray:
    for g in gates:
        psi = _kernels.apply_matrix(psi, g.block_numeric(binding), g.targets, g.controls, n)
    return psi


def apply_gates_density(rho: np.ndarray, gates, n: int, binding=None) -> np.ndarray:
    v = rho.reshape(-1)
    for g in gates:
        b = g.block_numeric(binding)
        v = _kernels.apply_matrix(v, b, g.targets, g.controls, 2 * n)
        v = _kernels.apply_matrix(v, b.conj(), [n + t for t in g.targets], [n + w for w in g.controls], 2 * n)
    return v.reshape(rho.shape)


def apply_circuit(c: Circuit, psi, binding=None) -> QState:
    """Apply a unitary circuit to a numeric state without forming the unitary."""
    _require_unitary(c)
    st = as_state(psi)
    n = c.num_qubits
    if st.dim != 1 << n:
        raise ShapeError(f"state dimension {st.dim} does not match {n} qubits")
    if n > MAX_APPLY_QUBITS:
        raise SizeLimit(f"state application limited to {MAX_APPLY_QUBITS} qubits, got {n}")
    if st.body.free_symbols():
        raise NotNumeric("apply_circuit needs a numeric state")
    unbound = c.free_symbols - (set(binding) if binding is not None else set())
    if unbound:
        raise NotNumeric(f"circuit has unbound parameters {sorted(unbound)}; use circuit_unitary for symbolic work")
    shape = st.shape if st.shape.dims == (2,) * n else RegisterShape.qubits(n)
    if st.is_pure:
        out = apply_gates(np.array(st.numeric(), dtype=np.complex128), c.gates, n, binding)
        return QState(out, shape, "pure", validate=False)
    out = apply_gates_density(np.array(st.numeric(), dtype=np.complex128), c.gates, n, binding)
    return QState(out, shape, "mixed", validate=False)


__all__ = [
    "BUILTIN_GATES", "Circuit", "GateApp", "GateDef", "MAX_APPLY_QUBITS", "MAX_DENSE_QUBITS",
    "apply_circuit", "apply_gates", "apply_gates_density", "builtin", "canonical_name", "cgate",
    "circuit_unitary", "gate", "gate_matrix", "maxcut_cost", "permutation_indices", "permute_register",
    "permute_state", "qaoa_template", "qft_template", "qft_unitary",
]
