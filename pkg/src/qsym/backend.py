"""Execution backends: ideal statevector and noisy density-matrix simulators.

Mid-circuit measurements are handled by enumerating measurement branches
exactly; shots then sample a branch and a final bitstring jointly. Counts are
keyed by the computational-basis bitstring of all qubits, wire 0 first.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels
from .channel import Channel, noise_model
from .circuit import MAX_APPLY_QUBITS, Circuit, GateApp
from .errors import (
    CapabilityError,
    DuplicateName,
    MissingClassicalBit,
    NotNumeric,
    ShapeError,
    UnboundSymbol,
    UnknownBackend,
    WireOutOfRange,
)
from .qstate import QState, RegisterShape, as_state
from .random import EntropySource, SeededPRNG, default_source
from .symexpr import Binding, Expr, free_symbol_names, parse_expr, substitute

_PRUNE = 1e-15


# ---------------------------------------------------------------- noise spec


@dataclass(frozen=True)
class NoiseEntry:
    """Channel ``kind(param)`` on ``qubit`` right after gate ``after_gate_index``.

    ``after_gate_index = -1`` places the channel before the first gate.
    """

    qubit: int
    kind: str
    param: object
    after_gate_index: int

    def channel(self, binding=None) -> Channel:
        return _bound_noise(self.kind, self.param, binding)


@dataclass(frozen=True)
class NoiseSpec:
    """Positioned channels plus an optional model applied on every gate's wires."""

    entries: tuple[NoiseEntry, ...] = ()
    per_gate: tuple[str, object] | None = None

    @classmethod
    def from_json(cls, items) -> "NoiseSpec":
        entries = []
        for it in items or ():
            entries.append(NoiseEntry(int(it["qubit"]), str(it["kind"]), it["param"], int(it["after_gate_index"])))
        return cls(tuple(entries))

    @classmethod
    def uniform(cls, kind: str, param) -> "NoiseSpec":
        return cls((), (kind, param))

    def __bool__(self):
        return bool(self.entries) or self.per_gate is not None

    def free_symbols(self) -> frozenset[str]:
        out = frozenset()
        params = [e.param for e in self.entries] + ([self.per_gate[1]] if self.per_gate else [])
        for p in params:
            if isinstance(p, str):
                out |= free_symbol_names(parse_expr(p))
            elif isinstance(p, Expr):
                out |= free_symbol_names(p)
        return out


def _bound_noise(kind: str, param, binding) -> Channel:
    if isinstance(param, str):
        param = parse_expr(param)
    if isinstance(param, Expr) and binding is not None:
        names = free_symbol_names(param)
        if names:
            param = substitute(param, Binding({k: binding[k] for k in names if k in binding}))
    ch = noise_model(kind, param)
    if ch.is_symbolic:
        missing = sorted({s.name for k in ch.kraus for s in k.free_symbols()})
        raise UnboundSymbol(missing[0] if missing else "noise")
    return ch


# ---------------------------------------------------------------- results


@dataclass
class Branch:
    probability: float
    record: dict
    state: QState


@dataclass
class RunResult:
    counts: dict[str, int]
    final_state: QState | None
    metadata: dict
    probabilities: np.ndarray | None = None
    classical_counts: dict[str, int] = field(default_factory=dict)
    branches: list[Branch] = field(default_factory=list)

    @property
    def shots(self) -> int:
        return int(self.metadata.get("shots", 0))

    def frequencies(self) -> dict[str, float]:
        n = sum(self.counts.values())
        return {k: v / n for k, v in self.counts.items()} if n else {}


@dataclass(frozen=True)
class Capabilities:
    max_qubits: int
    supports_noise: bool
    supports_symbolic: bool = False


# ---------------------------------------------------------------- helpers


def _binding_dict(binding) -> dict:
    if binding is None:
        return {}
    return dict(binding.items()) if isinstance(binding, Mapping) else dict(binding)


def bind_circuit(circuit: Circuit, binding) -> Circuit:
    b = _binding_dict(binding)
    missing = sorted(circuit.free_symbols - set(b))
    if missing:
        raise UnboundSymbol(missing[0])
    return circuit.bind(Binding({k: b[k] for k in circuit.free_symbols})) if circuit.free_symbols else circuit


def _source(seed, source) -> tuple[EntropySource, object]:
    if source is not None:
        return source, getattr(source, "seed", None)
    if seed is None:
        src = default_source()
        return src, getattr(src, "seed", None)
    return SeededPRNG(seed), seed


def sample_indices(probs: np.ndarray, shots: int, src: EntropySource) -> np.ndarray:
    """Histogram of ``shots`` inverse-CDF draws from ``probs`` (one uniform per shot)."""
    p = np.clip(np.real(probs), 0.0, None)
    if shots <= 0:
        return np.zeros(len(p), dtype=np.int64)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    u = src.uniforms(shots)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(p) - 1)
    return np.bincount(idx, minlength=len(p))


def sample_counts(probs: np.ndarray, shots: int, src: EntropySource, n: int) -> dict[str, int]:
    """Counts keyed by ``n``-bit strings, wire 0 first."""
    hits = sample_indices(probs, shots, src)
    return {format(int(i), f"0{n}b"): int(hits[i]) for i in np.flatnonzero(hits)}


def _bit_mask(n: int, wire: int) -> np.ndarray:
    return ((np.arange(1 << n) >> (n - 1 - wire)) & 1).astype(bool)


def _condition_holds(g: GateApp, record: dict) -> bool:
    if g.condition is None:
        return True
    if g.condition not in record:
        raise MissingClassicalBit(f"gate {g.name} is conditioned on unmeasured bit {g.condition!r}")
    return record[g.condition] == 1


# ---------------------------------------------------------------- engines


class _PureEngine:
    def __init__(self, n):
        self.n = n

    def apply(self, psi, g: GateApp):
        return _kernels.apply_matrix(psi, g.block_numeric(), g.targets, g.controls, self.n)

    def measure(self, psi, wire):
        mask = _bit_mask(self.n, wire)
        out = []
        for bit in (0, 1):
            sel = mask if bit else ~mask
            p = float(np.sum(np.abs(psi[sel]) ** 2))
            if p > _PRUNE:
                new = np.where(sel, psi, 0)
                out.append((bit, p, new / np.sqrt(p)))
        return out

    def noise(self, psi, wire, ch):
        raise CapabilityError("statevector backend does not support noise")

    def probs(self, psi):
        return np.abs(psi) ** 2

    def state(self, psi, shape):
        return QState(psi, shape, "pure", validate=False)


class _MixedEngine:
    def __init__(self, n):
        self.n = n

    def apply(self, v, g: GateApp):
        n = self.n
        b = g.block_numeric()
        v = _kernels.apply_matrix(v, b, g.targets, g.controls, 2 * n)
        return _kernels.apply_matrix(v, b.conj(), [n + t for t in g.targets], [n + c for c in g.controls], 2 * n)

    def kraus(self, v, wires, ks):
        n = self.n
        total = np.zeros_like(v)
        for k in ks:
            w = _kernels.apply_matrix(v, k, wires, [], 2 * n)
            total += _kernels.apply_matrix(w, k.conj(), [n + q for q in wires], [], 2 * n)
        return total

    def noise(self, v, wire, ch: Channel):
        return self.kraus(v, [wire], ch.kraus_numeric())

    def measure(self, v, wire):
        d = 1 << self.n
        rho = v.reshape(d, d)
        mask = _bit_mask(self.n, wire)
        out = []
        for bit in (0, 1):
            sel = mask if bit else ~mask
            p = float(np.sum(np.diag(rho)[sel]).real)
            if p > _PRUNE:
                new = rho * np.outer(sel, sel)
                out.append((bit, p, (new / p).reshape(-1)))
        return out

    def probs(self, v):
        d = 1 << self.n
        return np.real(np.diag(v.reshape(d, d))).copy()

    def state(self, v, shape):
        d = 1 << self.n
        return QState(v.reshape(d, d), shape, "mixed", validate=False)


# ---------------------------------------------------------------- backends


class Backend:
    """Interface: ``name``, ``capabilities`` and :meth:`run`."""

    name: str = "abstract"
    capabilities: Capabilities = Capabilities(0, False)

    def run(self, circuit: Circuit, binding=None, noise=None, shots: int = 0, seed=None, source=None,
            initial_state=None) -> RunResult:  # pragma: no cover - interface
        raise NotImplementedError

    def __repr__(self):
        return f"<Backend {self.name}>"


class SimulatorBackend(Backend):
    def __init__(self, name: str, mixed: bool, max_qubits: int, seed: int = 0):
        self.name = name
        self.mixed = mixed
        self.capabilities = Capabilities(max_qubits, supports_noise=mixed)
        self.seed = seed

    def _initial(self, initial_state, n):
        shape = RegisterShape.qubits(n)
        if initial_state is None:
            d = 1 << n
            if self.mixed:
                v = np.zeros(d * d, dtype=np.complex128)
                v[0] = 1.0
            else:
                v = np.zeros(d, dtype=np.complex128)
                v[0] = 1.0
            return v, shape
        st = as_state(initial_state)
        if st.dim != 1 << n:
            raise ShapeError(f"initial state dimension {st.dim} does not match {n} qubits")
        if st.body.free_symbols():
            raise NotNumeric("initial state must be numeric")
        if self.mixed:
            return np.array(st.to_mixed().numeric(), dtype=np.complex128).reshape(-1), shape
        if not st.is_pure:
            raise CapabilityError(f"{self.name} needs a pure initial state")
        return np.array(st.numeric(), dtype=np.complex128), shape

    def run(self, circuit: Circuit, binding=None, noise=None, shots: int = 0, seed=None, source=None,
            initial_state=None) -> RunResult:
        t0 = time.perf_counter()
        n = circuit.num_qubits
        if shots < 0:
            raise ShapeError("shots must be >= 0")
        if n > self.capabilities.max_qubits:
            raise CapabilityError(f"{self.name} supports at most {self.capabilities.max_qubits} qubits, circuit has {n}")
        if isinstance(noise, (list, tuple)):
            noise = NoiseSpec.from_json(noise)
        if noise and not self.capabilities.supports_noise:
            raise CapabilityError(f"backend {self.name} does not support noise")
        b = _binding_dict(binding)
        c = bind_circuit(circuit, b)
        src, seed_used = _source(self.seed if seed is None and source is None else seed, source)
        eng = _MixedEngine(n) if self.mixed else _PureEngine(n)

        positioned: dict[int, list[NoiseEntry]] = {}
        if noise:
            for e in noise.entries:
                if not 0 <= e.qubit < n:
                    raise WireOutOfRange(f"noise on qubit {e.qubit} outside 0..{n - 1}")
                if not -1 <= e.after_gate_index < len(c.gates):
                    raise ShapeError(f"noise after gate {e.after_gate_index}: circuit has {len(c.gates)} gates")
                positioned.setdefault(e.after_gate_index, []).append(e)
        per_gate = _bound_noise(noise.per_gate[0], noise.per_gate[1], b) if noise and noise.per_gate else None
        cache: dict[int, Channel] = {}

        def add_noise(v, idx, g):
            if per_gate is not None and g is not None:
                for w in g.wires:
                    v = eng.noise(v, w, per_gate)
            for k, e in enumerate(positioned.get(idx, ())):
                key = (idx, k)
                if key not in cache:
                    cache[key] = e.channel(b)
                v = eng.noise(v, e.qubit, cache[key])
            return v

        v0, shape = self._initial(initial_state, n)
        branches = [(1.0, {}, add_noise(v0, -1, None))]
        for idx, g in enumerate(c.gates):
            nxt = []
            for p, rec, v in branches:
                if g.is_measure:
                    for bit, q, nv in eng.measure(v, g.targets[0]):
                        r = dict(rec)
                        r[g.cbit] = bit
                        nxt.append((p * q, r, add_noise(nv, idx, g)))
                    continue
                if _condition_holds(g, rec):
                    v = eng.apply(v, g)
                nxt.append((p, rec, add_noise(v, idx, g)))
            branches = nxt

        cbits = c.classical_bits
        probs = sum(p * eng.probs(v) for p, _, v in branches)
        counts: dict[str, int] = {}
        ccounts: dict[str, int] = {}
        if len(branches) == 1:
            p, rec, v = branches[0]
            final = eng.state(v, shape)
            counts = sample_counts(probs, shots, src, n)
            if shots and cbits:
                ccounts = {"".join(str(rec[k]) for k in cbits): shots}
        else:
            weights = np.array([p for p, _, _ in branches])
            pick = _sample_branch(weights, src)
            final = eng.state(branches[pick][2], shape)
            if self.mixed:
                final = QState(sum(p * v for p, _, v in branches).reshape(1 << n, 1 << n), shape, "mixed", validate=False)
            if shots:
                per = sample_indices(weights, shots, src)
                for j in np.flatnonzero(per):
                    m = int(per[j])
                    p, rec, v = branches[j]
                    for key, cnt in sample_counts(eng.probs(v), m, src, n).items():
                        counts[key] = counts.get(key, 0) + cnt
                    ck = "".join(str(rec.get(k, 0)) for k in cbits)
                    ccounts[ck] = ccounts.get(ck, 0) + m
        meta = {
            "backend": self.name,
            "seed": seed_used,
            "shots": int(shots),
            "elapsed": time.perf_counter() - t0,
            "classical_bits": cbits,
            "kernel": _kernels.backend_name(),
        }
        out_branches = [Branch(p, rec, eng.state(v, shape)) for p, rec, v in branches] if cbits else []
        return RunResult(counts, final, meta, probs, ccounts, out_branches)


def _sample_branch(weights: np.ndarray, src: EntropySource) -> int:
    cdf = np.cumsum(weights)
    u = src.next_uniform() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(weights) - 1))


# ---------------------------------------------------------------- registry


class BackendRegistry:
    def __init__(self, with_builtins: bool = True):
        self._items: dict[str, Backend] = {}
        if with_builtins:
            self.register(SimulatorBackend("sv-ideal", mixed=False, max_qubits=MAX_APPLY_QUBITS))
            self.register(SimulatorBackend("dm-noisy", mixed=True, max_qubits=MAX_APPLY_QUBITS // 2))

    def register(self, backend: Backend) -> None:
        if backend.name in self._items:
            raise DuplicateName(f"backend {backend.name!r} already registered")
        self._items[backend.name] = backend

    def get(self, name: str) -> Backend:
        try:
            return self._items[name]
        except KeyError:
            raise UnknownBackend(f"no backend named {name!r}; known: {list(self._items)}") from None

    def names(self) -> list[str]:
        return list(self._items)


_DEFAULT = BackendRegistry()


def default_registry() -> BackendRegistry:
    return _DEFAULT


def register_backend(registry: BackendRegistry, backend: Backend) -> None:
    registry.register(backend)


def list_backends(registry: BackendRegistry | None = None) -> list[str]:
    return (registry or _DEFAULT).names()


def get_backend(name, registry: BackendRegistry | None = None) -> Backend:
    if isinstance(name, Backend):
        return name
    return (registry or _DEFAULT).get(name)


def qrun(circuit: Circuit, binding=None, backend="sv-ideal", shots: int = 0, noise=None, seed=None,
         registry: BackendRegistry | None = None, source=None, initial_state=None) -> RunResult:
    """Run ``circuit`` under ``binding`` on a named or given backend."""
    be = get_backend(backend, registry)
    return be.run(circuit, binding, noise, shots, seed, source, initial_state)


# ---------------------------------------------------------------- gate-level API


def _numeric_block(u) -> np.ndarray:
    from .symlinalg import as_matrix

    m = as_matrix(u)
    if m.free_symbols():
        raise NotNumeric("run_gate needs a numeric matrix")
    return m.to_numpy()


def run_gate(u, targets, state, backend=None, controls=()) -> QState:
    """Apply a numeric block on ``targets`` (optionally quantum-controlled) to a state."""
    st = as_state(state)
    n = st.dim.bit_length() - 1
    if 1 << n != st.dim:
        raise ShapeError("run_gate works on qubit registers")
    blk = _numeric_block(u)
    targets = [int(t) for t in targets]
    if blk.shape != (1 << len(targets),) * 2:
        raise ShapeError(f"matrix {blk.shape} does not act on {len(targets)} wires")
    for w in list(targets) + list(controls):
        if not 0 <= w < n:
            raise WireOutOfRange(f"wire {w} outside 0..{n - 1}")
    g = GateApp("custom", tuple(targets), tuple(controls), (), blk)
    eng = _PureEngine(n) if st.is_pure else _MixedEngine(n)
    v = np.array(st.numeric(), dtype=np.complex128).reshape(-1)
    return eng.state(eng.apply(v, g), st.shape)


def run_cgate(u, targets, condition, state, record: Mapping | None = None, backend=None, controls=()) -> QState:
    """Apply ``u`` only if the classical bit ``condition`` reads 1.

    ``condition`` is a bit name looked up in ``record`` or a literal 0/1.
    """
    if isinstance(condition, str):
        if record is None or condition not in record:
            raise MissingClassicalBit(f"classical bit {condition!r} has not been measured")
        bit = int(record[condition])
    else:
        bit = int(condition)
    if bit != 1:
        return as_state(state)
    return run_gate(u, targets, state, backend, controls)


def measure(state, wire: int, source: EntropySource | None = None, seed=None) -> tuple[int, QState]:
    """Computational-basis measurement of one wire with Born-rule collapse."""
    st = as_state(state)
    n = st.dim.bit_length() - 1
    if not 0 <= wire < n:
        raise WireOutOfRange(f"wire {wire} outside 0..{n - 1}")
    src, _ = _source(seed, source)
    eng = _PureEngine(n) if st.is_pure else _MixedEngine(n)
    v = np.array(st.numeric(), dtype=np.complex128).reshape(-1)
    outs = eng.measure(v, wire)
    k = _sample_branch(np.array([p for _, p, _ in outs]), src)
    bit, _, nv = outs[k]
    return bit, eng.state(nv, st.shape)


__all__ = [
    "Backend", "BackendRegistry", "Branch", "Capabilities", "NoiseEntry", "NoiseSpec", "RunResult",
    "SimulatorBackend", "bind_circuit", "default_registry", "get_backend", "list_backends", "measure",
    "qrun", "register_backend", "run_cgate", "run_gate", "sample_counts", "sample_indices",
]

