"""Objectives, gradients and the classical optimisation loop."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .backend import NoiseSpec, get_backend, qrun
from .circuit import Circuit, GateApp, _apply_object, gate_matrix
from .errors import (
    CapabilityError,
    DomainError,
    ExprSyntaxError,
    NonFiniteObjective,
    ShapeError,
    SizeLimit,
    UnsupportedGateForShift,
    WireOutOfRange,
)
from .symexpr import (
    ONE,
    ZERO,
    Binding,
    Expr,
    Num,
    as_expr,
    differentiate,
    eval_numeric,
    free_symbol_names,
    parse_expr,
    real_bounds,
    simplify,
    to_string,
)
from .symexpr.core import add as _add, fn, mul as _mul

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
_PAULI_TOKEN = re.compile(r"^([XYZI])(\d+)$")
_SYMBOLIC_SHIFT_LIMIT = 6


# ---------------------------------------------------------------- observables


@dataclass(frozen=True)
class PauliTerm:
    coeff: Expr
    paulis: tuple[tuple[int, str], ...]  # sorted (wire, letter)

    @property
    def wires(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.paulis)

    def label(self) -> str:
        return "*".join(f"{p}{w}" for w, p in self.paulis) or "I"


class Observable:
    """Real-weighted sum of Pauli strings, e.g. ``"0.5*Z0*Z1 - X2 + 1"``."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        out = []
        for t in terms:
            if isinstance(t, PauliTerm):
                coeff, paulis = t.coeff, dict(t.paulis)
            else:
                coeff, paulis = t
                paulis = dict(paulis)
            coeff = parse_expr(coeff) if isinstance(coeff, str) else as_expr(coeff)
            if real_bounds(coeff) is None:
                raise DomainError(f"observable coefficient {to_string(coeff)} is not real")
            items = []
            for w, p in paulis.items():
                p = str(p).upper()
                w = int(w)
                if w < 0:
                    raise WireOutOfRange(f"Pauli on negative wire {w}")
                if p == "I":
                    continue
                if p not in _PAULI:
                    raise DomainError(f"unknown Pauli {p!r}")
                items.append((w, p))
            out.append(PauliTerm(coeff, tuple(sorted(items))))
        object.__setattr__(self, "terms", tuple(out))

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    @classmethod
    def parse(cls, text: str) -> "Observable":
        terms = []
        for sign, chunk in _split_terms(text):
            factors = [f for f in re.split(r"[\s*]+", chunk.strip()) if f]
            paulis: dict[int, str] = {}
            rest = []
            for f in factors:
                m = _PAULI_TOKEN.match(f)
                if m:
                    w = int(m.group(2))
                    if w in paulis:
                        raise ExprSyntaxError(f"wire {w} repeated in term {chunk!r}", 0, text)
                    paulis[w] = m.group(1)
                else:
                    rest.append(f)
            coeff = parse_expr("*".join(rest)) if rest else ONE
            if sign < 0:
                coeff = simplify(_mul((Num(-1), coeff)))
            terms.append((coeff, paulis))
        if not terms:
            raise ExprSyntaxError("empty observable", 0, text)
        return cls(terms)

    @classmethod
    def from_json(cls, data) -> "Observable":
        if isinstance(data, str):
            return cls.parse(data)
        items = data["terms"] if isinstance(data, dict) else data
        return cls([(t.get("coeff", 1), t.get("paulis", {})) for t in items])

    def to_json(self) -> dict:
        return {
            "terms": [
                {"coeff": to_string(t.coeff), "paulis": {str(w): p for w, p in t.paulis}} for t in self.terms
            ]
        }

    @property
    def max_wire(self) -> int:
        return max((w for t in self.terms for w in t.wires), default=-1)

    @property
    def free_symbols(self) -> frozenset[str]:
        out = frozenset()
        for t in self.terms:
            out |= free_symbol_names(t.coeff)
        return out

    def coefficients(self, binding=None) -> np.ndarray:
        return np.array([eval_numeric(t.coeff, binding or {}).real for t in self.terms])

    def matrix(self, n: int, binding=None) -> np.ndarray:
        """Dense 2^n x 2^n matrix (for tests and small problems)."""
        d = 1 << n
        out = np.zeros((d, d), dtype=np.complex128)
        for c, t in zip(self.coefficients(binding), self.terms):
            m = np.ones((1, 1), dtype=np.complex128)
            ops = dict(t.paulis)
            for w in range(n):
                m = np.kron(m, _PAULI[ops[w]] if w in ops else np.eye(2))
            out += c * m
        return out

    def expectation(self, state, n: int, binding=None) -> float:
        """``<psi|O|psi>`` (1-D amplitude array) or ``tr(rho O)`` (2-D matrix)."""
        self._check_width(n)
        total = 0.0
        for c, t in zip(self.coefficients(binding), self.terms):
            total += c * pauli_expectation(state, t.paulis, n)
        return float(total)

    def _check_width(self, n: int):
        if self.max_wire >= n:
            raise WireOutOfRange(f"observable acts on wire {self.max_wire} of a {n}-qubit register")

    def __repr__(self):
        parts = [f"{to_string(t.coeff)}*{t.label()}" for t in self.terms]
        return "Observable(" + " + ".join(parts) + ")"


def _split_terms(text: str):
    out, depth, start, sign = [], 0, 0, 1
    s = text.strip()
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            prev = s[:i].rstrip()
            exponent = len(prev) >= 2 and prev[-1] in "eE" and (prev[-2].isdigit() or prev[-2] == ".")
            unary = not prev or prev[-1] in "*/^(+-"
            if not exponent and not unary:
                out.append((sign, s[start:i]))
                sign, start = (1 if ch == "+" else -1), i + 1
            elif not prev and i == 0:
                sign, start = (1 if ch == "+" else -1), 1
        i += 1
    out.append((sign, s[start:]))
    return [(sg, chunk) for sg, chunk in out if chunk.strip()]


def pauli_expectation(state, paulis, n: int) -> float:
    a = np.asarray(state)
    if not paulis:
        return float(np.trace(a).real) if a.ndim == 2 else float(np.vdot(a, a).real)
    if a.ndim == 1:
        v = a
        for w, p in paulis:
            v = _kernels.apply_matrix(v, _PAULI[p], [w], [], n)
        return float(np.vdot(a, v).real)
    d = 1 << n
    v = a.reshape(-1)
    for w, p in paulis:
        v = _kernels.apply_matrix(v, _PAULI[p], [w], [], 2 * n)
    return float(np.trace(v.reshape(d, d)).real)


# ---------------------------------------------------------------- objectives


@dataclass
class Objective:
    """Expectation of ``observable`` after ``circuit``.

    ``mode`` is ``"exact"`` (statevector / density matrix) or ``"sampled"``
    with ``shots`` measurements per Pauli term. The parameter vector follows
    the lexicographic order of the circuit's free symbols, frozen here.
    """

    circuit: Circuit
    observable: Observable
    backend: object = "sv-ideal"
    mode: str = "exact"
    shots: int = 0
    seed: int | None = 0
    noise: NoiseSpec | None = None
    initial_state: object = None
    parameter_names: tuple[str, ...] = field(default=(), init=False)

    def __post_init__(self):
        if isinstance(self.observable, str):
            self.observable = Observable.parse(self.observable)
        if self.mode not in ("exact", "sampled"):
            raise DomainError(f"unknown objective mode {self.mode!r}")
        if self.mode == "sampled" and self.shots <= 0:
            raise ShapeError("sampled mode needs shots > 0")
        self.observable._check_width(self.circuit.num_qubits)
        self.parameter_names = tuple(self.circuit.parameter_names)

    @property
    def num_params(self) -> int:
        return len(self.parameter_names)

    def binding(self, params) -> dict:
        x = np.asarray(params, dtype=np.float64).reshape(-1)
        if len(x) != self.num_params:
            raise ShapeError(f"expected {self.num_params} parameters {list(self.parameter_names)}, got {len(x)}")
        return dict(zip(self.parameter_names, (float(v) for v in x)))

    def with_circuit(self, circuit: Circuit) -> "Objective":
        return Objective(circuit, self.observable, self.backend, self.mode, self.shots, self.seed, self.noise,
                         self.initial_state)

    def __call__(self, params) -> float:
        return objective_value(self, params)


def _exact_value(obj: Objective, circuit: Circuit, binding: dict) -> float:
    res = qrun(circuit, binding, obj.backend, 0, obj.noise, obj.seed, initial_state=obj.initial_state)
    n = circuit.num_qubits
    if res.branches:
        return float(sum(b.probability * obj.observable.expectation(b.state.numeric(), n, binding)
                         for b in res.branches))
    return obj.observable.expectation(res.final_state.numeric(), n, binding)


_BASIS_CHANGE = {"X": ("H",), "Y": ("SDG", "H"), "Z": ()}


def _sampled_value(obj: Objective, circuit: Circuit, binding: dict, seed) -> float:
    n = circuit.num_qubits
    coeffs = obj.observable.coefficients(binding)
    be = get_backend(obj.backend)
    rng = np.random.SeedSequence(seed if seed is not None else None)
    seeds = rng.generate_state(len(coeffs))
    total = 0.0
    for c, t, s in zip(coeffs, obj.observable.terms, seeds):
        if not t.paulis:
            total += c
            continue
        gates = list(circuit.gates)
        for w, p in t.paulis:
            gates.extend(GateApp(name, (w,)) for name in _BASIS_CHANGE[p])
        rotated = Circuit(n, tuple(gates))
        res = be.run(rotated, binding, obj.noise, obj.shots, int(s), initial_state=obj.initial_state)
        wires = t.wires
        acc = 0
        for bits, cnt in res.counts.items():
            parity = sum(int(bits[w]) for w in wires) & 1
            acc += -cnt if parity else cnt
        total += c * acc / obj.shots
    return float(total)


def objective_value(obj: Objective, params, seed=None) -> float:
    b = obj.binding(params)
    return _value_at(obj, obj.circuit, b, seed)


def _value_at(obj: Objective, circuit: Circuit, binding: dict, seed=None) -> float:
    if obj.mode == "exact":
        return _exact_value(obj, circuit, binding)
    return _sampled_value(obj, circuit, binding, obj.seed if seed is None else seed)


# ---------------------------------------------------------------- gradients


def _shift_supported(g: GateApp) -> bool:
    d = g.definition
    if d is None or d.generator is None:
        return False
    if g.controls:
        return d.generator == "P"  # controlled phase: generator is a projector (eigenvalues 0, 1)
    return True


def shift_occurrences(circuit: Circuit) -> list[tuple[int, dict]]:
    """Gate indices whose angle depends on a symbol, with d(angle)/d(symbol) expressions."""
    out = []
    for idx, g in enumerate(circuit.gates):
        if not g.free_symbols:
            continue
        if not _shift_supported(g):
            raise UnsupportedGateForShift(g.name if not g.controls else f"controlled-{g.name}")
        angle = g.params[0]
        derivs = {name: differentiate(angle, name) for name in free_symbol_names(angle)}
        out.append((idx, derivs))
    return out


def gradient_parameter_shift(obj: Objective, params, seed=None) -> np.ndarray:
    """Two-term shift rule per gate occurrence, chained through the angle expression."""
    b = obj.binding(params)
    occ = shift_occurrences(obj.circuit)
    grad = np.zeros(obj.num_params)
    pos = {name: k for k, name in enumerate(obj.parameter_names)}
    bound = obj.circuit.bind(Binding(b)) if obj.num_params else obj.circuit
    for idx, derivs in occ:
        g = obj.circuit.gates[idx]
        angle = eval_numeric(g.params[0], b).real
        vals = []
        for s in (math.pi / 2, -math.pi / 2):
            gates = list(bound.gates)
            gates[idx] = bound.gates[idx].with_(params=(Num(angle + s),))
            vals.append(_value_at(obj, Circuit(bound.num_qubits, tuple(gates)), b, seed))
        d_angle = (vals[0] - vals[1]) / 2.0
        for name, dexpr in derivs.items():
            grad[pos[name]] += eval_numeric(dexpr, b).real * d_angle
    return grad


def symbolic_expectation(obj: Objective) -> Expr:
    """``<psi0|U^dag O U|psi0>`` as a SymExpr in the circuit's parameters."""
    c = obj.circuit
    n = c.num_qubits
    if n > _SYMBOLIC_SHIFT_LIMIT:
        raise SizeLimit(f"symbolic objective limited to {_SYMBOLIC_SHIFT_LIMIT} qubits, got {n}")
    if obj.noise:
        raise CapabilityError("symbolic objective ignores noise; use an exact noiseless objective")
    if not c.is_unitary:
        raise CapabilityError("symbolic objective needs a measurement-free circuit")
    d = 1 << n
    if obj.initial_state is None:
        psi = np.full(d, ZERO, dtype=object)
        psi[0] = ONE
    else:
        from .qstate import as_state

        st = as_state(obj.initial_state)
        if not st.is_pure:
            raise CapabilityError("symbolic objective needs a pure initial state")
        psi = st.body.object_array().reshape(-1).copy()
    t = psi.reshape((2,) * n)
    simp = np.frompyfunc(simplify, 1, 1)
    for g in c.gates:
        t = simp(_apply_object(t, g.block().object_array(), g.targets, g.controls, n)).astype(object)
    psi = t.reshape(-1)
    conj = np.array([fn("conj", z, full=True) for z in psi], dtype=object)
    terms = []
    for term in obj.observable.terms:
        v = psi.reshape((2,) * n)
        for w, p in term.paulis:
            pm = gate_matrix(p).object_array()
            v = _apply_object(v, pm, [w], [], n)
        v = v.reshape(-1)
        inner = _add([_mul((conj[k], v[k])) for k in range(d) if v[k] != ZERO and conj[k] != ZERO])
        terms.append(_mul((term.coeff, inner)))
    return simplify(_add(terms))


def gradient_symbolic(obj: Objective) -> list[Expr]:
    """Symbolic partial derivatives in parameter-vector order."""
    if not obj.num_params:
        return []
    f = symbolic_expectation(obj)
    return [differentiate(f, name) for name in obj.parameter_names]


def eval_gradient(exprs, obj: Objective, params) -> np.ndarray:
    b = obj.binding(params)
    return np.array([eval_numeric(e, b).real for e in exprs])


# ---------------------------------------------------------------- optimisation


@dataclass
class Iterate:
    params: np.ndarray
    value: float
    gradient_norm: float


@dataclass
class OptimizerTrace:
    iterations: list[Iterate] = field(default_factory=list)
    terminal_reason: str = ""
    parameter_names: tuple[str, ...] = ()
    circuit: Circuit | None = None
    evaluations: int = 0

    @property
    def final(self) -> Iterate:
        return self.iterations[-1]

    @property
    def best(self) -> Iterate:
        return min(self.iterations, key=lambda it: it.value)


def _finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))


def optimize(
    obj: Objective,
    init,
    method: str = "gradient_descent",
    lr: float | Callable[[int], float] = 0.1,
    budget: int = 200,
    tol: float = 1e-6,
    gradient: str = "shift",
    stall_limit: int = 20,
    hook: Callable[[OptimizerTrace], Circuit | None] | None = None,
    beta1: float = 0.9,
    beta2: float = 0.999,
) -> OptimizerTrace:
    """Minimise ``obj`` from ``init``.

    ``budget`` caps the number of iterations (one gradient evaluation each);
    the initial point counts as the first. ``gradient_descent`` halves the step
    until the value decreases and rejects the step otherwise. ``adaptive`` is
    Adam with an optional schedule ``lr(k)``. ``hook`` sees the trace after
    every accepted iterate and may return a replacement circuit; parameters
    are carried over by name (new ones start at 0).
    """
    if method not in ("gradient_descent", "adaptive"):
        raise DomainError(f"unknown optimisation method {method!r}")
    if budget < 1:
        raise ShapeError("budget must be >= 1")
    x = np.asarray(init, dtype=np.float64).reshape(-1).copy()
    if not _finite(x):
        raise DomainError("initial parameters must be finite")
    trace = OptimizerTrace(parameter_names=obj.parameter_names, circuit=obj.circuit)
    step_size = (lambda k: float(lr)) if not callable(lr) else lr

    def grad_fn(o, p):
        if gradient == "symbolic":
            return eval_gradient(gradient_symbolic(o), o, p)
        return gradient_parameter_shift(o, p)

    def evaluate(o, p):
        trace.evaluations += 1
        f = objective_value(o, p)
        if not math.isfinite(f):
            raise NonFiniteObjective(f"objective is {f} at {p.tolist()}", trace)
        return f

    def gradient_at(o, p):
        gv = grad_fn(o, p)
        if not _finite(gv):
            raise NonFiniteObjective(f"gradient is not finite at {p.tolist()}", trace)
        return gv

    f = evaluate(obj, x)
    g = gradient_at(obj, x)
    trace.iterations.append(Iterate(x.copy(), f, float(np.linalg.norm(g))))
    best = f
    stall = 0
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    k = 1
    while True:
        if np.linalg.norm(g) < tol:
            trace.terminal_reason = "converged"
            break
        if k >= budget:
            trace.terminal_reason = "max_iter"
            break
        if stall >= stall_limit:
            trace.terminal_reason = "stalled"
            break
        k += 1
        eta = step_size(k - 1)
        accepted = False
        if method == "gradient_descent":
            step = eta
            for _ in range(40):
                cand = x - step * g
                fc = evaluate(obj, cand)
                if fc < f:
                    accepted = True
                    break
                step /= 2.0
        else:
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            mh = m / (1 - beta1 ** (k - 1))
            vh = v / (1 - beta2 ** (k - 1))
            cand = x - eta * mh / (np.sqrt(vh) + 1e-8)
            fc = evaluate(obj, cand)
            accepted = True
        if not accepted:
            stall += 1
            continue
        x, f = cand, fc
        stall = stall + 1 if f >= best else 0
        best = min(best, f)
        g = gradient_at(obj, x)
        trace.iterations.append(Iterate(x.copy(), f, float(np.linalg.norm(g))))
        if hook is not None:
            new = hook(trace)
            if new is not None:
                old = dict(zip(obj.parameter_names, x))
                obj = obj.with_circuit(new)
                x = np.array([old.get(name, 0.0) for name in obj.parameter_names])
                trace.parameter_names = obj.parameter_names
                trace.circuit = new
                f = evaluate(obj, x)
                g = gradient_at(obj, x)
                best = min(best, f)
                m = np.zeros_like(x)
                v = np.zeros_like(x)
    return trace


__all__ = [
    "Iterate", "Objective", "Observable", "OptimizerTrace", "PauliTerm", "eval_gradient",
    "gradient_parameter_shift", "gradient_symbolic", "objective_value", "optimize", "pauli_expectation",
    "shift_occurrences", "symbolic_expectation",
]

