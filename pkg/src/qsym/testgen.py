"""Test-case generation, circuit equivalence checking and subsystem testing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .backend import qrun
from .circuit import Circuit, GateApp, apply_circuit, circuit_unitary
from .errors import CapabilityError, DomainError, NotNumeric, ShapeError, SizeLimit, WidthMismatch
from .io import state_from_json, state_to_json
from .qstate import QState, RegisterShape, as_state, fidelity, partial_trace
from .random import EntropySource, SeededPRNG, default_source, random_ket
from .symexpr import ZERO, Binding, Expr, Symbol, eval_numeric, parse_expr, to_string
from .symexpr.core import fn
from .symlinalg import SymMatrix, matmul

MAX_BASIS_QUBITS = 6
MAX_EXACT_QUBITS = 10
MAX_SYMBOLIC_QUBITS = 5
PHASE_TOL = 1e-9
FIDELITY_TOL = 1e-9


# ---------------------------------------------------------------- test cases


@dataclass(frozen=True)
class ExpectedState:
    state: QState


@dataclass(frozen=True)
class ExpectedDistribution:
    probabilities: dict  # bitstring -> SymExpr or float


@dataclass
class TestCase:
    __test__ = False  # not a pytest class

    input_state: QState
    expected: ExpectedState | ExpectedDistribution
    tolerance: float = 1e-9
    name: str = ""

    @property
    def symbols(self) -> frozenset[str]:
        out = frozenset(s.name for s in self.input_state.body.free_symbols())
        if isinstance(self.expected, ExpectedState):
            out |= frozenset(s.name for s in self.expected.state.body.free_symbols())
        return out

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"name": self.name, "input": state_to_json(self.input_state), "tolerance": self.tolerance}
        if isinstance(self.expected, ExpectedState):
            doc["expected"] = {"state": state_to_json(self.expected.state)}
        else:
            doc["expected"] = {
                "distribution": {k: (to_string(v) if isinstance(v, Expr) else float(v))
                                 for k, v in self.expected.probabilities.items()}
            }
        return doc

    @classmethod
    def from_json(cls, doc: dict, dim: int | None = None) -> "TestCase":
        inp = state_from_json(doc["input"], dim, "/input")
        exp = doc["expected"]
        if "state" in exp:
            expected: Any = ExpectedState(state_from_json(exp["state"], inp.dim, "/expected/state"))
        else:
            expected = ExpectedDistribution(
                {k: (parse_expr(v) if isinstance(v, str) else float(v)) for k, v in exp["distribution"].items()}
            )
        return cls(inp, expected, float(doc.get("tolerance", 1e-9)), doc.get("name", ""))


@dataclass
class CaseResult:
    index: int
    name: str
    passed: bool
    fidelity: float
    detail: str = ""

    def to_json(self) -> dict:
        return {"index": self.index, "name": self.name, "passed": self.passed, "fidelity": self.fidelity,
                "detail": self.detail}


def _bits(i: int, n: int) -> str:
    return format(i, f"0{n}b")


def _resolve_source(src) -> EntropySource:
    if src is None:
        return default_source()
    if isinstance(src, EntropySource):
        return src
    return SeededPRNG(int(src))


def generate_test_cases(
    circuit: Circuit,
    strategy: str = "basis",
    k: int = 5,
    src=None,
    binding=None,
    pairs=None,
    symbol: str = "alpha",
    allow_large: bool = False,
    tolerance: float = 1e-9,
) -> list[TestCase]:
    """Build cases whose expected outputs come from simulating ``circuit``.

    strategies: ``basis`` (every computational basis input), ``symbolic_family``
    (``cos(a)|i> + sin(a)|j>`` over basis pairs, expected output kept symbolic)
    and ``random_kets`` (``k`` Haar inputs from ``src``).
    """
    n = circuit.num_qubits
    d = 1 << n
    if not circuit.is_unitary:
        raise CapabilityError("test generation needs a measurement-free circuit")
    bound = circuit.bind(Binding(binding)) if binding else circuit
    shape = RegisterShape.qubits(n)
    if strategy == "basis":
        if n > MAX_BASIS_QUBITS and not allow_large:
            raise SizeLimit(f"basis strategy limited to {MAX_BASIS_QUBITS} qubits without allow_large")
        if bound.free_symbols:
            raise NotNumeric(f"bind {sorted(bound.free_symbols)} before generating basis cases")
        cases = []
        for i in range(d):
            inp = QState.basis(i, shape)
            out = apply_circuit(bound, inp)
            cases.append(TestCase(inp, ExpectedState(out), tolerance, f"basis {_bits(i, n)}"))
        return cases
    if strategy == "random_kets":
        if bound.free_symbols:
            raise NotNumeric(f"bind {sorted(bound.free_symbols)} before generating random cases")
        s = _resolve_source(src)
        cases = []
        for j in range(k):
            inp = random_ket(d, s, shape)
            cases.append(TestCase(inp, ExpectedState(apply_circuit(bound, inp)), tolerance, f"haar {j}"))
        return cases
    if strategy == "symbolic_family":
        if n > MAX_SYMBOLIC_QUBITS and not allow_large:
            raise SizeLimit(f"symbolic family limited to {MAX_SYMBOLIC_QUBITS} qubits without allow_large")
        if pairs is None:
            pairs = [(0, d - 1)]
        a = Symbol(symbol, "real")
        u = circuit_unitary(bound, exact=True)
        cases = []
        for i, j in pairs:
            if not (0 <= i < d and 0 <= j < d) or i == j:
                raise ShapeError(f"basis pair ({i}, {j}) invalid for dimension {d}")
            vec = np.full((d, 1), ZERO, dtype=object)
            vec[i, 0] = fn("cos", a)
            vec[j, 0] = fn("sin", a)
            inp = QState(SymMatrix(vec), shape, "pure", validate=False)
            out = matmul(u, inp.body).simplify()
            cases.append(TestCase(inp, ExpectedState(QState(out, shape, "pure", validate=False)), tolerance,
                                  f"family {symbol} over ({_bits(i, n)}, {_bits(j, n)})"))
        return cases
    raise DomainError(f"unknown strategy {strategy!r}")


def _sample_points(symbols, count: int, seed: int = 12345) -> list[dict]:
    rng = np.random.default_rng(seed)
    names = sorted(symbols)
    return [dict(zip(names, rng.uniform(-math.pi, math.pi, len(names)))) for _ in range(count)]


def run_test_case(circuit: Circuit, case: TestCase, index: int = 0, backend="sv-ideal", binding=None,
                  keep=None, samples: int = 5) -> CaseResult:
    """Execute one case; symbolic families are checked at ``samples`` random bindings."""
    points = [{}] if not case.symbols else _sample_points(case.symbols, samples)
    worst = 1.0
    for pt in points:
        b = Binding(pt) if pt else None
        inp = case.input_state.bind(b) if b else case.input_state
        res = qrun(circuit, binding, backend, 0, initial_state=inp)
        out = res.final_state
        if keep is not None:
            out = partial_trace(out, keep)
        if isinstance(case.expected, ExpectedState):
            exp = case.expected.state.bind(b) if b and case.expected.state.is_symbolic else case.expected.state
            if exp.dim != out.dim:
                raise ShapeError(f"expected state has dimension {exp.dim}, output has {out.dim}")
            f = fidelity(out, exp)
        else:
            probs = np.real(np.diag(out.density().to_numpy())) if not out.is_pure else np.abs(out.numeric()) ** 2
            want = np.zeros(len(probs))
            env = {**dict(binding or {}), **pt}  # distributions may mention circuit parameters
            for key, v in case.expected.probabilities.items():
                want[int(key, 2)] = eval_numeric(v, env).real if isinstance(v, Expr) else float(v)
            f = 1.0 - 0.5 * float(np.abs(probs - want).sum())
        worst = min(worst, f)
    return CaseResult(index, case.name, worst >= 1.0 - case.tolerance, float(worst))


def run_suite(circuit: Circuit, cases, backend="sv-ideal", binding=None) -> list[CaseResult]:
    return [run_test_case(circuit, c, i, backend, binding) for i, c in enumerate(cases)]


# ---------------------------------------------------------------- equivalence


@dataclass
class EquivalenceReport:
    verdict: str  # equivalent | equivalent_up_to_global_phase | distinct
    method: str
    witness: QState | None = None
    outputs: tuple | None = None
    discrepancy: float = 0.0
    phase: float = 0.0
    decided_by: str = ""
    binding: dict = field(default_factory=dict)

    @property
    def equivalent(self) -> bool:
        return self.verdict != "distinct"

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"verdict": self.verdict, "method": self.method, "decided_by": self.decided_by}
        if self.verdict == "equivalent_up_to_global_phase" and self.decided_by != "numeric_sampling":
            doc["phase"] = self.phase
        if self.witness is not None:
            doc["witness"] = state_to_json(self.witness)
            doc["outputs"] = [state_to_json(o) for o in self.outputs]
            doc["fidelity_deficit"] = self.discrepancy
        if self.binding:
            doc["binding"] = {k: float(v) for k, v in self.binding.items()}
        return doc


def _numeric_unitary(c: Circuit, binding=None) -> np.ndarray:
    b = binding or {}
    missing = c.free_symbols - set(b)
    if missing:
        raise NotNumeric(f"unbound parameters {sorted(missing)}")
    return circuit_unitary(c, Binding(b) if b else None).to_numpy()


def _phase_class(w: np.ndarray) -> tuple[str, float]:
    """Classify ``w = U1^dag U2``: identity, global phase, or neither."""
    diag = np.diag(w)
    nz = np.flatnonzero(np.abs(diag) > PHASE_TOL)
    if len(nz) == 0:
        return "distinct", 0.0
    phi = float(np.angle(diag[nz[0]]))
    d = w.shape[0]
    if np.max(np.abs(w - np.eye(d))) <= PHASE_TOL:
        return "equivalent", 0.0
    if np.max(np.abs(w - np.exp(1j * phi) * np.eye(d))) <= PHASE_TOL:
        return "equivalent_up_to_global_phase", phi
    return "distinct", phi


def _pair_fidelity(c1, c2, psi: QState, binding=None) -> tuple[float, QState, QState]:
    o1 = apply_circuit(c1, psi, binding or None)
    o2 = apply_circuit(c2, psi, binding or None)
    return fidelity(o1, o2), o1, o2


def _witness_from_unitaries(u1, u2, c1, c2, binding, n) -> tuple[QState, float, tuple]:
    """Basis states, then (|0> + |j>)/sqrt2 superpositions; one of them always works."""
    d = u1.shape[0]
    shape = RegisterShape.qubits(n)
    cands = [QState.basis(i, shape) for i in range(d)]
    for j in range(1, d):
        v = np.zeros(d, dtype=np.complex128)
        v[0] = v[j] = 1 / math.sqrt(2)
        cands.append(QState(v, shape, "pure", validate=False))
    best = None
    for psi in cands:
        a, b = u1 @ psi.numeric(), u2 @ psi.numeric()
        f = float(abs(np.vdot(a, b)) ** 2)
        if f < 1 - FIDELITY_TOL:
            return psi, 1 - f, (QState(a, shape, "pure", validate=False), QState(b, shape, "pure", validate=False))
        if best is None or f < best[1]:
            best = (psi, f, a, b)
    psi, f, a, b = best
    return psi, 1 - f, (QState(a, shape, "pure", validate=False), QState(b, shape, "pure", validate=False))


def _exact(c1, c2, binding) -> EquivalenceReport:
    n = c1.num_qubits
    u1 = _numeric_unitary(c1, binding)
    u2 = _numeric_unitary(c2, binding)
    verdict, phi = _phase_class(u1.conj().T @ u2)
    if verdict != "distinct":
        return EquivalenceReport(verdict, "exact_matrix", phase=phi, decided_by="matrix", binding=dict(binding or {}))
    psi, gap, outs = _witness_from_unitaries(u1, u2, c1, c2, binding, n)
    return EquivalenceReport("distinct", "exact_matrix", psi, outs, gap, decided_by="matrix",
                             binding=dict(binding or {}))


def _randomized(c1, c2, trials, src, binding) -> EquivalenceReport:
    n = c1.num_qubits
    s = _resolve_source(src)
    overlaps = []
    for _ in range(trials):
        psi = random_ket(1 << n, s, RegisterShape.qubits(n))
        o1 = apply_circuit(c1, psi, binding or None)
        o2 = apply_circuit(c2, psi, binding or None)
        ov = complex(np.vdot(o1.numeric(), o2.numeric()))
        f = abs(ov) ** 2
        if f < 1 - FIDELITY_TOL:
            return EquivalenceReport("distinct", "randomized_states", psi, (o1, o2), 1 - f, decided_by="haar_trials",
                                     binding=dict(binding or {}))
        overlaps.append(ov)
    phases = np.angle(overlaps) if overlaps else np.zeros(1)
    if np.max(np.abs(np.exp(1j * phases) - 1)) <= 1e-7:
        return EquivalenceReport("equivalent", "randomized_states", decided_by="haar_trials", binding=dict(binding or {}))
    return EquivalenceReport("equivalent_up_to_global_phase", "randomized_states", phase=float(phases[0]),
                             decided_by="haar_trials", binding=dict(binding or {}))


def _symbolic(c1, c2, binding, samples: int = 20) -> EquivalenceReport:
    n = c1.num_qubits
    if n > MAX_SYMBOLIC_QUBITS:
        raise SizeLimit(f"symbolic equivalence limited to {MAX_SYMBOLIC_QUBITS} qubits")
    b1 = c1.bind(Binding(binding)) if binding else c1
    b2 = c2.bind(Binding(binding)) if binding else c2
    u1 = circuit_unitary(b1).simplify()
    u2 = circuit_unitary(b2).simplify()
    if u1.equals(u2):
        return EquivalenceReport("equivalent", "symbolic", decided_by="structural")
    symbols = b1.free_symbols | b2.free_symbols
    verdicts = []
    for pt in (_sample_points(symbols, samples, seed=2024) if symbols else [{}]):
        rep = _exact(b1, b2, pt)
        if rep.verdict == "distinct":
            rep.method, rep.decided_by = "symbolic", "numeric_sampling"
            return rep
        verdicts.append(rep.verdict)
    verdict = "equivalent" if all(v == "equivalent" for v in verdicts) else "equivalent_up_to_global_phase"
    return EquivalenceReport(verdict, "symbolic", decided_by="numeric_sampling")


def check_equivalence(c1: Circuit, c2: Circuit, method: str = "exact_matrix", trials: int = 8, src=None,
                      binding=None) -> EquivalenceReport:
    """Compare two circuits; ``distinct`` verdicts carry a reproducing witness state."""
    if c1.num_qubits != c2.num_qubits:
        raise WidthMismatch(f"circuits act on {c1.num_qubits} and {c2.num_qubits} qubits")
    if not (c1.is_unitary and c2.is_unitary):
        raise CapabilityError("equivalence checking needs measurement-free circuits")
    if method == "exact_matrix":
        if c1.num_qubits > MAX_EXACT_QUBITS:
            raise SizeLimit(f"exact_matrix limited to {MAX_EXACT_QUBITS} qubits")
        return _exact(c1, c2, binding)
    if method == "randomized_states":
        return _randomized(c1, c2, trials, src, binding)
    if method == "symbolic":
        return _symbolic(c1, c2, binding)
    raise DomainError(f"unknown equivalence method {method!r}")


def replay_witness(report: EquivalenceReport, c1: Circuit, c2: Circuit) -> float:
    """Fidelity deficit of the two outputs on the report's witness."""
    if report.witness is None:
        raise DomainError("report has no witness")
    f, _, _ = _pair_fidelity(c1, c2, report.witness, report.binding or None)
    return 1.0 - f


# ---------------------------------------------------------------- subsystem testing


@dataclass
class SubsystemReport:
    keep: tuple[int, ...]
    results: list[CaseResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {"keep": list(self.keep), "passed": self.passed, "results": [r.to_json() for r in self.results]}


def subsystem_test(circuit: Circuit, keep, cases, backend="sv-ideal", binding=None) -> SubsystemReport:
    """Run cases and compare the output marginal on ``keep`` with each expected reduced state."""
    keep = RegisterShape.qubits(circuit.num_qubits).check_indices(keep)
    results = [run_test_case(circuit, c, i, backend, binding, keep=keep) for i, c in enumerate(cases)]
    return SubsystemReport(keep, results)


# ---------------------------------------------------------------- mutations

SUBSTITUTABLE = ("X", "Y", "Z", "H", "S", "T")


@dataclass(frozen=True)
class Mutation:
    kind: str  # substitute | remove_control | swap_adjacent
    index: int
    detail: str = ""


def mutation_sites(c: Circuit) -> list[Mutation]:
    """Every single mutation the operators can apply to ``c``."""
    out = []
    for i, g in enumerate(c.gates):
        if g.name in SUBSTITUTABLE and not g.controls and g.matrix is None:
            out.extend(Mutation("substitute", i, alt) for alt in SUBSTITUTABLE if alt != g.name)
        if g.controls or g.name in ("CNOT", "CZ"):
            out.append(Mutation("remove_control", i))
        if i + 1 < len(c.gates):
            out.append(Mutation("swap_adjacent", i))
    return out


def apply_mutation(c: Circuit, m: Mutation) -> Circuit:
    gates = list(c.gates)
    g = gates[m.index]
    if m.kind == "substitute":
        gates[m.index] = g.with_(name=m.detail)
    elif m.kind == "remove_control":
        if g.controls:
            gates[m.index] = g.with_(controls=g.controls[1:])
        elif g.name == "CNOT":
            gates[m.index] = GateApp("X", (g.targets[1],), condition=g.condition)
        elif g.name == "CZ":
            gates[m.index] = GateApp("Z", (g.targets[1],), condition=g.condition)
        else:
            raise DomainError(f"gate {g.name} has no control to remove")
    elif m.kind == "swap_adjacent":
        gates[m.index], gates[m.index + 1] = gates[m.index + 1], gates[m.index]
    else:
        raise DomainError(f"unknown mutation {m.kind!r}")
    return Circuit(c.num_qubits, tuple(gates))


def random_circuit(n: int, depth: int, rng: np.random.Generator, two_qubit_prob: float = 0.3,
                   hadamard_layer: bool = False) -> Circuit:
    """Random circuit over {X,Y,Z,H,S,T} and {CNOT, CZ}.

    ``hadamard_layer`` prepends H on every wire, the usual opening of
    algorithm-style circuits.
    """
    gates = [GateApp("H", (q,)) for q in range(n)] if hadamard_layer else []
    for _ in range(depth):
        if n >= 2 and rng.random() < two_qubit_prob:
            a, b = (int(x) for x in rng.choice(n, 2, replace=False))
            gates.append(GateApp("CNOT" if rng.random() < 0.6 else "CZ", (a, b)))
        else:
            gates.append(GateApp(str(rng.choice(SUBSTITUTABLE)), (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates))


def detects(circuit: Circuit, mutant: Circuit, cases) -> bool:
    return not all(r.passed for r in run_suite(mutant, cases))


__all__ = [
    "CaseResult", "EquivalenceReport", "ExpectedDistribution", "ExpectedState", "Mutation", "SUBSTITUTABLE",
    "SubsystemReport", "TestCase", "apply_mutation", "check_equivalence", "detects", "generate_test_cases",
    "mutation_sites", "random_circuit", "replay_witness", "run_suite", "run_test_case", "subsystem_test",
]
