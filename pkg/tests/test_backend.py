from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.backend import (
    Backend,
    BackendRegistry,
    Capabilities,
    NoiseEntry,
    NoiseSpec,
    RunResult,
    SimulatorBackend,
    list_backends,
    measure,
    qrun,
    register_backend,
    run_cgate,
    run_gate,
)
from qsym.circuit import Circuit, GateApp, circuit_unitary
from qsym.errors import CapabilityError, DuplicateName, MissingClassicalBit, UnboundSymbol, UnknownBackend
from qsym.qstate import QState, fidelity, partial_trace

seeds = st.integers(min_value=0, max_value=2**32 - 1)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def ghz(n):
    c = Circuit(n).append("H", [0])
    for q in range(1, n):
        c = c.append("CNOT", [q - 1, q])
    return c


def random_circuit(rng, n, m):
    names = ["H", "X", "Y", "S", "T", "RX", "RY", "RZ", "CNOT", "CZ", "SWAP"]
    c = Circuit(n)
    for _ in range(m):
        name = names[int(rng.integers(len(names)))]
        k = 2 if name in ("CNOT", "CZ", "SWAP") and n > 1 else 1
        if k == 1 and name in ("CNOT", "CZ", "SWAP"):
            name = "H"
        wires = [int(w) for w in rng.choice(n, size=k, replace=False)]
        params = [float(rng.uniform(-np.pi, np.pi))] if name.startswith("R") else []
        c = c.append(name, wires, params)
    return c


def embed1(k, q, n):
    return reduce(np.kron, [k if w == q else np.eye(2) for w in range(n)])


def tv(counts, probs, n, shots):
    emp = np.zeros(1 << n)
    for key, v in counts.items():
        emp[int(key, 2)] = v / shots
    return 0.5 * np.abs(emp - probs).sum()


def test_empty_circuit_counts():
    r = qrun(Circuit(1), shots=100, seed=1)
    assert r.counts == {"0": 100}
    assert r.metadata["backend"] == "sv-ideal" and r.metadata["shots"] == 100
    assert {"seed", "elapsed"} <= set(r.metadata)


def test_hadamard_sampling_binomial():
    shots = 100_000
    r = qrun(Circuit(1).append("H", [0]), shots=shots, seed=2024)
    assert sum(r.counts.values()) == shots
    assert abs(r.counts["0"] / shots - 0.5) <= 4 * 0.5 / np.sqrt(shots)


def test_counts_keys_and_determinism():
    c = random_circuit(np.random.default_rng(1), 3, 8)
    a = qrun(c, shots=500, seed=9)
    b = qrun(c, shots=500, seed=9)
    assert a.counts == b.counts
    assert all(len(k) == 3 for k in a.counts)
    assert sum(a.counts.values()) == 500


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_sv_and_dm_agree_noiseless(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    c = random_circuit(rng, n, 12)
    sv = qrun(c, backend="sv-ideal").final_state.numeric()
    dm = qrun(c, backend="dm-noisy").final_state.numeric()
    assert np.max(np.abs(dm - np.outer(sv, sv.conj()))) <= 1e-10


def test_ghz_bit_flip_against_dense_oracle():
    p, n, shots = 0.1, 3, 100_000
    c = ghz(n)
    last = len(c.gates) - 1
    noise = NoiseSpec([NoiseEntry(q, "bit_flip", p, last) for q in range(n)])
    r = qrun(c, backend="dm-noisy", shots=shots, noise=noise, seed=11)
    psi = np.zeros(8)
    psi[0] = psi[7] = 2**-0.5
    rho = np.outer(psi, psi)
    ks = [np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * X]
    for q in range(n):
        rho = sum(embed1(k, q, n) @ rho @ embed1(k, q, n).conj().T for k in ks)
    probs = np.real(np.diag(rho))
    assert np.allclose(r.probabilities, probs, atol=1e-12)
    assert tv(r.counts, probs, n, shots) <= 0.02


def test_uniform_noise_and_before_first_gate():
    c = Circuit(1).append("X", [0])
    r = qrun(c, backend="dm-noisy", noise=NoiseSpec([NoiseEntry(0, "amplitude_damping", 1.0, -1)]))
    assert np.allclose(r.final_state.numeric(), np.diag([0, 1]))
    r2 = qrun(c, backend="dm-noisy", noise=NoiseSpec.uniform("amplitude_damping", 1.0))
    assert np.allclose(r2.final_state.numeric(), np.diag([1, 0]))


def test_symbolic_noise_parameter_bound_at_run():
    c = Circuit(1).append("I", [0])
    noise = NoiseSpec([NoiseEntry(0, "bit_flip", "p", 0)])
    r = qrun(c, {"p": 0.25}, backend="dm-noisy", noise=noise)
    assert np.allclose(r.final_state.numeric(), np.diag([0.75, 0.25]))
    with pytest.raises(UnboundSymbol):
        qrun(c, backend="dm-noisy", noise=noise)


@settings(max_examples=5, deadline=None)
@given(seeds)
def test_sampling_consistency_tv(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, 4, 15)
    shots = 100_000
    r = qrun(c, shots=shots, seed=seed)
    probs = np.abs(circuit_unitary(c).to_numpy()[:, 0]) ** 2
    assert tv(r.counts, probs, 4, shots) <= 0.02


def test_errors():
    c = Circuit(1).append("RX", [0], ["theta"])
    with pytest.raises(UnboundSymbol):
        qrun(c)
    with pytest.raises(CapabilityError):
        qrun(Circuit(1), noise=NoiseSpec.uniform("bit_flip", 0.1))
    with pytest.raises(CapabilityError):
        qrun(Circuit(11), backend="dm-noisy")
    with pytest.raises(UnknownBackend):
        qrun(Circuit(1), backend="nope")


def test_run_gate_examples():
    out = run_gate(X, [0], QState.zero(1))
    assert np.allclose(out.numeric(), [0, 1])
    same = run_cgate(X, [0], 0, QState.zero(1))
    assert np.allclose(same.numeric(), [1, 0])
    assert np.allclose(run_cgate(X, [0], "m", QState.zero(1), {"m": 1}).numeric(), [0, 1])
    with pytest.raises(MissingClassicalBit):
        run_cgate(X, [0], "m", QState.zero(1), {})
    mixed = run_gate(X, [1], QState.zero(2).to_mixed())
    assert np.allclose(np.diag(mixed.numeric()), [0, 1, 0, 0])


def test_measure_collapses():
    plus = QState.pure(np.array([1, 1]) / np.sqrt(2))
    outs = {measure(plus, 0, seed=s)[0] for s in range(20)}
    assert outs == {0, 1}
    bit, post = measure(plus, 0, seed=3)
    assert np.allclose(np.abs(post.numeric()) ** 2, [1 - bit, bit])


def teleport_circuit(u_prep):
    c = Circuit(3, (GateApp("prep", (0,), matrix=u_prep),))
    c = c.append("H", [1]).append("CNOT", [1, 2])
    c = c.append("CNOT", [0, 1]).append("H", [0])
    c = c.append("measure", [0], cbit="m0").append("measure", [1], cbit="m1")
    c = c.append("X", [2], condition="m1").append("Z", [2], condition="m0")
    return c


@pytest.mark.parametrize("seed", range(5))
def test_teleportation_every_branch(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = np.linalg.qr(z)
    target = u[:, 0]
    for name in ("sv-ideal", "dm-noisy"):
        r = qrun(teleport_circuit(u), backend=name, shots=100, seed=seed)
        assert len(r.branches) == 4
        assert abs(sum(b.probability for b in r.branches) - 1) <= 1e-12
        for b in r.branches:
            assert set(b.record) == {"m0", "m1"}
            bob = partial_trace(b.state.to_mixed(), [2])
            assert fidelity(QState.pure(target), bob) >= 1 - 1e-9
        assert sum(r.classical_counts.values()) == 100


def test_registry():
    reg = BackendRegistry()
    assert list_backends(reg) == ["sv-ideal", "dm-noisy"]
    with pytest.raises(DuplicateName):
        register_backend(reg, SimulatorBackend("sv-ideal", False, 4))


class ConstantBackend(Backend):
    name = "stub"
    capabilities = Capabilities(3, supports_noise=False)

    def run(self, circuit, binding=None, noise=None, shots=0, seed=None, source=None, initial_state=None):
        return RunResult({"0" * circuit.num_qubits: shots}, None, {"backend": self.name, "shots": shots, "seed": seed})


def test_custom_backend_dispatch():
    reg = BackendRegistry()
    register_backend(reg, ConstantBackend())
    r = qrun(Circuit(2).append("H", [0]), backend="stub", shots=7, registry=reg)
    assert r.counts == {"00": 7}
    assert "stub" in list_backends(reg)


def test_initial_state_and_seed_metadata():
    psi = np.array([0, 1], dtype=complex)
    r = qrun(Circuit(1).append("X", [0]), initial_state=QState.pure(psi), shots=10, seed=4)
    assert r.counts == {"0": 10}
    assert r.metadata["seed"] == 4
