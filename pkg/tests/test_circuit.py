from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.circuit import (
    Circuit,
    GateApp,
    apply_circuit,
    cgate,
    circuit_unitary,
    gate,
    gate_matrix,
    maxcut_cost,
    permute_register,
    qaoa_template,
    qft_template,
    qft_unitary,
)
from qsym.errors import DuplicateWire, GraphError, NotAPermutation, NotNumeric, ShapeError, SizeLimit, WireOutOfRange
from qsym.qstate import QState
from qsym.symlinalg import identity

seeds = st.integers(min_value=0, max_value=2**32 - 1)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def bits(i, n):
    return [(i >> (n - 1 - w)) & 1 for w in range(n)]


def index(b):
    return reduce(lambda a, x: 2 * a + x, b, 0)


def basis_oracle(u, targets, controls, n):
    """Dense matrix built column by column from the action on basis states."""
    k = len(targets)
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for col in range(1 << n):
        b = bits(col, n)
        if not all(b[c] for c in controls):
            out[col, col] = 1
            continue
        a = index([b[t] for t in targets])
        for r in range(1 << k):
            nb = list(b)
            for j, t in enumerate(targets):
                nb[t] = (r >> (k - 1 - j)) & 1
            out[index(nb), col] += u[r, a]
    return out


def haar(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_gate_examples():
    assert np.allclose(gate(X, [0], 1).to_numpy(), X)
    assert np.allclose(gate(X, [1], 2).to_numpy(), np.kron(np.eye(2), X))
    assert np.array_equal(gate(CNOT, [1, 0], 2).to_numpy(), basis_oracle(CNOT, [1, 0], [], 2))


def test_gate_errors():
    with pytest.raises(DuplicateWire):
        gate(CNOT, [1, 1], 2)
    with pytest.raises(WireOutOfRange):
        gate(X, [2], 2)
    with pytest.raises(ShapeError):
        gate(CNOT, [0], 2)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_gate_vs_basis_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    k = int(rng.integers(1, n))
    wires = [int(w) for w in rng.permutation(n)]
    targets = wires[:k]
    controls = wires[k : k + int(rng.integers(0, n - k + 1))]
    u = haar(rng, 1 << k)
    got = cgate(u, targets, controls, n).to_numpy() if controls else gate(u, targets, n).to_numpy()
    want = basis_oracle(u, targets, controls, n)
    assert np.max(np.abs(got - want)) <= 1e-12
    assert np.max(np.abs(got.conj().T @ got - np.eye(1 << n))) <= 1e-10


def test_cgate_examples():
    assert np.array_equal(cgate(X, [1], [0], 2).to_numpy(), CNOT)
    assert cgate(np.eye(2), [2], [0, 1], 3).allclose(identity(8))
    toffoli = cgate(X, [2], [0, 1], 3).to_numpy()
    for i in range(8):
        b = bits(i, 3)
        if b[0] and b[1]:
            b[2] ^= 1
        assert toffoli[index(b), i] == 1


def test_permute_register_examples():
    assert permute_register([0, 1, 2], 3).allclose(identity(8))
    swap = gate_matrix("SWAP").to_numpy()
    assert np.array_equal(permute_register([1, 0], 2).to_numpy(), swap)
    with pytest.raises(NotAPermutation):
        permute_register([0, 0], 2)


def test_permute_register_action():
    perm = [2, 0, 1]
    p = permute_register(perm, 3).to_numpy()
    inv = np.argsort(perm)
    for i in range(8):
        b = bits(i, 3)
        out = [b[inv[w]] for w in range(3)]
        assert p[index(out), i] == 1


def test_permutation_composition_law():
    perms = list(itertools.permutations(range(3)))
    for p1 in perms:
        for p2 in perms:
            comp = [p1[p2[i]] for i in range(3)]
            lhs = permute_register(p1, 3).to_numpy() @ permute_register(p2, 3).to_numpy()
            assert np.array_equal(lhs, permute_register(comp, 3).to_numpy())


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_permutation_conjugates_gate(seed):
    rng = np.random.default_rng(seed)
    perm = [int(x) for x in rng.permutation(4)]
    targets = [int(x) for x in rng.choice(4, size=2, replace=False)]
    u = haar(rng, 4)
    p = permute_register(perm, 4).to_numpy()
    lhs = p @ gate(u, targets, 4).to_numpy() @ p.conj().T
    rhs = gate(u, [perm[t] for t in targets], 4).to_numpy()
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_qft_examples():
    assert np.allclose(qft_unitary(1).to_numpy(), H, atol=1e-15)
    f2 = qft_unitary(2).to_numpy()
    oracle = np.array([[1j ** (j * k) / 2 for k in range(4)] for j in range(4)])
    assert np.max(np.abs(f2 - oracle)) <= 1e-15
    assert np.max(np.abs(qft_unitary(2, exact=True).to_numpy() - oracle)) <= 1e-15
    with pytest.raises(SizeLimit):
        qft_unitary(13)


@pytest.mark.parametrize("n", range(1, 7))
def test_qft_circuit_matches_dft(n):
    got = circuit_unitary(qft_template(n)).to_numpy()
    d = 1 << n
    dft = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
    assert np.max(np.abs(got - dft)) <= 1e-10


@pytest.mark.parametrize("n", range(1, 9))
def test_qft_unitary_is_unitary(n):
    f = qft_unitary(n).to_numpy()
    assert np.max(np.abs(f.conj().T @ f - np.eye(1 << n))) <= 1e-10


def test_qaoa_structure():
    c = qaoa_template([(0, 1)], 1)
    assert c.parameter_names == ["beta_1", "gamma_1"]
    ring = [(0, 1), (1, 2), (2, 3), (3, 0)]
    c2 = qaoa_template(ring, 2)
    assert c2.parameter_names == ["beta_1", "beta_2", "gamma_1", "gamma_2"]
    zero = {k: 0 for k in c2.parameter_names}
    wall = Circuit(4, tuple(GateApp("H", (q,)) for q in range(4)))
    assert np.allclose(circuit_unitary(c2, zero).to_numpy(), circuit_unitary(wall).to_numpy(), atol=1e-12)
    with pytest.raises(GraphError):
        qaoa_template([(0, 0)], 1)
    with pytest.raises(GraphError):
        qaoa_template([(0, 1), (1, 0)], 1)


def _qaoa_dense(graph, n, gammas, betas):
    """Statevector oracle: diagonal cost phases and explicit RX mixers."""
    z = np.array([[1 - 2 * b for b in bits(i, n)] for i in range(1 << n)])
    cost_zz = sum(w * z[:, u] * z[:, v] for u, v, w in graph)
    psi = np.full(1 << n, 1 / np.sqrt(1 << n), dtype=complex)
    for g, b in zip(gammas, betas):
        psi = np.exp(-1j * g * cost_zz) * psi
        rx = np.array([[np.cos(b), -1j * np.sin(b)], [-1j * np.sin(b), np.cos(b)]])
        psi = reduce(np.kron, [rx] * n) @ psi
    cut = np.array([maxcut_cost(graph, bits(i, n)) for i in range(1 << n)])
    return float(np.sum(np.abs(psi) ** 2 * cut))


def test_qaoa_landscape_matches_dense_oracle():
    ring = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]
    c = qaoa_template(ring, 1)
    cut = np.array([maxcut_cost(ring, bits(i, 4)) for i in range(16)])
    zero = np.zeros(16, dtype=complex)
    zero[0] = 1
    grid = np.linspace(0, np.pi, 16)
    for g in grid:
        for b in grid:
            psi = apply_circuit(c, QState.pure(zero), {"gamma_1": g, "beta_1": b}).numeric()
            val = float(np.sum(np.abs(psi) ** 2 * cut))
            assert abs(val - _qaoa_dense(ring, 4, [g], [b])) <= 1e-12


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_qaoa_bound_unitary_is_unitary(seed):
    rng = np.random.default_rng(seed)
    c = qaoa_template([(0, 1, 0.5), (1, 2, 2.0)], 2)
    b = {k: float(rng.uniform(-np.pi, np.pi)) for k in c.parameter_names}
    u = circuit_unitary(c, b).to_numpy()
    assert np.max(np.abs(u.conj().T @ u - np.eye(8))) <= 1e-10


def test_circuit_unitary_examples():
    assert circuit_unitary(Circuit(2)).allclose(identity(4))
    hh = Circuit(1).append("H", [0]).append("H", [0])
    assert circuit_unitary(hh).allclose(identity(2))
    assert circuit_unitary(hh, exact=True) == identity(2)
    psi = np.array([0.6, 0.8j])
    assert np.allclose(apply_circuit(Circuit(1), QState.pure(psi)).numeric(), psi)


def _random_circuit(rng, n, m):
    names = ["H", "X", "Y", "Z", "S", "T", "RX", "RY", "RZ", "P", "CNOT", "CZ", "SWAP"]
    c = Circuit(n)
    for _ in range(m):
        name = names[int(rng.integers(len(names)))]
        k = 2 if name in ("CNOT", "CZ", "SWAP") else 1
        wires = [int(w) for w in rng.choice(n, size=k + 1 if rng.random() < 0.3 else k, replace=False)]
        params = [float(rng.uniform(-np.pi, np.pi))] if name in ("RX", "RY", "RZ", "P") else []
        c = c.append(name, wires[:k], params, controls=wires[k:])
    return c


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_apply_circuit_vs_dense(seed):
    rng = np.random.default_rng(seed)
    c = _random_circuit(rng, 3, 5)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    u = circuit_unitary(c).to_numpy()
    dense = np.eye(8, dtype=complex)
    for g in c.gates:
        dense = basis_oracle(g.block_numeric(), g.targets, g.controls, 3) @ dense
    assert np.max(np.abs(u - dense)) <= 1e-12
    assert np.max(np.abs(apply_circuit(c, QState.pure(psi)).numeric() - u @ psi)) <= 1e-12
    rho = np.outer(psi, psi.conj())
    out = apply_circuit(c, QState.mixed(rho)).numeric()
    assert np.max(np.abs(out - u @ rho @ u.conj().T)) <= 1e-12


def test_symbolic_circuit_needs_binding_for_apply():
    c = Circuit(1).append("RY", [0], ["theta"])
    with pytest.raises(NotNumeric):
        apply_circuit(c, QState.zero(1))
    u = circuit_unitary(c)
    assert u.is_symbolic
    assert np.allclose(u.to_numpy({"theta": 0.4}), circuit_unitary(c, {"theta": 0.4}).to_numpy())


def test_apply_circuit_twenty_qubits():
    n = 20
    c = Circuit(n).append("H", [0])
    for q in range(1, n):
        c = c.append("CNOT", [q - 1, q])
    out = apply_circuit(c, QState.zero(n)).numeric()
    assert abs(out[0] - 2**-0.5) < 1e-12 and abs(out[-1] - 2**-0.5) < 1e-12
    with pytest.raises(SizeLimit):
        circuit_unitary(Circuit(13))


def test_circuit_wire_checks():
    with pytest.raises(WireOutOfRange):
        Circuit(2).append("X", [2])
    with pytest.raises(DuplicateWire):
        Circuit(2).append("CNOT", [0, 0])
    with pytest.raises(ShapeError):
        Circuit(2).append("RX", [0])
