from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.channel import (
    Channel,
    amplitude_damping,
    apply_channel,
    bit_flip,
    depolarizing,
    identity_channel,
    kraus_completeness,
    kraus_product,
    noise_model,
    phase_damping,
    phase_flip,
    product_channel,
    product_superoperator,
    superoperator,
    superoperator_to_kraus,
)
from qsym.errors import DomainError, NegativeEigenvalue, NonHermitianChoi, NotNumeric, ShapeError
from qsym.qstate import QState, partial_trace
from qsym.random import SeededPRNG, random_dynamical_matrix
from qsym.symexpr import Symbol
from qsym.symlinalg import SymMatrix, identity

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def stinespring_kraus(rng, d, r):
    """Kraus list from a random isometry C^d -> C^d (x) C^r (independent oracle)."""
    z = rng.normal(size=(d * r, d)) + 1j * rng.normal(size=(d * r, d))
    q, _ = np.linalg.qr(z)
    return [q[i * d : (i + 1) * d, :] for i in range(r)]


def kraus_apply(ks, rho):
    return sum(k @ rho @ k.conj().T for k in ks)


def rand_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = g @ g.conj().T
    return r / np.trace(r).real


def matrix_units(d):
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1
            yield e


def test_identity_superoperator():
    assert superoperator([np.eye(2)]).superoperator.allclose(identity(4))
    ks = superoperator_to_kraus(identity_channel(2)).kraus_numeric()
    assert len(ks) == 1
    k = ks[0]
    assert np.allclose(k.conj().T @ k, np.eye(2), atol=1e-12)
    assert np.allclose(k / k[0, 0], np.eye(2), atol=1e-12)


def test_unitary_superoperator_formula():
    rng = np.random.default_rng(0)
    u = stinespring_kraus(rng, 3, 1)[0]
    m = superoperator([u]).superoperator.to_numpy()
    assert np.max(np.abs(m - np.kron(u, u.conj()))) <= 1e-15


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_superoperator_action_vs_kraus_sum(seed):
    rng = np.random.default_rng(seed)
    d, r = int(rng.integers(2, 5)), int(rng.integers(1, 5))
    ks = stinespring_kraus(rng, d, r)
    rho = rand_density(rng, d)
    m = superoperator(ks).superoperator.to_numpy()
    # row-major vec: vec(A rho B) = (A (x) B^T) vec(rho)
    assert np.max(np.abs((m @ rho.reshape(-1)).reshape(d, d) - kraus_apply(ks, rho))) <= 1e-12
    sup = Channel.from_superoperator(m)
    assert np.max(np.abs(apply_channel(sup, rho).numeric() - kraus_apply(ks, rho))) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_roundtrip_action(seed):
    rng = np.random.default_rng(seed)
    d, r = int(rng.integers(2, 5)), int(rng.integers(1, 5))
    ks = stinespring_kraus(rng, d, r)
    back = superoperator_to_kraus(superoperator(ks))
    assert len(back.kraus) == r
    for e in matrix_units(d):
        assert np.max(np.abs(apply_channel(back, e).numeric() - kraus_apply(ks, e))) <= 1e-10


def test_transpose_map_not_cp():
    m = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            # vec(rho^T)[(j,i)] = vec(rho)[(i,j)]
            m[j * 2 + i, i * 2 + j] = 1
    with pytest.raises(NegativeEigenvalue):
        superoperator_to_kraus(m)


def test_non_hermitian_choi_rejected():
    m = np.zeros((4, 4))
    m[0, 1] = 1.0
    with pytest.raises(NonHermitianChoi):
        superoperator_to_kraus(m)


def test_symbolic_superoperator_to_kraus_refused():
    with pytest.raises(NotNumeric):
        superoperator_to_kraus(superoperator(amplitude_damping(Symbol("g")).kraus))


def test_choi_of_identity_is_maximally_entangled_projector():
    c = identity_channel(2).choi.to_numpy()
    phi = np.array([1, 0, 0, 1])
    assert np.array_equal(c, np.outer(phi, phi))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_choi_trace_preservation(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    ch = Channel.from_kraus(stinespring_kraus(rng, d, int(rng.integers(1, 4))))
    # Choi indexed out (x) in; tracing the output leaves I on the input
    red = partial_trace(QState.mixed(ch.choi.to_numpy(), (d, d), validate=False), [1]).numeric()
    assert np.max(np.abs(red - np.eye(d))) <= 1e-9


def test_apply_examples():
    rng = np.random.default_rng(1)
    rho = rand_density(rng, 2)
    assert np.allclose(apply_channel(identity_channel(2), rho).numeric(), rho, atol=1e-15)
    assert np.allclose(apply_channel(depolarizing(1), rho).numeric(), np.eye(2) / 2, atol=1e-15)
    assert np.allclose(apply_channel(amplitude_damping(1), rho).numeric(), np.diag([1, 0]), atol=1e-15)


def test_apply_shape_mismatch():
    with pytest.raises(ShapeError):
        apply_channel(identity_channel(2), np.eye(3) / 3)


def test_noise_examples():
    assert np.allclose(superoperator(depolarizing(0)).superoperator.to_numpy(), np.eye(4))
    out = apply_channel(bit_flip(0.3), np.diag([1.0, 0.0])).numeric()
    assert np.allclose(out, np.diag([0.7, 0.3]), atol=1e-15)
    with pytest.raises(DomainError):
        depolarizing(1.5)
    with pytest.raises(DomainError):
        noise_model("erasure", 0.1)


@pytest.mark.parametrize("kind", ["depolarizing", "amplitude_damping", "phase_damping", "bit_flip", "phase_flip"])
def test_symbolic_noise_completeness(kind):
    ch = noise_model(kind, Symbol("p"))
    assert ch.is_symbolic
    assert kraus_completeness(ch) == identity(2)


@pytest.mark.parametrize("factory", [depolarizing, amplitude_damping, phase_damping, bit_flip, phase_flip])
def test_bind_then_apply_equals_apply_then_bind(factory):
    rng = np.random.default_rng(2)
    rho = rand_density(rng, 2)
    for p in (0.0, 0.17, 0.5, 1.0):
        a = apply_channel(factory(Symbol("p")).bind({"p": p}), rho).numeric()
        b = apply_channel(factory(Symbol("p")), SymMatrix(rho)).body.to_numpy({"p": p})
        c = apply_channel(factory(p), rho).numeric()
        assert np.max(np.abs(a - b)) <= 1e-12
        assert np.max(np.abs(a - c)) <= 1e-12


def test_textbook_kraus_sets():
    g = 0.36
    k0, k1 = amplitude_damping(g).kraus_numeric()
    assert np.allclose(k0, [[1, 0], [0, np.sqrt(1 - g)]])
    assert np.allclose(k1, [[0, np.sqrt(g)], [0, 0]])
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(apply_channel(phase_flip(0.5), rho).numeric(), np.eye(2) / 2)
    assert np.allclose(apply_channel(phase_damping(1.0), rho).numeric(), np.eye(2) / 2)


def test_product_identity():
    p = product_superoperator(identity_channel(2), identity_channel(3))
    assert p.superoperator.allclose(identity(36))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_product_action(seed):
    rng = np.random.default_rng(seed)
    d1, d2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    c1 = Channel.from_kraus(stinespring_kraus(rng, d1, 2))
    c2 = Channel.from_kraus(stinespring_kraus(rng, d2, 3))
    rho, sigma = rand_density(rng, d1), rand_density(rng, d2)
    want = np.kron(kraus_apply(c1.kraus_numeric(), rho), kraus_apply(c2.kraus_numeric(), sigma))
    got = apply_channel(product_superoperator(c1, c2), np.kron(rho, sigma)).numeric()
    assert np.max(np.abs(got - want)) <= 1e-12
    kp = apply_channel(kraus_product(c1, c2), np.kron(rho, sigma)).numeric()
    assert np.max(np.abs(kp - want)) <= 1e-12
    # not the plain Kronecker product of superoperators
    plain = np.kron(c1.superoperator.to_numpy(), c2.superoperator.to_numpy())
    assert not np.allclose(plain, product_superoperator(c1, c2).superoperator.to_numpy())


def test_depolarized_factor():
    rng = np.random.default_rng(3)
    rho, sigma = rand_density(rng, 2), rand_density(rng, 2)
    got = apply_channel(product_superoperator(depolarizing(0.4), identity_channel(2)), np.kron(rho, sigma)).numeric()
    want = np.kron(0.6 * rho + 0.4 * np.eye(2) / 2, sigma)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_product_fold_three_factors():
    rng = np.random.default_rng(4)
    cs = [Channel.from_kraus(stinespring_kraus(rng, 2, 2)) for _ in range(3)]
    rs = [rand_density(rng, 2) for _ in range(3)]
    got = apply_channel(product_channel(*cs), np.kron(np.kron(rs[0], rs[1]), rs[2])).numeric()
    outs = [kraus_apply(c.kraus_numeric(), r) for c, r in zip(cs, rs)]
    assert np.max(np.abs(got - np.kron(np.kron(outs[0], outs[1]), outs[2]))) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_cptp_preservation(seed):
    src = SeededPRNG(seed)
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    ch = random_dynamical_matrix(d, int(rng.integers(1, d * d + 1)), src)
    out = apply_channel(ch, rand_density(rng, d)).numeric()
    assert abs(np.trace(out) - 1) <= 1e-9
    assert np.max(np.abs(out - out.conj().T)) <= 1e-9
    assert np.linalg.eigvalsh(out).min() >= -1e-8


def test_forms_are_memoised_and_coherent():
    rng = np.random.default_rng(5)
    ch = Channel.from_kraus(stinespring_kraus(rng, 2, 2))
    assert ch.superoperator is ch.superoperator
    via_choi = Channel.from_choi(ch.choi.to_numpy())
    rho = rand_density(rng, 2)
    assert np.allclose(apply_channel(via_choi, rho).numeric(), apply_channel(ch, rho).numeric(), atol=1e-12)
