from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.errors import DomainError, EmptyKeepSet, IndexOutOfRange, NotNumeric, ShapeError
from qsym.qstate import (
    QState,
    RegisterShape,
    fidelity,
    partial_trace,
    partial_transpose,
    reshuffle,
    truncated_fidelity,
)
from qsym.symexpr import HALF, Symbol, simplify
from qsym.symexpr.core import Function
from qsym.symlinalg import SymMatrix, SymVector, sqrt_half

seeds = st.integers(min_value=0, max_value=2**32 - 1)
BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)


def rand_density(rng, d, rank=None):
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    r = g @ g.conj().T
    return r / np.trace(r).real


def rand_ket(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def brute_partial_trace_3q_keep02(rho):
    # quadruple index sum over (i0,i2),(j0,j2) with the middle qubit summed
    out = np.zeros((4, 4), dtype=complex)
    for i0, i2, j0, j2 in itertools.product(range(2), repeat=4):
        acc = 0
        for k in range(2):
            acc += rho[4 * i0 + 2 * k + i2, 4 * j0 + 2 * k + j2]
        out[2 * i0 + i2, 2 * j0 + j2] = acc
    return out


def test_register_shape():
    s = RegisterShape((2, 3, 2))
    assert s.total == 12
    with pytest.raises(ShapeError):
        RegisterShape((1, 2))
    with pytest.raises(IndexOutOfRange):
        s.check_indices([3])


def test_state_validation():
    with pytest.raises(DomainError):
        QState.pure(np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        QState.mixed(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(DomainError):
        QState.mixed(np.diag([1.5, -0.5]))
    with pytest.raises(ShapeError):
        QState.pure(np.ones(3) / np.sqrt(3), RegisterShape((2, 2)))
    QState.mixed(np.eye(2) / 2)


def test_bell_marginal():
    red = partial_trace(QState.pure(BELL), [0]).numeric()
    assert np.max(np.abs(red - np.eye(2) / 2)) <= 1e-12
    red1 = partial_trace(QState.mixed(np.outer(BELL, BELL)), [1]).numeric()
    assert np.max(np.abs(red1 - np.eye(2) / 2)) <= 1e-12


def test_symbolic_bell_marginal_is_exact_half():
    s = sqrt_half()
    red = partial_trace(QState.pure(SymVector([s, 0, 0, s])), [0])
    assert red.body.equals(SymMatrix([[HALF, 0], [0, HALF]]))


def test_symbolic_trace_preserved():
    t = Symbol("theta")
    c, sn = Function("cos", t), Function("sin", t)
    psi = SymVector([c, 0, 0, sn])
    red = partial_trace(QState.pure(psi, validate=False), [1]).body
    assert simplify(red[0, 0] + red[1, 1]) == simplify(HALF * 2)


def test_product_state_marginal():
    rng = np.random.default_rng(1)
    rho, sigma = rand_density(rng, 2), rand_density(rng, 3)
    st_ = QState.mixed(np.kron(rho, sigma), RegisterShape((2, 3)))
    assert np.max(np.abs(partial_trace(st_, [0]).numeric() - rho)) <= 1e-12
    assert np.max(np.abs(partial_trace(st_, [1]).numeric() - sigma)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_partial_trace_vs_index_sum(seed):
    rng = np.random.default_rng(seed)
    rho = rand_density(rng, 8)
    red = partial_trace(QState.mixed(rho), [0, 2]).numeric()
    assert np.max(np.abs(red - brute_partial_trace_3q_keep02(rho))) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_partial_trace_composition(seed):
    rng = np.random.default_rng(seed)
    rho = QState.mixed(rand_density(rng, 8))
    step = partial_trace(partial_trace(rho, [0, 2]), [0]).numeric()
    direct = partial_trace(rho, [0]).numeric()
    assert np.max(np.abs(step - direct)) <= 1e-12
    last = partial_trace(partial_trace(rho, [2]), [0]).numeric()
    assert abs(np.trace(last) - 1) <= 1e-12


def test_partial_trace_errors():
    rho = QState.mixed(np.eye(4) / 4)
    with pytest.raises(EmptyKeepSet):
        partial_trace(rho, [])
    with pytest.raises(IndexOutOfRange):
        partial_trace(rho, [2])


def test_partial_transpose_bell_witness():
    pt = partial_transpose(QState.pure(BELL), [1]).to_numpy()
    assert abs(np.linalg.eigvalsh(pt).min() + 0.5) <= 1e-9


def test_partial_transpose_product_state_spectrum():
    rng = np.random.default_rng(2)
    rho = np.kron(rand_density(rng, 2), rand_density(rng, 2))
    pt = partial_transpose(QState.mixed(rho), [1]).to_numpy()
    assert np.allclose(np.sort(np.linalg.eigvalsh(pt)), np.sort(np.linalg.eigvalsh(rho)), atol=1e-12)


def test_partial_transpose_involution_symbolic():
    a = SymMatrix(np.array([[Symbol(f"r{i}{j}", "complex") for j in range(4)] for i in range(4)], dtype=object))
    st_ = QState.mixed(a, validate=False)
    once = partial_transpose(st_, [0])
    twice = partial_transpose(QState.mixed(once, validate=False), [0])
    assert twice == a


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_partial_transpose_preserves_trace_and_hermiticity(seed):
    rng = np.random.default_rng(seed)
    rho = rand_density(rng, 8)
    pt = partial_transpose(QState.mixed(rho), [0, 2]).to_numpy()
    assert abs(np.trace(pt) - 1) <= 1e-12
    assert np.max(np.abs(pt - pt.conj().T)) <= 1e-12


def test_reshuffle_involution_exact():
    a = SymMatrix(np.array([[Symbol(f"m{i}{j}", "complex") for j in range(9)] for i in range(9)], dtype=object))
    assert reshuffle(reshuffle(a)) == a
    rng = np.random.default_rng(4)
    m = rng.normal(size=(4, 4))
    assert np.array_equal(reshuffle(reshuffle(SymMatrix(m))).to_numpy(), m)


def test_reshuffle_of_kron_is_outer_of_vecs():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    r = reshuffle(SymMatrix(np.kron(a, b))).to_numpy()
    assert np.max(np.abs(r - np.outer(a.reshape(-1), b.reshape(-1)))) <= 1e-12


def test_reshuffle_index_convention():
    # out[(i1,j1),(i2,j2)] = in[(i1,i2),(j1,j2)]
    d1, d2 = 2, 3
    m = np.arange(36).reshape(6, 6)
    r = reshuffle(SymMatrix(m), (d1, d2)).to_numpy()
    for i1, i2, j1, j2 in itertools.product(range(d1), range(d2), range(d1), range(d2)):
        assert r[i1 * d1 + j1, i2 * d2 + j2] == m[i1 * d2 + i2, j1 * d2 + j2]
    with pytest.raises(ShapeError):
        reshuffle(SymMatrix(m), (2, 2))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_reshuffle_permutes_entries(seed):
    m = np.random.default_rng(seed).integers(-5, 5, size=(9, 9))
    assert sorted(reshuffle(SymMatrix(m)).to_numpy().real.ravel()) == sorted(m.ravel())


def test_fidelity_examples():
    rng = np.random.default_rng(6)
    rho = rand_density(rng, 4)
    assert abs(fidelity(QState.mixed(rho), QState.mixed(rho)) - 1) <= 1e-9
    assert fidelity(QState.pure([1, 0]), QState.pure([0, 1])) == 0
    with pytest.raises(NotNumeric):
        fidelity(QState.pure(SymVector([Symbol("a"), 0]), validate=False), QState.pure([1, 0]))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_fidelity_bounds_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = QState.mixed(rand_density(rng, 4, 2)), QState.mixed(rand_density(rng, 4))
    f1, f2 = fidelity(a, b), fidelity(b, a)
    assert -1e-12 <= f1 <= 1 + 1e-9
    assert abs(f1 - f2) <= 1e-9
    psi = rand_ket(rng, 4)
    assert abs(fidelity(QState.pure(psi), b) - np.vdot(psi, b.numeric() @ psi).real) <= 1e-12
    assert abs(fidelity(QState.pure(psi), QState.mixed(np.outer(psi, psi.conj()))) - 1) <= 1e-9


def test_truncated_fidelity_monotone_and_full():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a, b = QState.mixed(rand_density(rng, 8)), QState.mixed(rand_density(rng, 8))
        vals = [truncated_fidelity(a, b, m) for m in range(1, 9)]
        assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))
        assert abs(vals[-1] - fidelity(a, b)) <= 1e-12
    with pytest.raises(ShapeError):
        truncated_fidelity(a, b, 0)
