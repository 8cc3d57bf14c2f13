from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.errors import DomainError, IndexOutOfRange, ShapeError
from qsym.symexpr import ONE, ZERO, Num, Symbol, parse_expr, simplify
from qsym.symexpr.core import Function
from qsym.symlinalg import (
    SymMatrix,
    SymVector,
    add,
    bra,
    dagger,
    identity,
    is_zero_matrix,
    ket,
    kronecker,
    matmul,
    proj,
    scale,
    special_unitary,
    sqrt_half,
    symbolic_matrix,
    trace,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _rand(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_ket_bra_proj_examples():
    assert ket(0, 2).equals(SymVector([1, 0]))
    assert proj(1, 2).equals(SymMatrix([[0, 0], [0, 1]]))
    with pytest.raises(IndexOutOfRange):
        ket(4, 4)
    with pytest.raises(IndexOutOfRange):
        bra(-1, 3)
    assert bra(1, 3).shape == (1, 3)


@pytest.mark.parametrize("d", range(1, 7))
def test_proj_is_ket_bra(d):
    for k in range(d):
        assert proj(k, d) == matmul(ket(k, d), bra(k, d))


def test_hermitian_family():
    a = symbolic_matrix("a", 2, 2, "hermitian")
    a00, a01, a11 = a[0, 0], a[0, 1], a[1, 1]
    assert isinstance(a00, Symbol) and a00.domain == "real"
    assert isinstance(a11, Symbol) and a11.domain == "real"
    assert a01.domain == "complex"
    assert a[1, 0] == simplify(Function("conj", a01))
    for n in (2, 3, 4):
        h = symbolic_matrix("h", n, n, "hermitian")
        assert is_zero_matrix(add(h, scale(-1, dagger(h))))


def test_bistochastic_n2_shape():
    b = symbolic_matrix("b", 2, 2, "bistochastic")
    b00 = Symbol("b00")
    one_minus = simplify(parse_expr("1 - b00"))
    assert b[0, 0] == b00 and b[1, 1] == b00
    assert b[0, 1] == one_minus and b[1, 0] == one_minus


@pytest.mark.parametrize("n", [2, 3, 4])
def test_bistochastic_sums_exactly_one(n):
    b = symbolic_matrix("b", n, n, "bistochastic")
    arr = b.object_array()
    for r in range(n):
        assert simplify(sum(arr[r, :], ZERO)) == ONE
    for c in range(n):
        assert simplify(sum(arr[:, c], ZERO)) == ONE


def test_non_square_families_rejected():
    with pytest.raises(ShapeError):
        symbolic_matrix("a", 2, 3, "hermitian")
    with pytest.raises(ShapeError):
        symbolic_matrix("a", 3, 2, "bistochastic")


def test_general_symbols_are_complex_and_fresh():
    g = symbolic_matrix("g", 2, 3)
    names = {s.name for s in g.free_symbols()}
    assert len(names) == 6
    assert all(s.domain == "complex" for s in g.free_symbols())


def test_special_unitary():
    th, al, be = Symbol("theta"), Symbol("alpha"), Symbol("beta")
    assert special_unitary(0, 0, 0).simplify() == identity(2)
    u = special_unitary(th, al, be)
    det = simplify(u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0])
    assert det == ONE
    assert matmul(dagger(u), u).simplify() == identity(2)
    assert matmul(u, dagger(u)).simplify() == identity(2)
    with pytest.raises(DomainError):
        special_unitary(Symbol("z", "complex"), al, be)


def test_kronecker_examples():
    assert kronecker(identity(2), identity(2)) == identity(4)
    assert kronecker(ket(0, 2), ket(1, 2)).equals(ket(1, 4))
    m = kronecker(SymMatrix([[1, 2], [3, 4]]), SymMatrix([[0, 1], [1, 0]]))
    assert np.array_equal(m.to_numpy(), np.kron([[1, 2], [3, 4]], [[0, 1], [1, 0]]))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_kronecker_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (_rand(rng, (2, 2)) for _ in range(4))
    lhs = matmul(kronecker(a, b), kronecker(c, d)).to_numpy()
    rhs = np.kron(a @ c, b @ d)  # dense product oracle
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_kronecker_is_associative_with_symbols():
    a = symbolic_matrix("a", 2, 2)
    b = SymMatrix([[1, 0], [0, -1]])
    c = symbolic_matrix("c", 2, 1)
    assert kronecker(kronecker(a, b), c) == kronecker(a, kronecker(b, c))


def test_algebra_examples():
    assert simplify(trace(proj(0, 2))) == ONE
    a = symbolic_matrix("a", 3, 2)
    assert dagger(dagger(a)) == a
    s = sqrt_half()
    h = SymMatrix([[s, s], [s, -s]])
    assert matmul(h, h).simplify() == identity(2)


def test_shape_errors():
    with pytest.raises(ShapeError):
        matmul(identity(2), identity(3))
    with pytest.raises(ShapeError):
        add(identity(2), identity(3))
    with pytest.raises(ShapeError):
        trace(SymMatrix([[1, 2, 3]]))


def test_numeric_and_symbolic_storage_agree():
    rng = np.random.default_rng(3)
    a = _rand(rng, (3, 3))
    num = SymMatrix(a)
    assert not num.is_symbolic
    assert np.allclose(num.to_numpy(), a)
    theta = Symbol("theta")
    m = SymMatrix([[theta, 1], [0, theta]])
    assert m.is_symbolic
    assert np.allclose(m.to_numpy({"theta": 0.5}), [[0.5, 1], [0, 0.5]])
    assert m.substitute({"theta": 2})[0, 0] == Num(2)
