from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from epnlab import lattice as lat
from epnlab import numlin
from epnlab.errors import ConvergenceError, UnsupportedSizeError

from conftest import basis, sympy_rank_filtration, to_sympy


def H1(n):
    return lat.build_hamiltonian(lat.h1(n))


def cyclic(n):
    return lat.build_hamiltonian(lat.ring_forward(n))


# -- mat_mul ------------------------------------------------------------------

def test_mat_mul_identity():
    a = np.arange(9).reshape(3, 3) + 1j
    np.testing.assert_array_equal(numlin.mat_mul(np.eye(3), a), a)


def test_mat_mul_shift_composition():
    expected = np.zeros((3, 3))
    expected[0, 2] = 1
    np.testing.assert_array_equal(numlin.mat_mul(H1(3), H1(3)), expected)


def test_mat_mul_cube_is_zero():
    h = H1(3)
    assert not numlin.mat_mul(numlin.mat_mul(h, h), h).any()


def test_mat_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        numlin.mat_mul(np.eye(3), np.eye(2))


# -- rank -----------------------------------------------------------------------

def test_rank_zero_matrix():
    assert numlin.rank(np.zeros((4, 4))) == 0


def test_rank_h1():
    assert numlin.rank(H1(10)) == 9 == to_sympy(H1(10)).rank()


@pytest.mark.parametrize("k", range(1, 11))
def test_rank_h1_powers(k):
    p = np.linalg.matrix_power(H1(10), k)
    assert numlin.rank(p) == 10 - k == to_sympy(p).rank()


def test_rank_respects_relative_tolerance():
    m = np.diag([1.0, 1e-12])
    assert numlin.rank(m) == 1
    assert numlin.rank(m, tol=1e-13) == 2


# -- null_space -------------------------------------------------------------------

def test_null_space_h1():
    (v,) = numlin.null_space(H1(10))
    np.testing.assert_array_equal(v, basis(10, 1))


def test_null_space_h2():
    (v,) = numlin.null_space(lat.build_hamiltonian(lat.h2(10)))
    np.testing.assert_array_equal(v, basis(10, 10))


def test_null_space_interface_spans_reference_states():
    ker = numlin.null_space(lat.build_hamiltonian(lat.interface(10)))
    assert len(ker) == 2
    target = np.column_stack([basis(10, 4) - basis(10, 6), basis(10, 5) - basis(10, 7)])
    assert np.linalg.matrix_rank(np.column_stack([*ker, *target.T])) == 2


def test_null_space_trivial_kernel():
    assert numlin.null_space(np.eye(3)) == []


def test_canonicalize_phase():
    v = numlin.canonicalize(np.array([0, -1j, 2]))
    assert v[1] == 1.0
    assert v[2] == pytest.approx(2j)


# -- char_poly ------------------------------------------------------------------

def test_char_poly_nilpotent():
    np.testing.assert_array_equal(numlin.char_poly(H1(4)), [1, 0, 0, 0, 0])


def test_char_poly_cyclic_shift():
    # cofactor expansion of det(lambda I - C) along the first column gives lambda^4 - 1
    np.testing.assert_allclose(numlin.char_poly(cyclic(4)), [1, 0, 0, 0, -1], atol=1e-14)


def test_char_poly_swap():
    np.testing.assert_allclose(numlin.char_poly([[0, 1], [1, 0]]), [1, 0, -1])


def test_char_poly_size_guard():
    with pytest.raises(UnsupportedSizeError):
        numlin.char_poly(np.zeros((17, 17)))


def test_char_poly_matches_sympy_on_interface():
    h = lat.build_hamiltonian(lat.interface(10))
    lam = sp.symbols("lam")
    exact = sp.Poly(to_sympy(h).charpoly(lam).as_expr(), lam).all_coeffs()
    np.testing.assert_allclose(numlin.char_poly(h), [complex(c) for c in exact], atol=1e-12)


# -- poly_roots -----------------------------------------------------------------

def test_roots_quadratic():
    assert sorted(r.real for r in numlin.poly_roots([1, 0, -1])) == pytest.approx([-1, 1])


def test_roots_fourth_roots_of_unity():
    roots = numlin.poly_roots([1, 0, 0, 0, -1])
    for w in (1, 1j, -1, -1j):
        assert min(abs(r - w) for r in roots) < 1e-12


def test_roots_interface_multiset():
    # oracle: sympy roots of the exact characteristic polynomial
    h = lat.build_hamiltonian(lat.interface(10))
    lam = sp.symbols("lam")
    exact = sp.roots(to_sympy(h).charpoly(lam).as_expr(), lam)
    assert exact == {0: 8, 1: 1, -1: 1}
    roots = numlin.poly_roots(numlin.char_poly(h))
    assert sum(abs(r) < 1e-12 for r in roots) == 8
    assert min(abs(r - 1) for r in roots) < 1e-12
    assert min(abs(r + 1) for r in roots) < 1e-12


def test_roots_nonconvergence_carries_best_iterate():
    with pytest.raises(ConvergenceError) as info:
        numlin.poly_roots([1, 0, 0, 0, -1], max_iter=1)
    assert len(info.value.best) == 4


def test_roots_require_monic():
    with pytest.raises(ValueError):
        numlin.poly_roots([2, 0, -1])


# -- eig ----------------------------------------------------------------------------

def test_eig_jordan_block():
    (pair,) = numlin.eig(H1(4))
    assert pair.value == 0 and pair.multiplicity == 4
    assert len(pair.vectors) == 1
    np.testing.assert_array_equal(pair.vectors[0], basis(4, 1))


def test_eig_swap():
    pairs = numlin.eig([[0, 1], [1, 0]])
    assert [p.value.real for p in pairs] == pytest.approx([-1, 1])
    np.testing.assert_allclose(pairs[0].vectors[0], np.array([1, -1]) / np.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(pairs[1].vectors[0], np.array([1, 1]) / np.sqrt(2), atol=1e-14)


def test_eig_interface_minus_one_state():
    pairs = numlin.eig(lat.build_hamiltonian(lat.interface(10)))
    (minus,) = [p for p in pairs if abs(p.value + 1) < 1e-8]
    ref = numlin.canonicalize((-basis(10, 5) + basis(10, 6)) / np.sqrt(2))
    np.testing.assert_allclose(minus.vectors[0], ref, atol=1e-12)


# -- exact filtration ---------------------------------------------------------------

def test_exact_filtration_h1():
    assert numlin.exact_rank_filtration(numlin.to_rational(H1(5))) == [4, 3, 2, 1, 0]


def test_exact_filtration_zero():
    z = [[Fraction(0)] * 3 for _ in range(3)]
    assert numlin.exact_rank_filtration(z) == [0, 0, 0]


def test_exact_filtration_interface():
    h = lat.build_hamiltonian(lat.interface(10))
    filt = numlin.exact_rank_filtration(lat.build_exact(lat.interface(10)))
    assert filt[0] == 8  # kernel dimension 2
    assert filt == sympy_rank_filtration(h)


def test_to_rational_rejects_complex():
    assert numlin.to_rational(np.array([[1j]])) is None


# -- matrix file format -----------------------------------------------------------

def test_matrix_text_roundtrip():
    m = np.array([[1.5, -2 + 0.25j], [1e-20 - 3j, 0]])
    back, exact = numlin.parse_matrix(numlin.format_matrix(m))
    np.testing.assert_array_equal(back, m)
    assert exact is None


def test_matrix_text_plain_reals_and_rationals():
    m, exact = numlin.parse_matrix("2 2\n0 1/2\n0 0\n")
    assert exact == [[0, Fraction(1, 2)], [0, 0]]
    assert m[0, 1] == 0.5


def test_matrix_text_errors():
    with pytest.raises(ValueError):
        numlin.parse_matrix("2 2\n1 2\n")
    with pytest.raises(ValueError):
        numlin.parse_matrix("1 1\nfoo\n")


# -- properties -----------------------------------------------------------------------

small = st.floats(-2, 2, allow_nan=False)


@st.composite
def strict_upper(draw, max_n=16):
    n = draw(st.integers(1, max_n))
    vals = draw(st.lists(small, min_size=n * n, max_size=n * n))
    return np.triu(np.array(vals).reshape(n, n), 1)


@given(strict_upper())
def test_strict_upper_char_poly_is_monomial(a):
    c = numlin.char_poly(a)
    assert c[0] == 1
    assert np.abs(c[1:]).max(initial=0) < 1e-10


rational_coupling = st.sampled_from([1, -1, Fraction(1, 2), Fraction(-3, 2), Fraction(2, 3)])


@given(st.integers(2, 16), st.data())
@settings(max_examples=40, deadline=None)
def test_rank_filtration_matches_exact_on_unidirectional_lattices(n, data):
    # every bond hops one way (or not at all); these are the lattices the
    # EPN analysis certifies
    fwd, bwd = [], []
    for _ in range(n - 1):
        direction = data.draw(st.sampled_from(["F", "B", "0"]))
        amp = data.draw(rational_coupling)
        fwd.append(amp if direction == "F" else 0)
        bwd.append(amp if direction == "B" else 0)
    nnn = data.draw(st.sampled_from([None, Fraction(1, 2)])) if set(bwd) == {0} else None
    spec = lat.LatticeSpec(n, fwd, bwd, nnn_amplitude=nnn)
    h = lat.build_hamiltonian(spec)
    exact = numlin.exact_rank_filtration(lat.build_exact(spec))
    floating = [numlin.rank(np.linalg.matrix_power(h, k)) for k in range(1, n + 1)]
    assert floating == exact


@given(st.integers(2, 16), st.data())
@settings(max_examples=40, deadline=None)
def test_rank_matches_exact_on_rational_lattices(n, data):
    coup = st.sampled_from([0, 1, -1, Fraction(1, 2), Fraction(-3, 2)])
    fwd = data.draw(st.lists(coup, min_size=n - 1, max_size=n - 1))
    bwd = data.draw(st.lists(coup, min_size=n - 1, max_size=n - 1))
    spec = lat.LatticeSpec(n, fwd, bwd)
    assert numlin.rank(lat.build_hamiltonian(spec)) == numlin.exact_rank_filtration(lat.build_exact(spec))[0]


@st.composite
def complex_matrix(draw, max_n=8):
    n = draw(st.integers(1, max_n))
    re = draw(st.lists(small, min_size=n * n, max_size=n * n))
    im = draw(st.lists(small, min_size=n * n, max_size=n * n))
    return (np.array(re) + 1j * np.array(im)).reshape(n, n)


@given(complex_matrix())
def test_null_space_vectors_annihilate_and_are_canonical(a):
    # make the matrix singular by zeroing a column combination
    a = a.copy()
    a[:, -1] = a[:, 0]
    norm = np.abs(a).sum(axis=1).max()
    for v in numlin.null_space(a):
        assert np.abs(a @ v).max() < 1e-10 * (1 + norm)
        first = v[np.abs(v) > 1e-12][0]
        assert first.imag == 0 and first.real > 0


@given(st.integers(1, 16))
def test_roots_of_unity(n):
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0], coeffs[-1] = 1, -1
    roots = numlin.poly_roots(coeffs)
    expected = np.exp(2j * np.pi * np.arange(n) / n)
    for w in expected:
        assert min(abs(r - w) for r in roots) < 1e-8


@given(complex_matrix(max_n=7))
@settings(max_examples=60)
def test_eigenvalue_sum_equals_trace(a):
    total = sum(p.value * p.multiplicity for p in numlin.eig(a))
    assert abs(total - np.trace(a)) < 1e-8 * (1 + np.abs(a).sum(axis=1).max())
