import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epnlab import lattice as lat
from epnlab import numlin
from epnlab.epn import (
    adiabatic_path_check,
    epn_check,
    jordan_block,
    jordan_chain,
    nilpotency_index,
    structurally_nilpotent,
    uniform_grid,
)
from epnlab.errors import NotEPNError

from conftest import basis


def H(spec):
    return lat.build_hamiltonian(spec)


def disordered_h1(n, seed):
    return lat.sample_disorder(lat.h1(n), lat.DisorderSpec(seed=seed))


# -- nilpotency_index ---------------------------------------------------------------

def test_index_h1():
    assert nilpotency_index(H(lat.h1(10))) == 10


def test_index_cyclic_shift_absent():
    assert nilpotency_index(H(lat.ring_forward(10))) is None


@pytest.mark.parametrize("j", [1.0, -0.3, 2.5j])
def test_index_two_level(j):
    assert nilpotency_index(np.array([[0, j], [0, 0]])) == 2


def test_index_lower_order():
    h = np.zeros((4, 4))
    h[0, 1] = h[2, 3] = 1
    assert nilpotency_index(h) == 2


def test_index_similarity_transformed_block():
    rng = np.random.default_rng(3)
    s = rng.normal(size=(5, 5)) + np.eye(5) * 3
    h = s @ jordan_block(5) @ np.linalg.inv(s)
    assert not structurally_nilpotent(h)
    assert nilpotency_index(h) == 5
    assert epn_check(h).is_epn


# -- epn_check ----------------------------------------------------------------------

def test_epn_disordered_h1_exact_oracle():
    spec = disordered_h1(10, seed=77)
    h = H(spec)
    rep = epn_check(h)
    assert rep.is_epn and rep.nilpotency_index == 10
    assert numlin.exact_rank_filtration(numlin.to_rational(h)) == rep.rank_filtration
    np.testing.assert_array_equal(rep.kernel[0], basis(10, 1))


def test_epn_interface_is_not_epn():
    rep = epn_check(H(lat.interface(10)), exact=lat.build_exact(lat.interface(10)))
    assert not rep.is_epn
    assert len(rep.kernel) == 2 and rep.rank_filtration[0] == 8
    assert rep.nilpotency_index is None


def test_epn_hermitian_conductor():
    rep = epn_check(H(lat.hermitian_chain(10)))
    assert not rep.is_epn and rep.nilpotency_index is None and not rep.structural_nilpotent


def test_epn_report_json_fields():
    d = epn_check(H(lat.h1(3))).to_dict()
    assert set(d) == {"n", "nilpotency_index", "rank_filtration", "kernel", "is_epn",
                      "jordan_value", "structural_nilpotent"}
    assert d["rank_filtration"] == [2, 1, 0]
    assert d["kernel"] == [[{"re": 1.0, "im": 0.0}, {"re": 0.0, "im": 0.0}, {"re": 0.0, "im": 0.0}]]


# -- jordan_chain -------------------------------------------------------------------

def test_chain_h1_is_identity():
    ch = jordan_chain(H(lat.h1(6)))
    np.testing.assert_array_equal(ch.similarity, np.eye(6))
    assert ch.residual == 0 and not ch.warnings


def test_chain_disordered_h1_products():
    spec = disordered_h1(8, seed=4)
    a = [float(x) for x in spec.forward]
    ch = jordan_chain(H(spec))
    for k in range(1, 9):
        expected = math.prod(a[k - 1:]) * basis(8, k)  # v_k = prod_{m=k}^{N-1} a_m e_k
        np.testing.assert_allclose(ch.vectors[k - 1], expected, rtol=1e-14)
    assert ch.residual < 1e-8


def test_chain_ring_backward():
    ch = jordan_chain(H(lat.ring_backward(10)))
    assert abs(np.linalg.det(ch.similarity)) > 0
    h = H(lat.ring_backward(10))
    np.testing.assert_allclose(np.linalg.solve(ch.similarity, h @ ch.similarity), jordan_block(10), atol=1e-12)


def test_chain_rejects_non_epn():
    with pytest.raises(NotEPNError):
        jordan_chain(H(lat.interface(10)))


def test_chain_ill_conditioned_warns():
    spec = lat.LatticeSpec(16, (1e-3,) * 15, (0,) * 15)
    ch = jordan_chain(H(spec))
    assert any("ill-conditioned" in w for w in ch.warnings)


# -- path check ---------------------------------------------------------------------

def test_path_cos_sin_fails():
    grid = uniform_grid(0, math.pi / 2)
    v = adiabatic_path_check(lat.cos_sin_family(10), grid)
    assert not v.path_equivalent
    assert v.first_failure == grid[1]
    assert dict(v.samples)[grid[50]] is False


def test_path_ring_closure_passes():
    assert adiabatic_path_check(lat.ring_closure_family(10), uniform_grid(0, 1)).path_equivalent


def test_path_constant_h1():
    v = adiabatic_path_check(lat.HamiltonianFamily(lat.h1(6)), [0, 1, 2])
    assert v.path_equivalent and v.first_failure is None


def test_path_grid_validation():
    fam = lat.HamiltonianFamily(lat.h1(3))
    with pytest.raises(ValueError):
        adiabatic_path_check(fam, [])
    with pytest.raises(ValueError):
        adiabatic_path_check(fam, [1, 0])


# -- properties ----------------------------------------------------------------------

@given(st.integers(2, 16), st.integers(0, 2**32))
@settings(deadline=None)
def test_epn_invariants_on_disordered_h1(n, seed):
    h = H(disordered_h1(n, seed))
    rep = epn_check(h)
    assert rep.is_epn == (rep.nilpotency_index == n)
    assert rep.is_epn and rep.structural_nilpotent
    assert len(rep.kernel) == n - rep.rank_filtration[0] == 1
    ch = jordan_chain(h)
    np.testing.assert_allclose(numlin.canonicalize(ch.vectors[0] / np.linalg.norm(ch.vectors[0])),
                               rep.kernel[0], atol=1e-12)
    assert ch.residual < 1e-8


@given(st.integers(2, 12), st.integers(0, 2**32), st.sampled_from(["H1", "H2", "nnn", "ring"]))
@settings(deadline=None)
def test_structural_and_floating_agree(n, seed, kind):
    base = {"H1": lat.h1(n), "H2": lat.h2(n), "nnn": lat.h1_nnn(n, 0.5),
            "ring": lat.ring_backward(n)}[kind]
    spec = lat.sample_disorder(base, lat.DisorderSpec("both", seed=seed))
    h = H(spec)
    assert structurally_nilpotent(h) == (nilpotency_index(h) is not None)


def test_filtration_monotone_and_drops_by_one_iff_epn():
    for spec in (lat.h1(8), lat.interface(8), lat.h1_nnn(8, 0.4), lat.hermitian_chain(8)):
        rep = epn_check(H(spec))
        f = [rep.n] + rep.rank_filtration
        assert all(b <= a for a, b in zip(f, f[1:]))
        assert rep.is_epn == all(a - b == 1 for a, b in zip(f, f[1:]))


def test_ring_closure_refined_grid():
    assert adiabatic_path_check(lat.ring_closure_family(10), uniform_grid(0, 1, 1001)).path_equivalent
