import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pstsim import statespace as ss


def test_basis_index_site1_most_significant():
    assert ss.basis_index([1, 0, 0]) == 4
    assert ss.basis_index([0, 0, 1]) == 1
    assert ss.basis_index([1, 0, 1, 1]) == 0b1011


@given(st.integers(2, 8), st.data())
def test_occupations_round_trip(n, data):
    idx = data.draw(st.integers(0, 2**n - 1))
    occ = ss.occupations(idx, n)
    assert len(occ) == n
    assert ss.basis_index(occ) == idx
    assert ss.excitation_number(idx) == sum(occ)


@given(st.integers(2, 10), st.data())
def test_sector_states_sorted_and_complete(n, data):
    k = data.draw(st.integers(0, n))
    states = ss.sector_states(n, k)
    assert len(states) == ss.sector_dimension(n, k)
    assert list(states) == sorted(states)
    assert all(ss.excitation_number(int(s)) == k for s in states)


@given(st.integers(2, 10), st.data())
def test_sector_rank_unrank(n, data):
    k = data.draw(st.integers(0, n))
    dim = ss.sector_dimension(n, k)
    r = data.draw(st.integers(0, dim - 1))
    idx = ss.sector_unrank(r, n, k)
    assert ss.sector_rank(idx, n) == r


def test_sector_dimension_is_binomial():
    assert [ss.sector_dimension(6, k) for k in range(7)] == [1, 6, 15, 20, 15, 6, 1]


def test_occupation_matrix_bits():
    occ = ss.occupation_matrix(3)
    assert occ.shape == (8, 3)
    # index 6 = |110>: sites 1 and 2 excited
    assert occ[6].tolist() == [1, 1, 0]
    assert occ.sum(axis=1).tolist() == [ss.excitation_number(i) for i in range(8)]


def test_sector_occupation_matrix_matches_full():
    occ = ss.occupation_matrix(5)
    states = ss.sector_states(5, 2)
    np.testing.assert_array_equal(ss.sector_occupation_matrix(5, 2), occ[states])


@st.composite
def _state(draw, dim):
    re = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=dim, max_size=dim))
    im = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    nrm = np.linalg.norm(v)
    if nrm < 1e-3:
        v = v + 1.0
        nrm = np.linalg.norm(v)
    return v / nrm


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 4), st.data())
def test_apply_single_qubit_matches_embedding(n, site, data):
    if site > n:
        site = 1 + site % n
    psi = data.draw(_state(2**n))
    op = np.array([[0.3, 0.91j], [-0.91j, 0.3]])
    full = ss.embed_single_qubit(op, site, n)
    np.testing.assert_allclose(ss.apply_single_qubit(psi, op, site, n),
                               full @ psi, atol=1e-12)


def test_embed_single_qubit_site_order():
    # X on site 1 of two sites flips the most significant bit
    X = np.array([[0, 1], [1, 0]], dtype=float)
    full = ss.embed_single_qubit(X, 1, 2)
    psi = np.zeros(4)
    psi[0b00] = 1.0
    np.testing.assert_array_equal(full @ psi, np.eye(4)[0b10])


def test_reduced_density_matrix_product_state():
    a = np.array([0.6, 0.8j])
    b = np.array([1.0, 1.0]) / np.sqrt(2)
    psi = np.kron(a, b)
    rho1 = ss.reduced_density_matrix(psi, [1], 2)
    np.testing.assert_allclose(rho1, np.outer(a, a.conj()), atol=1e-12)
    rho2 = ss.reduced_density_matrix(psi, [2], 2)
    np.testing.assert_allclose(rho2, np.outer(b, b.conj()), atol=1e-12)


def test_reduced_density_matrix_keep_order():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    c = np.array([1.0, 1.0]) / np.sqrt(2)
    psi = np.kron(a, np.kron(b, c))
    rho = ss.reduced_density_matrix(psi, [2, 3], 3)
    np.testing.assert_allclose(rho, np.kron(np.outer(b, b), np.outer(c, c)),
                               atol=1e-12)
    # kept axes follow the keep list, not site order
    rho_swapped = ss.reduced_density_matrix(psi, [3, 2], 3)
    np.testing.assert_allclose(rho_swapped,
                               np.kron(np.outer(c, c), np.outer(b, b)), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.data())
def test_reduced_density_matrix_is_a_state(n, data):
    psi = data.draw(_state(2**n))
    keep = data.draw(st.lists(st.integers(1, n), min_size=1, max_size=n,
                              unique=True))
    rho = ss.reduced_density_matrix(psi, keep, n)
    assert rho.shape == (2**len(keep),) * 2
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    np.testing.assert_allclose(np.trace(rho), 1.0, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() > -1e-12


@given(st.integers(2, 12), st.integers(1, 12))
def test_mirror_site_involution(n, site):
    if site > n:
        site = 1 + site % n
    assert ss.mirror_site(ss.mirror_site(site, n), n) == site
    assert ss.mirror_site(1, n) == n


@given(st.integers(2, 8), st.data())
def test_mirror_index_reverses_occupations(n, data):
    idx = data.draw(st.integers(0, 2**n - 1))
    mirrored = ss.mirror_index(idx, n)
    assert ss.occupations(mirrored, n) == ss.occupations(idx, n)[::-1]


def test_bad_inputs():
    with pytest.raises(ValueError):
        ss.basis_index([0, 2, 0])
    with pytest.raises(ValueError):
        ss.sector_unrank(99, 3, 1)
    with pytest.raises(ValueError):
        ss.reduced_density_matrix(np.ones(4) / 2, [3], 2)
    with pytest.raises(ValueError):
        ss.reduced_density_matrix(np.ones(4) / 2, [1, 1], 2)
    with pytest.raises(ValueError):
        ss.apply_single_qubit(np.ones(4) / 2, np.eye(2), 0, 2)
    with pytest.raises(ValueError):
        ss.mirror_site(7, 6)
