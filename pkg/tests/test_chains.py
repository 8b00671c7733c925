import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from pstsim import evolution, statespace
from pstsim.models import chains

TAU = 640e-9
TWO_PI = 2 * np.pi


def test_pst_couplings_six_sites_frozen():
    J = chains.pst_couplings(6, TAU) / TWO_PI
    np.testing.assert_allclose(
        J, [873464.0537108553, 1104854.3456039806, 1171875.0,
            1104854.3456039806, 873464.0537108553], rtol=1e-12)


def test_pst_couplings_two_sites():
    assert chains.pst_couplings(2, 1e-6)[0] == pytest.approx(TWO_PI * 250e3)


@given(st.integers(2, 14))
def test_pst_couplings_mirror_symmetric_exactly(n):
    J = chains.pst_couplings(n, TAU)
    np.testing.assert_array_equal(J, J[::-1])
    assert np.all(J > 0)


@given(st.integers(2, 14))
def test_pst_peak_coupling_grows_linearly(n):
    J = chains.pst_couplings(n, TAU)
    peak = np.pi / (2 * TAU) * np.sqrt((n // 2) * (n - n // 2))
    assert J.max() == pytest.approx(peak, rel=1e-12)


def test_chain_spec_validation():
    with pytest.raises(ValueError):
        chains.ChainSpec(couplings=(1.0,), tau=-1.0)
    with pytest.raises(ValueError):
        chains.ChainSpec(couplings=(1.0, 1.0), tau=1.0, detunings=(0.0,))
    with pytest.raises(ValueError):
        chains.ChainSpec(couplings=(1.0, 1.0), tau=1.0, zz=(0.0, 0.0, 0.0))
    spec = chains.ChainSpec.pst(4, TAU)
    assert spec.n_sites == 4
    assert spec.with_zz((1.0, 2.0, 3.0)).zz == (1.0, 2.0, 3.0)


def _random_spec(rng, n):
    return chains.ChainSpec(
        couplings=tuple(rng.uniform(0.5, 2.0, n - 1) * 1e6),
        tau=1e-6,
        detunings=tuple(rng.uniform(-1, 1, n) * 1e5),
        zz=tuple(rng.uniform(-1, 1, n - 1) * 1e4),
    )


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1))
def test_chain_hamiltonian_hermitian_and_number_conserving(n, seed):
    spec = _random_spec(np.random.default_rng(seed), n)
    H = chains.chain_hamiltonian(spec).toarray()
    np.testing.assert_allclose(H, H.conj().T, atol=1e-9)
    num = np.diag(statespace.occupation_matrix(n).sum(axis=1).astype(float))
    np.testing.assert_allclose(H @ num - num @ H, 0.0, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.data())
def test_sector_hamiltonian_is_the_restriction(n, seed, data):
    k = data.draw(st.integers(0, n))
    spec = _random_spec(np.random.default_rng(seed), n)
    H = chains.chain_hamiltonian(spec).toarray()
    states = statespace.sector_states(n, k)
    Hk = chains.sector_hamiltonian(spec, k)
    np.testing.assert_allclose(Hk, H[np.ix_(states, states)], atol=1e-6)


def test_single_excitation_hamiltonian_matches_sector_one():
    spec = chains.ChainSpec.pst(5, TAU)
    np.testing.assert_array_equal(chains.single_excitation_hamiltonian(spec),
                                  chains.sector_hamiltonian(spec, 1))


@pytest.mark.parametrize("n", range(2, 7))
def test_pst_unitary_equals_matrix_exponential(n):
    spec = chains.ChainSpec.pst(n, TAU)
    H = chains.chain_hamiltonian(spec).toarray()
    U = expm(-1j * H * TAU)
    np.testing.assert_allclose(chains.pst_unitary(n), U, atol=1e-12)


@given(st.integers(2, 8))
def test_pst_state_map_is_mirror_permutation(n):
    targets, phases = chains.pst_state_map(n)
    assert sorted(targets) == list(range(2**n))
    np.testing.assert_allclose(np.abs(phases), 1.0, atol=1e-12)
    for x in (0, 1, 2**n - 1):
        assert targets[x] == statespace.mirror_index(x, n)
    # vacuum never acquires a phase
    assert phases[0] == 1.0 + 0j


def test_transfer_phase_cycle():
    assert chains.transfer_phase(2) == -1j
    assert chains.transfer_phase(3) == -1
    assert chains.transfer_phase(4) == 1j
    assert chains.transfer_phase(5) == 1
    assert abs(chains.transfer_phase(11)) == 1.0


def test_fst_profile_theta_pi_reduces_to_pst():
    for n in (2, 3, 4, 5, 6, 7):
        J, delta = chains.fst_profile(n, TAU, np.pi)
        np.testing.assert_array_equal(J, chains.pst_couplings(n, TAU))
        np.testing.assert_array_equal(delta, np.zeros(n))


def test_fst_profile_bounds():
    with pytest.raises(ValueError):
        chains.fst_profile(4, TAU, 3.2)
    with pytest.raises(ValueError):
        chains.fst_profile(4, TAU, -0.1)
    with pytest.raises(ValueError):
        chains.fst_profile(1, TAU, 1.0)
    with pytest.raises(ValueError):
        chains.fst_profile(4, -TAU, 1.0)


def _transfer_fraction(n, theta):
    spec = chains.ChainSpec.fst(n, TAU, theta)
    H = chains.single_excitation_hamiltonian(spec)
    w, v = np.linalg.eigh(H)
    psi = (v * np.exp(-1j * w * TAU)) @ (v.conj().T @ np.eye(n)[:, 0])
    return abs(psi[-1]) ** 2


@pytest.mark.parametrize("theta", [0.0, 0.2 * np.pi, 0.5 * np.pi,
                                   0.6 * np.pi, np.pi])
@pytest.mark.parametrize("n", range(3, 7))
def test_fst_transferred_fraction(n, theta):
    assert _transfer_fraction(n, theta) == pytest.approx(
        np.sin(theta / 2) ** 2, abs=1e-10)


def test_fst_population_split_point_six_pi():
    frac = _transfer_fraction(3, 0.6 * np.pi)
    assert frac == pytest.approx(0.6545084971874737, abs=1e-9)
    assert round(frac, 4) == 0.6545


@pytest.mark.parametrize("n", range(2, 6))
def test_fst_effective_propagator_matches_full_evolution(n):
    theta = 0.6 * np.pi
    spec = chains.ChainSpec.fst(n, TAU, theta)
    H = chains.chain_hamiltonian(spec).toarray()
    U = expm(-1j * H * TAU)
    np.testing.assert_allclose(chains.fst_effective_propagator(n, TAU, theta),
                               U, atol=1e-8)


def test_fst_dressing_angles_by_residue():
    # the mirror-pair rotation axis angle depends only on n mod 4
    for n, expect in ((6, 0.0), (3, -np.pi / 2), (4, np.pi), (5, np.pi / 2)):
        ang = chains.fst_dressing_angles(n, 0.6 * np.pi)
        assert ang[0] == pytest.approx(expect, abs=1e-12)


def test_stroboscopic_compare_phase_alignment():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    Q, _ = np.linalg.qr(A)
    phase, dist = evolution.stroboscopic_compare(np.exp(0.7j) * Q, Q)
    assert dist < 1e-9
    assert phase == pytest.approx(0.7, abs=1e-6)
