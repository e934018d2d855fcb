import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_state
from hwrec.fock import enumerate_basis, lift_operator
from hwrec.hw import (
    ExpectationTable,
    RepresentativeNotFoundError,
    hw_expectations_exact,
    hw_matrix,
    hw_reduce,
    mode_shift,
    mu,
    omega,
    orbit_decomposition,
    phase_shift,
    reconstruct_hw_reduced,
    shift_vector,
)

COPRIME = [(3, 1), (3, 2), (5, 2), (5, 3), (7, 2)]


def test_shift_moves_011_to_101():
    basis = enumerate_basis(3, 2)
    X = lift_operator(mode_shift(3), basis)
    out = X[:, basis.index[(0, 1, 1)]]
    assert abs(out[basis.index[(1, 0, 1)]]) == pytest.approx(1.0)
    assert shift_vector((0, 1, 1)) == (1, 0, 1)


@pytest.mark.parametrize("M", [2, 3, 5, 7])
def test_shift_and_phase_have_order_M(M):
    I = np.eye(M)
    np.testing.assert_allclose(np.linalg.matrix_power(mode_shift(M), M), I, atol=1e-12)
    np.testing.assert_allclose(np.linalg.matrix_power(phase_shift(M), M), I, atol=1e-12)


def test_two_mode_shift_is_swap():
    np.testing.assert_array_equal(mode_shift(2), [[0, 1], [1, 0]])


def test_three_mode_phase():
    w = omega(3)
    np.testing.assert_allclose(phase_shift(3), np.diag([1, w, w**2]))


@pytest.mark.parametrize("M,N", COPRIME)
def test_lifted_phase_is_diagonal_in_mu(M, N):
    basis = enumerate_basis(M, N)
    Z = lift_operator(phase_shift(M), basis)
    expected = [omega(M) ** mu(s) for s in basis.states]
    np.testing.assert_allclose(Z, np.diag(expected), atol=1e-12)


def test_hw_matrix_entries():
    np.testing.assert_array_equal(hw_matrix(0, 0, 4), np.eye(4))
    assert hw_matrix(1, 1, 3)[2, 1] == pytest.approx(omega(3))
    for k in range(5):
        for l in range(5):
            L = hw_matrix(k, l, 5)
            np.testing.assert_allclose(L, np.linalg.matrix_power(mode_shift(5), k) @ np.linalg.matrix_power(phase_shift(5), l), atol=1e-12)
            np.testing.assert_allclose(L @ L.conj().T, np.eye(5), atol=1e-12)


def test_mu_examples():
    assert mu((2, 0, 0)) == 0
    assert mu((0, 1, 1)) == 0
    assert mu((0, 2, 0)) == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=2, max_size=7))
def test_shift_raises_mu_by_photon_number(n):
    M = len(n)
    assert mu(shift_vector(n), M) == (mu(n, M) + sum(n)) % M


def test_orbits_three_mode_two_photon():
    orbits = orbit_decomposition(enumerate_basis(3, 2))
    assert sorted(o.representative for o in orbits) == [(0, 1, 1), (2, 0, 0)]
    assert all(o.size == 3 for o in orbits)
    o = next(o for o in orbits if o.representative == (0, 1, 1))
    assert o.members == ((0, 1, 1), (1, 0, 1), (1, 1, 0))


def test_orbit_single_photon():
    orbits = orbit_decomposition(enumerate_basis(3, 1))
    assert len(orbits) == 1 and orbits[0].size == 3


def test_short_orbit_in_four_modes():
    orbits = orbit_decomposition(enumerate_basis(4, 2), strict=False)
    o = next(o for o in orbits if (0, 1, 0, 1) in o.members)
    assert o.size == 2
    assert o.representative == (0, 1, 0, 1)
    assert o.members == ((0, 1, 0, 1), (1, 0, 1, 0)) * 2


def test_missing_representative_raises():
    with pytest.raises(RepresentativeNotFoundError):
        orbit_decomposition(enumerate_basis(4, 2))
    basis = enumerate_basis(4, 2)
    v = np.zeros(basis.dim)
    v[basis.index[(1, 1, 0, 0)]] = 1
    with pytest.raises(RepresentativeNotFoundError):
        hw_reduce(v, 4, 2)


def test_short_orbit_is_renormalized():
    basis = enumerate_basis(4, 2)
    v = np.zeros(basis.dim, dtype=complex)
    v[basis.index[(0, 1, 0, 1)]] = 0.6
    v[basis.index[(1, 0, 1, 0)]] = 0.8j
    red = hw_reduce(v, 4, 2)
    block = np.outer(v[[basis.index[(0, 1, 0, 1)], basis.index[(1, 0, 1, 0)]]], v[[basis.index[(0, 1, 0, 1)], basis.index[(1, 0, 1, 0)]]].conj())
    np.testing.assert_allclose(red, np.block([[block, block], [block, block]]) / 2, atol=1e-15)
    assert np.trace(red).real == pytest.approx(1.0)


@pytest.mark.parametrize("M", range(2, 8))
@pytest.mark.parametrize("N", range(1, 4))
def test_orbits_partition_the_sector(M, N):
    basis = enumerate_basis(M, N)
    orbits = orbit_decomposition(basis, strict=math.gcd(N, M) == 1)
    assert sum(o.size for o in orbits) == basis.dim
    assert all(M % o.size == 0 for o in orbits)
    covered = {m for o in orbits for m in o.members}
    assert covered == set(basis.states)
    for o in orbits:
        if o.representative is not None:
            assert mu(o.representative, M) == 0


def test_maximally_mixed_reduces_to_identity():
    np.testing.assert_allclose(hw_reduce(np.eye(6) / 6, 3, 2), np.eye(3) / 3, atol=1e-15)


def test_fock_011_reduces_to_rank_one():
    basis = enumerate_basis(3, 2)
    v = np.zeros(6)
    v[basis.index[(0, 1, 1)]] = 1
    expected = np.zeros((3, 3))
    expected[0, 0] = 1
    np.testing.assert_allclose(hw_reduce(v, 3, 2), expected, atol=1e-15)


def test_first_entry_sums_the_representatives(rng):
    # labels 0..5 of the two-photon qutrit listing: |011>,|101>,|110>,|200>,|020>,|002>
    basis = enumerate_basis(3, 2)
    listing = [(0, 1, 1), (1, 0, 1), (1, 1, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)]
    rho = random_density(6, rng)
    perm = [basis.index[s] for s in listing]
    r = rho[np.ix_(perm, perm)]
    red = hw_reduce(rho, 3, 2)
    assert red[0, 0] == pytest.approx(r[0, 0] + r[3, 3])
    assert red[0, 1] == pytest.approx(r[0, 1] + r[3, 4])
    assert red[2, 2] == pytest.approx(r[2, 2] + r[5, 5])


@pytest.mark.parametrize("M,N", COPRIME)
def test_hw_reduce_is_a_density_matrix(M, N, rng):
    red = hw_reduce(random_density(enumerate_basis(M, N).dim, rng), M, N)
    np.testing.assert_allclose(red, red.conj().T, atol=1e-12)
    assert np.trace(red).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(red).min() >= -1e-10


def test_expectations_of_020():
    basis = enumerate_basis(3, 2)
    v = np.zeros(6)
    v[basis.index[(0, 2, 0)]] = 1
    tab = hw_expectations_exact(v, 3, 2)
    assert tab[0, 1] == pytest.approx(omega(3) ** 2)
    assert (tab[0, 1] + tab[0, -1]).real == pytest.approx(-1.0)
    assert tab[0, 0] == 1


def test_maximally_mixed_has_no_signal():
    tab = hw_expectations_exact(np.eye(6) / 6, 3, 2)
    vals = tab.values.copy()
    vals[0, 0] = 0
    np.testing.assert_allclose(vals, 0, atol=1e-15)


@pytest.mark.parametrize("M,N", [(3, 2), (5, 2)])
def test_lifted_hw_operators_do_not_mix_orbits(M, N):
    basis = enumerate_basis(M, N)
    label = {}
    for i, o in enumerate(orbit_decomposition(basis)):
        for s in o.members:
            label[s] = i
    lab = np.array([label[s] for s in basis.states])
    cross = lab[:, None] != lab[None, :]
    for k in range(M):
        for l in range(M):
            L = lift_operator(hw_matrix(k, l, M), basis)
            assert np.abs(L[cross]).max(initial=0) == 0


@pytest.mark.parametrize("M,N", COPRIME)
def test_orbit_blocks_are_single_photon_matrices(M, N):
    basis = enumerate_basis(M, N)
    for o in orbit_decomposition(basis):
        idx = [basis.index[s] for s in o.members]
        for k in range(M):
            for l in range(M):
                L = lift_operator(hw_matrix(k, l, M), basis)
                np.testing.assert_allclose(L[np.ix_(idx, idx)], hw_matrix(k, N * l, M), atol=1e-12)


@pytest.mark.parametrize("M,N", COPRIME)
def test_expectations_ignore_inter_orbit_coherences(M, N, rng):
    basis = enumerate_basis(M, N)
    rho = random_density(basis.dim, rng)
    label = {s: i for i, o in enumerate(orbit_decomposition(basis)) for s in o.members}
    lab = np.array([label[s] for s in basis.states])
    dephased = np.where(lab[:, None] == lab[None, :], rho, 0)
    a = hw_expectations_exact(rho, M, N).values
    b = hw_expectations_exact(dephased, M, N).values
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_single_photon_reconstruction_is_the_full_state(rng):
    rho = random_density(5, rng)
    np.testing.assert_allclose(reconstruct_hw_reduced(hw_expectations_exact(rho, 5, 1)), rho, atol=1e-12)


def test_trivial_table_gives_identity():
    tab = ExpectationTable(3, 2, np.zeros((2, 3, 3)))
    np.testing.assert_allclose(reconstruct_hw_reduced(tab), np.eye(3) / 3, atol=1e-15)


@pytest.mark.parametrize("M,N", COPRIME)
def test_round_trip_pure_states(M, N, rng):
    for _ in range(5):
        psi = random_state(M, N, rng)
        rec = reconstruct_hw_reduced(hw_expectations_exact(psi, M, N))
        assert np.max(np.abs(rec - hw_reduce(psi, M, N))) <= 1e-10


@pytest.mark.parametrize("M,N", [(3, 2), (5, 2)])
def test_round_trip_with_phase_convention(M, N, rng):
    theta = rng.uniform(-3, 3, (M, M))
    theta[0, 0] = 0
    rho = random_density(enumerate_basis(M, N).dim, rng)
    tab = hw_expectations_exact(rho, M, N, phase_convention=theta)
    rec = reconstruct_hw_reduced(tab, phase_convention=theta)
    np.testing.assert_allclose(rec, hw_reduce(rho, M, N), atol=1e-10)


def test_reconstruction_rejects_shared_factor():
    with pytest.raises(ValueError, match="gcd"):
        reconstruct_hw_reduced(ExpectationTable(4, 2, np.zeros((2, 4, 4))))


def test_reconstruction_rejects_incomplete_table():
    lam = np.zeros((2, 3, 3))
    lam[0, 1, 2] = np.nan
    with pytest.raises(ValueError, match="incomplete"):
        reconstruct_hw_reduced(ExpectationTable(3, 2, lam))


def test_table_pins_identity_entry():
    tab = ExpectationTable(3, 2, np.full((2, 3, 3), 0.5))
    assert tab.lam[0, 0, 0] == 1 and tab.lam[1, 0, 0] == 0
    with pytest.raises(ValueError):
        ExpectationTable(3, 2, np.zeros((3, 3)))
