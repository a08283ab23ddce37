import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coherent_constraints.fock import (
    OperatorMatrix, angular_momentum, annihilation, build_space, commutator, creation,
    displacement_matrix, embed_mode_operator, hermitian_eigendecomposition, identity,
    interior_mask, matrix_exponential, number_operator, quadrature_operators, spectral_norm,
)


def brute_force_count(modes, total):
    return sum(1 for occ in itertools.product(range(total + 1), repeat=modes) if sum(occ) <= total)


@pytest.mark.parametrize("modes, kwargs, dim", [
    (1, dict(n_max=5), 6),
    (2, dict(total_quanta=4), 15),
    (2, dict(n_max=(3, 3)), 16),
    (3, dict(n_max=(1, 2, 3)), 24),
])
def test_build_space_dimension(modes, kwargs, dim):
    assert build_space(modes, **kwargs).dimension == dim


@pytest.mark.parametrize("modes, total", [(1, 7), (2, 4), (2, 9), (3, 5), (4, 3)])
def test_total_quanta_dimension_matches_enumeration(modes, total):
    space = build_space(modes, total_quanta=total)
    assert space.dimension == brute_force_count(modes, total) == math.comb(total + modes, modes)


def test_build_space_errors():
    with pytest.raises(ValueError):
        build_space(0, n_max=3)
    with pytest.raises(ValueError):
        build_space(3, n_max=99, max_dimension=1000)
    with pytest.raises(ValueError):
        build_space(2)
    with pytest.raises(ValueError):
        build_space(2, n_max=(1, 2, 3))


@given(modes=st.integers(1, 3), cut=st.integers(0, 6), per_mode=st.booleans())
@settings(max_examples=40, deadline=None)
def test_index_map_round_trip(modes, cut, per_mode):
    space = build_space(modes, n_max=cut) if per_mode else build_space(modes, total_quanta=cut)
    for i in range(space.dimension):
        assert space.flatten(space.unflatten(i)) == i


def test_annihilation_examples():
    space = build_space(1, n_max=2)
    a = annihilation(space, 0)
    np.testing.assert_allclose(a @ space.basis_vector([1]), space.basis_vector([0]))
    np.testing.assert_allclose(a @ space.basis_vector([0]), 0)

    two = build_space(2, total_quanta=2)
    a1 = annihilation(two, 0)
    np.testing.assert_allclose(a1 @ two.basis_vector([1, 1]), two.basis_vector([0, 1]))
    with pytest.raises(IndexError):
        annihilation(two, 2)


@pytest.mark.parametrize("space", [build_space(1, n_max=6), build_space(2, total_quanta=5),
                                   build_space(2, n_max=(2, 4))], ids=repr)
def test_ladder_consistency(space):
    for mode in range(space.modes):
        a = annihilation(space, mode).entries
        np.testing.assert_array_equal(creation(space, mode).entries, a.conj().T)
        # a|n> = sqrt(n)|n-1> on every admitted state
        for i, occ in enumerate(space.occupations):
            col = a[:, i]
            if occ[mode] == 0:
                assert not col.any()
            else:
                lowered = occ.copy()
                lowered[mode] -= 1
                assert col[space.flatten(lowered)] == pytest.approx(math.sqrt(occ[mode]))
                assert np.count_nonzero(col) == 1


def test_vacuum_position_variance():
    for space in (build_space(1, n_max=1), build_space(1, n_max=10), build_space(2, total_quanta=3)):
        q, _ = quadrature_operators(space, 0)
        vac = np.zeros(space.dimension)
        vac[space.flatten([0] * space.modes)] = 1
        assert np.vdot(vac, q.entries @ q.entries @ vac) == pytest.approx(0.5)


@pytest.mark.parametrize("n_max", [1, 4, 9])
def test_canonical_commutator_interior_and_boundary(n_max):
    space = build_space(1, n_max=n_max)
    q, p = quadrature_operators(space, 0)
    c = commutator(q, p).entries
    for n in range(n_max):
        np.testing.assert_allclose(c @ space.basis_vector([n]), 1j * space.basis_vector([n]), atol=1e-14)
    top = space.basis_vector([n_max])
    np.testing.assert_allclose(c @ top, -1j * n_max * top, atol=1e-13)


@pytest.mark.parametrize("space", [build_space(1, n_max=7), build_space(2, total_quanta=6),
                                   build_space(2, n_max=(3, 5)), build_space(3, total_quanta=3)], ids=repr)
def test_commutator_trace_vanishes(space):
    for mode in range(space.modes):
        q, p = quadrature_operators(space, mode)
        assert abs(np.trace(commutator(q, p).entries)) <= 1e-12


def test_commutator_basics():
    space = build_space(2, total_quanta=6)
    q, p = quadrature_operators(space, 1)
    assert spectral_norm(commutator(q, q).entries) == 0
    mask = interior_mask(space)
    np.testing.assert_allclose(commutator(q, p).entries[:, mask], 1j * np.eye(space.dimension)[:, mask],
                               atol=1e-13)
    with pytest.raises(ValueError):
        commutator(q, quadrature_operators(build_space(1, n_max=3), 0)[0])


def test_angular_momentum_commutes_with_number():
    space = build_space(2, total_quanta=8)
    assert spectral_norm(commutator(angular_momentum(space), number_operator(space)).entries) <= 1e-12


def test_angular_momentum_matches_quadrature_form_off_boundary():
    space = build_space(2, total_quanta=7)
    q1, p1 = quadrature_operators(space, 0)
    q2, p2 = quadrature_operators(space, 1)
    literal = (q2 @ p1 - p2 @ q1).entries
    mask = interior_mask(space)
    np.testing.assert_allclose(angular_momentum(space).entries[:, mask], literal[:, mask], atol=1e-13)


def block_spectrum(total):
    # L3 on the n-quanta shell has eigenvalues -n, -n+2, ..., n
    return sorted(m for n in range(total + 1) for m in range(-n, n + 1, 2))


@pytest.mark.parametrize("total", [2, 5, 8])
def test_angular_momentum_spectrum(total):
    w, _ = hermitian_eigendecomposition(angular_momentum(build_space(2, total_quanta=total)))
    np.testing.assert_allclose(w, block_spectrum(total), atol=1e-12)
    if total == 2:
        np.testing.assert_allclose(w, [-2, -1, 0, 0, 1, 2], atol=1e-12)


def test_number_operator_multiplicities():
    total = 6
    w, _ = hermitian_eigendecomposition(number_operator(build_space(2, total_quanta=total)))
    values, counts = np.unique(np.round(w).astype(int), return_counts=True)
    np.testing.assert_array_equal(values, np.arange(total + 1))
    np.testing.assert_array_equal(counts, values + 1)


def test_eigendecomposition_diagonal():
    space = build_space(1, n_max=2)
    w, v = hermitian_eigendecomposition(OperatorMatrix(space, np.diag([3.0, 1.0, 2.0]), hermitian=True))
    np.testing.assert_allclose(w, [1, 2, 3])
    np.testing.assert_allclose(np.abs(v.conj().T @ v), np.eye(3), atol=1e-15)


@pytest.mark.parametrize("dim", [1, 7, 60, 500])
def test_eigendecomposition_round_trip(dim):
    rng = np.random.default_rng(dim)
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = OperatorMatrix(build_space(1, n_max=dim - 1), x + x.conj().T, hermitian=True)
    w, v = hermitian_eigendecomposition(a)
    assert spectral_norm((v * w) @ v.conj().T - a.entries) <= 1e-10 * a.norm()
    assert np.all(np.diff(w) >= 0)


def test_hermitian_flag_is_verified():
    space = build_space(1, n_max=3)
    a = annihilation(space, 0)
    with pytest.raises(ValueError):
        OperatorMatrix(space, a.entries, hermitian=True)
    with pytest.raises(ValueError):
        OperatorMatrix(space, a.entries, unitary=True)


def test_matrix_exponential_examples():
    space = build_space(1, n_max=5)
    n = number_operator(space)
    np.testing.assert_allclose(matrix_exponential(n, 0).entries, np.eye(6))
    flip = matrix_exponential(n, -1j * np.pi)
    assert flip.unitary
    np.testing.assert_allclose(flip @ space.basis_vector([1]), -space.basis_vector([1]), atol=1e-15)
    a = annihilation(space, 0)
    # nilpotent generator goes through the Padé path: exp(a) has entries sqrt(n!/m!)/(n-m)!
    expected = np.zeros((6, 6))
    for m in range(6):
        for k in range(m, 6):
            expected[m, k] = math.sqrt(math.factorial(k) / math.factorial(m)) / math.factorial(k - m)
    np.testing.assert_allclose(matrix_exponential(a).entries, expected, atol=1e-12)
    with pytest.raises(ValueError):
        matrix_exponential(OperatorMatrix(space, np.full((6, 6), np.nan)))


@given(t=st.floats(0, 10))
@settings(max_examples=25, deadline=None)
def test_unitarity_of_hermitian_evolution(t):
    space = build_space(2, total_quanta=5)
    q, p = quadrature_operators(space, 0)
    h = OperatorMatrix(space, (q @ q + p @ p + angular_momentum(space)).entries, hermitian=True)
    u = matrix_exponential(h, -1j * t).entries
    assert spectral_norm(u.conj().T @ u - np.eye(space.dimension)) <= 1e-12
    assert spectral_norm(u) == pytest.approx(1.0, abs=1e-12)


def test_displacement_matrix_matches_large_space_exponential():
    import scipy.linalg

    big = 90
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    for alpha in (0.0, 0.7 - 0.4j, -1.3j, 2.1 + 0.5j):
        exact = scipy.linalg.expm(alpha * a.T - np.conj(alpha) * a)[:15, :15]
        np.testing.assert_allclose(displacement_matrix(alpha, 15), exact, atol=1e-12)
    batch = displacement_matrix(np.array([0.1, 0.2j]), 4)
    assert batch.shape == (2, 4, 4)


def test_embed_mode_operator_is_kron_on_per_mode_space():
    space = build_space(2, n_max=(2, 3))
    local = np.arange(16, dtype=complex).reshape(4, 4)
    np.testing.assert_array_equal(embed_mode_operator(space, 1, local).entries, np.kron(np.eye(3), local))
    np.testing.assert_array_equal(embed_mode_operator(space, 0, local[:3, :3]).entries,
                                  np.kron(local[:3, :3], np.eye(4)))


def test_identity_and_operator_arithmetic():
    space = build_space(1, n_max=3)
    q, p = quadrature_operators(space, 0)
    assert (q + p).hermitian and (2.0 * q).hermitian and not (1j * q).hermitian
    np.testing.assert_allclose((identity(space) @ q).entries, q.entries)
    assert q.dag.hermitian
