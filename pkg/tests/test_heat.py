import math

import numpy as np
import pytest
from scipy.linalg import expm

from scripts.errors import NegativeTime, PreconditionError
from scripts.heat import (
    SpectralDecomposition,
    empirical_law,
    heat_kernel,
    sample_path,
    sample_paths,
    solve_cauchy,
    total_variation,
    transition_matrix,
)


@pytest.fixture
def tate_dec(tate_lap):
    return SpectralDecomposition.from_spectrum(tate_lap.spectrum(), tate_lap.partition)


@pytest.fixture
def tate_matrix(tate_lap):
    return tate_lap.assemble()


def test_decompositions_agree(tate_dec, tate_matrix):
    assert tate_dec.reconstruction_residual() <= 1e-10
    numeric = SpectralDecomposition.from_operator(tate_matrix)
    assert np.allclose(np.sort(numeric.eigenvalues), np.sort(tate_dec.eigenvalues), atol=1e-10)
    assert np.allclose(numeric.transition(0.3), tate_dec.transition(0.3), atol=1e-10)


def test_transition_matrix(tate_matrix):
    P = transition_matrix(0.4, tate_matrix)
    assert all(P.check().values())
    assert np.allclose(P.matrix, expm(0.4 * tate_matrix.matrix), atol=1e-10)
    Q = transition_matrix(0.6, tate_matrix)
    assert np.allclose(P.matrix @ Q.matrix, transition_matrix(1.0, tate_matrix).matrix, atol=1e-10)
    assert np.array_equal(transition_matrix(0, tate_matrix).matrix, np.eye(9))


def test_coupled_transition(coupled_lap):
    M = coupled_lap.assemble()
    P = transition_matrix(0.7, M)
    assert all(P.check().values())
    assert np.allclose(P.matrix, expm(0.7 * M.matrix), atol=1e-10)


def test_cauchy_conserves_mass_and_positivity(tate_lap, tate_dec):
    mu = tate_lap.partition.mu
    u0 = np.zeros(9)
    u0[0] = 1.0
    for t in (0.0, 0.1, 0.5, 2.0):
        u = solve_cauchy(u0, t, tate_dec)
        assert np.sum(u * mu) == pytest.approx(np.sum(u0 * mu), abs=1e-12)
        assert u.min() >= -1e-12
    late = solve_cauchy(u0, 50.0, tate_dec)
    assert np.allclose(late, np.sum(u0 * mu) / mu.sum(), atol=1e-10)


def test_cauchy_on_a_wavelet_decays_exponentially(tate_lap, tate_dec):
    anchor = tate_lap.partition.internal_vertices()[1]
    lam, _ = tate_lap.eigenvalue_delta(anchor)
    psi = next(e for e in tate_lap.spectrum() if e.anchor_id == anchor.key).functions[0]
    u0 = np.real(psi.values)
    assert np.allclose(solve_cauchy(u0, 0.3, tate_dec), math.exp(0.3 * lam) * u0, atol=1e-12)


def test_negative_time(tate_dec, tate_matrix):
    with pytest.raises(NegativeTime):
        solve_cauchy(np.ones(9), -1.0, tate_dec)
    with pytest.raises(NegativeTime):
        transition_matrix(-0.5, tate_matrix)
    with pytest.raises(NegativeTime):
        heat_kernel(-1e-3, 0, 1, tate_dec)


@pytest.mark.parametrize("x,y", [(0, 1), (0, 4), (2, 8), (7, 3)])
def test_off_diagonal_kernel_matches_matrix_exponential(tate_dec, tate_matrix, x, y):
    mu = tate_matrix.mu
    for t in (0.05, 0.5, 2.0):
        value = heat_kernel(t, x, y, tate_dec)
        assert value.converged
        assert value.value * mu[y] == pytest.approx(expm(t * tate_matrix.matrix)[x, y], abs=1e-6)


def test_kernel_is_zero_across_uncoupled_components(uncoupled_lap):
    dec = SpectralDecomposition.from_spectrum(uncoupled_lap.spectrum(), uncoupled_lap.partition)
    comps = uncoupled_lap.partition.component_of_leaf
    x = int(np.flatnonzero(comps == 0)[0])
    y = int(np.flatnonzero(comps == 1)[0])
    assert heat_kernel(1.0, x, y, dec).value == 0.0


def test_on_diagonal_convergence_diagnostic(tate_dec):
    early = heat_kernel(1e-3, 0, 0, tate_dec)
    late = heat_kernel(1.0, 0, 0, tate_dec)
    assert not early.converged
    assert late.converged
    assert sorted(late.level_terms) == [-1, 0, 1]
    assert late.level_terms[1] / late.level_terms[0] == pytest.approx(3 * math.exp(-2.0), rel=1e-9)
    assert late.partial_sums[-1] == pytest.approx(late.value)
    assert early.threshold == pytest.approx(math.log(3) / 2, abs=1e-6)


@pytest.mark.parametrize("t", [50.0, 200.0, 1000.0])
def test_on_diagonal_converges_at_large_times(tate_dec, t):
    value = heat_kernel(t, 0, 0, tate_dec)
    assert value.converged
    assert value.level_terms[1] <= value.level_terms[0]
    assert value.threshold == pytest.approx(math.log(3) / 2, abs=1e-6)


def test_sampler_matches_transition_law(tate_matrix):
    paths = sample_paths(0, 1.0, seed=7, n_paths=10_000, matrix=tate_matrix)
    law = empirical_law(paths, 1.0, 9)
    exact = transition_matrix(1.0, tate_matrix).matrix[0]
    assert law.sum() == pytest.approx(1.0)
    assert total_variation(law, exact) <= 0.05


def test_sampler_is_reproducible(tate_matrix):
    first = sample_paths(3, 2.0, seed=11, n_paths=50, matrix=tate_matrix)
    again = sample_paths(3, 2.0, seed=11, n_paths=50, matrix=tate_matrix, threads=4)
    assert [(p.times, p.states) for p in first] == [(p.times, p.states) for p in again]
    single = sample_path(3, 2.0, 11, tate_matrix, path_index=5)
    assert (single.times, single.states) == (first[5].times, first[5].states)
    other = sample_paths(3, 2.0, seed=12, n_paths=50, matrix=tate_matrix)
    assert [p.times for p in other] != [p.times for p in first]


def test_path_structure(tate_matrix):
    path = sample_path(0, 5.0, 1, tate_matrix)
    assert path.times[0] == 0.0 and path.states[0] == 0
    assert all(a < b for a, b in zip(path.times, path.times[1:]))
    assert all(a != b for a, b in zip(path.states, path.states[1:]))
    assert path.times[-1] <= 5.0
    assert path.state_at(0.0) == 0
    assert path.state_at(5.0) == path.states[-1]
    with pytest.raises(PreconditionError):
        sample_path(0, 0.0, 1, tate_matrix)
