from fractions import Fraction

import numpy as np
import pytest

from conftest import genus2_component, genus2_domain, genus2_group, tate2_component, tate_component, tate_group
from scripts.errors import ConfigError, PreconditionError
from scripts.padic import Disc
from scripts.schottky import Word, enumerate_words, length_series
from scripts.spectral import (
    ComponentConfig,
    CouplingConfig,
    ShimuraLaplacian,
    aggregate_multiplicities,
    assemble_matrix,
    eigenvalue_Z,
    eigenvalue_delta,
    full_spectrum,
    kernel_H,
    largest_nonzero,
)

TRANSLATE = 8 / 9


def _oracle_residual(lap):
    M = lap.assemble().matrix
    worst = 0.0
    for e in lap.spectrum():
        for f in e.functions:
            worst = max(worst, float(np.abs(M @ f.values - e.eigenvalue * f.values).max()))
    return worst


@pytest.mark.parametrize("fixture", ["tate_lap", "genus2_lap", "uncoupled_lap", "coupled_lap"])
def test_wavelets_are_eigenfunctions(fixture, request):
    lap = request.getfixturevalue(fixture)
    assert _oracle_residual(lap) <= 1e-8


def test_tate_eigenvalues(tate_lap):
    for v in tate_lap.partition.internal_vertices():
        lam, tail = tate_lap.eigenvalue_delta(v)
        assert lam == pytest.approx(-(2 * v.depth + 3 + TRANSLATE), rel=1e-12)
        assert tail == pytest.approx(1 / 9)


def test_spectrum_entries(tate_lap):
    entries = tate_lap.spectrum()
    assert sum(e.multiplicity for e in entries) == len(tate_lap.partition)
    assert entries[0].anchor_id == "root-block0#0"
    assert entries[0].eigenvalue == pytest.approx(0.0, abs=1e-12)
    assert all(e.eigenvalue < 0 for e in entries[1:])
    assert largest_nonzero(entries) == pytest.approx(-(3 + TRANSLATE))
    aggregated = aggregate_multiplicities(entries)
    assert [e.multiplicity for e in aggregated] == [1, 2, 6]
    assert aggregated[2].anchor_id == "aggregate"


def test_genus2_eigenvalues_negative(genus2_lap):
    entries = genus2_lap.spectrum()
    assert sum(e.multiplicity for e in entries) == 10
    assert sum(1 for e in entries if abs(e.eigenvalue) < 1e-12) == 1
    assert all(e.eigenvalue <= 0 for e in entries)


def test_integration_modes_agree_without_translates():
    comp = genus2_component()
    part = comp.partition(1)
    for v in part.internal_vertices():
        full, _ = eigenvalue_delta(v, comp, 0, 1)
        displayed, _ = eigenvalue_delta(v, comp, 0, 1, integration="displayed")
        assert full == pytest.approx(displayed, rel=1e-12)


def test_unknown_integration_mode(tate):
    assert ShimuraLaplacian([tate], CouplingConfig.uncoupled(1), 1, 1).integration == "full_domain"
    with pytest.raises(ConfigError):
        ShimuraLaplacian([tate], CouplingConfig.uncoupled(1), 1, 1, integration="midpoint")


def test_zuniga_eigenvalue():
    comps = [tate2_component(0), tate2_component(1)]
    coupling = CouplingConfig([[0, 1], [1, 0]], alpha_z=1)
    assert eigenvalue_Z(0, comps, coupling) == (Fraction(-9), 0.0)
    assert eigenvalue_Z(0, comps[:1], CouplingConfig.uncoupled(1)) == (Fraction(0), 0.0)
    proof = CouplingConfig([[0, 1], [1, 0]], alpha_z=2)
    statement = CouplingConfig([[0, 1], [1, 0]], alpha_z=2, exponent="statement")
    assert eigenvalue_Z(1, comps, proof)[0] == Fraction(-25, 9)
    assert eigenvalue_Z(1, comps, statement)[0] == Fraction(-9)


def test_zuniga_eigenvalue_matches_double_word_sum():
    comps = [tate2_component(0), tate2_component(1)]
    words = [w for level in enumerate_words(tate_group(2), 30) for w in level]
    assert len(words) == 61
    brute = -sum(Fraction(1, 2 ** (len(a) + len(b))) for a in words for b in words) * comps[1].mu_total()
    series = length_series(1, 2, 1, 30)
    assert series.truncated + series.tail == series.closed_form == 3
    assert -9 < brute
    assert float(brute + 9) <= 2 * series.closed_form * series.tail <= 1e-6
    lam, _ = eigenvalue_Z(0, comps, CouplingConfig([[0, 1], [1, 0]], alpha_z=1))
    assert lam == -9


def test_coupling_validation():
    with pytest.raises(ConfigError):
        CouplingConfig([[0, 1], [2, 0]])
    with pytest.raises(ConfigError):
        CouplingConfig([[0, -1], [-1, 0]])
    with pytest.raises(ConfigError):
        CouplingConfig([[0]], alpha_z=0)
    with pytest.raises(ConfigError):
        ShimuraLaplacian([tate_component()], CouplingConfig.uncoupled(2), 1, 1)


def test_coupled_root_block(coupled_lap):
    values = sorted(e.eigenvalue for e in coupled_lap.root_block())
    assert values == pytest.approx([-4 / 3, 0.0], abs=1e-12)
    assert coupled_lap.eigenvalue_Z(0) == pytest.approx(-2 / 3)


def test_uncoupled_root_blocks_do_not_mix(uncoupled_lap):
    part = uncoupled_lap.partition
    for e in uncoupled_lap.root_block():
        f = e.functions[0].values
        components = set(part.component_of_leaf[np.flatnonzero(f)])
        assert len(components) == 1


def test_kernel_H():
    comp = tate_component()
    e, g = Word.identity(1), Word((0,), 1)
    assert kernel_H(2, e, 11, e, comp) == 27
    assert kernel_H(2, e, 2, g, comp) == 1
    assert kernel_H(2, g, 5, g, comp) == kernel_H(2, e, 5, e, comp) == 9


def test_kernel_H_is_symmetric_under_swapping_pairs():
    comp = genus2_component()
    e, g0 = Word.identity(2), Word((0,), 2)
    assert kernel_H(4, e, Fraction(1, 5), g0, comp) == kernel_H(Fraction(1, 5), g0, 4, e, comp) == Fraction(3, 10)
    words = [w for level in enumerate_words(comp.group, 2) for w in level]
    x, y = Fraction(4), Fraction(1, 5)
    for beta in words:
        for gamma in words:
            assert kernel_H(x, beta, y, gamma, comp) == kernel_H(y, gamma, x, beta, comp)


def test_operator_checks(tate_lap, coupled_lap):
    for lap in (tate_lap, coupled_lap):
        checks = lap.assemble().check()
        assert all(checks.values())
        K = lap.kernel_matrix()
        assert np.allclose(K, K.T)


def test_dirichlet_form(coupled_lap):
    rng = np.random.default_rng(1)
    M = coupled_lap.assemble().matrix
    mu = coupled_lap.partition.mu
    n = len(mu)
    u, v = rng.normal(size=n), rng.normal(size=n)
    assert coupled_lap.dirichlet_form(u, u) >= 0
    assert coupled_lap.dirichlet_form(np.ones(n), np.ones(n)) == pytest.approx(0.0, abs=1e-12)
    assert coupled_lap.dirichlet_form(u, v) == pytest.approx(coupled_lap.dirichlet_form(v, u))
    assert coupled_lap.dirichlet_form(u, v) == pytest.approx(-(mu * v) @ (M @ u))


def test_shifted_domain_agrees_within_tails(genus2_lap):
    shifted = ComponentConfig(
        0, genus2_group(), genus2_domain(), [Disc(4, -1, 5), Disc(Fraction(1, 5), -1, 5)], 1, shift=(0,)
    )
    lap = ShimuraLaplacian([shifted], CouplingConfig.uncoupled(1), depth=1, max_length=2)
    for v, w in zip(genus2_lap.partition.internal_vertices(), lap.partition.internal_vertices()):
        lam, tail = genus2_lap.eigenvalue_delta(v)
        lam_s, tail_s = lap.eigenvalue_delta(w)
        assert tail_s > tail
        assert abs(lam - lam_s) <= tail + tail_s
    assert _oracle_residual(lap) <= 1e-8


def test_leaf_anchor_is_rejected(tate_lap):
    with pytest.raises(PreconditionError):
        tate_lap.eigenvalue_delta(tate_lap.partition.leaves[0])


def test_module_level_wrappers_match_laplacian(tate_lap):
    comps, coupling = [tate_component()], CouplingConfig.uncoupled(1)
    M = assemble_matrix(comps, coupling, tate_lap.depth, tate_lap.max_length)
    assert np.allclose(M.matrix, tate_lap.assemble().matrix)
    got = sorted(e.eigenvalue for e in full_spectrum(comps, coupling, tate_lap.depth, tate_lap.max_length))
    want = sorted(e.eigenvalue for e in tate_lap.spectrum())
    assert got == pytest.approx(want)
