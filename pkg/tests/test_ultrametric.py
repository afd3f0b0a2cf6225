from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import genus2_component, tate2_component, tate_domain, tate_group
from scripts.errors import ConfigError, DepthError, FormVanishesError, ZeroDistance
from scripts.padic import AbsValue, Disc
from scripts.schottky import Word, enumerate_words, word_to_mobius
from scripts.ultrametric import BranchLevel, OmegaForm, build_partition, check_invariance, dist, mu, translate_distance


@pytest.fixture
def tate_partition():
    return build_partition([Disc(2, -1, 3)], 2, omega=OmegaForm.tate(3), domain=tate_domain())


def test_tate_partition_counts_and_masses(tate_partition):
    assert len(tate_partition) == 9
    assert tate_partition.mu_total() == Fraction(1, 3)
    assert all(leaf.mu == Fraction(1, 27) for leaf in tate_partition.leaves)
    assert tate_partition.leaves[0].key == "c0.o0:0.0"
    assert tate_partition.leaves[3].key == "c0.o0:1.0"
    assert len(tate_partition.internal_vertices()) == 4
    tree = tate_partition.trees[0]
    assert tree.check_equity("nu") and tree.check_equity("mu")


def test_leaf_range_and_lookup(tate_partition):
    child = tate_partition.trees[0].root.children[0]
    assert list(child.leaf_range) == [0, 1, 2]
    assert tate_partition.leaf_containing(11) == 1
    assert tate_partition.leaf_containing(Fraction(1, 3)) is None


def test_genus2_partition():
    part = genus2_component().partition(1)
    assert len(part) == 10
    assert part.mu_total() == Fraction(2, 5)
    assert part.orbits_of(0) == [0, 1]
    assert list(part.orbit_of_leaf) == [0] * 5 + [1] * 5


def test_probability_normalization():
    part = tate2_component().partition(2)
    assert part.mu_total() == 1
    assert all(leaf.mu == Fraction(1, 4) for leaf in part.leaves)


def test_equity_normalization_allows_irregular_branching():
    levels = [BranchLevel(2, 1)]
    part = build_partition([Disc(2, -1, 3)], 1, levels, normalization="equity")
    assert [leaf.mu for leaf in part.leaves] == [Fraction(1, 6), Fraction(1, 6)]
    with pytest.raises(ConfigError):
        build_partition([Disc(2, -1, 3)], 1, levels)


def test_partition_rejects_bad_roots():
    with pytest.raises(ConfigError):
        build_partition([Disc(2, -1, 3), Disc(5, -2, 3)], 1)
    with pytest.raises(ConfigError):
        build_partition([Disc(1, -1, 3)], 1, domain=tate_domain())
    with pytest.raises(DepthError):
        build_partition([Disc(1, -1, 3)], 1, omega=OmegaForm.tate(3))


def test_tree_distances(tate_partition):
    leaves = tate_partition.leaves
    assert dist(leaves[0], leaves[1]) == AbsValue(3, Fraction(-2))
    assert dist(leaves[0], leaves[3]) == AbsValue(3, Fraction(-1))
    with pytest.raises(ZeroDistance):
        dist(leaves[0], leaves[0])
    with pytest.raises(ZeroDistance):
        dist(tate_partition.trees[0].root, leaves[4])


def test_distances_between_orbits_and_points():
    part = genus2_component().partition(1)
    assert dist(part.leaves[0], part.leaves[5]) == AbsValue(5, Fraction(1))
    assert dist(2, 11, 3) == AbsValue(3, Fraction(-2))
    assert dist(Disc(2, -1, 3), Disc(0, -1, 3)) == AbsValue(3, Fraction(0))
    with pytest.raises(ZeroDistance):
        dist(Disc(2, -1, 3), Disc(5, -2, 3))


def test_mu_of_discs():
    omega = OmegaForm.tate(3)
    assert mu(Disc(2, -1, 3), omega) == Fraction(1, 3)
    assert mu(Disc(Fraction(1, 3), -1, 3), omega) == Fraction(1, 27)
    with pytest.raises(FormVanishesError):
        mu(Disc(0, -1, 3), omega)
    with pytest.raises(FormVanishesError):
        mu(Disc(1, -2, 3), OmegaForm([-1, 1], [1], 3))


def test_check_invariance(tate_partition):
    words = [w for level in enumerate_words(tate_group(), 2) for w in level]
    assert check_invariance(OmegaForm.tate(3), tate_group(), tate_domain(), tate_partition, words).ok
    plain = build_partition([Disc(2, -1, 3)], 1)
    assert not check_invariance(OmegaForm.dx(3), tate_group(), tate_domain(), plain, words).ok


tate_words = st.lists(st.integers(0, 1), max_size=4).map(lambda xs: Word(tuple(xs), 1))
root_points = st.integers(-500, 500).map(lambda a: Fraction(2 + 3 * a))


@settings(max_examples=1000)
@given(tate_words, tate_words, tate_words, root_points, root_points)
def test_translate_distance(alpha, beta, gamma, x, y):
    group = tate_group()
    assume(len(beta.inverse() * gamma) or x != y)
    d = translate_distance(beta, x, gamma, y, group)
    assert translate_distance(alpha * beta, x, alpha * gamma, y, group) == d
    assert translate_distance(Word.identity(1), x, beta.inverse() * gamma, y, group) == d
    moved = y
    for k in reversed((beta.inverse() * gamma).letters):
        moved = group.letter(k)(moved)
    assert d == AbsValue.of(x - moved, 3)
    assert dist(x, word_to_mobius(beta.inverse() * gamma, group)(y), 3) == d
    if len(beta.inverse() * gamma):
        assert d == AbsValue(3, Fraction(0))
