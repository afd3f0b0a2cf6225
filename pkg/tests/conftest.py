from fractions import Fraction
from pathlib import Path

import pytest

from scripts.padic import Disc, Mobius
from scripts.schottky import GoodFundamentalDomain, SchottkyGroup
from scripts.spectral import ComponentConfig, CouplingConfig, ShimuraLaplacian
from scripts.ultrametric import OmegaForm

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def tate_group(p=3):
    """z -> p^2 z / ((p^2 - 1) z + 1), fixing 0 and 1."""
    return SchottkyGroup(p, [Mobius(p * p, 0, p * p - 1, 1, p)])


def tate_domain(p=3):
    return GoodFundamentalDomain([Disc(1, -1, p), Disc(0, -1, p)])


def tate_component(index=0, alpha=1, orbits=None, **kwargs):
    orbits = orbits or [Disc(2, -1, 3)]
    return ComponentConfig(index, tate_group(3), tate_domain(3), orbits, alpha, OmegaForm.tate(3), **kwargs)


def tate2_component(index=0, alpha=2):
    """Tate curve over Q_2 with probability-normalized orbit, mu(F) = 1."""
    return ComponentConfig(
        index, tate_group(2), tate_domain(2), [Disc(Fraction(1, 2), -1, 2)], alpha, normalization="probability"
    )


def genus2_group():
    return SchottkyGroup(5, [Mobius.from_rows([[1, 25], [1, 0]], 5), Mobius.from_rows([[3, 19], [1, -2]], 5)])


def genus2_domain():
    return GoodFundamentalDomain([Disc(0, -1, 5), Disc(2, -1, 5), Disc(1, -1, 5), Disc(3, -1, 5)])


def genus2_component(index=0, alpha=1):
    return ComponentConfig(index, genus2_group(), genus2_domain(), [Disc(4, -1, 5), Disc(Fraction(1, 5), -1, 5)], alpha)


@pytest.fixture
def tate():
    return tate_component()


@pytest.fixture
def genus2():
    return genus2_component()


@pytest.fixture
def tate_lap(tate):
    return ShimuraLaplacian([tate], CouplingConfig.uncoupled(1), depth=2, max_length=2)


@pytest.fixture
def genus2_lap(genus2):
    return ShimuraLaplacian([genus2], CouplingConfig.uncoupled(1), depth=1, max_length=2)


@pytest.fixture
def uncoupled_lap():
    comps = [tate_component(0), tate_component(1, orbits=[Disc(2, -1, 3), Disc(Fraction(1, 3), -1, 3)])]
    return ShimuraLaplacian(comps, CouplingConfig.uncoupled(2), depth=1, max_length=2)


@pytest.fixture
def coupled_lap():
    comps = [tate_component(0), tate_component(1, alpha=2)]
    coupling = CouplingConfig([[0, Fraction(1, 2)], [Fraction(1, 2), 0]])
    return ShimuraLaplacian(comps, coupling, depth=1, max_length=2)


@pytest.fixture
def configs_dir():
    return CONFIGS
