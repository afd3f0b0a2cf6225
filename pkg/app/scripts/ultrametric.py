"""
Orbit Trees, Equity Measures and Ultrametric Distances

Version: 1.0

Description:
    A Galois orbit is modeled as the boundary of a finite-depth rooted tree whose
    vertices are closed p-adic discs. Child k of a vertex with radius exponent rho
    is centered at parent center + (base-p digits of k) * p^(-floor(rho)) and has
    radius exponent rho - drop, where (children, drop) is given per level by the
    branching profile.

    Measures:
        nu    equity measure on the tree, by default the diameter rule
              nu(v) = p^rho(v) (children = p^drop on every level);
        mu    |f(center)|_p * nu on leaves, summed upwards, where the
              differential form is omega = f dx with f = P/Q.

    A Partition collects the orbit trees of all components and numbers their
    leaves consecutively (component, orbit, depth-first order).

Usage:
    part = build_partition([Disc(2, -1, 3)], depth=2, omega=OmegaForm.tate(3))
    part.leaves            # 9 leaf vertices
    dist(part.leaves[0], part.leaves[1])
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Union

import numpy as np

from scripts.errors import ConfigError, DepthError, FormVanishesError, PreconditionError, ZeroDistance
from scripts.padic import AbsValue, Disc, Number, PAdicScalar, RationalLike, as_fraction, p_power, vp
from scripts.schottky import (
    GoodFundamentalDomain,
    SchottkyGroup,
    ValidationReport,
    Word,
    disc_image,
    word_to_mobius,
)

logger = logging.getLogger(__name__)

NORMALIZATIONS = ("diameter", "probability", "equity")


@dataclass(frozen=True)
class BranchLevel:
    children: int
    drop: Fraction

    def __post_init__(self):
        object.__setattr__(self, "drop", as_fraction(self.drop))
        if self.children < 1:
            raise ConfigError(f"A branching level needs at least one child, got {self.children}")
        if self.drop <= 0:
            raise ConfigError(f"The radius exponent must strictly decrease, got drop {self.drop}")


def regular_branching(prime: int, depth: int) -> List[BranchLevel]:
    return [BranchLevel(prime, Fraction(1)) for _ in range(depth)]


class OmegaForm:
    """
    Differential form omega = f dx with f = numerator / denominator.

    Coefficient lists are lowest degree first.
    """

    def __init__(self, numerator: Sequence[RationalLike], denominator: Sequence[RationalLike], prime: int):
        self.numerator = tuple(as_fraction(a) for a in numerator)
        self.denominator = tuple(as_fraction(a) for a in denominator)
        self.prime = prime
        if not any(self.numerator) or not any(self.denominator):
            raise ConfigError("The form needs nonzero numerator and denominator")

    @classmethod
    def dx(cls, prime: int) -> "OmegaForm":
        return cls([1], [1], prime)

    @classmethod
    def tate(cls, prime: int) -> "OmegaForm":
        """dx / (x (x - 1)), invariant under the Tate generator fixing 0 and 1."""
        return cls([1], [0, -1, 1], prime)

    @staticmethod
    def _evaluate(coeffs, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for a in reversed(coeffs):
            acc = acc * x + a
        return acc

    def value(self, x: RationalLike) -> Fraction:
        x = as_fraction(x)
        den = self._evaluate(self.denominator, x)
        if den == 0:
            raise FormVanishesError(f"The form has a pole at {x}")
        return self._evaluate(self.numerator, x) / den

    @staticmethod
    def _taylor(coeffs, c: Fraction) -> List[Fraction]:
        return [
            sum((coeffs[n] * math.comb(n, k) * c ** (n - k) for n in range(k, len(coeffs))), Fraction(0))
            for k in range(len(coeffs))
        ]

    def _zero_free(self, coeffs, disc: Disc) -> bool:
        taylor = self._taylor(coeffs, disc.center)
        if taylor[0] == 0:
            return False
        v0 = vp(taylor[0], self.prime)
        return all(a == 0 or vp(a, self.prime) - v0 > k * disc.radius for k, a in enumerate(taylor) if k)

    def factor(self, disc: Disc) -> AbsValue:
        """
        |f|_p on the disc, constant there.

        Raises:
            FormVanishesError: If f may have a zero or a pole on the disc.
        """
        if not self._zero_free(self.numerator, disc):
            raise FormVanishesError(f"The form may vanish on {disc}")
        if not self._zero_free(self.denominator, disc):
            raise FormVanishesError(f"The form may have a pole on {disc}")
        return AbsValue.of(self.value(disc.center), self.prime)

    def to_dict(self) -> dict:
        return {"numerator": [str(a) for a in self.numerator], "denominator": [str(a) for a in self.denominator]}


@dataclass(eq=False)
class Vertex:
    disc: Disc
    depth: int
    path: tuple
    nu: Number
    component: int = 0
    orbit: int = 0
    mu: Number = 0
    parent: Optional["Vertex"] = None
    children: List["Vertex"] = field(default_factory=list)
    first_leaf: int = 0
    last_leaf: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def leaf_range(self) -> range:
        return range(self.first_leaf, self.last_leaf)

    @property
    def key(self) -> str:
        return f"c{self.component}.o{self.orbit}:" + ".".join(str(k) for k in self.path)

    def __repr__(self) -> str:
        return f"Vertex({self.key}, {self.disc})"


def _child_offsets(prime: int, radius: Fraction, children: int) -> List[Fraction]:
    unit = Fraction(prime) ** (-math.floor(radius))
    offsets = []
    for k in range(children):
        off, scale = Fraction(0), unit
        while k:
            k, digit = divmod(k, prime)
            off += digit * scale
            scale *= prime
        offsets.append(off)
    return offsets


class OrbitTree:
    """
    Finite-depth tree model of one Galois orbit.

    Attributes:
        root (Vertex): Orbit root; its disc is the orbit.
        depth (int): Depth of the leaves.
        branching (list[BranchLevel]): One level per depth.
    """

    def __init__(
        self,
        root_disc: Disc,
        depth: int,
        branching: Optional[Sequence[BranchLevel]] = None,
        normalization: str = "diameter",
        omega: Optional[OmegaForm] = None,
        component: int = 0,
        orbit: int = 0,
    ):
        if depth < 0:
            raise PreconditionError(f"depth must be >= 0, got {depth}")
        if normalization not in NORMALIZATIONS:
            raise ConfigError(f"Unknown normalization '{normalization}', expected one of {NORMALIZATIONS}")
        self.prime = root_disc.prime
        self.depth = depth
        self.branching = list(branching) if branching is not None else regular_branching(self.prime, depth)
        if len(self.branching) < depth:
            raise ConfigError(f"The branching profile has {len(self.branching)} levels, depth {depth} requested")
        self.branching = self.branching[:depth]
        self.normalization = normalization
        self.omega = omega or OmegaForm.dx(self.prime)
        if normalization != "equity":
            for level, b in enumerate(self.branching):
                if b.drop.denominator != 1 or b.children != self.prime ** int(b.drop):
                    raise ConfigError(
                        f"Level {level}: the {normalization} rule needs p^drop children, got {b.children} "
                        f"children with drop {b.drop}; use the equity normalization"
                    )
        self.radii = [root_disc.radius]
        for b in self.branching:
            self.radii.append(self.radii[-1] - b.drop)
        self.root = Vertex(root_disc, 0, (), self._root_nu(root_disc), component, orbit)
        self._grow(self.root)
        self._assign_mu(self.root)

    def _root_nu(self, disc: Disc) -> Number:
        if self.normalization == "probability":
            return Fraction(1)
        return p_power(self.prime, disc.radius)

    def _child_nu(self, parent: Vertex, child_disc: Disc, children: int) -> Number:
        if self.normalization == "equity":
            return parent.nu / children
        if self.normalization == "probability":
            return p_power(self.prime, child_disc.radius - self.root.disc.radius)
        return p_power(self.prime, child_disc.radius)

    def _grow(self, vertex: Vertex):
        if vertex.depth == self.depth:
            return
        level = self.branching[vertex.depth]
        radius = vertex.disc.radius - level.drop
        for k, off in enumerate(_child_offsets(self.prime, vertex.disc.radius, level.children)):
            disc = Disc(vertex.disc.center + off, radius, self.prime)
            child = Vertex(
                disc, vertex.depth + 1, vertex.path + (k,), self._child_nu(vertex, disc, level.children),
                vertex.component, vertex.orbit, parent=vertex,
            )
            vertex.children.append(child)
        self._check_children(vertex)
        for child in vertex.children:
            self._grow(child)

    @staticmethod
    def _check_children(vertex: Vertex):
        kids = vertex.children
        for i, a in enumerate(kids):
            if not vertex.disc.contains_disc(a.disc):
                raise ConfigError(f"Child {a.disc} does not fit into {vertex.disc}")
            for b in kids[i + 1:]:
                if not a.disc.disjoint(b.disc):
                    raise ConfigError(
                        f"Children {a.disc} and {b.disc} of {vertex.disc} overlap; increase the drop of level {vertex.depth}"
                    )

    def _assign_mu(self, vertex: Vertex) -> Number:
        if vertex.is_leaf:
            try:
                vertex.mu = self.omega.factor(vertex.disc).value() * vertex.nu
            except FormVanishesError as e:
                raise DepthError(f"Cannot refine {vertex.key}: {e}") from e
            return vertex.mu
        vertex.mu = sum((self._assign_mu(c) for c in vertex.children), Fraction(0))
        return vertex.mu

    def vertices(self) -> Iterator[Vertex]:
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.children))

    def internal_vertices(self) -> List[Vertex]:
        return [v for v in self.vertices() if not v.is_leaf]

    def leaves(self) -> List[Vertex]:
        return [v for v in self.vertices() if v.is_leaf]

    def check_equity(self, measure: str = "nu") -> bool:
        for v in self.internal_vertices():
            total = sum((getattr(c, measure) for c in v.children), Fraction(0))
            if isinstance(total, Fraction) and isinstance(getattr(v, measure), Fraction):
                if total != getattr(v, measure):
                    return False
            elif not math.isclose(float(total), float(getattr(v, measure)), rel_tol=1e-12):
                return False
        return True

    def join_radius_matrix(self) -> np.ndarray:
        """Radius exponent of the join vertex for every pair of leaves (float)."""
        leaves = self.leaves()
        paths = np.array([leaf.path for leaf in leaves], dtype=int).reshape(len(leaves), self.depth)
        same = paths[:, None, :] == paths[None, :, :]
        join_depth = np.cumprod(same, axis=2).sum(axis=2)
        radii = np.array([float(r) for r in self.radii])
        return radii[join_depth]


class Partition:
    """
    Depth-D leaf partition of the modeled fundamental domains.

    Attributes:
        trees (list[OrbitTree]): All orbit trees, ordered by component.
        leaves (list[Vertex]): Leaves in global order.
        mu (np.ndarray): Leaf masses.
    """

    def __init__(self, trees: Sequence[OrbitTree]):
        self.trees = sorted(trees, key=lambda t: t.root.component)
        self.leaves: List[Vertex] = []
        for orbit, tree in enumerate(self.trees):
            for v in tree.vertices():
                v.orbit = orbit
            self._number(tree.root)
        self.mu = np.array([float(leaf.mu) for leaf in self.leaves])
        self.component_of_leaf = np.array([leaf.component for leaf in self.leaves], dtype=int)
        self.orbit_of_leaf = np.array([leaf.orbit for leaf in self.leaves], dtype=int)

    @classmethod
    def merge(cls, partitions: Sequence["Partition"]) -> "Partition":
        return cls([t for p in partitions for t in p.trees])

    def _number(self, vertex: Vertex):
        vertex.first_leaf = len(self.leaves)
        if vertex.is_leaf:
            self.leaves.append(vertex)
        for child in vertex.children:
            self._number(child)
        vertex.last_leaf = len(self.leaves)

    @property
    def leaf_discs(self) -> List[Disc]:
        return [leaf.disc for leaf in self.leaves]

    @property
    def roots(self) -> List[Vertex]:
        return [t.root for t in self.trees]

    @property
    def components(self) -> List[int]:
        return sorted({t.root.component for t in self.trees})

    def orbits_of(self, component: int) -> List[int]:
        return [i for i, t in enumerate(self.trees) if t.root.component == component]

    def mu_total(self, component: Optional[int] = None) -> Number:
        return sum((t.root.mu for t in self.trees if component is None or t.root.component == component), Fraction(0))

    def internal_vertices(self) -> List[Vertex]:
        return [v for t in self.trees for v in t.internal_vertices()]

    def leaf_containing(self, x: RationalLike, component: Optional[int] = None) -> Optional[int]:
        x = as_fraction(x)
        for leaf_index, leaf in enumerate(self.leaves):
            if (component is None or leaf.component == component) and leaf.disc.contains(x):
                return leaf_index
        return None

    def __len__(self) -> int:
        return len(self.leaves)


def build_partition(
    orbits: Sequence[Disc],
    depth: int,
    branching: Optional[Sequence[BranchLevel]] = None,
    normalization: str = "diameter",
    omega: Optional[OmegaForm] = None,
    component: int = 0,
    domain: Optional[GoodFundamentalDomain] = None,
) -> Partition:
    """
    Builds the depth-D leaf partition of the union of the given orbits.

    Raises:
        ConfigError: If orbit roots overlap or leave the fundamental domain.
        DepthError: If the form vanishes on a leaf.
    """
    if not orbits:
        raise ConfigError("At least one orbit root is required")
    for i, R in enumerate(orbits):
        for S in orbits[i + 1:]:
            if not R.disjoint(S):
                raise ConfigError(f"Orbit roots {R} and {S} overlap")
        if domain is not None:
            for k, D in enumerate(domain.discs):
                if not R.disjoint(D):
                    raise ConfigError(f"Orbit root {R} meets the paired disc D{k} = {D}")
    trees = [OrbitTree(R, depth, branching, normalization, omega, component, i) for i, R in enumerate(orbits)]
    part = Partition(trees)
    logger.debug("Built %d leaves for component %d at depth %d", len(part), component, depth)
    return part


def nu(A: Vertex) -> Number:
    return A.nu


def mu(A: Union[Vertex, Disc], omega: OmegaForm, nu_value: Optional[Number] = None) -> Number:
    """
    |f(center_A)|_p * nu(A).

    Raises:
        FormVanishesError: If the form may vanish or have a pole on A.
    """
    disc = A.disc if isinstance(A, Vertex) else A
    base = A.nu if isinstance(A, Vertex) else (nu_value if nu_value is not None else p_power(disc.prime, disc.radius))
    return omega.factor(disc).value() * base


def _join(a: Vertex, b: Vertex) -> Vertex:
    ancestors = set()
    v = a
    while v is not None:
        ancestors.add(id(v))
        v = v.parent
    v = b
    while id(v) not in ancestors:
        v = v.parent
    return v


def dist(x, y, prime: Optional[int] = None) -> AbsValue:
    """
    Ultrametric distance between points, discs or tree vertices.

    Raises:
        ZeroDistance: If the arguments coincide or overlap.
    """
    if isinstance(x, Vertex) and isinstance(y, Vertex):
        if x.component != y.component:
            raise PreconditionError("Distances are only defined inside one component")
        if x.orbit != y.orbit:
            return orbit_root(x).disc.distance_to(orbit_root(y).disc)
        join = _join(x, y)
        if join is x or join is y:
            raise ZeroDistance(f"{x.key} and {y.key} are not disjoint")
        return join.disc.diameter
    if isinstance(x, Disc) and isinstance(y, Disc):
        if not x.disjoint(y):
            raise ZeroDistance(f"{x} and {y} are not disjoint")
        return x.distance_to(y)
    if isinstance(x, PAdicScalar):
        prime, x = x.prime, x.value
    if isinstance(y, PAdicScalar):
        prime, y = y.prime, y.value
    if prime is None:
        raise ValueError("A prime is required for rational points")
    x, y = as_fraction(x), as_fraction(y)
    if x == y:
        raise ZeroDistance(f"{x} = {y}")
    return AbsValue.of(x - y, prime)


def orbit_root(v: Vertex) -> Vertex:
    while v.parent is not None:
        v = v.parent
    return v


def translate_distance(beta: Word, x: RationalLike, gamma: Word, y: RationalLike, group: SchottkyGroup) -> AbsValue:
    """
    Invariant distance |beta x - gamma y| := |x - (beta^-1 gamma) y|.

    Raises:
        ZeroDistance: If x = beta^-1 gamma y.
    """
    m = word_to_mobius(beta.inverse() * gamma, group)
    return dist(x, m(as_fraction(y)), group.prime)


def check_invariance(
    omega: OmegaForm,
    group: SchottkyGroup,
    F: GoodFundamentalDomain,
    partition: Partition,
    words: Sequence[Word],
) -> ValidationReport:
    """Compares mu(gamma A) = |f(gamma c)| |gamma'(c)| nu(A) with mu(A) for every leaf A."""
    report = ValidationReport()
    for w in words:
        m = word_to_mobius(w, group)
        violations = 0
        for leaf in partition.leaves:
            pole = m.pole
            if not pole.is_infinity and leaf.disc.contains(pole.value):
                continue
            image = disc_image(m, leaf.disc)
            stretch = AbsValue(group.prime, image.radius - leaf.disc.radius)
            try:
                moved = omega.factor(image) * stretch
                here = omega.factor(leaf.disc)
            except FormVanishesError as e:
                report.add(f"invariance {w} {leaf.key}", False, str(e))
                violations += 1
                continue
            if moved != here:
                report.add(f"invariance {w} {leaf.key}", False, f"|f| |gamma'| = {moved}, |f| = {here}")
                violations += 1
        if not violations:
            report.add(f"invariance {w}", True, f"{len(partition)} leaves")
    return report
