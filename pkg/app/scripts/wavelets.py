"""
Ultrametric Wavelets

Version: 1.0

Description:
    Mean-zero functions supported on a disc and constant on its children.

    At a vertex with m children of equal mass the wavelets are the nontrivial
    characters of the cyclic group C_m scaled by mu(A)^(-1/2). With unequal masses
    the mean-zero, children-constant space is orthonormalized in L^2(mu) instead.

    basis() completes the wavelets of all internal vertices with, per component,
    the mean-zero combinations of its orbit roots and one normalized constant,
    giving an orthonormal basis of the leaf-constant functions.

Usage:
    ws = wavelets_at(vertex)
    fs = basis(partition)
    np.allclose(gram_matrix(fs), np.eye(len(fs)))
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from scripts.errors import DegenerateVertex
from scripts.padic import RationalLike
from scripts.schottky import GoodFundamentalDomain, SchottkyGroup
from scripts.ultrametric import Partition, Vertex

logger = logging.getLogger(__name__)


def _patterns(masses: Sequence, total) -> np.ndarray:
    """m x (m-1) matrix whose columns are mean-zero unit vectors in L^2(masses)."""
    m = len(masses)
    if all(mass == masses[0] for mass in masses):
        k = np.arange(m)
        return np.exp(2j * np.pi * np.outer(k, np.arange(1, m)) / m) / np.sqrt(float(total))
    w = np.sqrt(np.array([float(x) for x in masses]))
    return null_space(w[None, :]) / w[:, None]


@dataclass(eq=False)
class Wavelet:
    """
    Wavelet anchored at a vertex: one value per child of the anchor.

    Attributes:
        anchor (Vertex): The vertex whose disc is the support.
        index (int): 1..m-1.
        values (np.ndarray): Value on each child.
    """
    anchor: Vertex
    index: int
    values: np.ndarray

    @property
    def support(self) -> range:
        return self.anchor.leaf_range

    def on_leaves(self, n_leaves: int) -> np.ndarray:
        out = np.zeros(n_leaves, dtype=complex)
        for child, value in zip(self.anchor.children, self.values):
            out[child.first_leaf:child.last_leaf] = value
        return out

    def mean(self) -> complex:
        return complex(sum(v * float(c.mu) for v, c in zip(self.values, self.anchor.children)))

    def norm_squared(self) -> float:
        return float(sum(abs(v) ** 2 * float(c.mu) for v, c in zip(self.values, self.anchor.children)))


def wavelets_at(v: Vertex) -> List[Wavelet]:
    """
    The m-1 wavelets anchored at v.

    Raises:
        DegenerateVertex: If v has fewer than two children.
    """
    m = len(v.children)
    if m < 2:
        raise DegenerateVertex(f"{v.key} has {m} child; wavelets need at least two")
    patterns = _patterns([c.mu for c in v.children], v.mu)
    return [Wavelet(v, j + 1, patterns[:, j]) for j in range(m - 1)]


@dataclass(eq=False)
class InvariantFunction:
    """
    Leaf-constant function on the partition, extended to the whole orbit space
    by psi(gamma x) = psi(x).

    Attributes:
        values (np.ndarray): One value per leaf.
        partition (Partition): The leaf partition.
        label (str): Anchor description.
        group, domain: Set by extend_invariant(); used to evaluate at translates.
    """
    values: np.ndarray
    partition: Partition
    label: str = ""
    component: Optional[int] = None
    group: Optional[SchottkyGroup] = None
    domain: Optional[GoodFundamentalDomain] = None

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    def inner(self, other: "InvariantFunction") -> complex:
        return complex(np.sum(self.values * np.conj(other.values) * self.partition.mu))

    def __call__(self, x: RationalLike):
        """Value at a rational point, reduced into the fundamental domain first."""
        if self.group is None or self.domain is None:
            raise ValueError("Call extend_invariant() before evaluating at points")
        _, rep = self.domain.representative(x, self.group)
        leaf = self.partition.leaf_containing(rep, self.component)
        return 0 if leaf is None else self.values[leaf]


def extend_invariant(psi: InvariantFunction, group: SchottkyGroup, domain: GoodFundamentalDomain) -> InvariantFunction:
    return InvariantFunction(psi.values, psi.partition, psi.label, psi.component, group, domain)


def wavelet_function(w: Wavelet, partition: Partition) -> InvariantFunction:
    return InvariantFunction(w.on_leaves(len(partition)), partition, f"{w.anchor.key}#{w.index}", w.anchor.component)


def root_functions(partition: Partition, component: int) -> List[InvariantFunction]:
    """Mean-zero combinations of the orbit roots of a component, plus its normalized constant."""
    orbits = partition.orbits_of(component)
    roots = [partition.trees[i].root for i in orbits]
    n = len(partition)
    out = []
    if len(roots) > 1:
        patterns = _patterns([r.mu for r in roots], partition.mu_total(component))
        for j in range(len(roots) - 1):
            values = np.zeros(n, dtype=complex)
            for r, value in zip(roots, patterns[:, j]):
                values[r.first_leaf:r.last_leaf] = value
            out.append(InvariantFunction(values, partition, f"c{component}.domain#{j + 1}", component))
    values = np.zeros(n, dtype=complex)
    values[partition.component_of_leaf == component] = 1 / np.sqrt(float(partition.mu_total(component)))
    out.append(InvariantFunction(values, partition, f"c{component}.constant", component))
    return out


def basis(partition: Partition) -> List[InvariantFunction]:
    """Orthonormal basis of leaf-constant functions: all wavelets plus the root functions."""
    functions = []
    for v in partition.internal_vertices():
        if len(v.children) > 1:
            functions.extend(wavelet_function(w, partition) for w in wavelets_at(v))
    for component in partition.components:
        functions.extend(root_functions(partition, component))
    logger.debug("Basis of %d functions for %d leaves", len(functions), len(partition))
    return functions


def gram_matrix(functions: Sequence[InvariantFunction]) -> np.ndarray:
    if not functions:
        return np.zeros((0, 0))
    mu = functions[0].partition.mu
    V = np.array([f.values for f in functions])
    return (V * mu) @ V.conj().T


def reconstruct(values: np.ndarray, functions: Sequence[InvariantFunction]) -> np.ndarray:
    """Expansion of a leaf function in an orthonormal family."""
    out = np.zeros(len(values), dtype=complex)
    for f in functions:
        coefficient = np.sum(values * np.conj(f.values) * f.partition.mu)
        out += coefficient * f.values
    return out
