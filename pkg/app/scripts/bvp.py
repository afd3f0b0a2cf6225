"""
Boundary Value Problems for the Invariant Heat Equation

Version: 1.0

Description:
    Regions are sets of leaves S of the partition. With L(x, y) the kernel,

        vertex boundary  dS = {x not in S : L(x, y) != 0 for some y in S}
        edge boundary    {(x, y) : x in S, y not in S, L(x, y) != 0}

    A solution satisfies the Dirichlet condition when it vanishes on dS, and the
    von Neumann condition when for every x in dS

        sum_{y in S} L(x, y) (f(y) - f(x)) mu(y) = 0.

    The Cauchy solution of u0 stays inside S exactly when u0 and every
    eigenfunction its expansion uses are supported in S; other initial data is
    reported back as UnsupportedInitialData.

Usage:
    S = Region.of([0, 1, 2], len(partition))
    result = solve_bvp(u0, S, "dirichlet", [0, 0.5, 1], dec, matrix)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, List, Sequence, Set, Tuple, Union

import numpy as np

from scripts.errors import ConfigError
from scripts.heat import SpectralDecomposition, solve_cauchy
from scripts.spectral import OperatorMatrix

logger = logging.getLogger(__name__)

CONDITIONS = ("dirichlet", "von_neumann")
COEFFICIENT_TOL = 1e-10


@dataclass(frozen=True)
class Region:
    leaves: FrozenSet[int]
    n_leaves: int

    @classmethod
    def of(cls, leaves, n_leaves: int) -> "Region":
        leaves = frozenset(int(i) for i in leaves)
        if not leaves:
            raise ConfigError("A region needs at least one leaf")
        if min(leaves) < 0 or max(leaves) >= n_leaves:
            raise ConfigError(f"Region leaves must lie in 0..{n_leaves - 1}")
        return cls(leaves, n_leaves)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_leaves, dtype=bool)
        m[list(self.leaves)] = True
        return m

    def complement(self) -> "Region":
        return Region(frozenset(range(self.n_leaves)) - self.leaves, self.n_leaves)


@dataclass
class BoundaryData:
    vertex: Set[int]
    edge: Set[Tuple[int, int]]


def vertex_boundary(S: Region, matrix: OperatorMatrix) -> Set[int]:
    M = matrix.matrix
    inside = S.mask
    coupled = (M[:, inside] != 0).any(axis=1)
    return set(np.flatnonzero(coupled & ~inside).tolist())


def edge_boundary(S: Region, matrix: OperatorMatrix) -> Set[Tuple[int, int]]:
    M = matrix.matrix
    inside = S.mask
    return {(int(x), int(y)) for x in np.flatnonzero(inside) for y in np.flatnonzero(~inside) if M[x, y] != 0}


def boundary(S: Region, matrix: OperatorMatrix) -> BoundaryData:
    return BoundaryData(vertex_boundary(S, matrix), edge_boundary(S, matrix))


def check_dirichlet(f: np.ndarray, S: Region, matrix: OperatorMatrix, tol: float = 1e-10) -> bool:
    f = np.asarray(f)
    return all(abs(f[x]) <= tol for x in vertex_boundary(S, matrix))


def check_von_neumann(f: np.ndarray, S: Region, matrix: OperatorMatrix, tol: float = 1e-8) -> bool:
    f = np.asarray(f)
    inside = S.mask
    M = matrix.matrix
    for x in vertex_boundary(S, matrix):
        flux = np.sum(M[x, inside] * (f[inside] - f[x]))
        if abs(flux) > tol:
            return False
    return True


@dataclass
class UnsupportedInitialData:
    """Initial data whose Cauchy solution is not confined to the region."""
    reason: str
    leaves_outside: List[int] = field(default_factory=list)
    functions_outside: List[str] = field(default_factory=list)


@dataclass
class BVPSolution:
    condition: str
    times: List[float]
    solutions: List[np.ndarray]
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _expansion_outside(u0: np.ndarray, S: Region, dec: SpectralDecomposition) -> List[int]:
    c = dec.coefficients(u0)
    scale = max(float(np.abs(c).max()), 1e-300)
    used = np.flatnonzero(np.abs(c) > COEFFICIENT_TOL * scale)
    outside = ~S.mask
    return [int(k) for k in used if dec.supports[outside, k].any()]


def solve_bvp(
    u0: np.ndarray,
    S: Region,
    condition: str,
    times: Sequence[float],
    decomposition: SpectralDecomposition,
    matrix: OperatorMatrix,
) -> Union[BVPSolution, UnsupportedInitialData]:
    """
    Confined solution of the heat equation on S, or UnsupportedInitialData.

    Raises:
        ConfigError: If the condition is unknown.
    """
    if condition not in CONDITIONS:
        raise ConfigError(f"Unknown boundary condition '{condition}', expected one of {CONDITIONS}")
    u0 = np.asarray(u0, dtype=float)
    outside = [int(x) for x in np.flatnonzero(u0 != 0) if x not in S.leaves]
    if outside:
        return UnsupportedInitialData("support", leaves_outside=outside)
    leaking = _expansion_outside(u0, S, decomposition)
    if leaking:
        labels = [decomposition.labels[k] if decomposition.labels else str(k) for k in leaking]
        return UnsupportedInitialData("expansion", functions_outside=labels)
    check = check_dirichlet if condition == "dirichlet" else check_von_neumann
    result = BVPSolution(condition, [float(t) for t in times], [])
    for t in times:
        u = solve_cauchy(u0, t, decomposition)
        result.solutions.append(u)
        leak = float(np.abs(u[~S.mask]).max()) if (~S.mask).any() else 0.0
        if leak > 1e-10:
            result.violations.append({"time": float(t), "check": "confinement", "value": leak})
        if not check(u, S, matrix):
            result.violations.append({"time": float(t), "check": condition, "value": None})
    if result.violations:
        logger.warning("⚠️ Boundary value problem has %d violations", len(result.violations))
    return result
