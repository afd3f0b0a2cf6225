"""
Heat Semigroup, Heat Kernel and Jump-Path Sampler

Version: 1.0

Description:
    Everything here works from a SpectralDecomposition: eigenvalues lambda_k <= 0
    and mu-orthonormal eigenfunctions phi_k over the leaf partition.

        u(t)        = sum_k e^(lambda_k t) <u0, phi_k> phi_k
        P(t)[A][B]  = sum_k e^(lambda_k t) phi_k(A) conj(phi_k(B)) mu_B
        p(t, x, y)  = P(t)[x][y] / mu_y

    A decomposition is obtained either by eigensolving the assembled operator
    (from_operator) or from the analytic wavelet spectrum (from_spectrum). Only
    the latter knows the exact supports of the eigenfunctions, which the heat
    kernel and the boundary value problems rely on.

    Paths of the jump process are simulated with the embedded chain: exponential
    holding times with rate -M[A][A], jumps distributed as M[A][B] / (-M[A][A]).
    Path i of a run with seed s draws from numpy.random.default_rng([s, i]).

Usage:
    dec = SpectralDecomposition.from_spectrum(lap.spectrum(), lap.partition)
    u = solve_cauchy(u0, 0.5, dec)
    P = transition_matrix(1.0, lap.assemble())
    paths = sample_paths(0, 1.0, seed=7, n_paths=100, matrix=lap.assemble())
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from scripts.errors import AbsorbingState, NegativeTime, PreconditionError
from scripts.spectral import OperatorMatrix, SpectrumEntry
from scripts.ultrametric import Partition

logger = logging.getLogger(__name__)

SUPPORT_TOL = 1e-10


def _check_time(t: float):
    if t < 0:
        raise NegativeTime(f"Time must be nonnegative, got {t}")


@dataclass
class SpectralDecomposition:
    """
    Eigenpairs spanning the leaf-constant functions.

    Attributes:
        eigenvalues (np.ndarray): lambda_k, shape (K,).
        vectors (np.ndarray): phi_k as columns, shape (n, K).
        mu (np.ndarray): Leaf masses, shape (n,).
        supports (np.ndarray): supports[A, k] is True iff phi_k(A) != 0.
        levels (np.ndarray): Anchor depth of phi_k; -1 for root-block functions.
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray
    mu: np.ndarray
    supports: np.ndarray
    levels: np.ndarray
    labels: List[str] = field(default_factory=list)

    @classmethod
    def from_operator(cls, matrix: OperatorMatrix) -> "SpectralDecomposition":
        s = np.sqrt(matrix.mu)
        sym = s[:, None] * matrix.matrix / s[None, :]
        values, U = np.linalg.eigh(0.5 * (sym + sym.T))
        phi = U / s[:, None]
        scale = np.abs(phi).max(axis=0, keepdims=True)
        supports = np.abs(phi) > SUPPORT_TOL * scale
        return cls(np.minimum(values, 0.0), phi, matrix.mu.copy(), supports, np.full(len(values), -1))

    @classmethod
    def from_spectrum(cls, entries: Sequence[SpectrumEntry], partition: Partition) -> "SpectralDecomposition":
        values, columns, levels, labels = [], [], [], []
        for e in entries:
            for f in e.functions:
                values.append(e.eigenvalue)
                columns.append(f.values)
                levels.append(e.depth)
                labels.append(f.label)
        vectors = np.array(columns).T
        if vectors.shape != (len(partition), len(partition)):
            raise PreconditionError(f"{vectors.shape[1]} eigenfunctions for {len(partition)} leaves")
        return cls(np.array(values), vectors, partition.mu.copy(), vectors != 0, np.array(levels), labels)

    def coefficients(self, u0: np.ndarray) -> np.ndarray:
        return (np.asarray(u0) * self.mu) @ self.vectors.conj()

    def evolve(self, u0: np.ndarray, t: float) -> np.ndarray:
        c = self.coefficients(u0) * np.exp(self.eigenvalues * t)
        return np.real(self.vectors @ c)

    def transition(self, t: float) -> np.ndarray:
        weighted = self.vectors * np.exp(self.eigenvalues * t)[None, :]
        return np.real(weighted @ (self.vectors.conj().T * self.mu[None, :]))

    def reconstruction_residual(self) -> float:
        """Max deviation of V^H diag(mu) V from the identity."""
        G = (self.vectors.conj().T * self.mu[None, :]) @ self.vectors
        return float(np.abs(G - np.eye(G.shape[0])).max())


def solve_cauchy(u0: np.ndarray, t: float, decomposition: SpectralDecomposition) -> np.ndarray:
    """
    Solution of du/dt = L u with u(0) = u0.

    Raises:
        NegativeTime: If t < 0.
    """
    _check_time(t)
    u0 = np.asarray(u0, dtype=float)
    if t == 0:
        return u0.copy()
    return decomposition.evolve(u0, t)


@dataclass
class TransitionKernel:
    t: float
    matrix: np.ndarray
    mu: np.ndarray

    def check(self, tol: float = 1e-8) -> dict:
        P = self.matrix
        balance = self.mu[:, None] * P
        return {
            "row_sums": bool(np.abs(P.sum(axis=1) - 1).max() <= tol),
            "nonnegative": bool(P.min() >= 0),
            "detailed_balance": bool(np.abs(balance - balance.T).max() <= tol),
        }


def transition_matrix(t: float, matrix: OperatorMatrix, decomposition: Optional[SpectralDecomposition] = None) -> TransitionKernel:
    """
    P(t) = exp(t M) through the symmetrized eigendecomposition of M.

    Raises:
        NegativeTime: If t < 0.
    """
    _check_time(t)
    if t == 0:
        return TransitionKernel(0.0, np.eye(len(matrix)), matrix.mu.copy())
    dec = decomposition or SpectralDecomposition.from_operator(matrix)
    P = dec.transition(t)
    lowest = P.min()
    if lowest < -1e-10:
        logger.warning("⚠️ Clipping transition probabilities down to %.3e at t=%s", lowest, t)
    np.clip(P, 0.0, None, out=P)
    return TransitionKernel(float(t), P, matrix.mu.copy())


@dataclass
class HeatKernelValue:
    """
    Attributes:
        value (float): Sum of all available terms.
        converged (bool): False when the per-level terms still grow.
        level_terms (dict): Contribution of each anchor depth (-1: root block).
        partial_sums (list): Cumulative sums over the levels in increasing depth.
        threshold (float, optional): Estimated time above which the last levels decrease.
    """
    value: float
    converged: bool = True
    level_terms: Dict[int, float] = field(default_factory=dict)
    partial_sums: List[float] = field(default_factory=list)
    threshold: Optional[float] = None


def _level_log_terms(t: float, x: int, dec: SpectralDecomposition) -> Dict[int, float]:
    """log of the per-level diagonal contributions; stays finite where exp underflows."""
    ks = np.flatnonzero(dec.supports[x])
    levels = dec.levels[ks].astype(int)
    with np.errstate(divide="ignore"):
        exponents = np.real(dec.eigenvalues[ks]) * t + np.log(np.abs(dec.vectors[x, ks]) ** 2)
    return {int(lv): float(logsumexp(exponents[levels == lv])) for lv in sorted(set(levels.tolist()))}


def _threshold(x: int, dec: SpectralDecomposition, last: int, previous: int) -> Optional[float]:
    def gap(t: float) -> float:
        logs = _level_log_terms(t, x, dec)
        return logs[last] - logs[previous]

    lo, hi = 1e-12, 1.0
    if gap(lo) <= 0:
        return 0.0
    while gap(hi) > 0:
        hi *= 2
        if hi > 1e6:
            return None
    return float(brentq(gap, lo, hi))


def heat_kernel(t: float, x: int, y: int, decomposition: SpectralDecomposition) -> HeatKernelValue:
    """
    Density p(t, x, y) of the transition measure with respect to mu.

    Off the diagonal only eigenfunctions supported at both leaves contribute. On
    the diagonal the per-level contributions are returned; the value counts as
    converged when the deepest level contributes strictly less than the one above,
    compared in log space so that large times do not underflow to a tie.
    """
    _check_time(t)
    dec = decomposition
    if x != y:
        mask = dec.supports[x] & dec.supports[y]
        terms = np.exp(dec.eigenvalues[mask] * t) * dec.vectors[x, mask] * np.conj(dec.vectors[y, mask])
        return HeatKernelValue(float(np.real(terms.sum())) if mask.any() else 0.0)
    logs = _level_log_terms(t, x, dec)
    terms = {lv: math.exp(v) for lv, v in logs.items()}
    partial = list(np.cumsum(list(terms.values())))
    depths = [d for d in terms if d >= 0]
    converged, threshold = True, None
    if len(depths) >= 2:
        last, previous = depths[-1], depths[-2]
        converged = logs[last] < logs[previous]
        threshold = _threshold(x, dec, last, previous)
    return HeatKernelValue(float(partial[-1]) if partial else 0.0, converged, terms, [float(s) for s in partial], threshold)


@dataclass
class PathSample:
    """
    Right-continuous step path: state `states[i]` holds on [times[i], times[i+1]).

    times[0] is 0 and states[0] is the initial leaf.
    """
    seed: int
    path_index: int
    horizon: float
    times: List[float]
    states: List[int]

    @property
    def jumps(self) -> int:
        return len(self.times) - 1

    def state_at(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return self.states[max(i, 0)]


def sample_path(x0: int, T: float, seed: int, matrix: OperatorMatrix, path_index: int = 0) -> PathSample:
    """
    Embedded-chain simulation on [0, T].

    Raises:
        AbsorbingState: If the path reaches a leaf with zero jump rate.
    """
    if T <= 0:
        raise PreconditionError(f"The horizon must be positive, got {T}")
    rng = np.random.default_rng([seed, path_index])
    M = matrix.matrix
    times, states = [0.0], [int(x0)]
    t, state = 0.0, int(x0)
    while True:
        rate = -M[state, state]
        if rate <= 0:
            raise AbsorbingState(f"Leaf {state} has zero jump rate")
        t += rng.exponential(1.0 / rate)
        if t > T:
            break
        weights = np.clip(M[state], 0.0, None)
        weights[state] = 0.0
        cdf = np.cumsum(weights)
        state = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        times.append(float(t))
        states.append(state)
    return PathSample(seed, path_index, float(T), times, states)


def sample_paths(x0: int, T: float, seed: int, n_paths: int, matrix: OperatorMatrix, threads: int = 1) -> List[PathSample]:
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda i: sample_path(x0, T, seed, matrix, i), range(n_paths)))


def empirical_law(paths: Sequence[PathSample], t: float, n_states: int) -> np.ndarray:
    counts = np.zeros(n_states)
    for path in paths:
        counts[path.state_at(t)] += 1
    return counts / max(len(paths), 1)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
