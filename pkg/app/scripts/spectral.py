"""
Invariant Laplacians and their Wavelet Spectra

Version: 1.0

Description:
    Operators on the leaf-constant invariant functions of N components.

    Within component i the kernel between x in F_i and y in F_i is

        K(x, y) = mu(F_i)^-1 * sum_{delta} p^(-alpha l(delta)) |x - delta y|^(-alpha)

    where delta runs over the reduced words of length <= max_length (or their
    conjugates by the configured shift word), |x - y| is the tree distance for
    delta = e, and for delta != e the translate distance is constant on pairs of
    orbit roots (ping-pong). The translate part is symmetrized in (x, y).
    Across components the kernel is the constant w_ij S_i S_j with
    S_i = sum_{gamma in Gamma_i} p^(-alpha_Z l(gamma)) in closed form.

    The generator matrix is M[A][B] = K(A, B) mu(B) with zero row sums.
    Its eigenfunctions are the wavelets (eigenvalue lambda_A + lambda_i) and the
    eigenvectors of the root block (functions constant on every orbit root).

Usage:
    lap = ShimuraLaplacian([tate], CouplingConfig.uncoupled(1), depth=2, max_length=2)
    entries = lap.spectrum()
    matrix = lap.assemble()
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from scripts.errors import ConfigError, PreconditionError, XDependenceError
from scripts.padic import AbsValue, Disc, Mobius, Number, RationalLike, as_fraction, p_power
from scripts.schottky import (
    GoodFundamentalDomain,
    SchottkyGroup,
    Word,
    disc_image,
    distance_lower_bound,
    enumerate_elements,
    length_series,
    series_tail,
    validate_fundamental_domain,
    word_to_mobius,
)
from scripts.ultrametric import BranchLevel, OmegaForm, Partition, Vertex, build_partition, translate_distance
from scripts.wavelets import InvariantFunction, wavelet_function, wavelets_at

logger = logging.getLogger(__name__)

INTEGRATION_MODES = ("full_domain", "displayed")
ZUNIGA_EXPONENTS = ("proof", "statement")


@dataclass
class ComponentConfig:
    """
    One Mumford-curve component: group, fundamental domain, orbits, form and alpha.

    Raises:
        ConfigError: If the fundamental domain fails validation.
        DivergenceError: If (2g-1) p^(-alpha) >= 1.
    """
    index: int
    group: SchottkyGroup
    domain: GoodFundamentalDomain
    orbits: List[Disc]
    alpha: Fraction
    omega: Optional[OmegaForm] = None
    branching: Optional[List[BranchLevel]] = None
    normalization: str = "diameter"
    shift: Tuple[int, ...] = ()
    _partitions: Dict[int, Partition] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.alpha = as_fraction(self.alpha)
        if self.alpha <= 0:
            raise ConfigError(f"Component {self.index}: alpha must be positive")
        self.omega = self.omega or OmegaForm.dx(self.prime)
        report = validate_fundamental_domain(self.group, self.domain)
        if not report.ok:
            details = "; ".join(f"{e['check']}: {e['detail']}" for e in report.failures)
            raise ConfigError(f"Component {self.index}: invalid fundamental domain ({details})")
        self.shift = tuple(self.shift)
        self.shift_word = self.group.word(self.shift)
        self.series = length_series(self.group.rank, self.prime, self.alpha, 0)

    @property
    def prime(self) -> int:
        return self.group.prime

    @property
    def rank(self) -> int:
        return self.group.rank

    def build_partition(self, depth: int) -> Partition:
        return build_partition(
            self.orbits, depth, self.branching, self.normalization, self.omega, self.index, self.domain
        )

    def partition(self, depth: int) -> Partition:
        """Cached partition of this component alone; operators build their own copy."""
        if depth not in self._partitions:
            self._partitions[depth] = self.build_partition(depth)
        return self._partitions[depth]

    def mu_total(self, depth: int = 0) -> Number:
        return self.partition(depth).mu_total()

    def words(self, max_length: int, max_words: Optional[int] = None) -> List[Tuple[Word, Mobius]]:
        """Translates summed over: reduced words, or their conjugates by the shift word."""
        elements = enumerate_elements(self.group, max_length, max_words)
        if not self.shift:
            return elements
        g0, g0_inv = word_to_mobius(self.shift_word, self.group), word_to_mobius(self.shift_word.inverse(), self.group)
        return [(self.shift_word.inverse() * w * self.shift_word, g0_inv @ m @ g0) for w, m in elements]

    def tail(self, max_length: int) -> float:
        """Certified bound on the omitted part of a translate sum, per unit of mass."""
        effective = max_length - 2 * len(self.shift_word)
        floor = distance_lower_bound(self.orbits, self.domain)
        return float(series_tail(self.rank, self.prime, self.alpha, effective)) * float(floor ** (-self.alpha))


@dataclass
class CouplingConfig:
    """Symmetric nonnegative weights between components and the exponent alpha_Z."""
    weights: List[List[Fraction]]
    alpha_z: Fraction = Fraction(1)
    exponent: str = "proof"

    def __post_init__(self):
        self.weights = [[as_fraction(w) for w in row] for row in self.weights]
        self.alpha_z = as_fraction(self.alpha_z)
        n = len(self.weights)
        if any(len(row) != n for row in self.weights):
            raise ConfigError("The weight matrix must be square")
        for i in range(n):
            for j in range(n):
                if self.weights[i][j] != self.weights[j][i]:
                    raise ConfigError(f"Weights are not symmetric: w[{i}][{j}] != w[{j}][{i}]")
                if self.weights[i][j] < 0:
                    raise ConfigError(f"Weight w[{i}][{j}] is negative")
        if self.alpha_z <= 0:
            raise ConfigError("alpha_Z must be positive")
        if self.exponent not in ZUNIGA_EXPONENTS:
            raise ConfigError(f"Unknown exponent mode '{self.exponent}', expected one of {ZUNIGA_EXPONENTS}")

    @classmethod
    def uncoupled(cls, n: int) -> "CouplingConfig":
        return cls([[0] * n for _ in range(n)])

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass
class SpectrumEntry:
    component: int
    anchor_id: str
    depth: int
    eigenvalue: float
    multiplicity: int
    tail_bound: float
    functions: List[InvariantFunction] = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {
            "component": self.component,
            "anchor_id": self.anchor_id,
            "depth": self.depth,
            "eigenvalue": self.eigenvalue,
            "multiplicity": self.multiplicity,
            "tail_bound": self.tail_bound,
        }


@dataclass
class OperatorMatrix:
    """Generator matrix over the global leaf partition, rows summing to zero."""
    matrix: np.ndarray
    mu: np.ndarray
    partition: Partition

    def __len__(self) -> int:
        return len(self.mu)

    def check(self, tol: float = 1e-12) -> dict:
        M = self.matrix
        off = M - np.diag(np.diag(M))
        balance = self.mu[:, None] * M
        scale = max(1.0, float(np.abs(M).max()))
        return {
            "row_sums": bool(np.abs(M.sum(axis=1)).max() <= tol * scale),
            "off_diagonal_nonnegative": bool(off.min() >= 0),
            "detailed_balance": bool(np.abs(balance - balance.T).max() <= tol * scale),
        }


def zuniga_sums(components: Sequence[ComponentConfig], coupling: CouplingConfig) -> List[Number]:
    """S_i = closed form of sum over Gamma_i of p^(-s l(gamma)), s = alpha_Z or 1."""
    s = coupling.alpha_z if coupling.exponent == "proof" else Fraction(1)
    return [length_series(c.rank, c.prime, s, 0).closed_form for c in components]


def eigenvalue_Z(i0: int, components: Sequence[ComponentConfig], coupling: CouplingConfig, max_length: int = 0) -> Tuple[Number, float]:
    """
    lambda_i0 = -sum_j w_i0j S_i0 S_j mu(F_j); exact when every exponent is integral.

    The sums are taken in closed form, so the tail bound is zero.
    """
    S = zuniga_sums(components, coupling)
    total = Fraction(0)
    for j, comp in enumerate(components):
        if j != i0 and coupling.weights[i0][j]:
            total += coupling.weights[i0][j] * S[i0] * S[j] * comp.mu_total()
    return -total, 0.0


class ShimuraLaplacian:
    """
    The combined operator on all components at a fixed depth and word length.

    Args:
        components (list[ComponentConfig]): Indexed 0..N-1.
        coupling (CouplingConfig): N x N weights.
        depth (int): Leaf depth D.
        max_length (int): Word length L_max of the translate sums.
        max_words (int, optional): Word budget per component.
        integration (str): "full_domain" (default) or "displayed" eigenvalue formula.
            "full_domain" integrates the translate sums over every orbit root of F,
            which keeps lambda_A equal to the eigenvalue of the assembled matrix;
            "displayed" weights the translated copies of A by the self term
            mu(A)^(1 - alpha). Both agree when max_length is 0.
        threads (int): Worker threads for per-anchor eigenvalues.
    """

    def __init__(
        self,
        components: Sequence[ComponentConfig],
        coupling: CouplingConfig,
        depth: int,
        max_length: int,
        max_words: Optional[int] = None,
        integration: str = "full_domain",
        threads: int = 1,
    ):
        if [c.index for c in components] != list(range(len(components))):
            raise ConfigError("Components must be indexed 0..N-1 in order")
        if coupling.n != len(components):
            raise ConfigError(f"{coupling.n} x {coupling.n} weights for {len(components)} components")
        if integration not in INTEGRATION_MODES:
            raise ConfigError(f"Unknown integration mode '{integration}', expected one of {INTEGRATION_MODES}")
        if len({c.prime for c in components}) != 1:
            raise ConfigError("All components must share the prime p")
        self.components = list(components)
        self.coupling = coupling
        self.depth = depth
        self.max_length = max_length
        self.integration = integration
        self.threads = max(1, threads)
        self.prime = components[0].prime
        self.S = zuniga_sums(components, coupling)
        self.partition = Partition.merge([c.build_partition(depth) for c in components])
        self.mu_F = [c.mu_total(depth) for c in components]
        self._words = [c.words(max_length, max_words) for c in components]
        self._tails = [c.tail(max_length) for c in components]
        self._translate = self._translate_sums()
        self._distance_power = self._distance_powers()
        logger.info(
            "🔄 Operator on %d leaves, %d components, depth %d, L_max %d", len(self.partition), len(components), depth, max_length
        )

    def _raw_translate(self, comp: ComponentConfig, a: Vertex, b: Vertex) -> float:
        total = 0.0
        alpha = comp.alpha
        for w, m in self._words[comp.index]:
            if not len(w):
                continue
            image = disc_image(m, b.disc)
            if not image.disjoint(a.disc):
                raise PreconditionError(f"The translate {w} of {b.key} meets {a.key}; choose orbit roots inside F")
            d = AbsValue.of(a.disc.center - image.center, self.prime)
            total += float(AbsValue(self.prime, -alpha * len(w)) * d ** (-alpha))
        return total

    def _translate_sums(self) -> Dict[Tuple[int, int], float]:
        """Symmetrized sum over delta != e of p^(-alpha l) |x - delta y|^(-alpha), per pair of orbit roots."""
        out = {}
        for comp in self.components:
            roots = [self.partition.trees[o].root for o in self.partition.orbits_of(comp.index)]
            raw = {(a.orbit, b.orbit): self._raw_translate(comp, a, b) for a in roots for b in roots}
            for (i, j), value in raw.items():
                out[(i, j)] = 0.5 * (value + raw[(j, i)])
        return out

    def _distance_powers(self) -> np.ndarray:
        """d(A, B)^(-alpha) inside each component for delta = e; zero on the diagonal and across components."""
        n = len(self.partition)
        out = np.zeros((n, n))
        trees = self.partition.trees
        for a, ta in enumerate(trees):
            alpha = float(self.components[ta.root.component].alpha)
            ra = ta.root.leaf_range
            for b, tb in enumerate(trees):
                if tb.root.component != ta.root.component:
                    continue
                rb = tb.root.leaf_range
                if a == b:
                    block = float(self.prime) ** (-alpha * ta.join_radius_matrix())
                    np.fill_diagonal(block, 0.0)
                else:
                    d = float(ta.root.disc.distance_to(tb.root.disc))
                    block = np.full((len(ra), len(rb)), d ** (-alpha))
                out[ra.start:ra.stop, rb.start:rb.stop] = block
        return out

    def kernel_matrix(self) -> np.ndarray:
        """K(A, B) for A != B; the diagonal is zero."""
        part = self.partition
        n = len(part)
        K = np.zeros((n, n))
        trees = part.trees
        for a, ta in enumerate(trees):
            ia = ta.root.component
            ra = ta.root.leaf_range
            for b, tb in enumerate(trees):
                ib = tb.root.component
                rb = tb.root.leaf_range
                if ia == ib:
                    block = (self._distance_power[ra.start:ra.stop, rb.start:rb.stop] + self._translate[(a, b)]) / float(self.mu_F[ia])
                else:
                    block = np.full((len(ra), len(rb)), float(self.coupling.weights[ia][ib] * self.S[ia] * self.S[ib]))
                K[ra.start:ra.stop, rb.start:rb.stop] = block
        np.fill_diagonal(K, 0.0)
        return K

    def assemble(self) -> OperatorMatrix:
        K = self.kernel_matrix()
        M = K * self.partition.mu[None, :]
        np.fill_diagonal(M, -M.sum(axis=1))
        return OperatorMatrix(M, self.partition.mu.copy(), self.partition)

    def _delta_part(self, anchor: Vertex, leaf_index: int) -> float:
        comp = self.components[anchor.component]
        alpha = float(comp.alpha)
        part = self.partition
        mu = part.mu
        inside = anchor.leaf_range
        row = self._distance_power[leaf_index] * mu
        outside = row.sum() - row[inside.start:inside.stop].sum()
        mu_A = float(anchor.mu)
        orbit = part.orbit_of_leaf[leaf_index]
        translates = sum(self._translate[(orbit, b)] * float(part.trees[b].root.mu) for b in part.orbits_of(comp.index))
        if self.integration == "full_domain":
            total = outside + float(anchor.disc.diameter ** (-comp.alpha)) * mu_A + translates
        else:
            self_term = mu_A ** (1 - alpha)
            weight = sum(float(AbsValue(self.prime, -comp.alpha * len(w))) for w, _ in self._words[comp.index] if len(w))
            total = outside + self_term + translates - self._translate[(orbit, orbit)] * mu_A + weight * self_term
        return -total / float(self.mu_F[anchor.component])

    def eigenvalue_delta(self, anchor: Vertex) -> Tuple[float, float]:
        """
        lambda_A for the wavelets anchored at a vertex, with its truncation bound.

        Raises:
            XDependenceError: If two sample points of A give different values.
        """
        if anchor.is_leaf:
            raise PreconditionError(f"{anchor.key} is a leaf; wavelets live on internal vertices")
        first = anchor.children[0].first_leaf
        last = anchor.children[-1].first_leaf
        value = self._delta_part(anchor, first)
        other = self._delta_part(anchor, last)
        if not math.isclose(value, other, rel_tol=1e-10, abs_tol=1e-12):
            raise XDependenceError(f"lambda at {anchor.key} differs between sample points: {value} vs {other}")
        return value, self._tails[anchor.component]

    def eigenvalue_Z(self, i0: int) -> float:
        return float(eigenvalue_Z(i0, self.components, self.coupling)[0])

    def _wavelet_entry(self, anchor: Vertex) -> SpectrumEntry:
        lam, tail = self.eigenvalue_delta(anchor)
        functions = [wavelet_function(w, self.partition) for w in wavelets_at(anchor)]
        return SpectrumEntry(
            anchor.component, anchor.key, anchor.depth, lam + self.eigenvalue_Z(anchor.component),
            len(functions), tail, functions,
        )

    def root_block(self) -> List[SpectrumEntry]:
        """Eigenpairs of the operator restricted to functions constant on every orbit root."""
        part = self.partition
        roots = part.roots
        n = len(roots)
        Q = np.zeros((n, n))
        for a, ra in enumerate(roots):
            for b, rb in enumerate(roots):
                if a == b:
                    continue
                if ra.component == rb.component:
                    alpha = self.components[ra.component].alpha
                    d = float(ra.disc.distance_to(rb.disc) ** (-alpha))
                    k = (d + self._translate[(a, b)]) / float(self.mu_F[ra.component])
                else:
                    k = float(self.coupling.weights[ra.component][rb.component] * self.S[ra.component] * self.S[rb.component])
                Q[a, b] = k * float(rb.mu)
        np.fill_diagonal(Q, -Q.sum(axis=1))
        mu = np.array([float(r.mu) for r in roots])
        n_groups, labels = connected_components(csr_matrix(Q - np.diag(np.diag(Q)) > 0), directed=False)
        entries = []
        for g in range(n_groups):
            members = np.flatnonzero(labels == g)
            sub = Q[np.ix_(members, members)]
            s = np.sqrt(mu[members])
            sym = s[:, None] * sub / s[None, :]
            values, vectors = np.linalg.eigh(0.5 * (sym + sym.T))
            tail = max(self._tails[roots[m].component] for m in members)
            first_component = min(roots[m].component for m in members)
            for k in range(len(members)):
                phi = vectors[:, k] / s
                leaf_values = np.zeros(len(part), dtype=complex)
                for m, value in zip(members, phi):
                    leaf_values[roots[m].first_leaf:roots[m].last_leaf] = value
                f = InvariantFunction(leaf_values, part, f"root-block{g}#{k}", first_component)
                entries.append(SpectrumEntry(first_component, f"root-block{g}#{k}", -1, min(float(values[k]), 0.0), 1, tail, [f]))
        return entries

    def spectrum(self) -> List[SpectrumEntry]:
        anchors = [v for v in self.partition.internal_vertices() if len(v.children) > 1]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            entries = list(pool.map(self._wavelet_entry, anchors))
        entries.extend(self.root_block())
        entries.sort(key=lambda e: -e.eigenvalue)
        return entries

    def dirichlet_form(self, u: np.ndarray, v: np.ndarray) -> float:
        """E(u, v) = 1/2 sum_{A,B} K(A,B) mu_A mu_B (u_A - u_B) conj(v_A - v_B)."""
        mu = self.partition.mu
        W = self.kernel_matrix() * mu[:, None] * mu[None, :]
        L = np.diag(W.sum(axis=1)) - W
        return float(np.real(np.conj(v) @ L @ u))


def kernel_H(x: RationalLike, beta: Word, y: RationalLike, gamma: Word, comp: ComponentConfig) -> Number:
    """
    mu(F)^-1 p^(-alpha l(beta^-1 gamma)) |beta x - gamma y|^(-alpha), exact when the exponents are integral.

    |beta x - gamma y| is read as |x - beta^-1 gamma y|, which changes when the two
    pairs swap, so the kernel averages both orders like the assembled operator does.

    Raises:
        ZeroDistance: If beta x = gamma y.
    """
    weight = AbsValue(comp.prime, -comp.alpha * len(beta.inverse() * gamma))
    forward = translate_distance(beta, x, gamma, y, comp.group)
    backward = translate_distance(gamma, y, beta, x, comp.group)
    total = (weight * forward ** (-comp.alpha)).value() + (weight * backward ** (-comp.alpha)).value()
    return total / 2 / comp.mu_total()


def eigenvalue_delta(A: Vertex, comp: ComponentConfig, max_length: int, depth: int, integration: str = "full_domain") -> Tuple[float, float]:
    """lambda_A of a single component at the given depth and word length."""
    single = ComponentConfig(0, comp.group, comp.domain, comp.orbits, comp.alpha, comp.omega, comp.branching, comp.normalization, comp.shift)
    lap = ShimuraLaplacian([single], CouplingConfig.uncoupled(1), depth, max_length, integration=integration)
    target = next(v for v in lap.partition.internal_vertices() if v.path == A.path and v.disc == A.disc)
    return lap.eigenvalue_delta(target)


def full_spectrum(components, coupling, depth: int, max_length: int, **kwargs) -> List[SpectrumEntry]:
    return ShimuraLaplacian(components, coupling, depth, max_length, **kwargs).spectrum()


def assemble_matrix(components, coupling, depth: int, max_length: int, **kwargs) -> OperatorMatrix:
    return ShimuraLaplacian(components, coupling, depth, max_length, **kwargs).assemble()


def dirichlet_form(u: np.ndarray, v: np.ndarray, components, coupling, depth: int, max_length: int) -> float:
    return ShimuraLaplacian(components, coupling, depth, max_length).dirichlet_form(u, v)


def aggregate_multiplicities(entries: Sequence[SpectrumEntry], rel_tol: float = 1e-12) -> List[SpectrumEntry]:
    """Merges entries of one component whose eigenvalues agree to rel_tol."""
    merged: List[SpectrumEntry] = []
    for e in sorted(entries, key=lambda e: (e.component, -e.eigenvalue)):
        last = merged[-1] if merged else None
        if last and last.component == e.component and math.isclose(last.eigenvalue, e.eigenvalue, rel_tol=rel_tol, abs_tol=1e-300):
            last.multiplicity += e.multiplicity
            last.tail_bound = max(last.tail_bound, e.tail_bound)
            last.functions = last.functions + e.functions
            last.anchor_id = "aggregate"
            if last.depth != e.depth:
                last.depth = -1
        else:
            merged.append(SpectrumEntry(e.component, e.anchor_id, e.depth, e.eigenvalue, e.multiplicity, e.tail_bound, list(e.functions)))
    merged.sort(key=lambda e: -e.eigenvalue)
    return merged


def largest_nonzero(entries: Sequence[SpectrumEntry], tol: float = 1e-12) -> Optional[float]:
    values = [e.eigenvalue for e in entries if e.eigenvalue < -tol]
    return max(values) if values else None
