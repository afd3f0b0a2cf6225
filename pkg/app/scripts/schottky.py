"""
Schottky Groups, Reduced Words and Good Fundamental Domains

Version: 1.0

Description:
    A Schottky group of rank g is given by g hyperbolic generators. Its elements
    are freely reduced words over 2g letters:

        letter k, 0 <= k < g      -> generator k
        letter k, g <= k < 2g     -> inverse of generator k - g
        inverse letter of k       -> (k + g) mod 2g

    A good fundamental domain is the complement of 2g pairwise disjoint open
    discs D_0, ..., D_{2g-1}; generator i maps the complement of the open disc
    D_i onto the closed disc D_{i+g}. Hence a letter k maps everything outside
    D_k into D_{(k+g) mod 2g} (ping-pong), which is what the representative
    reduction and the kernel distances rely on.

    All Gamma-sums are truncated at a maximal word length and carry the
    certified geometric tail of length_series().

Usage:
    group = SchottkyGroup(3, [Mobius.from_rows([[9, 0], [8, 1]], 3)])
    words = enumerate_words(group, 3)
    series = gamma_length_series(group, 1, 4)
    report = validate_fundamental_domain(group, domain)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from scripts.errors import BudgetError, ConfigError, DivergenceError, PoleError, PoleInsideDisc, PreconditionError
from scripts.padic import (
    HYPERBOLIC,
    AbsValue,
    Disc,
    Mobius,
    Number,
    RationalLike,
    as_fraction,
    classify,
    p_power,
    vp,
)

logger = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    """Outcome of a batch of exact checks; one entry per check."""
    entries: List[dict] = field(default_factory=list)

    def add(self, check: str, ok: bool, detail: str = ""):
        self.entries.append({"check": check, "ok": bool(ok), "detail": detail})

    def extend(self, other: "ValidationReport"):
        self.entries.extend(other.entries)

    @property
    def ok(self) -> bool:
        return all(e["ok"] for e in self.entries)

    @property
    def failures(self) -> List[dict]:
        return [e for e in self.entries if not e["ok"]]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "entries": self.entries}


@dataclass(frozen=True)
class Word:
    """Freely reduced word over the 2*rank letters; the empty word is the identity."""
    letters: Tuple[int, ...]
    rank: int

    def __post_init__(self):
        letters = tuple(int(k) for k in self.letters)
        for k in letters:
            if not 0 <= k < 2 * self.rank:
                raise ValueError(f"Letter {k} outside the alphabet of rank {self.rank}")
        object.__setattr__(self, "letters", _reduce(letters, self.rank))

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls((), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def inverse(self) -> "Word":
        return Word(tuple(inverse_letter(k, self.rank) for k in reversed(self.letters)), self.rank)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters, self.rank)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return ".".join(_letter_name(k, self.rank) for k in self.letters)


def inverse_letter(k: int, rank: int) -> int:
    return (k + rank) % (2 * rank)


def _letter_name(k: int, rank: int) -> str:
    return f"g{k}" if k < rank else f"g{k - rank}^-1"


def _reduce(letters: Sequence[int], rank: int) -> Tuple[int, ...]:
    stack: List[int] = []
    for k in letters:
        if stack and stack[-1] == inverse_letter(k, rank):
            stack.pop()
        else:
            stack.append(k)
    return tuple(stack)


def word_length(w: Word) -> int:
    return len(w)


class SchottkyGroup:
    """
    Free group of hyperbolic Mobius transformations over Q_p.

    Attributes:
        prime (int): The prime p.
        generators (tuple[Mobius]): The g generators.
        rank (int): g.
    """

    def __init__(self, prime: int, generators: Sequence[Mobius]):
        self.prime = prime
        self.generators = tuple(generators)
        self.rank = len(self.generators)
        if self.rank < 1:
            raise ConfigError("A Schottky group needs at least one generator")
        for i, m in enumerate(self.generators):
            if m.prime != prime:
                raise ConfigError(f"Generator {i} is defined over p={m.prime}, expected p={prime}")
            if classify(m) != HYPERBOLIC:
                raise ConfigError(f"Generator {i} {m!r} is not hyperbolic")
        if len(set(self.generators)) != self.rank:
            raise ConfigError("Generators must be pairwise distinct")
        self._letters = self.generators + tuple(m.inverse() for m in self.generators)

    @property
    def alphabet(self) -> range:
        return range(2 * self.rank)

    def letter(self, k: int) -> Mobius:
        return self._letters[k]

    def word(self, letters: Iterable[int]) -> Word:
        return Word(tuple(letters), self.rank)

    def __repr__(self) -> str:
        return f"SchottkyGroup(p={self.prime}, rank={self.rank})"


def word_count(rank: int, length: int) -> int:
    """Number of reduced words of the given length: 2g(2g-1)^(l-1)."""
    if length == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (length - 1)


def enumerate_words(group: SchottkyGroup, max_length: int, max_words: Optional[int] = None) -> List[List[Word]]:
    """
    Breadth-first enumeration of reduced words, grouped by length 0..max_length.

    Args:
        group (SchottkyGroup): The group.
        max_length (int): Maximal word length.
        max_words (int, optional): Word budget.

    Raises:
        BudgetError: If more than max_words words would be produced.
    """
    if max_length < 0:
        raise PreconditionError(f"max_length must be >= 0, got {max_length}")
    total = sum(word_count(group.rank, l) for l in range(max_length + 1))
    if max_words is not None and total > max_words:
        raise BudgetError(
            f"{total} words up to length {max_length} exceed the budget of {max_words}; lower max_length"
        )
    rank = group.rank
    levels = [[Word.identity(rank)]]
    for _ in range(max_length):
        nxt = []
        for w in levels[-1]:
            last = w.letters[-1] if w.letters else None
            for k in group.alphabet:
                if last is not None and k == inverse_letter(last, rank):
                    continue
                nxt.append(Word(w.letters + (k,), rank))
        levels.append(nxt)
    return levels


def word_to_mobius(w: Word, group: SchottkyGroup) -> Mobius:
    m = Mobius.identity(group.prime)
    for k in w.letters:
        m = m @ group.letter(k)
    return m


def enumerate_elements(group: SchottkyGroup, max_length: int, max_words: Optional[int] = None) -> List[Tuple[Word, Mobius]]:
    """Reduced words up to max_length paired with their matrices, built incrementally."""
    out = []
    matrices = {(): Mobius.identity(group.prime)}
    for level in enumerate_words(group, max_length, max_words):
        for w in level:
            if w.letters not in matrices:
                matrices[w.letters] = matrices[w.letters[:-1]] @ group.letter(w.letters[-1])
            out.append((w, matrices[w.letters]))
    return out


def disc_image(m: Mobius, D: Disc) -> Disc:
    """
    Exact image of a closed disc under m.

    Raises:
        PoleInsideDisc: If the pole of m lies in D.
    """
    pole = m.pole
    if not pole.is_infinity and D.contains(pole.value):
        raise PoleInsideDisc(f"The pole {pole} of {m!r} lies in {D}")
    den = m.c * D.center + m.d
    stretch = -vp(m.det, m.prime) + 2 * vp(den, m.prime)
    return Disc(m(D.center), D.radius + stretch, D.prime)


def exterior_image(m: Mobius, D: Disc) -> Disc:
    """
    Image of P^1 minus the open disc of D, a closed disc centered at m(inf).

    Raises:
        PoleError: If the pole of m is not in the open disc of D.
    """
    pole = m.pole
    if pole.is_infinity or not D.contains_open(pole.value):
        raise PoleError(f"The pole {pole} of {m!r} is not inside the open disc {D}")
    radius = -vp(m.det, m.prime) + 2 * vp(m.c, m.prime) - D.radius
    return Disc(m.a / m.c, radius, D.prime)


def pairing_generator(D: Disc, D_prime: Disc, scale: RationalLike) -> Mobius:
    """
    The transformation z -> c' + s/(z - c) mapping P^1 minus the open disc D
    onto the closed disc D'.

    Raises:
        ConfigError: If |s|_p != r * r'.
    """
    s = as_fraction(scale)
    if vp(s, D.prime) != -(D.radius + D_prime.radius):
        raise ConfigError(f"|{s}|_{D.prime} must equal the product of the radii of {D} and {D_prime}")
    c, c_prime = D.center, D_prime.center
    return Mobius(c_prime, s - c_prime * c, 1, -c, D.prime)


class GoodFundamentalDomain:
    """
    Complement of 2g open discs with the pairing D_i <-> D_{i+g}.

    Attributes:
        discs (tuple[Disc]): D_0, ..., D_{2g-1}.
        rank (int): g.
    """

    def __init__(self, discs: Sequence[Disc]):
        if len(discs) % 2 or not discs:
            raise ConfigError(f"A fundamental domain needs 2g discs, got {len(discs)}")
        self.discs = tuple(discs)
        self.rank = len(discs) // 2
        self.prime = discs[0].prime

    def domain(self, letter: int) -> Disc:
        """The disc whose exterior the letter maps into region(letter)."""
        return self.discs[letter]

    def region(self, letter: int) -> Disc:
        """The closed disc containing the image of F under the letter."""
        return self.discs[inverse_letter(letter, self.rank)]

    def contains(self, x: RationalLike) -> bool:
        return not any(D.contains_open(x) for D in self.discs)

    def representative(self, x: RationalLike, group: SchottkyGroup, max_steps: int = 10_000) -> Tuple[Word, Fraction]:
        """
        Reduces x into F by ping-pong.

        Returns:
            (w, y): y lies in F and x = w(y).

        Raises:
            PreconditionError: If x does not reach F (limit point of the group).
        """
        x = as_fraction(x)
        letters: List[int] = []
        for _ in range(max_steps):
            k = next((i for i, D in enumerate(self.discs) if D.contains_open(x)), None)
            if k is None:
                return group.word(letters), x
            try:
                x = group.letter(k)(x)
            except PoleError as e:
                raise PreconditionError(f"Representative reduction hit infinity: {e}") from e
            letters.append(inverse_letter(k, self.rank))
        raise PreconditionError(f"{x} did not reach the fundamental domain in {max_steps} steps")


def validate_fundamental_domain(group: SchottkyGroup, F: GoodFundamentalDomain) -> ValidationReport:
    """Exact disjointness and pairing checks; failures are report entries."""
    report = ValidationReport()
    report.add("rank", F.rank == group.rank, f"{len(F.discs)} discs for rank {group.rank}")
    if F.rank != group.rank:
        return report
    for i, Di in enumerate(F.discs):
        for j in range(i + 1, len(F.discs)):
            ok = Di.disjoint(F.discs[j])
            report.add(f"disjoint D{i} D{j}", ok, "" if ok else f"{Di} meets {F.discs[j]}")
    for i, m in enumerate(group.generators):
        source, target = F.discs[i], F.discs[i + group.rank]
        try:
            image = exterior_image(m, source)
        except PoleError as e:
            report.add(f"pairing generator {i}", False, str(e))
            continue
        ok = image.same_as(target)
        report.add(f"pairing generator {i}", ok, f"exterior of {source} -> {image}, expected {target}")
    return report


@dataclass(frozen=True)
class LengthSeries:
    """
    Truncated length-weighted series over a free group of rank g.

    Attributes:
        truncated: sum over l(gamma) <= max_length of p^(-s l(gamma)).
        tail: certified remainder over l(gamma) > max_length (sharp count).
        closed_form: the full sum.
        crude_tail: remainder using the cruder (2g)^l count, inf if that diverges.
        crude_condition: whether p^s > 2g holds.
    """
    truncated: Number
    tail: Number
    closed_form: Number
    crude_tail: Number
    crude_condition: bool


def _ratio(prime: int, s: RationalLike) -> Number:
    return p_power(prime, -as_fraction(s))


def series_tail(rank: int, prime: int, s: RationalLike, length: int) -> Number:
    """Sum over reduced words of length > `length` of p^(-s l); length < 0 gives the full sum."""
    x = _ratio(prime, s)
    k = 2 * rank - 1
    if k * x >= 1:
        raise DivergenceError(f"(2g-1) p^(-s) = {k * x} >= 1 for g={rank}, p={prime}, s={s}")
    if length < 0:
        return 1 + 2 * rank * x / (1 - k * x)
    return 2 * rank * x ** (length + 1) * k ** length / (1 - k * x)


def length_series(rank: int, prime: int, s: RationalLike, max_length: int) -> LengthSeries:
    """
    Raises:
        DivergenceError: If (2g-1) p^(-s) >= 1.
    """
    if as_fraction(s) <= 0:
        raise PreconditionError(f"The exponent must be positive, got {s}")
    x = _ratio(prime, s)
    k = 2 * rank - 1
    tail = series_tail(rank, prime, s, max_length)
    closed = series_tail(rank, prime, s, -1)
    truncated = 1 + sum(2 * rank * k ** (l - 1) * x ** l for l in range(1, max_length + 1))
    crude_condition = 2 * rank * x < 1
    crude_tail = (2 * rank * x) ** (max_length + 1) / (1 - 2 * rank * x) if crude_condition else math.inf
    if not crude_condition:
        logger.warning(
            "⚠️ p^s = %s does not exceed 2g = %d; the series still converges since (2g-1)p^-s = %s < 1",
            p_power(prime, as_fraction(s)), 2 * rank, k * x,
        )
    return LengthSeries(truncated, tail, closed, crude_tail, crude_condition)


def gamma_length_series(group: SchottkyGroup, s: RationalLike, max_length: int) -> LengthSeries:
    return length_series(group.rank, group.prime, s, max_length)


def distance_lower_bound(roots: Sequence[Disc], F: GoodFundamentalDomain) -> AbsValue:
    """Smallest distance between an orbit root and a paired disc; bounds |x - gamma y| from below."""
    return min(R.distance_to(D) for R in roots for D in F.discs)
