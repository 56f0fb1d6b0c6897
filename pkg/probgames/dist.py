"""Finite-support distributions with exact rational weights.

Provides the distribution monad (eta, dmap, join, kleisli), the double
strength ``ell`` forming independent joints, and convex algebras that
carry an expectation operator for payoff values.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Tuple
import random

from probgames.errors import NegativeWeight, NotNormalized
from probgames.utils import UNIT, format_fraction, format_value, sort_canonical


@total_ordering
class Dist(Mapping):
    """Immutable distribution whose keys are exactly its support.

    Instances are canonical: support sorted, duplicates merged and zero
    weights dropped, so structural equality is mathematical equality.
    Build them with :func:`dist_new` or the monad operations.
    """

    __slots__ = ("_items", "_weights")

    def __init__(self, weights: Dict[Any, Fraction]):
        kept = {elem: Fraction(w) for elem, w in weights.items() if w != 0}
        order = sort_canonical(list(kept))
        self._items = tuple((elem, kept[elem]) for elem in order)
        self._weights = kept

    def __getitem__(self, elem):
        return self._weights[elem]

    def __iter__(self):
        return (elem for elem, _ in self._items)

    def __len__(self):
        return len(self._items)

    def weight(self, elem) -> Fraction:
        return self._weights.get(elem, Fraction(0))

    def items(self):
        return self._items

    def support(self) -> Tuple:
        return tuple(elem for elem, _ in self._items)

    def is_point_mass(self) -> bool:
        return len(self._items) == 1

    def point(self):
        """The single element of a point mass."""
        if not self.is_point_mass():
            raise ValueError(f"Not a point mass: {self}")
        return self._items[0][0]

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return self._items == other._items

    def __lt__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return self._items < other._items

    def __hash__(self):
        return hash(("Dist", self._items))

    def __str__(self):
        body = ", ".join(f"{format_value(e)}: {format_fraction(w)}" for e, w in self._items)
        return "{" + body + "}"

    def __repr__(self):
        return f"Dist({self})"


def dist_new(entries: Iterable[Tuple[Any, Any]]) -> Dist:
    """
    Builds a distribution from (element, weight) pairs.

    Args:
        entries: Pairs of element and rational weight; duplicates are merged

    Returns:
        Dist: The canonical distribution

    Raises:
        NegativeWeight: If any weight is below zero
        NotNormalized: If the weights do not sum to exactly one
    """
    merged: Dict[Any, Fraction] = {}
    count = 0
    for elem, weight in entries:
        weight = Fraction(weight)
        if weight < 0:
            raise NegativeWeight(f"Negative weight {format_fraction(weight)} for {format_value(elem)}")
        merged[elem] = merged.get(elem, Fraction(0)) + weight
        count += 1
    if count == 0:
        raise NotNormalized("A distribution needs at least one entry")
    total = sum(merged.values(), Fraction(0))
    if total != 1:
        raise NotNormalized(f"Weights sum to {format_fraction(total)}, not 1")
    return Dist(merged)


def eta(a) -> Dist:
    return Dist({a: Fraction(1)})


def uniform(elems: Iterable) -> Dist:
    elems = list(dict.fromkeys(elems))
    return Dist({e: Fraction(1, len(elems)) for e in elems})


def dmap(f: Callable, d: Dist) -> Dist:
    """Pushforward of d along f; colliding images add their weights."""
    out: Dict[Any, Fraction] = {}
    for elem, w in d.items():
        image = f(elem)
        out[image] = out.get(image, Fraction(0)) + w
    return Dist(out)


def join(dd: Dist) -> Dist:
    out: Dict[Any, Fraction] = {}
    for inner, w in dd.items():
        for elem, v in inner.items():
            out[elem] = out.get(elem, Fraction(0)) + w * v
    return Dist(out)


def kleisli(k: Callable[[Any], Dist], d: Dist) -> Dist:
    """Kleisli extension: join(dmap(k, d)) without building the outer layer."""
    out: Dict[Any, Fraction] = {}
    for elem, w in d.items():
        for image, v in k(elem).items():
            out[image] = out.get(image, Fraction(0)) + w * v
    return Dist(out)


def ell(da: Dist, db: Dist) -> Dist:
    """Independent joint distribution of da and db (double strength)."""
    return Dist({(a, b): wa * wb for (a, wa), (b, wb) in product(da.items(), db.items())})


def marginals(d: Dist) -> Tuple[Dist, Dist]:
    return dmap(lambda pair: pair[0], d), dmap(lambda pair: pair[1], d)


def is_independent(d: Dist) -> bool:
    left, right = marginals(d)
    return ell(left, right) == d


def mixture(parts: Iterable[Tuple[Any, Dist]]) -> Dist:
    """Weighted mixture of distributions given as (weight, dist) pairs."""
    out: Dict[Any, Fraction] = {}
    for weight, d in parts:
        for elem, v in d.items():
            out[elem] = out.get(elem, Fraction(0)) + Fraction(weight) * v
    return Dist(out)


def audit(d: Dist) -> bool:
    """True iff every stored weight is positive and the weights sum to one."""
    weights = [w for _, w in d.items()]
    return bool(weights) and all(w > 0 for w in weights) and sum(weights, Fraction(0)) == 1


def expect(alg: "ConvexAlgebra", d: Dist):
    return alg.expect(d)


class RationalVec(tuple):
    """Fixed-length payoff vector of exact rationals."""

    def __new__(cls, components: Iterable = ()):
        return super().__new__(cls, (Fraction(c) for c in components))

    def __str__(self):
        return "(" + ", ".join(format_fraction(c) for c in self) + ")"

    def __repr__(self):
        return f"RationalVec{self}"


_SCALAR_SAMPLES = (
    0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2), 3,
    -3, Fraction(1, 3), Fraction(-5, 2), 5, -10, Fraction(7, 4), 4, -4,
)


@dataclass(frozen=True)
class ConvexAlgebra:
    """A payoff carrier together with its expectation operator."""

    def expect(self, d: Dist):
        raise NotImplementedError

    def samples(self) -> Tuple:
        """Deterministic sample values used for extensional comparisons."""
        raise NotImplementedError

    def grid_values(self, bound: int) -> List:
        """All values whose rational entries are integers in [-bound, bound]."""
        raise NotImplementedError

    def random_value(self, rng: random.Random, bound: int):
        raise NotImplementedError


@dataclass(frozen=True)
class RationalAlgebra(ConvexAlgebra):

    def expect(self, d: Dist) -> Fraction:
        return sum((w * Fraction(r) for r, w in d.items()), Fraction(0))

    def samples(self) -> Tuple:
        return tuple(Fraction(v) for v in _SCALAR_SAMPLES)

    def grid_values(self, bound: int) -> List:
        return [Fraction(v) for v in range(-bound, bound + 1)]

    def random_value(self, rng: random.Random, bound: int) -> Fraction:
        return Fraction(rng.randint(-bound, bound))

    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class VectorAlgebra(ConvexAlgebra):
    dim: int = 2

    def expect(self, d: Dist) -> RationalVec:
        totals = [Fraction(0)] * self.dim
        for vec, w in d.items():
            for i in range(self.dim):
                totals[i] += w * vec[i]
        return RationalVec(totals)

    def samples(self) -> Tuple:
        found: List[RationalVec] = [RationalVec([0] * self.dim)]
        for i in range(self.dim):
            for sign in (1, -1):
                found.append(RationalVec([sign if j == i else 0 for j in range(self.dim)]))
        n = 1
        while len(found) < 16:
            vec = RationalVec(
                Fraction(((n * (i + 3)) % 7) - 3, 1 + (n + i) % 3) for i in range(self.dim)
            )
            if vec not in found:
                found.append(vec)
            n += 1
            if n > 400:
                break
        return tuple(found[:16])

    def grid_values(self, bound: int) -> List:
        return [RationalVec(v) for v in product(range(-bound, bound + 1), repeat=self.dim)]

    def random_value(self, rng: random.Random, bound: int) -> RationalVec:
        return RationalVec(rng.randint(-bound, bound) for _ in range(self.dim))

    def __str__(self):
        return f"Q^{self.dim}"


@dataclass(frozen=True)
class UnitAlgebra(ConvexAlgebra):
    """The one-point algebra carried by the unit game."""

    def expect(self, d: Dist):
        return UNIT

    def samples(self) -> Tuple:
        return (UNIT,)

    def grid_values(self, bound: int) -> List:
        return [UNIT]

    def random_value(self, rng: random.Random, bound: int):
        return UNIT

    def __str__(self):
        return "1"


@dataclass(frozen=True)
class ProductAlgebra(ConvexAlgebra):
    left: ConvexAlgebra
    right: ConvexAlgebra

    def expect(self, d: Dist):
        first, second = marginals(d)
        return (self.left.expect(first), self.right.expect(second))

    def samples(self) -> Tuple:
        lefts, rights = self.left.samples(), self.right.samples()
        pairs = []
        for i in range(max(len(lefts), len(rights))):
            pair = (lefts[i % len(lefts)], rights[(i * 7 + 3) % len(rights)])
            if pair not in pairs:
                pairs.append(pair)
        return tuple(pairs[:16])

    def grid_values(self, bound: int) -> List:
        return [(a, b) for a in self.left.grid_values(bound) for b in self.right.grid_values(bound)]

    def random_value(self, rng: random.Random, bound: int):
        return (self.left.random_value(rng, bound), self.right.random_value(rng, bound))

    def __str__(self):
        return f"({self.left} x {self.right})"


@dataclass(frozen=True)
class FreeAlgebra(ConvexAlgebra):
    """Distributions over a base carrier, averaged by join."""

    base: ConvexAlgebra

    def expect(self, d: Dist) -> Dist:
        return join(d)

    def samples(self) -> Tuple:
        values = self.base.samples()
        points = [eta(v) for v in values[:8]]
        mixed = [uniform([values[i], values[i + 1]]) for i in range(0, min(len(values) - 1, 8))]
        return tuple(points + mixed)[:16]

    def grid_values(self, bound: int) -> List:
        return [eta(v) for v in self.base.grid_values(bound)]

    def random_value(self, rng: random.Random, bound: int) -> Dist:
        first = self.base.random_value(rng, bound)
        second = self.base.random_value(rng, bound)
        return uniform([first, second])

    def __str__(self):
        return f"D({self.base})"
