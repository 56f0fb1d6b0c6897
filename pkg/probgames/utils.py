from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Any, Callable, Iterable, List, Sequence, Tuple
import random

# Canonical value of a singleton state or strategy set.
UNIT = ()


def parse_fraction(text: str) -> Fraction:
    """
    Parses exact rational text such as "1/2", "-10" or "0.25".

    Args:
        text: The rational literal

    Returns:
        Fraction: The parsed value

    Raises:
        ValueError: If the text is not a rational literal
    """
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"Not a rational number: {text!r}")


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_value(value: Any) -> str:
    """Renders states, moves, strategies and payoffs in the CLI text syntax."""
    if type(value) is tuple:
        if not value:
            return "*"
        return "(" + ", ".join(format_value(v) for v in value) + ")"
    if isinstance(value, (Fraction, int)) and not isinstance(value, bool):
        return format_fraction(value)
    return str(value)


def flatten(value: Any) -> Tuple:
    """
    Flattens a nested pair structure into a flat tuple of labels.

    Singleton values are skipped so a composite of state-free games
    flattens to the empty tuple.
    """
    if isinstance(value, tuple) and type(value) is tuple:
        out = []
        for item in value:
            out.extend(flatten(item))
        return tuple(out)
    return (value,)


def argmax_set(items: Iterable, score: Callable[[Any], Any]) -> List:
    """
    Returns every item attaining the maximal score, ties included.

    Args:
        items: Candidates
        score: Function giving a comparable score per item

    Returns:
        List: The maximizers, in input order
    """
    items = list(items)
    if not items:
        return []
    scores = [score(item) for item in items]
    best = max(scores)
    return [item for item, s in zip(items, scores) if s == best]


def grid_size(n: int, denominator: int) -> int:
    """Number of points of the simplex over n items with the given denominator."""
    if n <= 0:
        return 0
    return comb(denominator + n - 1, n - 1)


def simplex_grid(n: int, denominator: int) -> List[Tuple[Fraction, ...]]:
    """
    Enumerates all weight vectors over n items whose entries are multiples
    of 1/denominator and sum to one, in lexicographic order of bar positions.

    Args:
        n: Number of items
        denominator: Grid resolution

    Returns:
        List of weight tuples
    """
    if n <= 0:
        return []
    points = []
    for bars in combinations(range(denominator + n - 1), n - 1):
        previous = -1
        counts = []
        for bar in bars:
            counts.append(bar - previous - 1)
            previous = bar
        counts.append(denominator + n - 2 - previous)
        points.append(tuple(Fraction(c, denominator) for c in counts))
    return points


def random_simplex_point(n: int, denominator: int, rng: random.Random) -> Tuple[Fraction, ...]:
    """Draws one grid point uniformly over bar placements."""
    bars = sorted(rng.sample(range(denominator + n - 1), n - 1))
    previous = -1
    counts = []
    for bar in bars:
        counts.append(bar - previous - 1)
        previous = bar
    counts.append(denominator + n - 2 - previous)
    return tuple(Fraction(c, denominator) for c in counts)


def sort_canonical(values: Sequence) -> List:
    """Sorts by natural order, falling back to repr for incomparable values."""
    try:
        return sorted(values)
    except TypeError:
        return sorted(values, key=repr)
