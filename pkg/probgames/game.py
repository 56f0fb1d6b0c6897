"""Probabilistic open games and the recursive equilibrium-membership engine.

A game is a frozen record of strategies, a play table, a coutility
evaluator and an equilibrium spec. Atomic constructors cover maximizing
decisions, subgame-conditioned decisions, identity, unit and structural
games; composite specs are decided by :mod:`probgames.compose`.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple
import logging
import random

from probgames.dist import (
    ConvexAlgebra, Dist, UnitAlgebra, VectorAlgebra, dist_new, dmap, ell, eta,
)
from probgames.errors import (
    EmptyMoveSet, InterfaceMismatch, NotBijective, StrategySpaceTooLarge,
    UnknownState, UnknownStrategy,
)
from probgames.utils import (
    UNIT, argmax_set, format_value, grid_size, random_simplex_point, simplex_grid,
)

logger = logging.getLogger(__name__)

UtilityTable = Mapping[Any, Any]

DEFAULT_MAX_CONDITIONED_TABLE = 16
ENUMERATED_TABLE_MOVES = 3


@dataclass(frozen=True)
class Interface:
    states: Tuple
    moves: Tuple
    utility_alg: ConvexAlgebra
    coutility_alg: ConvexAlgebra

    def __post_init__(self):
        if not self.states:
            raise EmptyMoveSet("A game needs at least one state")
        if not self.moves:
            raise EmptyMoveSet("A game needs at least one move")


@dataclass(frozen=True)
class SupportChar:
    """Members are exactly the distributions supported inside ``best(x, k)``.

    ``near_best(x, k, tolerance)`` optionally widens the set by a payoff
    slack; the grid oracle uses it for float-tolerant comparisons.
    """

    best: Callable[[Any, UtilityTable], FrozenSet]
    near_best: Optional[Callable[[Any, UtilityTable, float], FrozenSet]] = None


@dataclass(frozen=True)
class ParNode:
    """Parallel node; ``decide(x, k, phi, tolerance)`` overrides the standard membership rule."""

    left: "ProbOpenGame"
    right: "ProbOpenGame"
    decide: Optional[Callable[..., "Verdict"]] = field(default=None, compare=False)


@dataclass(frozen=True)
class SeqNode:
    first: "ProbOpenGame"
    second: "ProbOpenGame"


@dataclass(frozen=True)
class Everything:
    pass


@dataclass(frozen=True)
class Oracle:
    """Opaque membership decider returning a bool or a :class:`Verdict`."""

    decide: Callable[..., Any]


@dataclass(frozen=True)
class Verdict:
    holds: bool
    reason: Optional[str] = None
    component: Optional[str] = None

    def __bool__(self):
        return self.holds


HOLDS = Verdict(True)


@dataclass(frozen=True)
class ProbOpenGame:
    name: str
    interface: Interface
    strategies: Tuple
    play: Callable[[Any, Any], Any] = field(compare=False)
    coutility: Callable[[Any, Any, Any], Any] = field(compare=False)
    eq: Any = field(compare=False)
    kind: str = "atomic"
    payoff_coord: Optional[int] = None
    actions: Tuple = ()

    @property
    def states(self) -> Tuple:
        return self.interface.states

    @property
    def moves(self) -> Tuple:
        return self.interface.moves

    @property
    def utility_alg(self) -> ConvexAlgebra:
        return self.interface.utility_alg

    @property
    def coutility_alg(self) -> ConvexAlgebra:
        return self.interface.coutility_alg

    def __str__(self):
        return self.name


class FunctionTable(tuple):
    """A strategy of a conditioned game: a finite function stored as sorted pairs."""

    def __new__(cls, pairs: Iterable[Tuple[Any, Any]]):
        return super().__new__(cls, tuple(sorted(pairs, key=lambda p: (repr(type(p[0])), p[0]))))

    def __call__(self, x):
        for obs, move in self:
            if obs == x:
                return move
        raise UnknownState(f"{format_value(x)} is outside the domain of {self.label}")

    @property
    def label(self) -> str:
        inputs = [obs for obs, _ in self]
        outputs = [move for _, move in self]
        if all(obs == move for obs, move in self):
            return "id"
        if len(self) == 2 and set(outputs) == set(inputs) and all(obs != move for obs, move in self):
            return "swap"
        if len(self) > 1 and len(set(outputs)) == 1:
            return f"const_{format_value(outputs[0])}"
        return "[" + "|".join(f"{format_value(o)}->{format_value(m)}" for o, m in self) + "]"

    def __str__(self):
        return self.label

    def __repr__(self):
        return f"FunctionTable({self.label})"


def strategy_label(strategy) -> str:
    return format_value(strategy)


def payoff_of(value, coord: Optional[int]):
    """Selects the payoff coordinate of a utility value (scalars pass through)."""
    if coord is None or not isinstance(value, tuple):
        return value
    return value[coord]


def _check_table(moves: Sequence, k: UtilityTable) -> None:
    missing = [y for y in moves if y not in k]
    if missing:
        raise InterfaceMismatch(f"Utility table is not total: missing {format_value(missing[0])}")


def decision_game(moves: Sequence, payoff_coord: Optional[int] = 0,
                  utility_alg: Optional[ConvexAlgebra] = None,
                  name: str = "decision") -> ProbOpenGame:
    """
    A state-free player who picks a move maximizing one payoff coordinate.

    Args:
        moves: The finite move set, which is also the strategy set
        payoff_coord: Index of the payoff coordinate the player maximizes
        utility_alg: Utility carrier; defaults to 2-dimensional rational vectors
        name: Display name

    Returns:
        ProbOpenGame: A game whose equilibria are the distributions supported
        on argmax moves

    Raises:
        EmptyMoveSet: If moves is empty
    """
    moves = tuple(dict.fromkeys(moves))
    if not moves:
        raise EmptyMoveSet(f"Decision game {name} has no moves")
    if utility_alg is None:
        utility_alg = VectorAlgebra(max(2, (payoff_coord or 0) + 1))

    def best(x, k):
        return frozenset(argmax_set(moves, lambda y: payoff_of(k[y], payoff_coord)))

    def near_best(x, k, tolerance):
        scores = {y: float(payoff_of(k[y], payoff_coord)) for y in moves}
        top = max(scores.values())
        return frozenset(y for y in moves if scores[y] >= top - tolerance)

    return ProbOpenGame(
        name=name,
        interface=Interface((UNIT,), moves, utility_alg, utility_alg),
        strategies=moves,
        play=lambda s, x: s,
        coutility=lambda s, x, r: r,
        eq=SupportChar(best, near_best),
        kind="decision",
        payoff_coord=payoff_coord,
    )


def conditioned_decision_game(observations: Sequence, moves: Sequence,
                              payoff_coord: Optional[int] = 0,
                              utility_alg: Optional[ConvexAlgebra] = None,
                              name: str = "conditioned",
                              max_table: int = DEFAULT_MAX_CONDITIONED_TABLE) -> ProbOpenGame:
    """A player observing the previous move, required to be optimal at every observation."""
    observations = tuple(dict.fromkeys(observations))
    moves = tuple(dict.fromkeys(moves))
    if not observations or not moves:
        raise EmptyMoveSet(f"Conditioned game {name} needs observations and moves")
    if len(observations) * len(moves) > max_table:
        raise StrategySpaceTooLarge(
            f"Conditioned game {name}: {len(observations)} x {len(moves)} exceeds {max_table}"
        )
    if utility_alg is None:
        utility_alg = VectorAlgebra(max(2, (payoff_coord or 0) + 1))
    strategies = tuple(
        FunctionTable(zip(observations, choice))
        for choice in product(moves, repeat=len(observations))
    )

    def branch_best(k, obs):
        return set(argmax_set(moves, lambda m: payoff_of(k[(obs, m)], payoff_coord)))

    def best(x, k):
        per_branch = {obs: branch_best(k, obs) for obs in observations}
        return frozenset(g for g in strategies if all(g(obs) in per_branch[obs] for obs in observations))

    def near_best(x, k, tolerance):
        per_branch = {}
        for obs in observations:
            scores = {m: float(payoff_of(k[(obs, m)], payoff_coord)) for m in moves}
            top = max(scores.values())
            per_branch[obs] = {m for m in moves if scores[m] >= top - tolerance}
        return frozenset(g for g in strategies if all(g(obs) in per_branch[obs] for obs in observations))

    return ProbOpenGame(
        name=name,
        interface=Interface(observations, tuple(product(observations, moves)), utility_alg, utility_alg),
        strategies=strategies,
        play=lambda g, x: (x, g(x)),
        coutility=lambda g, x, r: r,
        eq=SupportChar(best, near_best),
        kind="conditioned",
        payoff_coord=payoff_coord,
        actions=moves,
    )


def identity_game(states: Sequence, alg: ConvexAlgebra, name: str = "id") -> ProbOpenGame:
    states = tuple(dict.fromkeys(states))
    return ProbOpenGame(
        name=name,
        interface=Interface(states, states, alg, alg),
        strategies=(UNIT,),
        play=lambda s, x: x,
        coutility=lambda s, x, r: r,
        eq=Everything(),
        kind="identity",
    )


def unit_game() -> ProbOpenGame:
    return ProbOpenGame(
        name="I",
        interface=Interface((UNIT,), (UNIT,), UnitAlgebra(), UnitAlgebra()),
        strategies=(UNIT,),
        play=lambda s, x: UNIT,
        coutility=lambda s, x, r: UNIT,
        eq=Everything(),
        kind="unit",
    )


def _as_function(f) -> Callable:
    if isinstance(f, Mapping):
        return f.__getitem__
    return f


def structural_game(fx, fs, states: Sequence, utility_alg: ConvexAlgebra,
                    coutility_alg: Optional[ConvexAlgebra] = None,
                    name: str = "structural") -> ProbOpenGame:
    """
    A strategy-free game relabeling states forward by ``fx`` and utilities
    backward by ``fs``.

    Bijectivity of ``fx`` is checked by enumeration over ``states``; ``fs``
    acts on rational values and is taken to be a coordinate permutation.

    Raises:
        NotBijective: If two states share an image
    """
    fx, fs = _as_function(fx), _as_function(fs)
    states = tuple(dict.fromkeys(states))
    images = tuple(fx(x) for x in states)
    if len(set(images)) != len(images):
        raise NotBijective(f"Structural map of {name} is not injective on its states")
    return ProbOpenGame(
        name=name,
        interface=Interface(states, images, utility_alg, coutility_alg or utility_alg),
        strategies=(UNIT,),
        play=lambda s, x: fx(x),
        coutility=lambda s, x, r: fs(r),
        eq=Everything(),
        kind="structural",
    )


def evaluate(game: ProbOpenGame, x, k: UtilityTable, phi: Dist, witness=None,
             tolerance: Optional[float] = None) -> Verdict:
    """
    Decides whether ``phi`` is an equilibrium of ``game`` at state ``x``
    against utility table ``k``, explaining the first failed condition.

    Args:
        game: The game
        x: A state of the game
        k: Utility table, total on the game's moves
        phi: Candidate mixed strategy profile
        witness: Optional decomposition witness for the outermost sequential node
        tolerance: Payoff slack for atomic best responses; ``None`` means exact

    Returns:
        Verdict: holds, plus reason and component when it does not

    Raises:
        UnknownState: If x is not a state of the game
        UnknownStrategy: If phi puts weight outside the strategy set
        UnsupportedComposition: If a sequential lifting is undecidable
    """
    if x not in game.states:
        raise UnknownState(f"{format_value(x)} is not a state of {game.name}")
    strategies = set(game.strategies)
    for sigma in phi:
        if sigma not in strategies:
            raise UnknownStrategy(f"{format_value(sigma)} is not a strategy of {game.name}")
    _check_table(game.moves, k)

    spec = game.eq
    if isinstance(spec, SupportChar):
        if tolerance is not None and spec.near_best is not None:
            best = spec.near_best(x, k, tolerance)
        else:
            best = spec.best(x, k)
        if all(sigma in best for sigma in phi):
            return HOLDS
        return Verdict(False, "best-response", game.name)
    if isinstance(spec, Everything):
        return HOLDS
    if isinstance(spec, ParNode):
        if spec.decide is not None:
            return spec.decide(x, k, phi, tolerance)
        from probgames.compose import par_verdict
        return par_verdict(spec.left, spec.right, x, k, phi, tolerance=tolerance)
    if isinstance(spec, SeqNode):
        from probgames.compose import seq_verdict
        return seq_verdict(spec.first, spec.second, x, k, phi, witness=witness, tolerance=tolerance)
    if isinstance(spec, Oracle):
        result = spec.decide(x, k, phi)
        if isinstance(result, Verdict):
            return result
        return HOLDS if result else Verdict(False, "oracle", game.name)
    raise TypeError(f"Unknown equilibrium spec {spec!r}")


def check_equilibrium(game: ProbOpenGame, x, k: UtilityTable, phi: Dist, witness=None) -> bool:
    return evaluate(game, x, k, phi, witness=witness).holds


def support_char_of(game: ProbOpenGame, x, k: UtilityTable) -> Optional[FrozenSet]:
    """The best-set of a support-characterized game, or None for composites and oracles."""
    spec = game.eq
    if isinstance(spec, SupportChar):
        return frozenset(spec.best(x, k))
    if isinstance(spec, Everything):
        return frozenset(game.strategies)
    return None


def expected_outcome(game: ProbOpenGame, x, k: UtilityTable, phi: Dist):
    """Expected utility of the realized move under profile phi."""
    return game.utility_alg.expect(dmap(lambda sigma: k[game.play(sigma, x)], phi))


def leaf_games(game: ProbOpenGame) -> List[ProbOpenGame]:
    """Atomic games of a composition tree, left to right."""
    spec = game.eq
    if isinstance(spec, ParNode):
        return leaf_games(spec.left) + leaf_games(spec.right)
    if isinstance(spec, SeqNode):
        return leaf_games(spec.first) + leaf_games(spec.second)
    return [game]


def _children(game: ProbOpenGame) -> Optional[Tuple[ProbOpenGame, ProbOpenGame]]:
    spec = game.eq
    if isinstance(spec, ParNode):
        return spec.left, spec.right
    if isinstance(spec, SeqNode):
        return spec.first, spec.second
    return None


def candidate_profiles(game: ProbOpenGame, denominator: int, limit: Optional[int] = None,
                       rng: Optional[random.Random] = None) -> List[Dist]:
    """
    Candidate mixed profiles: the rational simplex grid for atomic games,
    independent products of component candidates for composites.

    Point masses always come first. When a limit is given, composites
    reserve half of it for mixed products drawn from a seeded sample, so
    the list stays deterministic and never consists of point masses alone
    while mixed products exist.
    """
    rng = rng or random.Random(0)
    children = _children(game)
    if children is None:
        n = len(game.strategies)
        points = [eta(s) for s in game.strategies]
        total = grid_size(n, denominator)
        if limit is None or total <= limit:
            grid = [_weights_to_dist(game.strategies, w) for w in simplex_grid(n, denominator)]
            rest = [d for d in grid if not d.is_point_mass()]
            return points + rest
        chosen = list(points)
        attempts = 0
        while len(chosen) < max(limit, len(points)) and attempts < limit * 20:
            candidate = _weights_to_dist(game.strategies, random_simplex_point(n, denominator, rng))
            if candidate not in chosen:
                chosen.append(candidate)
            attempts += 1
        return chosen
    left, right = children
    lefts = candidate_profiles(left, denominator, limit, rng)
    rights = candidate_profiles(right, denominator, limit, rng)
    pure = [ell(a, b) for a in lefts if a.is_point_mass() for b in rights if b.is_point_mass()]
    if limit is None:
        return [ell(a, b) for a in lefts for b in rights]
    mixed_pairs = [(a, b) for a in lefts for b in rights if not (a.is_point_mass() and b.is_point_mass())]
    reserved = min(len(mixed_pairs), limit // 2)
    picked = pure[:limit - reserved]
    count = min(limit - len(picked), len(mixed_pairs))
    picked += [ell(a, b) for a, b in rng.sample(mixed_pairs, count)]
    return picked


def _weights_to_dist(items: Sequence, weights: Sequence[Fraction]) -> Dist:
    return dist_new((item, w) for item, w in zip(items, weights) if w)


def sample_utility_tables(moves: Sequence, alg: ConvexAlgebra, seed: int = 0,
                          limit: Optional[int] = None, random_count: int = 64,
                          bound: int = 2) -> List[Dict]:
    """
    The deterministic family of utility tables used to test equilibrium
    preservation.

    With at most ``ENUMERATED_TABLE_MOVES`` moves the family is every table
    whose entries are integers in [-bound, bound]. Larger move sets get the
    all-zero table followed by seeded random tables, ``random_count`` in all.
    A ``limit`` caps either family with a seeded sample of it that keeps the
    all-zero table first.
    """
    moves = list(moves)
    rng = random.Random(seed)
    zero = {y: alg.grid_values(0)[0] for y in moves}
    if len(moves) <= ENUMERATED_TABLE_MOVES:
        values = alg.grid_values(bound)
        total = len(values) ** len(moves)
        if limit is None or total <= limit:
            return [dict(zip(moves, combo)) for combo in product(values, repeat=len(moves))]
        tables = [zero]
        for index in sorted(rng.sample(range(total), limit)):
            table = {}
            for y in moves:
                index, digit = divmod(index, len(values))
                table[y] = values[digit]
            if table != zero:
                tables.append(table)
        return tables[:limit]
    count = random_count if limit is None else min(limit, random_count)
    tables = [zero]
    while len(tables) < count:
        tables.append({y: alg.random_value(rng, bound) for y in moves})
    return tables[:max(count, 1)]
