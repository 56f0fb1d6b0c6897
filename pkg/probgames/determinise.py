"""Pure open games, determinisation, and the point-mass adjunction.

Determinised games have distribution-valued strategies and moves, so they
support membership queries and pointwise evaluation only. Morphism checks
compare lenses pointwise and check equilibrium preservation over a
deterministic family of utility tables.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple
import logging

from probgames.dist import (
    ConvexAlgebra, Dist, FreeAlgebra, ProductAlgebra, dmap, ell, eta, kleisli,
)
from probgames.errors import UnsupportedShape
from probgames.game import (
    HOLDS, Interface, Oracle, ProbOpenGame, Verdict, candidate_profiles,
    check_equilibrium, evaluate, payoff_of, sample_utility_tables,
)
from probgames.lens import embed_pair, game_lens, lens_compose
from probgames.utils import UNIT, argmax_set, format_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PureOpenGame:
    """A game whose equilibria are pure strategies.

    ``states``, ``moves`` and ``strategies`` are ``None`` when the carrier is
    a set of distributions and can only be queried, never enumerated.
    """

    name: str
    states: Optional[Tuple]
    moves: Optional[Tuple]
    strategies: Optional[Tuple]
    utility_alg: ConvexAlgebra
    coutility_alg: ConvexAlgebra
    play: Callable[[Any, Any], Any] = field(compare=False)
    coutility: Callable[[Any, Any, Any], Any] = field(compare=False)
    member: Callable[[Any, Any, Any], bool] = field(compare=False)
    kind: str = "pure"

    def __str__(self):
        return self.name


def _apply(k, value):
    if isinstance(k, Mapping):
        return k[value]
    return k(value)


def determinise(game: ProbOpenGame) -> PureOpenGame:
    """The pure game over mixed strategies whose moves are distributions of moves."""

    def play(phi, x):
        return dmap(lambda s: game.play(s, x), phi)

    def coutility(phi, x, psi):
        return game.coutility_alg.expect(dmap(lambda pair: game.coutility(pair[0], x, pair[1]), ell(phi, psi)))

    def member(x, k, phi):
        table = {y: game.utility_alg.expect(_apply(k, eta(y))) for y in game.moves}
        return check_equilibrium(game, x, table, phi)

    return PureOpenGame(
        name=f"D({game.name})",
        states=game.states,
        moves=None,
        strategies=None,
        utility_alg=FreeAlgebra(game.utility_alg),
        coutility_alg=game.coutility_alg,
        play=play,
        coutility=coutility,
        member=member,
        kind="determinised",
    )


def check_determinise_dk(game: ProbOpenGame, x, k: Mapping, phi: Dist) -> bool:
    """Membership through the determinisation against D(k) equals direct membership."""
    lifted = lambda d: dmap(lambda y: k[y], d)
    return determinise(game).member(x, lifted, phi) == check_equilibrium(game, x, k, phi)


def pure_par(game: PureOpenGame, other: PureOpenGame) -> PureOpenGame:
    """Parallel composition of pure games: each side best-responds to the other's fixed play."""

    def play(sigma, x):
        return (game.play(sigma[0], x[0]), other.play(sigma[1], x[1]))

    def coutility(sigma, x, r):
        return (game.coutility(sigma[0], x[0], r[0]), other.coutility(sigma[1], x[1], r[1]))

    def member(x, k, sigma):
        left_play = game.play(sigma[0], x[0])
        right_play = other.play(sigma[1], x[1])
        k_left = lambda y: _apply(k, (y, right_play))[0]
        k_right = lambda y: _apply(k, (left_play, y))[1]
        return game.member(x[0], k_left, sigma[0]) and other.member(x[1], k_right, sigma[1])

    def pairs(a, b):
        if a is None or b is None:
            return None
        return tuple(product(a, b))

    return PureOpenGame(
        name=f"(par {game.name} {other.name})",
        states=pairs(game.states, other.states),
        moves=pairs(game.moves, other.moves),
        strategies=pairs(game.strategies, other.strategies),
        utility_alg=ProductAlgebra(game.utility_alg, other.utility_alg),
        coutility_alg=ProductAlgebra(game.coutility_alg, other.coutility_alg),
        play=play,
        coutility=coutility,
        member=member,
        kind="par",
    )


def determinise_otimes_sides(game: ProbOpenGame, other: ProbOpenGame, phis: Tuple[Dist, Dist],
                             x: Tuple, k: Mapping) -> Tuple[bool, bool]:
    """
    Both sides of the determinisation-of-tensor identity.

    Args:
        game, other: The two factors
        phis: Mixed strategies of each factor
        x: Pair of states
        k: Table from joint moves to distributions over joint utilities

    Returns:
        (lhs, rhs): membership of the joint in the determinised tensor against
        the Kleisli extension of k, and membership of the pair in the tensor of
        determinisations against the marginalized extension
    """
    from probgames.compose import par

    k_sharp = lambda d: kleisli(lambda y: k[y], d)
    lhs = determinise(par(game, other)).member(x, k_sharp, ell(phis[0], phis[1]))

    def k_split(pair):
        joint = k_sharp(ell(pair[0], pair[1]))
        return (dmap(lambda r: r[0], joint), dmap(lambda r: r[1], joint))

    rhs = pure_par(determinise(game), determinise(other)).member(x, k_split, phis)
    return lhs, rhs


def check_determinise_otimes(game: ProbOpenGame, other: ProbOpenGame, phis: Tuple[Dist, Dist],
                             x: Tuple, k: Mapping) -> bool:
    lhs, rhs = determinise_otimes_sides(game, other, phis, x, k)
    return lhs == rhs


def theta(game: PureOpenGame) -> ProbOpenGame:
    """Embeds a pure game: the equilibria are the point masses at pure equilibria."""

    def decide(x, k, phi):
        if not phi.is_point_mass():
            return Verdict(False, "not-point-mass", game.name)
        if game.member(x, k, phi.point()):
            return HOLDS
        return Verdict(False, "best-response", game.name)

    return ProbOpenGame(
        name=f"Theta({game.name})",
        interface=Interface(game.states, game.moves, game.utility_alg, game.coutility_alg),
        strategies=game.strategies,
        play=game.play,
        coutility=game.coutility,
        eq=Oracle(decide),
        kind="theta",
    )


def psi(game: ProbOpenGame) -> PureOpenGame:
    """Extracts the pure strategies whose point mass is an equilibrium."""
    return PureOpenGame(
        name=f"Psi({game.name})",
        states=game.states,
        moves=game.moves,
        strategies=game.strategies,
        utility_alg=game.utility_alg,
        coutility_alg=game.coutility_alg,
        play=game.play,
        coutility=game.coutility,
        member=lambda x, k, sigma: check_equilibrium(game, x, k, eta(sigma)),
        kind="psi",
    )


def pure_decision_game(moves: Sequence, payoff_coord: Optional[int], utility_alg: ConvexAlgebra,
                       name: str = "pure-decision") -> PureOpenGame:
    moves = tuple(dict.fromkeys(moves))

    def member(x, k, sigma):
        return sigma in argmax_set(moves, lambda y: payoff_of(_apply(k, y), payoff_coord))

    return PureOpenGame(
        name=name,
        states=(UNIT,),
        moves=moves,
        strategies=moves,
        utility_alg=utility_alg,
        coutility_alg=utility_alg,
        play=lambda s, x: s,
        coutility=lambda s, x, r: r,
        member=member,
        kind="decision",
    )


def pure_identity_game(states: Sequence, alg: ConvexAlgebra, name: str = "id") -> PureOpenGame:
    states = tuple(dict.fromkeys(states))
    return PureOpenGame(
        name=name,
        states=states,
        moves=states,
        strategies=(UNIT,),
        utility_alg=alg,
        coutility_alg=alg,
        play=lambda s, x: x,
        coutility=lambda s, x, r: r,
        member=lambda x, k, s: True,
        kind="identity",
    )


def _identity(v):
    return v


@dataclass(frozen=True)
class GameMorphism:
    """Component maps of a morphism from G : (X, S) -> (Y, R) to G' : (X', S') -> (Y', R').

    f_p : X -> X', f_c : S' -> S, g_p : Y -> Y', g_c : R' -> R, h : strategies.
    """

    f_p: Callable = _identity
    f_c: Callable = _identity
    g_p: Callable = _identity
    g_c: Callable = _identity
    h: Callable = _identity


def identity_morphism() -> GameMorphism:
    return GameMorphism()


def compose_morphisms(first: GameMorphism, second: GameMorphism) -> GameMorphism:
    """``second`` after ``first``; backward components compose the other way round."""
    return GameMorphism(
        f_p=lambda x: second.f_p(first.f_p(x)),
        f_c=lambda s: first.f_c(second.f_c(s)),
        g_p=lambda y: second.g_p(first.g_p(y)),
        g_c=lambda r: first.g_c(second.g_c(r)),
        h=lambda sigma: second.h(first.h(sigma)),
    )


def theta_morphism(m: GameMorphism) -> GameMorphism:
    """Theta acts on morphisms by keeping every component map."""
    return GameMorphism(m.f_p, m.f_c, m.g_p, m.g_c, m.h)


def psi_morphism(m: GameMorphism) -> GameMorphism:
    return GameMorphism(m.f_p, m.f_c, m.g_p, m.g_c, m.h)


def morphisms_equal(a: GameMorphism, b: GameMorphism, source, target) -> bool:
    """Componentwise equality of two morphisms source -> target, evaluated pointwise."""
    for x in source.states:
        if a.f_p(x) != b.f_p(x):
            return False
    for y in source.moves:
        if a.g_p(y) != b.g_p(y):
            return False
    for sigma in source.strategies:
        if a.h(sigma) != b.h(sigma):
            return False
    for s in target.coutility_alg.samples():
        if a.f_c(s) != b.f_c(s):
            return False
    for r in target.utility_alg.samples():
        if a.g_c(r) != b.g_c(r):
            return False
    return True


@dataclass(frozen=True)
class MorphismCheck:
    ok: bool
    condition: Optional[str] = None
    point: Optional[str] = None

    def __bool__(self):
        return self.ok


def check_morphism(m: GameMorphism, source, target, mode: str = "prob",
                   table_count: Optional[int] = None, seed: int = 0,
                   candidate_limit: int = 24) -> MorphismCheck:
    """
    Verifies the lens square and equilibrium preservation of a morphism.

    Args:
        m: The component maps
        source: Game G (pure or probabilistic, matching mode)
        target: Game G'
        mode: "pure" checks h(sigma); "prob" checks the pushforward D(h)(phi)
        table_count: Optional cap on the utility-table family; None checks all of it
        seed: Seed of the sampled family
        candidate_limit: Mixed candidates tried per (x, k) in prob mode

    Returns:
        MorphismCheck: ok, or the failed condition ("lens-square" or
        "equilibrium") with the offending point

    Raises:
        UnsupportedShape: If the source strategies or target moves cannot be enumerated
    """
    for game, carrier in ((source, source.strategies), (target, target.moves)):
        if carrier is None:
            raise UnsupportedShape(f"Morphism checks enumerate carriers that {game.name} does not list")
    samples = target.utility_alg.samples()
    for sigma in source.strategies:
        via_target = lens_compose(embed_pair(m.f_p, m.f_c), game_lens(target, m.h(sigma)))
        via_source = lens_compose(game_lens(source, sigma), embed_pair(m.g_p, m.g_c))
        for x in source.states:
            if via_target.view(x) != via_source.view(x):
                return MorphismCheck(False, "lens-square", f"view at strategy {format_value(sigma)}, state {format_value(x)}")
            for r in samples:
                if via_target.update(x, r) != via_source.update(x, r):
                    return MorphismCheck(
                        False, "lens-square",
                        f"update at strategy {format_value(sigma)}, state {format_value(x)}, utility {format_value(r)}",
                    )

    tables = sample_utility_tables(target.moves, target.utility_alg, seed=seed,
                                   limit=table_count)
    if mode == "pure":
        candidates = list(source.strategies)
    else:
        candidates = candidate_profiles(source, 2, limit=candidate_limit)
    for x in source.states:
        for k in tables:
            pulled = {y: m.g_c(k[m.g_p(y)]) for y in source.moves}
            for candidate in candidates:
                if mode == "pure":
                    if source.member(x, pulled, candidate) and not target.member(m.f_p(x), k, m.h(candidate)):
                        return MorphismCheck(False, "equilibrium", f"strategy {format_value(candidate)}, state {format_value(x)}")
                else:
                    if evaluate(source, x, pulled, candidate).holds and \
                            not evaluate(target, m.f_p(x), k, dmap(m.h, candidate)).holds:
                        return MorphismCheck(False, "equilibrium", f"profile {candidate}, state {format_value(x)}")
    return MorphismCheck(True)


@dataclass(frozen=True)
class AdjunctionCheck:
    ok: bool
    failures: Tuple[str, ...] = ()

    def __bool__(self):
        return self.ok


def check_adjunction_triangles(game: PureOpenGame, other: ProbOpenGame,
                               psi_fn: Callable = psi, theta_fn: Callable = theta,
                               table_count: Optional[int] = None) -> AdjunctionCheck:
    """
    Checks the unit ``game -> Psi(Theta(game))`` and counit
    ``Theta(Psi(other)) -> other`` are morphisms and both triangle
    identities hold, all with identity components.
    """
    failures: List[str] = []
    unit = identity_morphism()
    counit = identity_morphism()

    result = check_morphism(unit, game, psi_fn(theta_fn(game)), "pure", table_count=table_count)
    if not result:
        failures.append(f"unit: {result.condition} at {result.point}")
    result = check_morphism(counit, theta_fn(psi_fn(other)), other, "prob", table_count=table_count)
    if not result:
        failures.append(f"counit: {result.condition} at {result.point}")

    embedded = theta_fn(game)
    result = check_morphism(counit, theta_fn(psi_fn(embedded)), embedded, "prob", table_count=table_count)
    if not result:
        failures.append(f"counit at Theta: {result.condition} at {result.point}")
    left_triangle = compose_morphisms(theta_morphism(unit), counit)
    if not morphisms_equal(left_triangle, identity_morphism(), embedded, embedded):
        failures.append("left triangle: components differ from the identity")

    extracted = psi_fn(other)
    result = check_morphism(unit, extracted, psi_fn(theta_fn(extracted)), "pure", table_count=table_count)
    if not result:
        failures.append(f"unit at Psi: {result.condition} at {result.point}")
    right_triangle = compose_morphisms(unit, psi_morphism(counit))
    if not morphisms_equal(right_triangle, identity_morphism(), extracted, extracted):
        failures.append("right triangle: components differ from the identity")

    if failures:
        logger.warning("adjunction check failed", extra={"data": {"failures": failures}})
    return AdjunctionCheck(not failures, tuple(failures))


def hom_bijection_check(game: PureOpenGame, other: ProbOpenGame, table_count: Optional[int] = None) -> bool:
    """
    Morphisms Theta(game) -> other and game -> Psi(other) with identity
    lens components and strategy map h correspond one to one.

    Enumerates every strategy map h; both carriers must have at most three
    strategies.
    """
    if len(game.strategies) > 3 or len(other.strategies) > 3:
        raise ValueError("Hom-set enumeration is limited to three strategies per side")
    embedded = theta(game)
    extracted = psi(other)
    for images in product(other.strategies, repeat=len(game.strategies)):
        mapping: Dict[Any, Any] = dict(zip(game.strategies, images))
        m = GameMorphism(h=mapping.__getitem__)
        prob_side = check_morphism(m, embedded, other, "prob", table_count=table_count).ok
        pure_side = check_morphism(m, game, extracted, "pure", table_count=table_count).ok
        if prob_side != pure_side:
            logger.warning("hom-set transposition disagrees",
                           extra={"data": {"h": {format_value(a): format_value(b) for a, b in mapping.items()}}})
            return False
    return True
