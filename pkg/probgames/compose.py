"""Parallel and sequential composition of probabilistic open games.

Sequential membership lifts the second game's equilibrium predicate along
the distribution of states the first game produces. For support-characterized
second games that lifting is a transportation feasibility problem, decided
exactly with an integer-scaled max-flow.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm
from typing import Any, Callable, Dict, FrozenSet, Mapping, Optional, Sequence, Tuple
import logging

import networkx as nx
from networkx.algorithms.flow import edmonds_karp

from probgames.dist import (
    ConvexAlgebra, Dist, ProductAlgebra, dist_new, dmap, eta, is_independent, marginals, mixture,
)
from probgames.errors import (
    InterfaceMismatch, InvalidWitness, NotBijective, UnsupportedComposition,
)
from probgames.game import (
    HOLDS, Everything, Interface, Oracle, ParNode, ProbOpenGame, SeqNode, SupportChar,
    Verdict, evaluate, support_char_of,
)
from probgames.utils import format_value

logger = logging.getLogger(__name__)


def par(game: ProbOpenGame, other: ProbOpenGame) -> ProbOpenGame:
    """Parallel composition: both games play side by side on paired states."""
    interface = Interface(
        states=tuple(product(game.states, other.states)),
        moves=tuple(product(game.moves, other.moves)),
        utility_alg=ProductAlgebra(game.utility_alg, other.utility_alg),
        coutility_alg=ProductAlgebra(game.coutility_alg, other.coutility_alg),
    )

    def play(sigma, x):
        return (game.play(sigma[0], x[0]), other.play(sigma[1], x[1]))

    def coutility(sigma, x, r):
        return (game.coutility(sigma[0], x[0], r[0]), other.coutility(sigma[1], x[1], r[1]))

    return ProbOpenGame(
        name=f"(par {game.name} {other.name})",
        interface=interface,
        strategies=tuple(product(game.strategies, other.strategies)),
        play=play,
        coutility=coutility,
        eq=ParNode(game, other),
        kind="par",
    )


def par_transformed_tables(game: ProbOpenGame, other: ProbOpenGame, x, k: Mapping,
                           phi: Dist) -> Tuple[Dict, Dict]:
    """
    Utility tables each factor faces when the other plays its marginal.

    Returns:
        (k1, k2): k1 on the left moves, k2 on the right moves
    """
    phi1, phi2 = marginals(phi)
    plays1 = dmap(lambda s: game.play(s, x[0]), phi1)
    plays2 = dmap(lambda s: other.play(s, x[1]), phi2)
    k1 = {
        y: game.utility_alg.expect(dmap(lambda y2: k[(y, y2)][0], plays2))
        for y in game.moves
    }
    k2 = {
        y2: other.utility_alg.expect(dmap(lambda y: k[(y, y2)][1], plays1))
        for y2 in other.moves
    }
    return k1, k2


def par_verdict(game: ProbOpenGame, other: ProbOpenGame, x, k: Mapping, phi: Dist,
                tolerance: Optional[float] = None) -> Verdict:
    name = f"(par {game.name} {other.name})"
    if not is_independent(phi):
        return Verdict(False, "independence", name)
    phi1, phi2 = marginals(phi)
    k1, k2 = par_transformed_tables(game, other, x, k, phi)
    left = evaluate(game, x[0], k1, phi1, tolerance=tolerance)
    if not left.holds:
        return left
    return evaluate(other, x[1], k2, phi2, tolerance=tolerance)


def par_membership(game: ProbOpenGame, other: ProbOpenGame, x, k: Mapping, phi: Dist) -> bool:
    return par_verdict(game, other, x, k, phi).holds


def seq(game: ProbOpenGame, other: ProbOpenGame) -> ProbOpenGame:
    """
    Sequential composition: ``other`` observes the move ``game`` makes.

    Raises:
        InterfaceMismatch: If the move set or utility carrier of ``game`` does
        not match the states or coutility carrier of ``other``
    """
    if set(game.moves) != set(other.states):
        raise InterfaceMismatch(
            f"Cannot sequence {game.name} into {other.name}: moves do not match states"
        )
    if game.utility_alg != other.coutility_alg:
        raise InterfaceMismatch(
            f"Cannot sequence {game.name} into {other.name}: "
            f"utility {game.utility_alg} differs from coutility {other.coutility_alg}"
        )
    interface = Interface(game.states, other.moves, other.utility_alg, game.coutility_alg)

    def play(sigma, x):
        return other.play(sigma[1], game.play(sigma[0], x))

    def coutility(sigma, x, t):
        middle = game.play(sigma[0], x)
        return game.coutility(sigma[0], x, other.coutility(sigma[1], middle, t))

    return ProbOpenGame(
        name=f"(seq {game.name} {other.name})",
        interface=interface,
        strategies=tuple(product(game.strategies, other.strategies)),
        play=play,
        coutility=coutility,
        eq=SeqNode(game, other),
        kind="seq",
    )


def seq_transformed_table(game: ProbOpenGame, other: ProbOpenGame, k: Mapping, phi2: Dist) -> Dict:
    """The utility table the first game faces: expected coutility of the second."""
    return {
        y: game.utility_alg.expect(
            dmap(lambda s: other.coutility(s, y, k[other.play(s, y)]), phi2)
        )
        for y in game.moves
    }


def seq_verdict(game: ProbOpenGame, other: ProbOpenGame, x, k: Mapping, phi: Dist,
                witness: Optional["DecompositionWitness"] = None,
                tolerance: Optional[float] = None) -> Verdict:
    name = f"(seq {game.name} {other.name})"
    if not is_independent(phi):
        return Verdict(False, "independence", name)
    phi1, phi2 = marginals(phi)
    k_first = seq_transformed_table(game, other, k, phi2)
    first = evaluate(game, x, k_first, phi1, tolerance=tolerance)
    if not first.holds:
        return first
    alpha = dmap(lambda s: game.play(s, x), phi1)
    if liftpred_check(other, k, alpha, phi2, witness=witness, tolerance=tolerance):
        return HOLDS
    return Verdict(False, "liftpred", other.name)


def seq_membership(game: ProbOpenGame, other: ProbOpenGame, x, k: Mapping, phi: Dist,
                   witness: Optional["DecompositionWitness"] = None) -> bool:
    return seq_verdict(game, other, x, k, phi, witness=witness).holds


@dataclass(frozen=True)
class DecompositionWitness:
    """One conditional distribution over the second game's strategies per branch."""

    branches: Mapping[Any, Dist]

    def mixture(self, alpha: Dist) -> Dist:
        missing = [y for y in alpha if y not in self.branches]
        if missing:
            raise InvalidWitness(f"Witness has no branch for {format_value(missing[0])}")
        return mixture((w, self.branches[y]) for y, w in alpha.items())


@dataclass(frozen=True)
class FlowNetwork:
    """Branches supply alpha's weights, strategies demand psi's weights.

    ``admissible[i]`` lists the strategies branch i may route weight to.
    """

    supplies: Mapping[Any, Fraction]
    demands: Mapping[Any, Fraction]
    admissible: Mapping[Any, FrozenSet]

    def _scale(self) -> int:
        denominators = [Fraction(v).denominator for v in self.supplies.values()]
        denominators += [Fraction(v).denominator for v in self.demands.values()]
        return lcm(*denominators) if denominators else 1

    def max_flow(self) -> Tuple[Fraction, Dict[Tuple[Any, Any], Fraction]]:
        """
        Exact maximum flow from supplies to demands.

        Capacities are scaled by the common denominator so the flow runs on
        integers; the result is scaled back to rationals.

        Returns:
            (value, routed): total flow and the flow on each (branch, strategy) arc
        """
        scale = self._scale()
        graph = nx.DiGraph()
        source, sink = ("source",), ("sink",)
        graph.add_node(source)
        graph.add_node(sink)
        for branch, supply in self.supplies.items():
            graph.add_edge(source, ("branch", branch), capacity=int(supply * scale))
            for sigma in self.admissible.get(branch, ()):
                if self.demands.get(sigma, 0) > 0:
                    graph.add_edge(("branch", branch), ("strategy", sigma), capacity=scale)
        for sigma, demand in self.demands.items():
            graph.add_edge(("strategy", sigma), sink, capacity=int(demand * scale))
        value, flow = nx.maximum_flow(graph, source, sink, flow_func=edmonds_karp)
        routed = {}
        for branch in self.supplies:
            for node, amount in flow.get(("branch", branch), {}).items():
                if amount and node[0] == "strategy":
                    routed[(branch, node[1])] = Fraction(amount, scale)
        return Fraction(value, scale), routed

    def feasible(self) -> bool:
        value, _ = self.max_flow()
        return value == 1


def transportation_feasible(alpha: Dist, sets: Mapping[Any, FrozenSet], psi: Dist) -> bool:
    """Whether psi splits into per-branch distributions inside ``sets`` weighted by alpha."""
    return FlowNetwork(dict(alpha.items()), dict(psi.items()), sets).feasible()


def transportation_witness(alpha: Dist, sets: Mapping[Any, FrozenSet],
                           psi: Dist) -> Optional[DecompositionWitness]:
    """The per-branch decomposition read off a saturating flow, or None if infeasible."""
    network = FlowNetwork(dict(alpha.items()), dict(psi.items()), sets)
    value, routed = network.max_flow()
    if value != 1:
        return None
    branches = {}
    for branch, supply in alpha.items():
        entries = [(sigma, q / supply) for (b, sigma), q in routed.items() if b == branch]
        branches[branch] = dist_new(entries)
    return DecompositionWitness(branches)


def applicable_liftpred_rule(other: ProbOpenGame, k: Mapping, alpha: Dist,
                             witness: Optional[DecompositionWitness] = None) -> str:
    """Which rule decides the lifting: a (flow), b (point mass), c (witness) or d (none)."""
    if all(support_char_of(other, y, k) is not None for y in alpha):
        return "a"
    if alpha.is_point_mass():
        return "b"
    if witness is not None:
        return "c"
    return "d"


def liftpred_check(other: ProbOpenGame, k: Mapping, alpha: Dist, psi: Dist,
                   witness: Optional[DecompositionWitness] = None,
                   tolerance: Optional[float] = None) -> bool:
    """
    Decides whether psi lies in the lifting of the second game's equilibrium
    predicate along the state distribution alpha.

    Args:
        other: The second game
        k: Utility table on the second game's moves
        alpha: Distribution of states the second game observes
        psi: Candidate distribution over the second game's strategies
        witness: Optional per-branch decomposition to verify
        tolerance: Payoff slack forwarded to point-mass and witness checks

    Returns:
        bool: membership

    Raises:
        InvalidWitness: If the witness mixture differs from psi or a branch fails
        UnsupportedComposition: If no rule can decide membership
    """
    rule = applicable_liftpred_rule(other, k, alpha, witness)
    logger.debug("liftpred rule %s for %s", rule, other.name, extra={"data": {"rule": rule}})
    if rule == "a":
        sets = {y: support_char_of(other, y, k) for y in alpha}
        if tolerance is not None and isinstance(other.eq, SupportChar) and other.eq.near_best:
            sets = {y: other.eq.near_best(y, k, tolerance) for y in alpha}
        return transportation_feasible(alpha, sets, psi)
    if rule == "b":
        return evaluate(other, alpha.point(), k, psi, tolerance=tolerance).holds
    if rule == "c":
        if witness.mixture(alpha) != psi:
            raise InvalidWitness("Witness mixture does not reproduce the candidate distribution")
        for y in alpha:
            if not evaluate(other, y, k, witness.branches[y], tolerance=tolerance).holds:
                raise InvalidWitness(
                    f"Witness branch {format_value(y)} is not an equilibrium of {other.name}"
                )
        return True
    raise UnsupportedComposition(
        f"Cannot decide the lifting for {other.name} over a mixed state distribution; "
        "supply a decomposition witness",
        provenance=other.name,
    )


@dataclass(frozen=True)
class Iso:
    """A bijection given by its forward and backward maps."""

    forward: Callable[[Any], Any]
    backward: Callable[[Any], Any]

    @classmethod
    def identity(cls) -> "Iso":
        return cls(lambda v: v, lambda v: v)

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "Iso":
        inverse = {v: key for key, v in mapping.items()}
        if len(inverse) != len(mapping):
            raise NotBijective("Mapping is not injective")
        return cls(mapping.__getitem__, inverse.__getitem__)

    def check(self, carrier: Sequence, what: str) -> None:
        images = [self.forward(v) for v in carrier]
        if len(set(images)) != len(images):
            raise NotBijective(f"Relabeling of {what} is not injective")
        if any(self.backward(image) != v for v, image in zip(carrier, images)):
            raise NotBijective(f"Relabeling of {what} does not invert")


def relabel(game: ProbOpenGame, iso_sigma: Iso, iso_x: Iso, iso_y: Iso, iso_s: Iso, iso_r: Iso,
            utility_alg: Optional[ConvexAlgebra] = None,
            coutility_alg: Optional[ConvexAlgebra] = None,
            name: Optional[str] = None) -> ProbOpenGame:
    """
    Transports a game along bijections of its strategies, states, moves,
    coutilities (``iso_s`` : S -> S') and utilities (``iso_r`` : R -> R').

    Membership of phi in the result equals membership of the pulled-back
    distribution in ``game``.

    Raises:
        NotBijective: If a finite relabeling is not a bijection
    """
    iso_sigma.check(game.strategies, "strategies")
    iso_x.check(game.states, "states")
    iso_y.check(game.moves, "moves")
    interface = Interface(
        states=tuple(iso_x.forward(x) for x in game.states),
        moves=tuple(iso_y.forward(y) for y in game.moves),
        utility_alg=utility_alg or game.utility_alg,
        coutility_alg=coutility_alg or game.coutility_alg,
    )

    def pull_table(k):
        return {y: iso_r.backward(k[iso_y.forward(y)]) for y in game.moves}

    def play(sigma, x):
        return iso_y.forward(game.play(iso_sigma.backward(sigma), iso_x.backward(x)))

    def coutility(sigma, x, r):
        return iso_s.forward(
            game.coutility(iso_sigma.backward(sigma), iso_x.backward(x), iso_r.backward(r))
        )

    spec = game.eq
    if isinstance(spec, Everything):
        eq = spec
    elif isinstance(spec, SupportChar):
        def best(x, k):
            return frozenset(iso_sigma.forward(s) for s in spec.best(iso_x.backward(x), pull_table(k)))

        near_best = None
        if spec.near_best is not None:
            def near_best(x, k, tolerance):
                return frozenset(
                    iso_sigma.forward(s)
                    for s in spec.near_best(iso_x.backward(x), pull_table(k), tolerance)
                )
        eq = SupportChar(best, near_best)
    else:
        def decide(x, k, phi):
            return evaluate(game, iso_x.backward(x), pull_table(k), dmap(iso_sigma.backward, phi))
        eq = Oracle(decide)

    return ProbOpenGame(
        name=name or game.name,
        interface=interface,
        strategies=tuple(iso_sigma.forward(s) for s in game.strategies),
        play=play,
        coutility=coutility,
        eq=eq,
        kind="relabel" if not isinstance(spec, (Everything, SupportChar)) else game.kind,
        payoff_coord=game.payoff_coord,
    )


@dataclass(frozen=True)
class LiftingCounterexample:
    """Lifting a point mass at a set is not the point-mass image of that set."""

    support_set: Tuple
    candidate: Dist
    in_lifted: bool
    in_unit_image: bool

    @property
    def holds(self) -> bool:
        return self.in_lifted and not self.in_unit_image

    def describe(self) -> str:
        elems = ", ".join(format_value(e) for e in self.support_set)
        return (
            f"set A = {{{elems}}}: lifting the point mass at A admits {self.candidate} "
            f"({'yes' if self.in_lifted else 'no'}), "
            f"point masses of A contain it ({'yes' if self.in_unit_image else 'no'})"
        )


def lifting_unit_counterexample(support_set: Sequence = ("H", "T")) -> LiftingCounterexample:
    """
    Machine-checks that the lifting does not preserve the unit: the lifting
    of the point mass at a set A is every distribution on A, while the unit
    image only holds the point masses of A's elements.
    """
    support_set = tuple(support_set)
    candidate = dist_new((a, Fraction(1, len(support_set))) for a in support_set)
    branch = "A"
    in_lifted = transportation_feasible(eta(branch), {branch: frozenset(support_set)}, candidate)
    in_unit_image = candidate in {eta(a) for a in support_set}
    return LiftingCounterexample(support_set, candidate, in_lifted, in_unit_image)
