"""Equilibrium search for the two shapes the worked examples use.

``support_enumeration`` solves two-player simultaneous games exactly,
``backward_induction`` solves a decision followed by a conditioned
decision, and ``grid_oracle`` brute-forces a rational grid with a float
payoff slack as an independent cross-check.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import sympy

from probgames.compose import seq_verdict
from probgames.dist import Dist, dist_new, ell, eta, uniform
from probgames.errors import GridTooLarge, UnsupportedShape
from probgames.game import (
    ParNode, ProbOpenGame, SeqNode, _children, check_equilibrium, evaluate,
    payoff_of,
)
from probgames.utils import argmax_set, grid_size, simplex_grid

logger = logging.getLogger(__name__)

DEFAULT_MAX_SUPPORT_ENUM_MOVES = 4
DEFAULT_EPSILON = 1e-9
DEFAULT_MAX_GRID_POINTS = 10 ** 6


@dataclass
class SupportEnumeration:
    equilibria: List[Tuple[Dist, Dist]] = field(default_factory=list)
    degenerate: bool = False


def _two_decisions(game: ProbOpenGame, max_moves: int) -> Tuple[ProbOpenGame, ProbOpenGame]:
    spec = game.eq
    if not isinstance(spec, ParNode):
        raise UnsupportedShape(f"Support enumeration needs a parallel pair, got {game.name}")
    left, right = spec.left, spec.right
    if left.kind != "decision" or right.kind != "decision":
        raise UnsupportedShape("Support enumeration needs two decision games")
    if len(left.moves) > max_moves or len(right.moves) > max_moves:
        raise UnsupportedShape(f"Support enumeration is limited to {max_moves} moves per player")
    return left, right


def _payoff_matrices(left: ProbOpenGame, right: ProbOpenGame, k) -> Tuple[List[List[Fraction]], List[List[Fraction]]]:
    a = [[Fraction(payoff_of(k[(y, z)][0], left.payoff_coord)) for z in right.moves] for y in left.moves]
    b = [[Fraction(payoff_of(k[(y, z)][1], right.payoff_coord)) for z in right.moves] for y in left.moves]
    return a, b


def _to_fraction(value) -> Fraction:
    value = sympy.nsimplify(value)
    return Fraction(int(value.p), int(value.q))


def _solve(rows: List[List[Fraction]], rhs: List[Fraction]) -> Optional[Tuple[List[Fraction], int]]:
    """Exact Gauss-Jordan solve; returns (solution at free params = 0, free count) or None."""
    matrix = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in rows])
    vector = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in rhs])
    try:
        solution, params = matrix.gauss_jordan_solve(vector)
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs({p: 0 for p in params})
    return [_to_fraction(v) for v in solution], params.shape[0]


def _polytope_vertices(eq_rows, eq_rhs, ineq_rows, ineq_rhs) -> List[Tuple[Fraction, ...]]:
    """
    Vertices of {z : eq_rows z = eq_rhs, ineq_rows z <= ineq_rhs}.

    A vertex makes exactly as many extra inequalities tight as the equality
    system has free parameters, with a unique resulting solution.
    """
    base = _solve(eq_rows, eq_rhs)
    if base is None:
        return []
    _, free = base

    def feasible(z):
        return all(sum(c * v for c, v in zip(row, z)) <= bound for row, bound in zip(ineq_rows, ineq_rhs))

    vertices = []
    for tight in combinations(range(len(ineq_rows)), free):
        rows = eq_rows + [ineq_rows[i] for i in tight]
        rhs = eq_rhs + [ineq_rhs[i] for i in tight]
        solved = _solve(rows, rhs)
        if solved is None or solved[1]:
            continue
        z = tuple(solved[0])
        if feasible(z) and z not in vertices:
            vertices.append(z)
    return vertices


def _indifference_vertices(payoff: List[List[Fraction]], own: Sequence[int],
                           opponent: Sequence[int], n_own: int) -> List[Dict[int, Fraction]]:
    """
    Opponent mixtures over ``opponent`` that make every row in ``own`` payoff-equal
    and no other row strictly better. ``payoff[i][j]`` is the payoff of own move i
    against opponent move j.
    """
    width = len(opponent) + 1
    eq_rows = [[payoff[i][j] for j in opponent] + [Fraction(-1)] for i in own]
    eq_rhs = [Fraction(0)] * len(own)
    eq_rows.append([Fraction(1)] * len(opponent) + [Fraction(0)])
    eq_rhs.append(Fraction(1))
    ineq_rows, ineq_rhs = [], []
    for j in range(len(opponent)):
        ineq_rows.append([Fraction(-1) if c == j else Fraction(0) for c in range(width)])
        ineq_rhs.append(Fraction(0))
    for i in range(n_own):
        if i not in own:
            ineq_rows.append([payoff[i][j] for j in opponent] + [Fraction(-1)])
            ineq_rhs.append(Fraction(0))
    vertices = _polytope_vertices(eq_rows, eq_rhs, ineq_rows, ineq_rhs)
    return [{j: z[c] for c, j in enumerate(opponent)} for z in vertices]


def _subsets(n: int):
    for size in range(1, n + 1):
        yield from combinations(range(n), size)


def support_enumeration(game: ProbOpenGame, x, k,
                        max_moves: int = DEFAULT_MAX_SUPPORT_ENUM_MOVES) -> SupportEnumeration:
    """
    All equilibria of two simultaneous decision games, found by solving the
    exact indifference system of every support pair.

    Degenerate support pairs contribute the vertices of their solution
    polytope and set the ``degenerate`` flag.

    Args:
        game: A parallel composition of two decision games
        x: Joint state
        k: Utility table on joint moves
        max_moves: Largest move set handled per player

    Returns:
        SupportEnumeration: verified equilibria as (left, right) mixtures

    Raises:
        UnsupportedShape: If the game is not two decision games in parallel
    """
    left, right = _two_decisions(game, max_moves)
    a, b = _payoff_matrices(left, right, k)
    transposed_b = [list(col) for col in zip(*b)]
    m, n = len(left.moves), len(right.moves)
    result = SupportEnumeration()
    for rows in _subsets(m):
        for cols in _subsets(n):
            right_mixes = _indifference_vertices(a, rows, cols, m)
            if not right_mixes:
                continue
            left_mixes = _indifference_vertices(transposed_b, cols, rows, n)
            if not left_mixes:
                continue
            if len(right_mixes) > 1 or len(left_mixes) > 1:
                result.degenerate = True
            for p, q in product(left_mixes, right_mixes):
                phi1 = dist_new((left.moves[i], w) for i, w in p.items())
                phi2 = dist_new((right.moves[j], w) for j, w in q.items())
                if (phi1, phi2) in result.equilibria:
                    continue
                if not check_equilibrium(game, x, k, ell(phi1, phi2)):
                    logger.warning("support enumeration produced an unverified profile",
                                   extra={"data": {"left": str(phi1), "right": str(phi2)}})
                    continue
                result.equilibria.append((phi1, phi2))
    result.equilibria.sort()
    logger.info("support enumeration finished", extra={"data": {
        "equilibria": len(result.equilibria), "degenerate": result.degenerate}})
    return result


def backward_induction(game: ProbOpenGame, x, k) -> List[Tuple[Dist, Dist]]:
    """
    Subgame-perfect profiles of a decision followed by a conditioned decision.

    The second mover's per-branch argmax sets give the subgame-perfect
    functions; for each one the first mover maximizes the induced table.
    Ties at the first stage add their uniform mixture.

    Raises:
        UnsupportedShape: If the game is not that sequential shape
    """
    spec = game.eq
    if not isinstance(spec, SeqNode) or spec.first.kind != "decision" or spec.second.kind != "conditioned":
        raise UnsupportedShape("Backward induction needs a decision game followed by a conditioned game")
    first, second = spec.first, spec.second
    if set(second.states) != set(first.moves):
        raise UnsupportedShape("The second game must observe the first game's moves")

    replies = {
        obs: set(argmax_set(second.actions, lambda mv: payoff_of(k[(obs, mv)], second.payoff_coord)))
        for obs in second.states
    }
    perfect = [g for g in second.strategies if all(g(obs) in replies[obs] for obs in second.states)]
    profiles: List[Tuple[Dist, Dist]] = []
    for g in perfect:
        induced = {y: second.coutility(g, y, k[second.play(g, y)]) for y in first.moves}
        openings = argmax_set(first.moves, lambda y: payoff_of(induced[y], first.payoff_coord))
        found = [(eta(y), eta(g)) for y in openings]
        if len(openings) > 1:
            found.append((uniform(openings), eta(g)))
        for phi1, phi2 in found:
            if (phi1, phi2) in profiles:
                continue
            if seq_verdict(first, second, x, k, ell(phi1, phi2)).holds:
                profiles.append((phi1, phi2))
            else:
                logger.warning("backward induction produced an unverified profile",
                               extra={"data": {"first": str(phi1), "second": str(phi2)}})
    profiles.sort()
    logger.info("backward induction finished", extra={"data": {"equilibria": len(profiles)}})
    return profiles


def _grid(game: ProbOpenGame, resolution: int) -> List[Dist]:
    children = _children(game)
    if children is None:
        return [
            dist_new((s, w) for s, w in zip(game.strategies, weights) if w)
            for weights in simplex_grid(len(game.strategies), resolution)
        ]
    lefts, rights = _grid(children[0], resolution), _grid(children[1], resolution)
    return [ell(a, b) for a in lefts for b in rights]


def _grid_count(game: ProbOpenGame, resolution: int) -> int:
    children = _children(game)
    if children is None:
        return grid_size(len(game.strategies), resolution)
    return _grid_count(children[0], resolution) * _grid_count(children[1], resolution)


def _decision_pair_oracle(left: ProbOpenGame, right: ProbOpenGame, k, resolution: int,
                          epsilon: float) -> List[Dist]:
    a = np.array([[float(payoff_of(k[(y, z)][0], left.payoff_coord)) for z in right.moves]
                  for y in left.moves])
    b = np.array([[float(payoff_of(k[(y, z)][1], right.payoff_coord)) for z in right.moves]
                  for y in left.moves])
    left_grid = simplex_grid(len(left.moves), resolution)
    right_grid = simplex_grid(len(right.moves), resolution)
    p = np.array([[float(w) for w in point] for point in left_grid])
    q = np.array([[float(w) for w in point] for point in right_grid])

    left_payoffs = q @ a.T
    left_best = left_payoffs >= left_payoffs.max(axis=1, keepdims=True) - epsilon
    right_payoffs = p @ b
    right_best = right_payoffs >= right_payoffs.max(axis=1, keepdims=True) - epsilon

    # [i, j]: left grid point i plays only best responses to right grid point j
    left_ok = ~((p > 0)[:, None, :] & ~left_best[None, :, :]).any(axis=2)
    right_ok = ~((q > 0)[None, :, :] & ~right_best[:, None, :]).any(axis=2)
    members = np.argwhere(left_ok & right_ok)

    def to_dist(moves, weights):
        return dist_new((mv, w) for mv, w in zip(moves, weights) if w)

    return [ell(to_dist(left.moves, left_grid[i]), to_dist(right.moves, right_grid[j]))
            for i, j in members]


def grid_oracle(game: ProbOpenGame, x, k, resolution: int, epsilon: float = DEFAULT_EPSILON,
                max_points: int = DEFAULT_MAX_GRID_POINTS) -> List[Dist]:
    """
    Approximate equilibria on the rational grid with the given denominator.

    Composite games are gridded per component and joined independently.
    Best responses accept any move within ``epsilon`` of the best payoff.

    Raises:
        GridTooLarge: If the grid has more than ``max_points`` points
    """
    count = _grid_count(game, resolution)
    if count > max_points:
        raise GridTooLarge(f"Grid of {count} points exceeds the limit of {max_points}")
    spec = game.eq
    if isinstance(spec, ParNode) and spec.left.kind == "decision" and spec.right.kind == "decision":
        found = _decision_pair_oracle(spec.left, spec.right, k, resolution, epsilon)
    else:
        found = [phi for phi in _grid(game, resolution)
                 if evaluate(game, x, k, phi, tolerance=epsilon).holds]
    found.sort()
    logger.info("grid oracle finished", extra={"data": {
        "resolution": resolution, "points": count, "members": len(found)}})
    return found


def verify(game: ProbOpenGame, x, k, candidate: Dist, witness=None) -> bool:
    return check_equilibrium(game, x, k, candidate, witness=witness)
