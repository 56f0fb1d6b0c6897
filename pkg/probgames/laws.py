"""Seeded generation of small games and the executable law suite.

Every law runs once per generated case and records how many comparisons
it made, so a vacuous run is visible in the report. Games are compared
extensionally after relabeling along the canonical isomorphisms.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence
import json
import logging
import random

from probgames.compose import (
    Iso, applicable_liftpred_rule, lifting_unit_counterexample, par, relabel, seq,
    transportation_feasible, transportation_witness,
)
from probgames.determinise import (
    GameMorphism, check_adjunction_triangles, check_determinise_dk, check_determinise_otimes,
    compose_morphisms, hom_bijection_check, identity_morphism, morphisms_equal, psi,
    pure_decision_game, theta, theta_morphism, psi_morphism,
)
from probgames.dist import (
    ConvexAlgebra, Dist, ProductAlgebra, RationalVec, VectorAlgebra, audit, dist_new, dmap, ell,
    eta, is_independent, join, kleisli, marginals,
)
from probgames.errors import UnsupportedComposition
from probgames.game import (
    ProbOpenGame, SeqNode, candidate_profiles, conditioned_decision_game, decision_game,
    evaluate, identity_game, sample_utility_tables, structural_game, unit_game,
)
from probgames.utils import UNIT, format_value, simplex_grid

logger = logging.getLogger(__name__)

SHAPES = ("atomic", "conditioned", "identity", "structural")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 7
    max_set_size: int = 3
    max_payoff_abs: int = 3
    cases: int = 100
    max_candidates: int = 12
    k_tables: int = 3
    morphism_tables: int = 16
    dim: int = 2


def _labels(prefix: str, n: int) -> List[str]:
    return [f"{prefix}{i}" for i in range(n)]


def _size(cfg: GenConfig, rng: random.Random) -> int:
    top = max(1, cfg.max_set_size)
    return rng.randint(min(2, top), top)


def gen_game(cfg: GenConfig, shape: str, rng: Optional[random.Random] = None,
             states: Optional[Sequence] = None) -> ProbOpenGame:
    """
    Generates a small well-formed game of the requested shape.

    Args:
        cfg: Generation bounds
        shape: One of "atomic", "conditioned", "identity", "structural"
        rng: Random source; a fresh one seeded from cfg when omitted
        states: Carrier for shapes with states (observations for conditioned games)

    Returns:
        ProbOpenGame: The generated game
    """
    rng = rng or random.Random(cfg.seed)
    alg = VectorAlgebra(cfg.dim)
    tag = rng.randrange(1000)
    if shape == "atomic":
        return decision_game(_labels("m", _size(cfg, rng)), rng.randrange(cfg.dim), alg, name=f"d{tag}")
    if shape == "conditioned":
        observations = list(states) if states is not None else _labels("o", _size(cfg, rng))
        room = max(1, 16 // len(observations))
        actions = _labels("a", min(_size(cfg, rng), room))
        return conditioned_decision_game(observations, actions, rng.randrange(cfg.dim), alg, name=f"c{tag}")
    if shape == "identity":
        carrier = list(states) if states is not None else _labels("s", _size(cfg, rng))
        return identity_game(carrier, alg, name=f"id{tag}")
    if shape == "structural":
        carrier = list(states) if states is not None else _labels("s", _size(cfg, rng))
        shuffled = list(carrier)
        rng.shuffle(shuffled)
        coords = list(range(cfg.dim))
        rng.shuffle(coords)
        return structural_game(dict(zip(carrier, shuffled)),
                               lambda r: RationalVec(r[i] for i in coords),
                               carrier, alg, name=f"st{tag}")
    raise ValueError(f"Unknown game shape: {shape}")


def _random_dist(rng: random.Random, elems: Sequence) -> Dist:
    weights = [rng.randint(0, 4) for _ in elems]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    return dist_new((e, Fraction(w, total)) for e, w in zip(elems, weights) if w)


def _random_table(moves: Sequence, alg: ConvexAlgebra, rng: random.Random, bound: int) -> Dict:
    return {y: alg.random_value(rng, bound) for y in moves}


def _show_table(k: Dict) -> Dict[str, str]:
    return {format_value(y): format_value(v) for y, v in k.items()}


class LawTally:
    """Comparison counts, failures and skips of one law on one case."""

    def __init__(self):
        self.comparisons = 0
        self.candidates = 0
        self.failures: List[Dict[str, Any]] = []
        self.skips: List[Dict[str, Any]] = []
        self.rules = set()

    def check(self, ok: bool, detail: Dict[str, Any]) -> bool:
        self.comparisons += 1
        if not ok:
            self.failures.append(detail)
        return ok

    def skip(self, exc: UnsupportedComposition, detail: Dict[str, Any]) -> None:
        self.skips.append(dict(detail, provenance=exc.provenance, reason=str(exc)))


@dataclass
class LawResult:
    law: str
    cases: int = 0
    comparisons: int = 0
    candidates: int = 0
    cases_with_skips: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    skips: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def skipped_candidates(self) -> int:
        return sum(1 for entry in self.skips if "profile" in entry)

    @property
    def skip_rate(self) -> float:
        """Share of membership candidates that no lifting rule could decide."""
        return self.skipped_candidates / self.candidates if self.candidates else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "law": self.law,
            "cases": self.cases,
            "comparisons": self.comparisons,
            "candidates": self.candidates,
            "skip_rate": round(self.skip_rate, 4),
            "cases_with_skips": self.cases_with_skips,
            "failures": self.failures,
            "skips": self.skips,
        }


@dataclass
class LawReport:
    seed: int
    cases: int
    laws: Dict[str, LawResult] = field(default_factory=dict)
    liftpred_rules: Counter = field(default_factory=Counter)
    non_unit_witness: Optional[Dict[str, Any]] = None

    @property
    def comparisons(self) -> int:
        return sum(result.comparisons for result in self.laws.values())

    @property
    def failure_count(self) -> int:
        return sum(len(result.failures) for result in self.laws.values())

    @property
    def candidate_skips(self) -> int:
        return sum(result.skipped_candidates for result in self.laws.values())

    @property
    def ok(self) -> bool:
        return self.failure_count == 0

    @property
    def vacuous(self) -> bool:
        return self.comparisons == 0

    def record(self, law: str, case: int, tally: LawTally) -> None:
        result = self.laws.setdefault(law, LawResult(law))
        result.cases += 1
        result.comparisons += tally.comparisons
        result.candidates += tally.candidates
        result.failures.extend(dict(detail, case=case) for detail in tally.failures)
        result.skips.extend(dict(entry, case=case) for entry in tally.skips)
        if tally.skips:
            result.cases_with_skips += 1
        for rule in tally.rules:
            self.liftpred_rules[rule] += 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "result": "pass" if self.ok else "fail",
            "seed": self.seed,
            "cases": self.cases,
            "comparisons": self.comparisons,
            "vacuous": self.vacuous,
            "liftpred_rules": dict(sorted(self.liftpred_rules.items())),
            "candidate_skips": self.candidate_skips,
            "non_unit_witness": self.non_unit_witness,
            "laws": [result.to_dict() for result in self.laws.values()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"law suite: seed {self.seed}, {self.cases} cases, {self.comparisons} comparisons"]
        for result in self.laws.values():
            status = "ok" if not result.failures else f"{len(result.failures)} FAILURES"
            lines.append(
                f"  {result.law:<22} cases={result.cases:<4} comparisons={result.comparisons:<6} "
                f"skips={len(result.skips):<4} {status}"
            )
            for failure in result.failures[:5]:
                lines.append(f"    counterexample: {json.dumps(failure, sort_keys=True)}")
        rules = ", ".join(f"{rule}={count}" for rule, count in sorted(self.liftpred_rules.items()))
        lines.append(f"  liftpred rules (cases): {rules or 'none'}")
        lines.append(f"  undecidable candidates skipped: {self.candidate_skips}")
        for result in self.laws.values():
            if result.skipped_candidates:
                lines.append(
                    f"    {result.law}: {result.skipped_candidates} of {result.candidates} candidates "
                    f"({result.skip_rate:.1%}) in {result.cases_with_skips} cases, "
                    f"first at {result.skips[0]['provenance']}"
                )
        if self.non_unit_witness:
            lines.append(f"  non-unit witness: {self.non_unit_witness['description']}")
        if self.vacuous:
            lines.append("  warning: no comparisons were made, the pass is vacuous")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def _top_rule(game: ProbOpenGame, x, k, phi: Dist) -> Optional[str]:
    spec = game.eq
    if not isinstance(spec, SeqNode):
        return None
    first_marginal, _ = marginals(phi)
    alpha = dmap(lambda s: spec.first.play(s, x), first_marginal)
    return applicable_liftpred_rule(spec.second, k, alpha)


def compare_games(a: ProbOpenGame, b: ProbOpenGame, tally: LawTally, cfg: GenConfig,
                  rng: random.Random, what: str, membership: bool = True,
                  traced: Sequence = (), candidates: Optional[Sequence[Dist]] = None) -> None:
    """
    Extensional comparison: interfaces, play and coutility pointwise, then
    membership at every state over seeded utility tables and grid candidates.

    ``traced`` lists (game, iso) pairs whose top-level lifting rule is
    recorded; iso pulls the compared candidate back to that game.
    ``candidates`` replaces the default candidate list of ``b``. A candidate
    neither side can decide is recorded as a skip with its provenance.
    """
    same = (
        set(a.states) == set(b.states) and set(a.moves) == set(b.moves)
        and set(a.strategies) == set(b.strategies)
        and a.utility_alg == b.utility_alg and a.coutility_alg == b.coutility_alg
    )
    if not tally.check(same, {"what": what, "check": "interface"}):
        return

    mismatch = None
    for sigma, x in product(b.strategies, b.states):
        if a.play(sigma, x) != b.play(sigma, x):
            mismatch = {"strategy": format_value(sigma), "state": format_value(x)}
            break
    tally.check(mismatch is None, {"what": what, "check": "play", "at": mismatch})

    mismatch = None
    samples = b.utility_alg.samples()[:4]
    for sigma, x, r in product(b.strategies, b.states, samples):
        if a.coutility(sigma, x, r) != b.coutility(sigma, x, r):
            mismatch = {"strategy": format_value(sigma), "state": format_value(x), "utility": format_value(r)}
            break
    tally.check(mismatch is None, {"what": what, "check": "coutility", "at": mismatch})

    if not membership:
        return
    tables = sample_utility_tables(b.moves, b.utility_alg, seed=rng.randrange(1 << 30),
                                   limit=cfg.k_tables, bound=cfg.max_payoff_abs)
    if candidates is None:
        candidates = candidate_profiles(b, 4, limit=cfg.max_candidates, rng=rng)
    for x in b.states:
        for k in tables:
            for phi in candidates:
                for game, iso in traced:
                    rule = _top_rule(game, x, k, dmap(iso.backward, phi) if iso else phi)
                    if rule:
                        tally.rules.add(rule)
                tally.candidates += 1
                try:
                    left = evaluate(a, x, k, phi)
                    right = evaluate(b, x, k, phi)
                except UnsupportedComposition as exc:
                    tally.skip(exc, {"what": what, "state": format_value(x), "profile": str(phi)})
                    continue
                tally.check(left.holds == right.holds, {
                    "what": what, "check": "membership", "state": format_value(x),
                    "utility": _show_table(k), "profile": str(phi),
                    "left": left.holds, "right": right.holds,
                })


def _pair_iso(forward: Callable, backward: Callable) -> Iso:
    return Iso(forward, backward)


_ASSOC = _pair_iso(lambda v: (v[0][0], (v[0][1], v[1])), lambda v: ((v[0], v[1][0]), v[1][1]))
_SWAP = _pair_iso(lambda v: (v[1], v[0]), lambda v: (v[1], v[0]))
_INTERCHANGE = _pair_iso(lambda v: ((v[0][0], v[1][0]), (v[0][1], v[1][1])),
                         lambda v: ((v[0][0], v[1][0]), (v[0][1], v[1][1])))
_ID = Iso.identity()


def law_monad(cfg, rng, tally, par_impl):
    elems = _labels("e", _size(cfg, rng))
    d = _random_dist(rng, elems)
    tally.check(join(eta(d)) == d, {"law": "left unit", "dist": str(d)})
    tally.check(join(dmap(eta, d)) == d, {"law": "right unit", "dist": str(d)})
    inner = [_random_dist(rng, elems) for _ in range(3)]
    middle = [_random_dist(rng, inner) for _ in range(2)]
    ddd = _random_dist(rng, middle)
    tally.check(join(join(ddd)) == join(dmap(join, ddd)), {"law": "associativity", "dist": str(ddd)})
    k = dict(zip(elems, [_random_dist(rng, elems) for _ in elems]))
    tally.check(kleisli(k.__getitem__, eta(elems[0])) == k[elems[0]], {"law": "kleisli unit"})
    tally.check(all(audit(v) for v in (d, join(ddd), kleisli(k.__getitem__, d))), {"law": "normalization"})


def law_strength(cfg, rng, tally, par_impl):
    da = _random_dist(rng, _labels("a", _size(cfg, rng)))
    db = _random_dist(rng, _labels("b", _size(cfg, rng)))
    joint = ell(da, db)
    tally.check(joint == dmap(lambda p: (p[1], p[0]), ell(db, da)), {"law": "commutativity", "left": str(da), "right": str(db)})
    tally.check(marginals(joint) == (da, db), {"law": "marginals", "joint": str(joint)})
    tally.check(is_independent(joint) and ell(*marginals(joint)) == joint, {"law": "independence"})


def law_algebra(cfg, rng, tally, par_impl):
    alg = VectorAlgebra(cfg.dim)
    values = [alg.random_value(rng, cfg.max_payoff_abs) for _ in range(3)]
    tally.check(alg.expect(eta(values[0])) == values[0], {"law": "unit", "value": format_value(values[0])})
    dists = [_random_dist(rng, values) for _ in range(2)]
    dd = _random_dist(rng, dists)
    tally.check(alg.expect(join(dd)) == alg.expect(dmap(alg.expect, dd)), {"law": "associativity", "dist": str(dd)})
    pair_alg = ProductAlgebra(alg, alg)
    pairs = [pair_alg.random_value(rng, cfg.max_payoff_abs) for _ in range(2)]
    pd = _random_dist(rng, pairs)
    tally.check(pair_alg.expect(eta(pairs[0])) == pairs[0], {"law": "product unit"})
    tally.check(pair_alg.expect(join(eta(pd))) == pair_alg.expect(pd), {"law": "product associativity"})


def law_par_associativity(cfg, rng, tally, par_impl):
    shapes = ("atomic", "atomic", "identity", "structural")
    g1, g2, g3 = (gen_game(cfg, rng.choice(shapes), rng) for _ in range(3))
    left = par_impl(par_impl(g1, g2), g3)
    right = par_impl(g1, par_impl(g2, g3))
    moved = relabel(left, _ASSOC, _ASSOC, _ASSOC, _ASSOC, _ASSOC,
                    utility_alg=right.utility_alg, coutility_alg=right.coutility_alg)
    compare_games(moved, right, tally, cfg, rng, f"{left.name} vs {right.name}")


def seq_law_candidates(chain: ProbOpenGame, cfg: GenConfig, rng: random.Random) -> List[Dist]:
    """
    Membership candidates for a chain ``(seq g1 rest)``.

    Candidates whose g1 marginal is a point mass are decidable under both
    bracketings, while the others may need a witness once ``rest`` is a
    composite. Those open candidates are kept below a fifth of the list
    and at most ``max_candidates // 6`` of it.
    """
    firsts = candidate_profiles(chain.eq.first, 4, limit=cfg.max_candidates, rng=rng)
    rests = candidate_profiles(chain.eq.second, 4, limit=cfg.max_candidates, rng=rng)
    share = max(1, cfg.max_candidates // 6)
    settled = [ell(a, b) for a in firsts if a.is_point_mass() for b in rests]
    if len(settled) > cfg.max_candidates - share:
        settled = rng.sample(settled, max(1, cfg.max_candidates - share))
    unsettled = [(a, b) for a in firsts if not a.is_point_mass() for b in rests]
    count = min(len(unsettled), share, (len(settled) - 1) // 4)
    return settled + [ell(a, b) for a, b in rng.sample(unsettled, count)]


def law_seq_associativity(cfg, rng, tally, par_impl):
    g1 = gen_game(cfg, rng.choice(("atomic", "atomic", "identity", "structural")), rng)
    g2 = gen_game(cfg, "conditioned", rng, states=g1.moves)
    g3 = gen_game(cfg, "conditioned", rng, states=g2.moves)
    left = seq(seq(g1, g2), g3)
    right = seq(g1, seq(g2, g3))
    moved = relabel(left, _ASSOC, _ID, _ID, _ID, _ID)
    compare_games(moved, right, tally, cfg, rng, f"{left.name} vs {right.name}",
                  traced=((left, _ASSOC), (right, None)),
                  candidates=seq_law_candidates(right, cfg, rng))


def law_identity(cfg, rng, tally, par_impl):
    g = gen_game(cfg, rng.choice(("atomic", "conditioned")), rng)
    before = seq(identity_game(g.states, g.coutility_alg), g)
    drop_left = Iso(lambda v: v[1], lambda s: (UNIT, s))
    compare_games(relabel(before, drop_left, _ID, _ID, _ID, _ID), g, tally, cfg, rng,
                  f"{before.name} vs {g.name}", traced=((before, drop_left),))
    after = seq(g, identity_game(g.moves, g.utility_alg))
    drop_right = Iso(lambda v: v[0], lambda s: (s, UNIT))
    compare_games(relabel(after, drop_right, _ID, _ID, _ID, _ID), g, tally, cfg, rng,
                  f"{after.name} vs {g.name}", traced=((after, drop_right),))


def law_unit(cfg, rng, tally, par_impl):
    g = gen_game(cfg, rng.choice(("atomic", "conditioned", "identity")), rng)
    left_unitor = Iso(lambda v: v[1], lambda v: (UNIT, v))
    right_unitor = Iso(lambda v: v[0], lambda v: (v, UNIT))
    for composite, unitor in ((par(unit_game(), g), left_unitor), (par(g, unit_game()), right_unitor)):
        moved = relabel(composite, unitor, unitor, unitor, unitor, unitor,
                        utility_alg=g.utility_alg, coutility_alg=g.coutility_alg)
        compare_games(moved, g, tally, cfg, rng, f"{composite.name} vs {g.name}")


def law_bifunctor(cfg, rng, tally, par_impl):
    g1, g2 = gen_game(cfg, "atomic", rng), gen_game(cfg, "atomic", rng)
    h1 = gen_game(cfg, "conditioned", rng, states=g1.moves)
    h2 = gen_game(cfg, "conditioned", rng, states=g2.moves)
    lhs = seq(par(g1, g2), par(h1, h2))
    rhs = par(seq(g1, h1), seq(g2, h2))
    moved = relabel(lhs, _INTERCHANGE, _ID, _ID, _ID, _ID,
                    utility_alg=rhs.utility_alg, coutility_alg=rhs.coutility_alg)
    compare_games(moved, rhs, tally, cfg, rng, f"{lhs.name} vs {rhs.name}", membership=False)


def law_symmetry(cfg, rng, tally, par_impl):
    shapes = ("atomic", "identity", "structural")
    g1, g2 = gen_game(cfg, rng.choice(shapes), rng), gen_game(cfg, rng.choice(shapes), rng)
    swapped = par(g2, g1)
    moved = relabel(par(g1, g2), _SWAP, _SWAP, _SWAP, _SWAP, _SWAP,
                    utility_alg=swapped.utility_alg, coutility_alg=swapped.coutility_alg)
    compare_games(moved, swapped, tally, cfg, rng, f"braid of (par {g1.name} {g2.name})")

    swap = _SWAP.forward
    there = structural_game(swap, swap, tuple(product(g1.states, g2.states)),
                            utility_alg=ProductAlgebra(g2.coutility_alg, g1.coutility_alg),
                            coutility_alg=ProductAlgebra(g1.coutility_alg, g2.coutility_alg),
                            name="braid")
    back = structural_game(swap, swap, there.moves,
                           utility_alg=ProductAlgebra(g1.coutility_alg, g2.coutility_alg),
                           coutility_alg=there.utility_alg, name="braid")
    twice = seq(there, back)
    samples = twice.utility_alg.samples()[:4]
    involutive = all(twice.play((UNIT, UNIT), x) == x for x in twice.states) and all(
        twice.coutility((UNIT, UNIT), x, r) == r for x in twice.states for r in samples
    )
    tally.check(involutive, {"check": "braid twice is the identity"})


def law_lifting_naturality(cfg, rng, tally, par_impl):
    branches = _labels("y", rng.randint(1, 3))
    alpha = _random_dist(rng, branches)
    strategies = _labels("s", rng.randint(1, 3))
    sets = {y: frozenset(rng.sample(strategies, rng.randint(1, len(strategies)))) for y in branches}
    targets = _labels("t", rng.randint(1, 3))
    f = {s: rng.choice(targets) for s in strategies}
    pushed_sets = {y: frozenset(f[s] for s in sets[y]) for y in branches}

    for weights in simplex_grid(len(strategies), 6):
        psi_ = dist_new((s, w) for s, w in zip(strategies, weights) if w)
        lifted = transportation_feasible(alpha, sets, psi_)
        image = transportation_feasible(alpha, pushed_sets, dmap(f.__getitem__, psi_))
        tally.check(not lifted or image, {"law": "push after lift", "psi": str(psi_)})

    for weights in simplex_grid(len(targets), 6):
        target = dist_new((t, w) for t, w in zip(targets, weights) if w)
        witness = transportation_witness(alpha, pushed_sets, target)
        if witness is None:
            continue
        preimage: Dict[str, Fraction] = {}
        for y, p in alpha.items():
            for t, q in witness.branches[y].items():
                source = next(s for s in strategies if s in sets[y] and f[s] == t)
                preimage[source] = preimage.get(source, Fraction(0)) + p * q
        lifted = dist_new(preimage.items())
        ok = dmap(f.__getitem__, lifted) == target and transportation_feasible(alpha, sets, lifted)
        tally.check(ok, {"law": "lift after push", "target": str(target)})

    sources = _labels("z", rng.randint(1, 3))
    g = {z: rng.choice(branches) for z in sources}
    alpha0 = _random_dist(rng, sources)
    pulled_sets = {z: sets[g[z]] for z in sources}
    for weights in simplex_grid(len(strategies), 6):
        psi_ = dist_new((s, w) for s, w in zip(strategies, weights) if w)
        tally.check(
            transportation_feasible(alpha0, pulled_sets, psi_)
            == transportation_feasible(dmap(g.__getitem__, alpha0), sets, psi_),
            {"law": "input naturality", "psi": str(psi_)},
        )


def law_determinise_dk(cfg, rng, tally, par_impl):
    g = gen_game(cfg, rng.choice(("atomic", "conditioned")), rng)
    x = rng.choice(g.states)
    k = _random_table(g.moves, g.utility_alg, rng, cfg.max_payoff_abs)
    for phi in candidate_profiles(g, 4, limit=cfg.max_candidates, rng=rng):
        tally.check(check_determinise_dk(g, x, k, phi),
                    {"game": g.name, "utility": _show_table(k), "profile": str(phi)})


def law_determinise_otimes(cfg, rng, tally, par_impl):
    g1, g2 = gen_game(cfg, "atomic", rng), gen_game(cfg, "atomic", rng)
    pair_alg = ProductAlgebra(g1.utility_alg, g2.utility_alg)
    k = {}
    for y in product(g1.moves, g2.moves):
        values = [pair_alg.random_value(rng, cfg.max_payoff_abs) for _ in range(rng.randint(1, 2))]
        k[y] = _random_dist(rng, values)
    lefts = candidate_profiles(g1, 2, limit=4, rng=rng)
    rights = candidate_profiles(g2, 2, limit=4, rng=rng)
    for phi1, phi2 in product(lefts[:3], rights[:3]):
        tally.check(check_determinise_otimes(g1, g2, (phi1, phi2), (UNIT, UNIT), k),
                    {"left": g1.name, "right": g2.name, "profile": f"{phi1} x {phi2}"})


def law_adjunction(cfg, rng, tally, par_impl):
    alg = VectorAlgebra(cfg.dim)
    moves = _labels("m", _size(cfg, rng))
    pure = pure_decision_game(moves, rng.randrange(cfg.dim), alg, name="pure")
    same_shape = decision_game(moves, rng.randrange(cfg.dim), alg, name="prob")
    other = same_shape if rng.random() < 0.5 else par(same_shape, gen_game(cfg, "atomic", rng))

    result = check_adjunction_triangles(pure, other, table_count=cfg.morphism_tables)
    tally.check(result.ok, {"check": "triangles", "failures": list(result.failures)})

    round_trip = psi(theta(pure))
    tables = sample_utility_tables(moves, alg, seed=rng.randrange(1 << 30),
                                   limit=cfg.morphism_tables)
    same = all(round_trip.play(s, UNIT) == pure.play(s, UNIT) for s in moves) and all(
        round_trip.member(UNIT, k, s) == pure.member(UNIT, k, s) for k in tables for s in moves
    )
    tally.check(same, {"check": "psi after theta"})

    perm = list(moves)
    rng.shuffle(perm)
    m1 = GameMorphism(h=dict(zip(moves, perm)).__getitem__)
    m2 = GameMorphism(h=dict(zip(perm, moves)).__getitem__)
    composed = compose_morphisms(m1, m2)
    tally.check(
        morphisms_equal(theta_morphism(composed), compose_morphisms(theta_morphism(m1), theta_morphism(m2)), pure, pure)
        and morphisms_equal(psi_morphism(identity_morphism()), identity_morphism(), pure, pure),
        {"check": "functoriality on morphisms"},
    )
    tally.check(hom_bijection_check(pure, same_shape, table_count=cfg.morphism_tables), {"check": "hom-set bijection"})


LAWS = (
    ("monad", law_monad),
    ("strength", law_strength),
    ("algebra", law_algebra),
    ("par-associativity", law_par_associativity),
    ("seq-associativity", law_seq_associativity),
    ("identity", law_identity),
    ("unit", law_unit),
    ("bifunctor", law_bifunctor),
    ("symmetry", law_symmetry),
    ("lifting-naturality", law_lifting_naturality),
    ("determinise-dk", law_determinise_dk),
    ("determinise-otimes", law_determinise_otimes),
    ("adjunction", law_adjunction),
)


def run_law_suite(cfg: GenConfig, par_impl: Optional[Callable] = None) -> LawReport:
    """
    Runs every law on ``cfg.cases`` generated cases.

    Failures, including unexpected exceptions, become report entries; an
    undecidable composition becomes a skip carrying its provenance.

    Args:
        cfg: Seed and generation bounds
        par_impl: Parallel composition under test for associativity; defaults to ``par``.
            Its ``ParNode`` may carry a ``decide`` callable replacing the membership rule

    Returns:
        LawReport: per-law case counts, comparisons, failures and skips
    """
    par_impl = par_impl or par
    report = LawReport(seed=cfg.seed, cases=cfg.cases)
    for name, _ in LAWS:
        report.laws[name] = LawResult(name)
    for index in range(cfg.cases):
        for name, law in LAWS:
            rng = random.Random(f"{cfg.seed}:{index}:{name}")
            tally = LawTally()
            try:
                law(cfg, rng, tally, par_impl)
            except UnsupportedComposition as exc:
                tally.skip(exc, {"what": name})
            except Exception as exc:
                tally.failures.append({"error": f"{type(exc).__name__}: {exc}"})
            report.record(name, index, tally)
    if cfg.cases > 0:
        example = lifting_unit_counterexample()
        result = report.laws.setdefault("lifting-non-unit", LawResult("lifting-non-unit"))
        result.cases += 1
        result.comparisons += 1
        if not example.holds:
            result.failures.append({"case": 0, "description": example.describe()})
        report.non_unit_witness = {
            "set": [format_value(a) for a in example.support_set],
            "candidate": str(example.candidate),
            "in_lifted": example.in_lifted,
            "in_unit_image": example.in_unit_image,
            "description": example.describe(),
        }
    logger.info("law suite finished", extra={"data": {
        "seed": cfg.seed, "cases": cfg.cases, "comparisons": report.comparisons,
        "failures": report.failure_count, "candidate_skips": report.candidate_skips}})
    for result in report.laws.values():
        if result.skips:
            logger.warning("law skipped undecidable candidates", extra={"data": {
                "law": result.law, "skipped": len(result.skips), "candidates": result.candidates,
                "provenance": result.skips[0]["provenance"]}})
    if report.vacuous:
        logger.warning("law suite made no comparisons", extra={"data": {"cases": cfg.cases}})
    return report
