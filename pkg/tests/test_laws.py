import json
import random
import unittest
from dataclasses import replace

from probgames.compose import Iso, par, par_verdict, relabel, seq
from probgames.dist import VectorAlgebra, ell, eta, marginals, uniform
from probgames.game import ParNode, conditioned_decision_game, decision_game
from probgames.laws import (
    LAWS, SHAPES, GenConfig, LawReport, LawTally, compare_games, gen_game, run_law_suite,
    seq_law_candidates,
)

SMALL = GenConfig(seed=11, cases=3, max_candidates=4, k_tables=2, morphism_tables=4)
ALG = VectorAlgebra(2)
REBRACKET = Iso(lambda v: (v[0][0], (v[0][1], v[1])), lambda v: ((v[0], v[1][0]), v[1][1]))


def swapped_coutility_par(game, other):
    good = par(game, other)
    return replace(good, coutility=lambda s, x, r: tuple(reversed(good.coutility(s, x, r))))


def swapped_marginals_par(game, other):
    """Reads the two marginals of a candidate in the wrong order when deciding membership."""
    def decide(x, k, phi, tolerance=None):
        first, second = marginals(phi)
        return par_verdict(game, other, x, k, ell(second, first), tolerance=tolerance)

    return replace(par(game, other), eq=ParNode(game, other, decide=decide))


def chain():
    g1 = decision_game(["a", "b"], 0, ALG, name="g1")
    g2 = conditioned_decision_game(g1.moves, ["c", "d"], 1, ALG, name="g2")
    g3 = conditioned_decision_game(g2.moves, ["e"], 0, ALG, name="g3")
    return g1, g2, g3


class TestGenGame(unittest.TestCase):
    def test_every_shape_is_well_formed(self):
        rng = random.Random(3)
        for shape in SHAPES:
            game = gen_game(SMALL, shape, rng)
            self.assertTrue(game.states)
            self.assertTrue(game.moves)
            self.assertTrue(game.strategies)
            for sigma in game.strategies:
                for x in game.states:
                    self.assertIn(game.play(sigma, x), game.moves)

    def test_conditioned_game_observes_given_states(self):
        game = gen_game(SMALL, "conditioned", random.Random(0), states=["p", "q"])
        self.assertEqual(game.states, ("p", "q"))

    def test_same_seed_same_game(self):
        first = gen_game(SMALL, "atomic", random.Random(5))
        second = gen_game(SMALL, "atomic", random.Random(5))
        self.assertEqual((first.name, first.moves, first.payoff_coord), (second.name, second.moves, second.payoff_coord))

    def test_unknown_shape(self):
        with self.assertRaises(ValueError):
            gen_game(SMALL, "spiral", random.Random(0))


class TestSeqCandidates(unittest.TestCase):
    def setUp(self):
        g1, g2, g3 = chain()
        self.left = seq(seq(g1, g2), g3)
        self.right = seq(g1, seq(g2, g3))
        self.rest = self.right.eq.second

    def test_mixed_candidates_with_a_bounded_open_share(self):
        candidates = seq_law_candidates(self.right, GenConfig(), random.Random(4))
        self.assertEqual(len(candidates), 12)
        open_ = [phi for phi in candidates if not marginals(phi)[0].is_point_mass()]
        self.assertEqual(len(open_), 2)
        settled_mixed = [phi for phi in candidates
                         if marginals(phi)[0].is_point_mass() and not phi.is_point_mass()]
        self.assertTrue(settled_mixed)

    def test_candidates_are_reproducible(self):
        self.assertEqual(seq_law_candidates(self.right, GenConfig(), random.Random(9)),
                         seq_law_candidates(self.right, GenConfig(), random.Random(9)))

    def test_undecidable_candidate_is_skipped_with_provenance(self):
        f2 = self.rest.eq.first.strategies
        f3 = self.rest.eq.second.strategies[0]
        settled = ell(eta("a"), ell(uniform(f2[:2]), eta(f3)))
        unsettled = ell(uniform(["a", "b"]), ell(eta(f2[0]), eta(f3)))
        moved = relabel(self.left, REBRACKET, Iso.identity(), Iso.identity(), Iso.identity(), Iso.identity())
        tally = LawTally()
        compare_games(moved, self.right, tally, GenConfig(k_tables=1), random.Random(0), "chain",
                      candidates=[settled, unsettled])
        self.assertEqual(tally.failures, [])
        self.assertEqual(tally.candidates, 2)
        [skip] = tally.skips
        self.assertEqual(skip["provenance"], "(seq g2 g3)")
        self.assertEqual(skip["profile"], str(unsettled))

        report = LawReport(seed=0, cases=1)
        report.record("seq-associativity", 0, tally)
        result = report.laws["seq-associativity"]
        self.assertEqual(result.skip_rate, 0.5)
        self.assertEqual(result.cases_with_skips, 1)
        self.assertEqual(result.skips[0]["case"], 0)
        self.assertEqual(report.candidate_skips, 1)
        self.assertIn("1 of 2 candidates (50.0%)", report.to_text())
        self.assertEqual(json.loads(report.to_json())["laws"][0]["skip_rate"], 0.5)


class TestLawSuite(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.report = run_law_suite(SMALL)

    def test_correct_implementation_passes(self):
        self.assertTrue(self.report.ok, self.report.to_text())
        self.assertFalse(self.report.vacuous)
        self.assertTrue(self.report.to_text().endswith("PASS"))

    def test_every_law_ran_every_case(self):
        for name, _ in LAWS:
            self.assertEqual(self.report.laws[name].cases, SMALL.cases, name)
        self.assertGreater(self.report.laws["monad"].comparisons, 0)
        self.assertGreater(self.report.laws["par-associativity"].comparisons, 0)
        self.assertGreater(self.report.laws["seq-associativity"].candidates, 0)

    def test_non_unit_witness_is_reported(self):
        witness = self.report.non_unit_witness
        self.assertTrue(witness["in_lifted"])
        self.assertFalse(witness["in_unit_image"])
        self.assertIn("lifting-non-unit", self.report.laws)

    def test_json_report(self):
        data = json.loads(self.report.to_json())
        self.assertEqual(data["result"], "pass")
        self.assertEqual((data["seed"], data["cases"]), (11, 3))
        self.assertEqual(data["comparisons"], self.report.comparisons)
        self.assertIn("liftpred_rules", data)
        self.assertEqual(len(data["laws"]), len(LAWS) + 1)
        self.assertTrue(all("skip_rate" in law for law in data["laws"]))

    def test_runs_are_reproducible(self):
        self.assertEqual(run_law_suite(SMALL).to_dict(), self.report.to_dict())


class TestSeqSkipRate(unittest.TestCase):
    def test_skips_carry_provenance_and_stay_rare(self):
        report = run_law_suite(GenConfig(seed=5, cases=4, k_tables=2, morphism_tables=4))
        self.assertTrue(report.ok, report.to_text())
        result = report.laws["seq-associativity"]
        self.assertGreater(result.candidates, 0)
        self.assertLess(result.skip_rate, 0.2)
        for entry in result.skips:
            self.assertTrue(entry["provenance"])
            self.assertIn("profile", entry)


class TestLawSuiteEdges(unittest.TestCase):
    def test_zero_cases_is_a_vacuous_pass(self):
        report = run_law_suite(replace(SMALL, cases=0))
        self.assertEqual(report.comparisons, 0)
        self.assertTrue(report.ok)
        self.assertTrue(report.vacuous)
        self.assertIsNone(report.non_unit_witness)
        self.assertIn("vacuous", report.to_text())

    def test_broken_coutility_is_caught(self):
        report = run_law_suite(SMALL, par_impl=swapped_coutility_par)
        self.assertFalse(report.ok)
        self.assertTrue(report.laws["par-associativity"].failures)
        self.assertFalse(report.laws["monad"].failures)
        self.assertTrue(report.to_text().endswith("FAIL"))
        self.assertEqual(json.loads(report.to_json())["result"], "fail")

    def test_swapped_marginals_are_caught(self):
        report = run_law_suite(SMALL, par_impl=swapped_marginals_par)
        self.assertFalse(report.ok)
        self.assertTrue(report.laws["par-associativity"].failures)
        self.assertFalse(report.laws["monad"].failures)
        self.assertFalse(report.laws["seq-associativity"].failures)


if __name__ == "__main__":
    unittest.main()
