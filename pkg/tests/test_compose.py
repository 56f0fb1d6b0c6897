import unittest
from fractions import Fraction

from probgames.compose import (
    DecompositionWitness, FlowNetwork, Iso, applicable_liftpred_rule, lifting_unit_counterexample,
    liftpred_check, par, par_membership, par_transformed_tables, relabel, seq, seq_membership,
    seq_transformed_table, seq_verdict, transportation_feasible, transportation_witness,
)
from probgames.dist import ProductAlgebra, RationalVec, VectorAlgebra, dist_new, ell, eta, uniform
from probgames.errors import InterfaceMismatch, InvalidWitness, NotBijective, UnsupportedComposition
from probgames.game import (
    check_equilibrium, conditioned_decision_game, decision_game, evaluate, identity_game,
)
from probgames.utils import UNIT

half = Fraction(1, 2)
ALG = VectorAlgebra(2)


def vec(*values):
    return RationalVec(values)


def matching_pennies():
    p1 = decision_game(["H", "T"], 0, ALG, name="p1")
    p2 = decision_game(["H", "T"], 1, ALG, name="p2")
    payoffs = {("H", "H"): vec(-1, 1), ("H", "T"): vec(1, -1), ("T", "H"): vec(1, -1), ("T", "T"): vec(-1, 1)}
    k = {y: (v, v) for y, v in payoffs.items()}
    return p1, p2, par(p1, p2), k


def market_entry():
    g1 = decision_game(["E", "NE"], 0, ALG, name="g1")
    g2 = conditioned_decision_game(["E", "NE"], ["E", "NE"], 1, ALG, name="g2")
    k = {("E", "E"): vec(-10, -10), ("E", "NE"): vec(5, 0), ("NE", "E"): vec(0, 5), ("NE", "NE"): vec(0, 0)}
    return g1, g2, seq(g1, g2), k


def strategy(game, label):
    return next(s for s in game.strategies if str(s) == label)


class TestParallel(unittest.TestCase):
    def setUp(self):
        self.p1, self.p2, self.game, self.k = matching_pennies()
        self.x = (UNIT, UNIT)

    def test_interface(self):
        self.assertEqual(self.game.name, "(par p1 p2)")
        self.assertEqual(self.game.utility_alg, ProductAlgebra(ALG, ALG))
        self.assertEqual(self.game.play(("H", "T"), self.x), ("H", "T"))
        r = (vec(1, 2), vec(3, 4))
        self.assertEqual(self.game.coutility(("H", "T"), self.x, r), r)

    def test_uniform_is_the_equilibrium(self):
        self.assertTrue(par_membership(self.p1, self.p2, self.x, self.k, ell(uniform("HT"), uniform("HT"))))

    def test_transformed_tables_at_uniform(self):
        k1, k2 = par_transformed_tables(self.p1, self.p2, self.x, self.k, ell(uniform("HT"), uniform("HT")))
        self.assertEqual(k1, {"H": vec(0, 0), "T": vec(0, 0)})
        self.assertEqual(k2, {"H": vec(0, 0), "T": vec(0, 0)})

    def test_rejections_name_the_failing_player(self):
        cases = [
            (ell(eta("H"), uniform("HT")), "best-response", "p2"),
            (ell(uniform("HT"), eta("H")), "best-response", "p1"),
            (ell(eta("H"), eta("T")), "best-response", "p2"),
            (dist_new([(("H", "H"), half), (("T", "T"), half)]), "independence", "(par p1 p2)"),
        ]
        for phi, reason, component in cases:
            verdict = evaluate(self.game, self.x, self.k, phi)
            self.assertFalse(verdict.holds, str(phi))
            self.assertEqual((verdict.reason, verdict.component), (reason, component))


class TestSequential(unittest.TestCase):
    def setUp(self):
        self.g1, self.g2, self.game, self.k = market_entry()
        self.swap = strategy(self.g2, "swap")
        self.const_e = strategy(self.g2, "const_E")

    def test_interface(self):
        self.assertEqual(self.game.states, (UNIT,))
        self.assertEqual(self.game.play(("E", self.swap), UNIT), ("E", "NE"))
        self.assertEqual(self.game.coutility(("E", self.swap), UNIT, vec(5, 0)), vec(5, 0))

    def test_subgame_perfect_profile(self):
        self.assertTrue(seq_membership(self.g1, self.g2, UNIT, self.k, ell(eta("E"), eta(self.swap))))

    def test_transformed_table(self):
        table = seq_transformed_table(self.g1, self.g2, self.k, eta(self.swap))
        self.assertEqual(table, {"E": vec(5, 0), "NE": vec(0, 5)})

    def test_rejections(self):
        verdict = seq_verdict(self.g1, self.g2, UNIT, self.k, ell(eta("NE"), eta(self.swap)))
        self.assertEqual((verdict.holds, verdict.reason, verdict.component), (False, "best-response", "g1"))
        self.assertFalse(seq_membership(self.g1, self.g2, UNIT, self.k, ell(eta("E"), eta(self.const_e))))

    def test_non_credible_threat_fails_the_lifting(self):
        verdict = seq_verdict(self.g1, self.g2, UNIT, self.k, ell(eta("NE"), eta(self.const_e)))
        self.assertEqual((verdict.holds, verdict.reason, verdict.component), (False, "liftpred", "g2"))

    def test_correlated_profile_fails_independence(self):
        phi = dist_new([(("E", self.swap), half), (("NE", self.const_e), half)])
        self.assertEqual(seq_verdict(self.g1, self.g2, UNIT, self.k, phi).reason, "independence")

    def test_mismatched_interfaces(self):
        with self.assertRaises(InterfaceMismatch):
            seq(decision_game(["H", "T"], 0, ALG), self.g2)
        with self.assertRaises(InterfaceMismatch):
            seq(decision_game(["E", "NE"], 0, VectorAlgebra(3)), self.g2)

    def test_identity_on_the_left_keeps_play(self):
        composite = seq(identity_game(self.game.states, ALG), self.game)
        for sigma in self.game.strategies:
            self.assertEqual(composite.play((UNIT, sigma), UNIT), self.game.play(sigma, UNIT))


class TestLiftpred(unittest.TestCase):
    def setUp(self):
        self.g1, self.g2, _, self.k = market_entry()
        self.swap = strategy(self.g2, "swap")
        self.ident = strategy(self.g2, "id")
        # composite second game without a support characterization
        self.composite = seq(identity_game(["E", "NE"], ALG, name="pass"), self.g2)

    def test_rule_a_flow(self):
        alpha = uniform(["E", "NE"])
        self.assertEqual(applicable_liftpred_rule(self.g2, self.k, alpha), "a")
        self.assertTrue(liftpred_check(self.g2, self.k, alpha, eta(self.swap)))
        self.assertFalse(liftpred_check(self.g2, self.k, alpha, uniform([self.swap, self.ident])))

    def test_rule_b_point_mass(self):
        alpha = eta("E")
        self.assertEqual(applicable_liftpred_rule(self.composite, self.k, alpha), "b")
        self.assertTrue(liftpred_check(self.composite, self.k, alpha, eta((UNIT, self.swap))))
        self.assertFalse(liftpred_check(self.composite, self.k, alpha, eta((UNIT, self.ident))))

    def test_rule_c_witness(self):
        alpha = uniform(["E", "NE"])
        psi = eta((UNIT, self.swap))
        witness = DecompositionWitness({"E": psi, "NE": psi})
        self.assertEqual(applicable_liftpred_rule(self.composite, self.k, alpha, witness), "c")
        self.assertTrue(liftpred_check(self.composite, self.k, alpha, psi, witness=witness))

    def test_rule_c_rejects_bad_witnesses(self):
        alpha = uniform(["E", "NE"])
        psi = eta((UNIT, self.swap))
        wrong_mixture = DecompositionWitness({"E": psi, "NE": eta((UNIT, self.ident))})
        with self.assertRaises(InvalidWitness):
            liftpred_check(self.composite, self.k, alpha, psi, witness=wrong_mixture)
        bad_branch = DecompositionWitness({"E": eta((UNIT, self.ident)), "NE": eta((UNIT, self.ident))})
        with self.assertRaises(InvalidWitness):
            liftpred_check(self.composite, self.k, alpha, eta((UNIT, self.ident)), witness=bad_branch)
        with self.assertRaises(InvalidWitness):
            liftpred_check(self.composite, self.k, alpha, psi, witness=DecompositionWitness({"E": psi}))

    def test_rule_d_refuses(self):
        with self.assertRaises(UnsupportedComposition) as ctx:
            liftpred_check(self.composite, self.k, uniform(["E", "NE"]), eta((UNIT, self.swap)))
        self.assertEqual(ctx.exception.provenance, self.composite.name)


class TestTransportation(unittest.TestCase):
    def setUp(self):
        self.alpha = uniform(["y1", "y2"])

    def test_feasible_split(self):
        sets = {"y1": frozenset({"a"}), "y2": frozenset({"b"})}
        self.assertTrue(transportation_feasible(self.alpha, sets, uniform("ab")))
        witness = transportation_witness(self.alpha, sets, uniform("ab"))
        self.assertEqual(witness.branches, {"y1": eta("a"), "y2": eta("b")})
        self.assertEqual(witness.mixture(self.alpha), uniform("ab"))

    def test_infeasible_split(self):
        sets = {"y1": frozenset({"a"}), "y2": frozenset({"a"})}
        self.assertFalse(transportation_feasible(self.alpha, sets, uniform("ab")))
        self.assertIsNone(transportation_witness(self.alpha, sets, uniform("ab")))

    def test_exact_thirds(self):
        alpha = dist_new([("y1", Fraction(1, 3)), ("y2", Fraction(2, 3))])
        sets = {"y1": frozenset({"a", "b"}), "y2": frozenset({"b"})}
        network = FlowNetwork(dict(alpha.items()), {"a": Fraction(1, 6), "b": Fraction(5, 6)}, sets)
        value, routed = network.max_flow()
        self.assertEqual(value, 1)
        self.assertEqual(routed[("y1", "a")], Fraction(1, 6))
        self.assertEqual(routed[("y2", "b")], Fraction(2, 3))
        self.assertFalse(transportation_feasible(alpha, sets, dist_new([("a", half), ("b", half)])))

    def test_lifting_does_not_preserve_the_unit(self):
        example = lifting_unit_counterexample()
        self.assertTrue(example.holds)
        self.assertTrue(example.in_lifted)
        self.assertFalse(example.in_unit_image)
        self.assertIn("A = {H, T}", example.describe())


class TestRelabel(unittest.TestCase):
    def test_relabel_decision_game(self):
        game = decision_game(["H", "T"], 0, ALG, name="p1")
        iso = Iso.from_mapping({"H": "heads", "T": "tails"})
        moved = relabel(game, iso, Iso.identity(), iso, Iso.identity(), Iso.identity())
        self.assertEqual(moved.strategies, ("heads", "tails"))
        k = {"heads": vec(1, 0), "tails": vec(0, 0)}
        self.assertTrue(check_equilibrium(moved, UNIT, k, eta("heads")))
        self.assertFalse(check_equilibrium(moved, UNIT, k, eta("tails")))

    def test_relabel_composite_is_decided_by_the_original(self):
        p1, p2, game, k = matching_pennies()
        swap = Iso(lambda v: (v[1], v[0]), lambda v: (v[1], v[0]))
        moved = relabel(game, swap, swap, swap, swap, swap)
        swapped_k = {(b, a): (v[1], v[0]) for (a, b), v in k.items()}
        self.assertTrue(check_equilibrium(moved, (UNIT, UNIT), swapped_k, ell(uniform("HT"), uniform("HT"))))
        self.assertFalse(check_equilibrium(moved, (UNIT, UNIT), swapped_k, ell(eta("H"), uniform("HT"))))

    def test_non_bijective_relabel(self):
        game = decision_game(["H", "T"], 0, ALG)
        collapse = Iso(lambda v: "same", lambda v: "H")
        with self.assertRaises(NotBijective):
            relabel(game, collapse, Iso.identity(), Iso.identity(), Iso.identity(), Iso.identity())
        with self.assertRaises(NotBijective):
            Iso.from_mapping({"a": 1, "b": 1})


if __name__ == "__main__":
    unittest.main()
