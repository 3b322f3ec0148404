#!/usr/bin/env python3

import unittest

import numpy as np

from eblparse.eval import corpus_gen
from eblparse.learner import learner
from eblparse.learner.learner import ANY_CONTEXT, ContextPattern
from eblparse.treebank import test_utils
from eblparse.treebank import treebank


class TabulateTest(unittest.TestCase):
    def setUp(self):
        self.tb = treebank.strip_words(test_utils.route_treebank(k=2, m=10))
        self.stats = learner.tabulate(self.tb)

    def test_route_counts(self):
        self.assertEqual(self.stats.counts(("p", "np")), (12, 16))
        self.assertEqual(self.stats.counts(("p", "np"), ContextPattern(left2="per")), (12, 12))
        self.assertEqual(self.stats.counts(("per", "v", "p", "np")), (10, 12))
        self.assertEqual(
            self.stats.counts(("per", "v", "p", "np"), ContextPattern(right1="#")), (10, 10)
        )
        self.assertEqual(self.stats.counts(("p", "np", "p", "np")), (2, 2))
        self.assertEqual(self.stats.counts(("np", "per")), (0, 0))

    def test_against_oracle(self):
        rng = np.random.default_rng(3)
        tb = test_utils.random_treebank(rng, 30)
        stats = learner.tabulate(tb)
        for ssf, ctx in list(stats.keys())[:300]:
            self.assertEqual(stats.counts(ssf, ctx), test_utils.tabulate_oracle(tb, ssf, ctx))

    def test_without_contexts(self):
        stats = learner.tabulate(self.tb, contexts=False)
        self.assertTrue(all(ctx == ANY_CONTEXT for _, ctx in stats.keys()))


class ContextPatternTest(unittest.TestCase):
    def test_from_string(self):
        self.assertEqual(ContextPattern.from_string("* * # *"), ContextPattern(right1="#"))
        self.assertEqual(str(ContextPattern(left2="per")), "per * * *")
        self.assertRaises(ValueError, ContextPattern.from_string, "* *")
        self.assertRaises(ValueError, ContextPattern.from_string, "a b * *")


class ScoringTest(unittest.TestCase):
    def setUp(self):
        self.tb = treebank.strip_words(test_utils.route_treebank(k=2, m=10))
        self.stats = learner.tabulate(self.tb)

    def test_pa_and_grf(self):
        ssf = ("p", "np")
        self.assertFalse(learner.is_pa_ssf(self.stats, ssf, ANY_CONTEXT, 1.0, 2))
        self.assertTrue(learner.is_pa_ssf(self.stats, ssf, ANY_CONTEXT, 0.75, 2))
        self.assertFalse(learner.is_pa_ssf(self.stats, ssf, ANY_CONTEXT, 0.75, 17))
        self.assertEqual(learner.grf(ssf, 12, True), 12.0)
        self.assertEqual(learner.grf(ssf, 12, False), learner.NEG_INF)
        self.assertEqual(learner.grf(("np",), 12, True), 0.0)

    def test_competitors(self):
        tree = self.tb.trees[2]
        self.assertEqual(tree.to_string(), "(S per v (mp p np) infp)")
        self.assertEqual(learner.competitors(tree, 3), {0, 4, 5})
        self.assertEqual(learner.competitors(tree, 0), {1, 2, 3, 4, 5, 6})

    def test_admissible_contexts(self):
        tree = self.tb.trees[2]
        contexts = learner.admissible_contexts(tree, 3)
        self.assertEqual(
            contexts,
            [
                ANY_CONTEXT,
                ContextPattern(left2="per"),
                ContextPattern(left1="v"),
                ContextPattern(right1="infp"),
                ContextPattern(right2="#"),
            ],
        )
        self.assertEqual(learner.admissible_contexts(tree, 3, retreat=False), [ANY_CONTEXT])

    def test_marking(self):
        long_tree, inf_tree, short_tree = self.tb.trees[0], self.tb.trees[2], self.tb.trees[4]
        self.assertEqual(learner.mark_tree(long_tree, self.stats, 1.0, 2, True), {1})
        self.assertEqual(learner.mark_tree(inf_tree, self.stats, 1.0, 2, True), {3})
        self.assertEqual(learner.mark_tree(short_tree, self.stats, 1.0, 2, True), {0})

    def test_unary_chain_marked_at_lowest_node(self):
        tree = treebank.Tree.fromstring("(S (A (B x y)) z)")
        other = treebank.Tree.fromstring("(S w (B x y))")
        stats = learner.tabulate(treebank.TreeBank((tree, tree, other, other, other)))
        self.assertEqual(learner.mark_tree(tree, stats, 1.0, 2, True), {2})

    def test_marked_nodes_do_not_nest(self):
        rng = np.random.default_rng(11)
        tb = test_utils.random_treebank(rng, 40)
        stats = learner.tabulate(tb)
        for tree in tb.trees:
            marked = learner.mark_tree(tree, stats, 0.5, 2, True)
            for n in marked:
                self.assertFalse(any(a in marked for a in tree.ancestors(n)))


class LearnerConfigTest(unittest.TestCase):
    def test_validation(self):
        self.assertRaises(learner.LearnerConfigError, learner.LearnerConfig, theta_floor=0.0)
        self.assertRaises(
            learner.LearnerConfigError, learner.LearnerConfig, theta_start=0.8, theta_floor=0.9
        )
        self.assertRaises(learner.LearnerConfigError, learner.LearnerConfig, theta_step=0)
        self.assertRaises(learner.LearnerConfigError, learner.LearnerConfig, tau_abs=0)

    def test_thresholds(self):
        cfg = learner.LearnerConfig(theta_floor=0.75, tau_abs=10, tau_frac=0.003)
        self.assertEqual(cfg.theta_steps(), 5)
        self.assertEqual(cfg.effective_tau(1000), 10)
        self.assertEqual(cfg.effective_tau(5500), 17)
        self.assertEqual(learner.LearnerConfig().theta_steps(), 0)


class LearnTest(unittest.TestCase):
    def setUp(self):
        self.tb = treebank.strip_words(test_utils.route_treebank(k=2, m=10))
        self.result = learner.learn(self.tb, test_utils.route_config())

    def test_route_transcript(self):
        found = {(e.iteration, " ".join(e.ssf), str(e.context)) for e in self.result.lexicon}
        self.assertEqual(
            found,
            {
                (0, "p np p np", "* * * *"),
                (0, "per v p np", "* * # *"),
                (0, "p np", "per * * *"),
                (1, "mp", "* * * *"),
                (1, "per v mp infp", "* * * *"),
            },
        )
        self.assertEqual(self.result.lexicon.tau, 2)
        self.assertEqual(self.result.iterations, 3)
        self.assertEqual([record.marks for record in self.result.transcript], [14, 4])
        self.assertTrue(all(entry.sure for entry in self.result.lexicon))

    def test_entry_payload(self):
        by_ssf = {entry.ssf: entry for entry in self.result.lexicon}
        entry = by_ssf[("per", "v", "p", "np")]
        self.assertEqual((entry.fc, entry.f), (10, 10))
        ((subtree, count),) = entry.subtrees
        self.assertEqual(subtree.to_string(), "(S per v (mp p np))")
        self.assertEqual(count, 10)
        self.assertEqual(len(entry.occurrences), 10)
        self.assertIn((4, 0), entry.occurrences)
        self.assertEqual(by_ssf[("p", "np")].occurrences, ((2, 3), (3, 3)))

    def test_fully_reduced(self):
        self.assertTrue(all(len(tree) == 1 for tree in self.result.residual.trees))

    def test_replay(self):
        self.assertEqual(learner.replay(self.result), self.tb)

    def test_high_tau_learns_nothing(self):
        result = learner.learn(self.tb, learner.LearnerConfig(tau_abs=100))
        self.assertEqual(len(result.lexicon), 0)
        self.assertEqual(result.residual, self.tb)
        self.assertEqual(result.iterations, 1)

    def test_reserved_labels_rejected(self):
        for label in (learner.BOUNDARY, learner.WILDCARD):
            tb = treebank.TreeBank((treebank.Tree.fromstring(f"(S (np x) {label})"),))
            self.assertRaises(
                treebank.AnnotationError, learner.learn, tb, test_utils.route_config()
            )

    def test_theta_lowering(self):
        cfg = learner.LearnerConfig(theta_floor=0.75, tau_abs=12, tau_frac=0.0)
        result = learner.learn(self.tb, cfg)
        self.assertGreater(result.iterations, 1)
        self.assertTrue(all(entry.theta >= 0.75 for entry in result.lexicon))
        self.assertEqual(learner.replay(result), self.tb)


class TauMonotonicityTest(unittest.TestCase):
    """Raising tau never adds an SSF, nor an (ssf, context) entry on the route corpora."""

    def keys(self, tb: treebank.TreeBank, tau: int) -> set[tuple[tuple[str, ...], str]]:
        result = learner.learn(tb, learner.LearnerConfig(tau_abs=tau, tau_frac=0.0))
        return {(entry.ssf, str(entry.context)) for entry in result.lexicon}

    def assert_nested(self, tb: treebank.TreeBank, taus: list[int]):
        learned = [self.keys(tb, tau) for tau in taus]
        for tau, lower, higher in zip(taus[1:], learned, learned[1:]):
            self.assertLessEqual(higher, lower, f"tau={tau}")
        return learned

    def test_route_fixture(self):
        tb = treebank.strip_words(test_utils.route_treebank(k=2, m=10))
        learned = self.assert_nested(tb, list(range(2, 14)))
        self.assertEqual(len(learned[0]), 5)
        self.assertEqual(learned[-1], set())

    def test_generated_routes(self):
        tb = treebank.strip_words(corpus_gen.generate_corpus(300, 5, "route"))
        learned = self.assert_nested(tb, [2, 3, 5, 10, 20, 40])
        self.assertIn(("p", "np"), {ssf for ssf, _ in learned[-1]})

    def test_ssf_sets_nested_on_ovis(self):
        tb = treebank.strip_words(corpus_gen.generate_corpus(300, 3, "ovis"))
        learned = [{ssf for ssf, _ in self.keys(tb, tau)} for tau in range(2, 12)]
        for tau, lower, higher in zip(range(3, 12), learned, learned[1:]):
            self.assertLessEqual(higher, lower, f"tau={tau}")


class RandomCorpusTest(unittest.TestCase):
    """Soundness, reconstruction and termination on random corpora."""

    @classmethod
    def setUpClass(cls):
        rng = np.random.default_rng(2024)
        cls.corpora = [
            test_utils.random_treebank(rng, int(rng.integers(200, 300))) for _ in range(3)
        ]
        cfg = learner.LearnerConfig(tau_abs=3, tau_frac=0.0)
        cls.results = [learner.learn(tb, cfg) for tb in cls.corpora]

    def test_sound_entries(self):
        for tb, result in zip(self.corpora, self.results):
            for entry in result.lexicon:
                if entry.context != ANY_CONTEXT:
                    continue
                before = test_utils.states_before(tb, result, entry.iteration)
                fc, f = test_utils.tabulate_oracle(before, entry.ssf, ANY_CONTEXT)
                self.assertEqual(fc, f)
                self.assertEqual((entry.fc, entry.f), (fc, f))

    def test_reconstruction(self):
        for tb, result in zip(self.corpora, self.results):
            replayed = learner.replay(result)
            self.assertEqual(treebank.write_treebank(replayed), treebank.write_treebank(tb))

    def test_termination_bound(self):
        cfg = learner.LearnerConfig(theta_floor=0.8, tau_abs=3, tau_frac=0.0)
        for tb in self.corpora:
            result = learner.learn(tb, cfg)
            self.assertLessEqual(result.iterations, tb.num_nodes() + cfg.theta_steps() + 1)


if __name__ == "__main__":
    unittest.main()
