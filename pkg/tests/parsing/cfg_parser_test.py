#!/usr/bin/env python3

import unittest

import numpy as np

from eblparse.parsing import cfg_parser
from eblparse.parsing import chart
from eblparse.treebank import test_utils
from eblparse.treebank import treebank


def _grammar(text: str) -> treebank.CFGrammar:
    return treebank.read_grammar(text)


ROUTE_GRAMMAR = """\
%start S
S -> per v mp
S -> per v mp infp
S -> mp
mp -> p np
mp -> p np p np
mp -> mp mp
"""


class ChartTest(unittest.TestCase):
    def test_crosses(self):
        self.assertTrue(chart.crosses((0, 2), (1, 3)))
        self.assertTrue(chart.crosses((1, 3), (0, 2)))
        self.assertFalse(chart.crosses((0, 2), (2, 4)))
        self.assertFalse(chart.crosses((0, 4), (1, 3)))
        self.assertFalse(chart.crosses((0, 2), (0, 2)))

    def test_seed_and_add(self):
        c = chart.Chart(2)
        self.assertTrue(c.seed(0, "p"))
        self.assertFalse(c.seed(0, "p"))
        self.assertTrue(c.add((0, 2, "mp"), ("r", ((0, 1, "p"), (1, 2, "np")))))
        self.assertFalse(c.add((0, 2, "mp"), ("r", ((0, 1, "p"), (1, 2, "np")))))
        self.assertEqual(c.cell(0, 2), {"mp"})
        self.assertEqual(c.ends(0, "mp"), {2})
        self.assertEqual(c[(0, 2, "mp")].num_analyses(), 1)


class CykTest(unittest.TestCase):
    def setUp(self):
        self.g = _grammar(ROUTE_GRAMMAR)

    def test_parse(self):
        forest = cfg_parser.TParser(self.g).parse(cfg_parser.as_lattice("per v p np infp".split()))
        self.assertIn(forest.root, forest)
        gold = treebank.Tree.fromstring("(S per v (mp p np) infp)")
        self.assertTrue(cfg_parser.contains_parse(forest, gold))
        self.assertEqual(cfg_parser.count_active_nodes(forest), 7)
        self.assertEqual([t.to_string() for t in cfg_parser.iter_parses(forest)], [str(gold)])

    def test_ambiguous(self):
        forest = cfg_parser.TParser(self.g).parse(cfg_parser.as_lattice("p np p np".split()))
        parses = {t.to_string() for t in cfg_parser.iter_parses(forest)}
        self.assertEqual(
            parses, {"(S (mp p np p np))", "(S (mp (mp p np) (mp p np)))"}
        )
        self.assertEqual(forest.items[(0, 4, "mp")].num_analyses(), 2)
        self.assertEqual(len(list(cfg_parser.iter_parses(forest, limit=1))), 1)

    def test_no_parse(self):
        forest = cfg_parser.TParser(self.g).parse(cfg_parser.as_lattice("np p".split()))
        self.assertNotIn(forest.root, forest)
        self.assertEqual(cfg_parser.count_active_nodes(forest), 0)
        self.assertFalse(
            cfg_parser.contains_parse(forest, treebank.Tree.fromstring("(S np p)"))
        )

    def test_lattice(self):
        lattice = [{"per"}, {"v"}, {"p", "v"}, {"np"}]
        forest = cfg_parser.TParser(self.g).parse(lattice)
        self.assertIn(forest.root, forest)
        self.assertNotIn((2, 3, "v"), forest)

    def test_empty_position(self):
        forest = cfg_parser.TParser(self.g).parse([{"per"}, set(), {"p"}, {"np"}])
        self.assertNotIn(forest.root, forest)

    def test_gold_length_mismatch(self):
        forest = cfg_parser.TParser(self.g).parse(cfg_parser.as_lattice(["p", "np"]))
        gold = treebank.Tree.fromstring("(S per v (mp p np))")
        self.assertRaises(cfg_parser.InputError, cfg_parser.contains_parse, forest, gold)

    def test_dump(self):
        forest = cfg_parser.TParser(self.g).parse(cfg_parser.as_lattice("p np".split()))
        self.assertEqual(
            forest.dump(),
            "# start end label sure analyses\n"
            "0 1 p 0 1\n"
            "0 2 S 0 1\n"
            "0 2 mp 0 1\n"
            "1 2 np 0 1\n",
        )


class ConstraintTest(unittest.TestCase):
    def setUp(self):
        self.g = _grammar(ROUTE_GRAMMAR)

    def test_forbidden_span(self):
        constraints = cfg_parser.SpanConstraints(forbidden=frozenset([(1, 3)]))
        c = cfg_parser.cyk_parse("p np p np".split(), self.g, constraints)
        forest = cfg_parser.extract_forest(c)
        self.assertIn(forest.root, forest)
        self.assertNotIn((0, 2, "mp"), c)
        self.assertNotIn((2, 4, "mp"), c)

    def test_sealed_span(self):
        constraints = cfg_parser.SpanConstraints(sealed=frozenset([(0, 4)]))
        c = cfg_parser.cyk_parse("p np p np".split(), self.g, constraints)
        self.assertNotIn((0, 2, "mp"), c)
        self.assertIn((0, 4, "mp"), c)
        self.assertTrue(constraints.allows(0, 4))
        self.assertFalse(constraints.allows(1, 3))

    def test_seeded_items(self):
        rule = treebank.Rule("mp", ("p", "np"))
        seeded = {(2, 4, "mp"): frozenset([(rule, ((2, 3, "p"), (3, 4, "np")))])}
        constraints = cfg_parser.SpanConstraints(
            sealed=frozenset([(2, 4)]), seeded=seeded, sure=frozenset(seeded)
        )
        c = cfg_parser.cyk_parse("per v p np".split(), self.g, constraints)
        self.assertTrue(c[(2, 4, "mp")].sure)
        self.assertIn((0, 4, "S"), c)


class OracleTest(unittest.TestCase):
    """Recognized items match leftmost derivation enumeration on random grammars."""

    def test_random_grammars(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            pairs = test_utils.random_rules(rng, int(rng.integers(2, 13)))
            g = treebank.CFGrammar(frozenset(treebank.Rule(lhs, rhs) for lhs, rhs in pairs))
            rules = test_utils.as_rules(pairs)
            n = int(rng.integers(1, 7))
            symbols = [str(rng.choice(test_utils.TAGS)) for _ in range(n)]

            c = cfg_parser.cyk_parse(symbols, g)
            lexical = {(i, i + 1, tag) for i, tag in enumerate(symbols)}
            expected = lexical | test_utils.derivable_items(rules, symbols)
            self.assertEqual(set(c.keys()), expected, f"{pairs} {symbols}")

            recognized = (0, n, "S") in c
            self.assertEqual(recognized, test_utils.derives(rules, "S", symbols))


if __name__ == "__main__":
    unittest.main()
