#!/usr/bin/env python3

import unittest

import yaml

from eblparse.learner import learner
from eblparse.learner import lexicon
from eblparse.treebank import test_utils
from eblparse.treebank import treebank


class LexiconTest(unittest.TestCase):
    def setUp(self):
        tb = treebank.strip_words(test_utils.route_treebank(k=2, m=10))
        self.lex = learner.learn(tb, test_utils.route_config()).lexicon
        self.text = lexicon.write_lexicon(self.lex)

    def test_read_back(self):
        lex = lexicon.read_lexicon(self.text)
        self.assertEqual(lex, self.lex)
        self.assertEqual(lexicon.write_lexicon(lex), self.text)

    def test_layout(self):
        document = yaml.safe_load(self.text)
        self.assertEqual(document["config"]["tau"], 2)
        self.assertEqual(document["config"]["tau-abs"], 2)
        first = document["entries"][0]
        self.assertEqual(first["iteration"], 0)
        self.assertEqual([entry["iteration"] for entry in document["entries"]], [0, 0, 0, 1, 1])
        ssf_entry = next(e for e in document["entries"] if e["ssf"] == "p np")
        self.assertEqual(ssf_entry["context"], "per * * *")
        self.assertEqual(ssf_entry["occurrences"], "2:3 3:3")
        self.assertEqual(ssf_entry["subtrees"], [{"tree": "(mp p np)", "count": 2}])

    def test_bad_yaml(self):
        self.assertRaises(lexicon.LexiconFormatError, lexicon.read_lexicon, "entries: [")
        self.assertRaises(lexicon.LexiconFormatError, lexicon.read_lexicon, "- just a list")

    def test_bad_entries(self):
        document = yaml.safe_load(self.text)
        document["entries"][0]["context"] = "a b * *"
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

        document = yaml.safe_load(self.text)
        document["entries"][0]["subtrees"][0]["tree"] = "(mp p)"
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

        document = yaml.safe_load(self.text)
        document["entries"][0]["occurrences"] = "2-3"
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

        document = yaml.safe_load(self.text)
        del document["entries"][0]["fc"]
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

    def test_duplicate_entries(self):
        document = yaml.safe_load(self.text)
        document["entries"].append(document["entries"][0])
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

    def test_bad_config(self):
        document = yaml.safe_load(self.text)
        document["config"]["theta-floor"] = 1.5
        self.assertRaises(
            lexicon.LexiconFormatError, lexicon.read_lexicon, yaml.safe_dump(document)
        )

    def test_empty_lexicon(self):
        lex = learner.LearnedLexicon(())
        self.assertEqual(len(lexicon.read_lexicon(lexicon.write_lexicon(lex))), 0)


if __name__ == "__main__":
    unittest.main()
