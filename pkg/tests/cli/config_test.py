#!/usr/bin/env python3

import tempfile
import unittest

from eblparse.cli import config
from eblparse.parsing import combiner


class ParseConfigTest(unittest.TestCase):
    def test_defaults(self):
        cfg = config.parse_config(None)
        self.assertEqual(cfg, config.RunConfig())
        self.assertEqual(cfg.grammar, config.FROM_CORPUS)
        self.assertEqual(cfg.trust_mode(), combiner.Trust.general)
        self.assertEqual(config.TRUST_NAMES, ("general", "sure", "all"))
        self.assertEqual(config.RunConfig(trust="sure").trust_mode(), combiner.Trust.sure)

    def test_hyphenated_keys(self):
        cfg = config.parse_config(
            {
                "corpus": "corpus.txt",
                "theta-floor": 0.8,
                "tau-abs": 5,
                "tau-frac": 0,
                "retreat": False,
                "pos-tags": ["p", "np"],
                "trust": "all",
            }
        )
        self.assertEqual(cfg.corpus, "corpus.txt")
        self.assertEqual(cfg.pos_tags, ("p", "np"))
        self.assertEqual(cfg.trust_mode(), combiner.Trust.all)
        learner_cfg = cfg.learner_config()
        self.assertEqual(learner_cfg.theta_floor, 0.8)
        self.assertEqual(learner_cfg.tau_abs, 5)
        self.assertIsInstance(learner_cfg.tau_frac, float)
        self.assertFalse(learner_cfg.retreat)

    def test_unlimited(self):
        cfg = config.parse_config({"max-depth": "unlimited", "max-words": 3})
        lim = cfg.projection_limits()
        self.assertIsNone(lim.depth)
        self.assertEqual(lim.words, 3)
        self.assertEqual(lim.subst_sites, 2)

    def test_errors(self):
        bad = [
            ["seed"],
            {"colour": "red"},
            {"seed": "zero"},
            {"seed": True},
            {"retreat": 1},
            {"pos-tags": "p np"},
            {"trust": "some"},
            {"jobs": 0},
            {"splits": 0},
            {"max-seed": "unlimited"},
        ]
        for config_dict in bad:
            self.assertRaises(config.ConfigError, config.parse_config, config_dict)

    def test_bad_limits(self):
        cfg = config.parse_config({"max-depth": 0})
        self.assertRaises(config.ConfigError, cfg.projection_limits)


class RunConfigTest(unittest.TestCase):
    def test_merge(self):
        cfg = config.RunConfig(seed=3, splits=2)
        merged = cfg.merge(seed=None, splits=4, corpus="c.txt")
        self.assertEqual(merged.seed, 3)
        self.assertEqual(merged.splits, 4)
        self.assertEqual(merged.corpus, "c.txt")
        self.assertEqual(cfg.splits, 2)
        self.assertRaises(config.ConfigError, cfg.merge, colour="red")

    def test_split_spec(self):
        spec = config.RunConfig(seed=7).split_spec(50)
        self.assertEqual((spec.seed, spec.train_size, spec.test_size), (7, 45, 5))
        spec = config.RunConfig(train_size=10, test_size=3, min_length=4).split_spec(50)
        self.assertEqual((spec.train_size, spec.test_size), (10, 3))
        self.assertEqual(spec.min_sentence_length, 4)
        self.assertEqual(config.RunConfig().split_spec(5).test_size, 1)


class LoadConfigTest(unittest.TestCase):
    def test_load(self):
        with tempfile.NamedTemporaryFile("w", suffix=".yaml") as f:
            f.write("seed: 4\nmax-subst-sites: unlimited\n")
            f.flush()
            cfg = config.load_config(f.name)
        self.assertEqual(cfg.seed, 4)
        self.assertIsNone(cfg.max_subst_sites)

    def test_empty_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".yaml") as f:
            self.assertEqual(config.load_config(f.name), config.RunConfig())

    def test_invalid_yaml(self):
        with tempfile.NamedTemporaryFile("w", suffix=".yaml") as f:
            f.write("seed: [4\n")
            f.flush()
            self.assertRaises(config.ConfigError, config.load_config, f.name)


if __name__ == "__main__":
    unittest.main()
