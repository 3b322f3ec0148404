#!/usr/bin/env python3

"""Run configuration: defaults, overridden by a YAML file, overridden by command-line flags."""

from __future__ import annotations

import dataclasses
import pathlib
from typing import Any

import yaml

from eblparse.dop import dop
from eblparse.eval import evaluate
from eblparse.learner import learner
from eblparse.parsing import combiner

FROM_CORPUS = "from-corpus"
TRUST_NAMES = tuple(trust.name for trust in combiner.Trust)


class ConfigError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Merged settings of one run.

    Attributes:
        grammar: Rule file, or 'from-corpus' to extract the grammar from the corpus.
        pos_tags: Declared pos-tag alphabet; words below these labels are stripped.
        train_size: Training trees per split. Defaults to all trees not in the test set.
        test_size: Test trees per split. Defaults to a tenth of the corpus.
        trust: 'general', 'sure' or 'all', the partial items that constrain the combined
            parser.
        max_depth: Fragment depth limit; None is unlimited. Likewise for the other max_ fields.
    """

    corpus: str | None = None
    lexicon: str | None = None
    grammar: str = FROM_CORPUS
    out: str | None = None
    pos_tags: tuple[str, ...] | None = None
    theta_start: float = 1.0
    theta_floor: float = 1.0
    theta_step: float = 0.05
    tau_abs: int = 10
    tau_frac: float = 0.003
    retreat: bool = True
    seed: int = 0
    splits: int = 1
    train_size: int | None = None
    test_size: int | None = None
    min_length: int = 2
    trust: str = "general"
    max_depth: int | None = 4
    max_subst_sites: int | None = 2
    max_words: int | None = 7
    max_consecutive_words: int | None = 2
    jobs: int = 1
    verbose: bool = False

    def __post_init__(self):
        if self.trust not in TRUST_NAMES:
            raise ConfigError(f"trust: must be one of {', '.join(TRUST_NAMES)}.")
        if self.jobs < 1:
            raise ConfigError("jobs: must be at least one.")
        if self.splits < 1:
            raise ConfigError("splits: must be at least one.")

    def merge(self, **flags: Any) -> RunConfig:
        """Return a copy with every flag that is not None taking precedence."""
        unknown = set(flags) - {field.name for field in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"Unknown settings: {', '.join(sorted(unknown))}")
        return dataclasses.replace(
            self, **{key: value for key, value in flags.items() if value is not None}
        )

    def learner_config(self) -> learner.LearnerConfig:
        return learner.LearnerConfig(
            theta_start=self.theta_start,
            theta_floor=self.theta_floor,
            theta_step=self.theta_step,
            tau_abs=self.tau_abs,
            tau_frac=self.tau_frac,
            retreat=self.retreat,
        )

    def split_spec(self, num_trees: int) -> evaluate.SplitSpec:
        test_size = self.test_size if self.test_size is not None else max(1, num_trees // 10)
        train_size = self.train_size if self.train_size is not None else num_trees - test_size
        return evaluate.SplitSpec(
            seed=self.seed,
            train_size=max(train_size, 0),
            test_size=test_size,
            min_sentence_length=self.min_length,
        )

    def projection_limits(self) -> dop.ProjectionLimits:
        try:
            return dop.ProjectionLimits(
                depth=self.max_depth,
                subst_sites=self.max_subst_sites,
                words=self.max_words,
                consecutive_words=self.max_consecutive_words,
            )
        except ValueError as e:
            raise ConfigError(str(e))

    def trust_mode(self) -> combiner.Trust:
        return combiner.Trust[self.trust]


# Config-file key -> (field name, accepted types)
_KEYS: dict[str, tuple[str, tuple[type, ...]]] = {
    "corpus": ("corpus", (str,)),
    "lexicon": ("lexicon", (str,)),
    "grammar": ("grammar", (str,)),
    "out": ("out", (str,)),
    "pos-tags": ("pos_tags", (list,)),
    "theta-start": ("theta_start", (int, float)),
    "theta-floor": ("theta_floor", (int, float)),
    "theta-step": ("theta_step", (int, float)),
    "tau-abs": ("tau_abs", (int,)),
    "tau-frac": ("tau_frac", (int, float)),
    "retreat": ("retreat", (bool,)),
    "seed": ("seed", (int,)),
    "splits": ("splits", (int,)),
    "train-size": ("train_size", (int,)),
    "test-size": ("test_size", (int,)),
    "min-length": ("min_length", (int,)),
    "trust": ("trust", (str,)),
    "max-depth": ("max_depth", (int,)),
    "max-subst-sites": ("max_subst_sites", (int,)),
    "max-words": ("max_words", (int,)),
    "max-consecutive-words": ("max_consecutive_words", (int,)),
    "jobs": ("jobs", (int,)),
    "verbose": ("verbose", (bool,)),
}

# Limits that may be set to 'unlimited' in a config file
_UNLIMITED = "unlimited"
_LIMIT_KEYS = {"max-depth", "max-subst-sites", "max-words", "max-consecutive-words"}


def parse_config(config_dict: Any, name: str = "config") -> RunConfig:
    if config_dict is None:
        return RunConfig()
    if not isinstance(config_dict, dict):
        raise ConfigError(f"{name}: must be a mapping of settings.")

    settings: dict[str, Any] = {}
    for key, value in config_dict.items():
        if key not in _KEYS:
            raise ConfigError(f"{name}:{key}: unknown setting.")
        field_name, types = _KEYS[key]
        if key in _LIMIT_KEYS and value == _UNLIMITED:
            settings[field_name] = None
            continue
        # bool is an int subclass
        if isinstance(value, bool) and bool not in types:
            raise ConfigError(f"{name}:{key}: must be of type {types[0].__name__}.")
        if not isinstance(value, types):
            raise ConfigError(f"{name}:{key}: must be of type {types[0].__name__}.")
        if field_name == "pos_tags":
            value = tuple(str(tag) for tag in value)
        elif float in types:
            value = float(value)
        settings[field_name] = value
    try:
        return dataclasses.replace(RunConfig(), **settings)
    except ConfigError as e:
        raise ConfigError(f"{name}: {e}")


def load_config(path: str | pathlib.Path) -> RunConfig:
    """Load a YAML run configuration with hyphenated keys."""
    path = pathlib.Path(path)
    with path.open() as f:
        try:
            config_dict = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML: {e}")
    return parse_config(config_dict, path.name)
