#!/usr/bin/env python3

"""Synthetic tree-bank generator driven by a YAML template grammar.

A preset maps template names to weighted bracketed skeletons. Skeleton leaves named after a
template are expanded recursively, other leaves are pos-tags and receive a word. A skeleton
rooted at '~' is spliced flat into its parent.
"""

from __future__ import annotations

import dataclasses
import pathlib
from typing import Any

import numpy as np
import yaml

from eblparse.treebank import treebank

PRESET_DIR = pathlib.Path(__file__).parent / "presets"
SPLICE = "~"
MAX_DEPTH = 50


class GeneratorConfigError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class Alternative:
    weight: float
    skeleton: treebank.Tree


@dataclasses.dataclass(frozen=True)
class GeneratorConfig:
    """A template grammar.

    Attributes:
        vocabulary: Number of distinct words per pos-tag.
        ambiguity: Probability that a tag with ambiguous words gets one of them.
        ambiguous_words: Word -> pos-tags it can carry.
    """

    start: str
    rules: dict[str, tuple[Alternative, ...]]
    vocabulary: int = 10
    ambiguity: float = 0.0
    ambiguous_words: dict[str, tuple[str, ...]] = dataclasses.field(default_factory=dict)

    def ambiguous_for(self, tag: str) -> list[str]:
        return sorted(word for word, tags in self.ambiguous_words.items() if tag in tags)


def _parse_rules(rules: Any) -> dict[str, tuple[Alternative, ...]]:
    if not isinstance(rules, dict) or not rules:
        raise GeneratorConfigError("rules: must be a non-empty mapping.")
    parsed = {}
    for name, alternatives in rules.items():
        if not isinstance(alternatives, list) or not alternatives:
            raise GeneratorConfigError(f"rules:{name}: must be a non-empty list.")
        parsed_alts = []
        for index, alternative in enumerate(alternatives):
            where = f"rules:{name}:{index}"
            if not isinstance(alternative, dict) or "tree" not in alternative:
                raise GeneratorConfigError(f"{where}: missing 'tree'.")
            weight = alternative.get("weight", 1)
            if not isinstance(weight, (int, float)) or weight <= 0:
                raise GeneratorConfigError(f"{where}:weight: must be greater than zero.")
            try:
                skeleton = treebank.Tree.fromstring(str(alternative["tree"]))
            except (treebank.TreebankSyntaxError, treebank.EmptyCorpusError) as e:
                raise GeneratorConfigError(f"{where}:tree: {e}")
            parsed_alts.append(Alternative(float(weight), skeleton))
        parsed[str(name)] = tuple(parsed_alts)
    return parsed


def parse_preset(config_dict: Any) -> GeneratorConfig:
    if not isinstance(config_dict, dict):
        raise GeneratorConfigError("Preset must be a mapping.")
    unknown = set(config_dict) - {"start", "vocabulary", "ambiguity", "ambiguous-words", "rules"}
    if unknown:
        raise GeneratorConfigError(f"Unknown preset keys: {', '.join(sorted(unknown))}")

    start = str(config_dict.get("start", "S"))
    rules = _parse_rules(config_dict.get("rules"))
    if start not in rules:
        raise GeneratorConfigError(f"start: no rules for {start!r}.")

    vocabulary = config_dict.get("vocabulary", 10)
    if not isinstance(vocabulary, int) or vocabulary < 1:
        raise GeneratorConfigError("vocabulary: must be a positive integer.")
    ambiguity = config_dict.get("ambiguity", 0.0)
    if not isinstance(ambiguity, (int, float)) or not 0 <= ambiguity <= 1:
        raise GeneratorConfigError("ambiguity: must be between zero and one.")

    ambiguous_words = {}
    for word, tags in (config_dict.get("ambiguous-words") or {}).items():
        if not isinstance(tags, list) or not tags:
            raise GeneratorConfigError(f"ambiguous-words:{word}: must be a non-empty list.")
        ambiguous_words[str(word)] = tuple(str(tag) for tag in tags)

    return GeneratorConfig(start, rules, vocabulary, float(ambiguity), ambiguous_words)


def load_preset(name_or_path: str | pathlib.Path) -> GeneratorConfig:
    """Load a shipped preset by name, or a preset file by path."""
    path = pathlib.Path(name_or_path)
    if not path.suffix:
        path = PRESET_DIR / f"{name_or_path}.yaml"
    if not path.exists():
        shipped = ", ".join(sorted(p.stem for p in PRESET_DIR.glob("*.yaml")))
        raise GeneratorConfigError(f"No preset {str(name_or_path)!r}. Shipped presets: {shipped}")
    with path.open() as f:
        try:
            return parse_preset(yaml.safe_load(f))
        except yaml.YAMLError as e:
            raise GeneratorConfigError(f"{path}: invalid YAML: {e}")


def list_presets() -> list[str]:
    return sorted(path.stem for path in PRESET_DIR.glob("*.yaml"))


class _Generator:
    def __init__(self, cfg: GeneratorConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self._weights = {
            name: np.array([alt.weight for alt in alts]) / sum(alt.weight for alt in alts)
            for name, alts in cfg.rules.items()
        }

    def word(self, tag: str) -> str:
        ambiguous = self.cfg.ambiguous_for(tag)
        if ambiguous and self.rng.random() < self.cfg.ambiguity:
            return ambiguous[int(self.rng.integers(len(ambiguous)))]
        return f"{tag}{int(self.rng.integers(self.cfg.vocabulary))}"

    def expand_template(self, name: str, depth: int) -> list:
        if depth > MAX_DEPTH:
            raise GeneratorConfigError(
                f"Template {name!r} recursed deeper than {MAX_DEPTH} levels."
            )
        alternatives = self.cfg.rules[name]
        choice = int(self.rng.choice(len(alternatives), p=self._weights[name]))
        skeleton = alternatives[choice].skeleton
        return self.expand_node(skeleton, 0, depth)

    def expand_node(self, skeleton: treebank.Tree, address: int, depth: int) -> list:
        label = skeleton.labels[address]
        if skeleton.is_leaf(address):
            if label in self.cfg.rules:
                return self.expand_template(label, depth + 1)
            return [(label, [self.word(label)])]
        kids = [
            node
            for kid in skeleton.children[address]
            for node in self.expand_node(skeleton, kid, depth)
        ]
        if label == SPLICE:
            return kids
        return [(label, kids)]

    def tree(self) -> treebank.Tree:
        nodes = self.expand_template(self.cfg.start, 0)
        if len(nodes) != 1 or nodes[0][0] != self.cfg.start:
            raise GeneratorConfigError(
                f"Template {self.cfg.start!r} must produce a single {self.cfg.start!r} node."
            )
        return treebank.Tree.from_nested(nodes[0])


def generate_corpus(n: int, seed: int, preset: GeneratorConfig | str) -> treebank.TreeBank:
    """Generate n word-annotated trees.

    Args:
        n: (int) Number of trees.
        seed: (int) Seed of the random generator; equal seeds give equal corpora.
        preset: (GeneratorConfig) Template grammar, or the name of a shipped preset.
    """
    if n < 0:
        raise GeneratorConfigError("size: must not be negative.")
    cfg = load_preset(preset) if isinstance(preset, str) else preset
    rng = np.random.default_rng(seed)
    generator = _Generator(cfg, rng)
    trees = []
    for _ in range(n):
        trees.append(generator.tree())
    return treebank.TreeBank(tuple(trees), cfg.start)
