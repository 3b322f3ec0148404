#!/usr/bin/env python3

from __future__ import annotations

import dataclasses
import enum
import logging
from collections.abc import Iterable, Sequence

from eblparse.parsing import cfg_parser
from eblparse.parsing import tsg_parser
from eblparse.parsing.chart import Backpointer, ItemKey, crosses
from eblparse.treebank import treebank


class Trust(enum.Enum):
    """Which partial items constrain the full parser.

    general: sure items whose elementary trees were learned without a concrete context.
    sure: every item built from theta = 1.0 trees.
    all: every partial item.
    """

    general = enum.auto()
    sure = enum.auto()
    all = enum.auto()


@dataclasses.dataclass
class CombinedParse:
    forest: cfg_parser.ParseForest
    partial_items_used: tuple[ItemKey, ...]
    removed_crossing_pairs: tuple[tuple[ItemKey, ItemKey], ...]
    removed_untrusted: tuple[ItemKey, ...] = ()
    trusted_spans: frozenset[tuple[int, int]] = frozenset()


def _trusted(item: tsg_parser.PartialItem, trust: Trust) -> bool:
    if trust == Trust.general:
        return item.general
    return trust == Trust.all or item.sure


def resolve_crossings(
    pc: tsg_parser.PartialChart, trust: Trust = Trust.general
) -> tsg_parser.PartialChart:
    """Remove both members of every pair of crossing trusted items, to a fixpoint."""
    removed_pairs = list(pc.removed_pairs)
    while True:
        trusted = [item for item in pc.sorted_items() if _trusted(item, trust)]
        pairs = [
            (a.key, b.key)
            for index, a in enumerate(trusted)
            for b in trusted[index + 1 :]
            if crosses(a.span, b.span)
        ]
        if not pairs:
            return pc
        removed = {key for pair in pairs for key in pair}
        removed_pairs.extend(pairs)
        items = {key: item.analyses for key, item in pc.items.items() if key not in removed}
        pc = tsg_parser.make_chart(pc.n, items, pc.lexical, pc.tsg, tuple(removed_pairs))


def _decompose(
    analysis: tsg_parser.Analysis, g: tsg_parser.Tsg
) -> list[tuple[ItemKey, Backpointer]]:
    """CF-level items and analyses of one elementary tree placed over the input."""
    index, kids = analysis
    elementary = g.elementary_trees[index].tree
    leaf_keys = dict(zip(elementary.leaves, kids))

    def key(address: int) -> ItemKey:
        if elementary.is_leaf(address):
            return leaf_keys[address]
        i, j = elementary.spans[address]
        return leaf_keys[elementary.leaves[i]][0], leaf_keys[elementary.leaves[j - 1]][1], (
            elementary.labels[address]
        )

    decomposed = []
    for address in elementary.internal_nodes():
        children = tuple(key(kid) for kid in elementary.children[address])
        rule = treebank.Rule(elementary.labels[address], tuple(kid[2] for kid in children))
        decomposed.append((key(address), (rule, children)))
    return decomposed


def _brackets(analysis: tsg_parser.Analysis, g: tsg_parser.Tsg) -> list[tuple[int, int]]:
    return [key[:2] for key, _ in _decompose(analysis, g)]


def _retain(
    pc: tsg_parser.PartialChart, trust: Trust
) -> tuple[tsg_parser.PartialChart, list[ItemKey]]:
    """Drop untrusted items crossing trusted spans and analyses whose brackets would cross them."""
    dropped: list[ItemKey] = []
    while True:
        borders = {item.span for item in pc.items.values() if _trusted(item, trust)}
        items = {}
        changed = False
        for key, item in pc.items.items():
            if not _trusted(item, trust) and any(crosses(item.span, b) for b in borders):
                dropped.append(key)
                changed = True
                continue
            analyses = frozenset(
                analysis
                for analysis in item.analyses
                if not any(
                    crosses(bracket, b) for bracket in _brackets(analysis, pc.tsg) for b in borders
                )
            )
            if analyses != item.analyses:
                changed = True
            if analyses:
                items[key] = analyses
        if not changed:
            return pc, dropped
        pc = tsg_parser.make_chart(pc.n, items, pc.lexical, pc.tsg, pc.removed_pairs)


def combine_parse(
    symbols: Sequence[str] | Sequence[Iterable[str]],
    pc: tsg_parser.PartialChart,
    g: treebank.CFGrammar,
    *,
    trust: Trust = Trust.general,
    verbose: bool = False,
) -> CombinedParse:
    """Complete a partial parse with the CFG parser.

    Partial items are seeded into the CFG chart. Spans of trusted items may not be crossed and
    their interiors get no new items.

    Args:
        symbols: Pos-tag sequence or tag lattice, the same one pc was built from.
        pc: (PartialChart) Partial chart with crossings resolved.
        g: (CFGrammar) Grammar underlying the tree-bank.
        trust: (Trust) Which partial items constrain the CFG parser.
        verbose: (bool) Log removals as info instead of debug.
    """
    log_func = logging.info if verbose else logging.debug
    pc, dropped = _retain(pc, trust)
    if dropped:
        log_func(f"Removed {len(dropped)} untrusted partial items crossing trusted ones")

    seeded: dict[ItemKey, set[Backpointer]] = {}
    sure_keys: set[ItemKey] = set()
    for item in pc.items.values():
        for analysis in item.analyses:
            for key, backpointer in _decompose(analysis, pc.tsg):
                seeded.setdefault(key, set()).add(backpointer)
                if item.sure:
                    sure_keys.add(key)

    borders = frozenset(item.span for item in pc.items.values() if _trusted(item, trust))
    constraints = cfg_parser.SpanConstraints(
        forbidden=borders,
        sealed=borders,
        seeded={key: frozenset(backpointers) for key, backpointers in seeded.items()},
        sure=frozenset(sure_keys),
    )
    chart = cfg_parser.cyk_parse(symbols, g, constraints)
    forest = cfg_parser.extract_forest(chart)

    for key in forest.items:
        for border in borders:
            if crosses(key[:2], border):
                raise treebank.InvariantViolation(
                    "no-crossing", f"forest item {key} crosses trusted span {border}"
                )

    return CombinedParse(
        forest=forest,
        partial_items_used=tuple(sorted(pc.items)),
        removed_crossing_pairs=pc.removed_pairs,
        removed_untrusted=tuple(dropped),
        trusted_spans=borders,
    )


class CombinedParser:
    """Partial-parser followed by the CFG parser."""

    name = "combined"

    def __init__(
        self,
        grammar: treebank.CFGrammar,
        tsg: tsg_parser.Tsg,
        *,
        trust: Trust = Trust.general,
        verbose: bool = False,
    ):
        self.grammar = grammar
        self.tsg = tsg
        self.trust = trust
        self._verbose = verbose

    def parse_combined(self, lattice: Sequence[Iterable[str]]) -> CombinedParse:
        pc = tsg_parser.partial_parse(lattice, self.tsg)
        pc = resolve_crossings(pc, self.trust)
        if pc.removed_pairs:
            log_func = logging.info if self._verbose else logging.debug
            log_func(f"Removed {len(pc.removed_pairs)} crossing pairs of partial items")
        return combine_parse(
            lattice, pc, self.grammar, trust=self.trust, verbose=self._verbose
        )

    def parse(self, lattice: Sequence[Iterable[str]]) -> cfg_parser.ParseForest:
        return self.parse_combined(lattice).forest
