#!/usr/bin/env python3

from __future__ import annotations

import dataclasses
import functools
from collections.abc import Iterable, Iterator, Mapping, Sequence

from eblparse.parsing import chart as chart_lib
from eblparse.parsing.chart import Backpointer, Chart, ChartItem, ItemKey
from eblparse.treebank import treebank

Lattice = tuple[frozenset[str], ...]


class InputError(Exception):
    pass


def as_lattice(symbols: Sequence[str] | Sequence[Iterable[str]]) -> Lattice:
    """Tags become one-arc positions; tag collections are kept as they are."""
    return tuple(
        frozenset([position]) if isinstance(position, str) else frozenset(position)
        for position in symbols
    )


@dataclasses.dataclass(frozen=True)
class SpanConstraints:
    """Restrictions on the items the CFG parser may create.

    Attributes:
        forbidden: Spans whose borders no new item may cross.
        sealed: Spans whose interior gets no new items or analyses.
        seeded: Items accepted as they are, with their analyses, before parsing.
        sure: Seeded items flagged as coming from sure partial items.
    """

    forbidden: frozenset[tuple[int, int]] = frozenset()
    sealed: frozenset[tuple[int, int]] = frozenset()
    seeded: Mapping[ItemKey, frozenset[Backpointer]] = dataclasses.field(default_factory=dict)
    sure: frozenset[ItemKey] = frozenset()

    def allows(self, start: int, end: int) -> bool:
        span = (start, end)
        if any(chart_lib.crosses(span, other) for other in self.forbidden):
            return False
        return not any(
            i <= start and end <= j and span != (i, j) for i, j in self.sealed
        )


@functools.lru_cache(maxsize=32)
def _rule_index(g: treebank.CFGrammar) -> chart_lib.RuleIndex:
    return chart_lib.RuleIndex(chart_lib.ChartRule(r.lhs, r.rhs, r) for r in g.rules)


def cyk_parse(
    symbols: Sequence[str] | Sequence[Iterable[str]],
    g: treebank.CFGrammar,
    constraints: SpanConstraints | None = None,
) -> Chart:
    """CYK over rules of any arity.

    Args:
        symbols: Pos-tag sequence or tag lattice.
        g: (CFGrammar) Grammar underlying the tree-bank.
        constraints: (SpanConstraints) Optional crossing, sealing and seeding constraints.
    """
    lattice = as_lattice(symbols)
    chart = Chart(len(lattice), g.start)
    for position, tags in enumerate(lattice):
        for tag in sorted(tags):
            chart.seed(position, tag)

    allows = None
    if constraints is not None:
        for key, backpointers in constraints.seeded.items():
            for backpointer in backpointers:
                chart.add(key, backpointer)
            chart[key].sure = key in constraints.sure
        allows = constraints.allows

    chart_lib.fill(chart, _rule_index(g), allows)
    return chart


@dataclasses.dataclass
class ParseForest:
    """Chart items reachable from the full-span start item."""

    n: int
    start: str
    items: dict[ItemKey, ChartItem]

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, key: ItemKey) -> bool:
        return key in self.items

    @property
    def root(self) -> ItemKey:
        return 0, self.n, self.start

    def dump(self) -> str:
        lines = ["# start end label sure analyses"]
        for key in sorted(self.items):
            item = self.items[key]
            lines.append(
                f"{item.start} {item.end} {item.label} {int(item.sure)} {item.num_analyses()}"
            )
        return "\n".join(lines) + "\n"


def extract_forest(c: Chart) -> ParseForest:
    root = (0, c.n, c.start)
    items: dict[ItemKey, ChartItem] = {}
    if c.n == 0 or root not in c:
        return ParseForest(c.n, c.start, items)
    agenda = [root]
    while agenda:
        key = agenda.pop()
        if key in items:
            continue
        item = c[key]
        items[key] = item
        for _, kids in item.backpointers:
            agenda.extend(kid for kid in kids if kid not in items)
    return ParseForest(c.n, c.start, items)


def count_active_nodes(f: ParseForest) -> int:
    return len(f)


def contains_parse(f: ParseForest, gold: treebank.Tree) -> bool:
    """True iff the word-stripped gold tree is one of the forest's parses."""
    if len(gold.leaves) != f.n:
        raise InputError(f"Gold tree spans {len(gold.leaves)} symbols, the forest spans {f.n}.")

    def key(address: int) -> ItemKey:
        i, j = gold.spans[address]
        return i, j, gold.labels[address]

    for address in range(len(gold)):
        item = f.items.get(key(address))
        if item is None:
            return False
        if gold.is_leaf(address):
            if not item.lexical:
                return False
            continue
        kids = tuple(key(kid) for kid in gold.children[address])
        if not any(children == kids for _, children in item.backpointers):
            return False
    return True


def iter_parses(f: ParseForest, limit: int | None = None) -> Iterator[treebank.Tree]:
    """Enumerate the complete parses of a forest; cyclic unary analyses are skipped."""

    def expand(key: ItemKey, path: frozenset[ItemKey]) -> Iterator[str | tuple]:
        item = f.items[key]
        if item.lexical:
            yield item.label
        path = path | {key}
        for _, kids in sorted(item.backpointers, key=lambda bp: bp[1]):
            if any(kid in path for kid in kids):
                continue
            yield from (
                (item.label, list(children)) for children in expand_all(kids, path)
            )

    def expand_all(kids: tuple[ItemKey, ...], path: frozenset[ItemKey]) -> Iterator[tuple]:
        if not kids:
            yield ()
            return
        for head in expand(kids[0], path):
            for rest in expand_all(kids[1:], path):
                yield (head,) + rest

    if f.root not in f.items:
        return
    for count, nested in enumerate(expand(f.root, frozenset())):
        if limit is not None and count >= limit:
            return
        yield treebank.Tree.from_nested(nested)


class TParser:
    """Parser for the CFG underlying a tree-bank."""

    name = "tparser"

    def __init__(self, grammar: treebank.CFGrammar):
        self.grammar = grammar

    def parse(self, lattice: Sequence[Iterable[str]]) -> ParseForest:
        return extract_forest(cyk_parse(lattice, self.grammar))
