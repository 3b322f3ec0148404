#!/usr/bin/env python3

from __future__ import annotations

import dataclasses
from collections.abc import Callable, Iterable, Sequence

from eblparse.learner import learner
from eblparse.parsing import chart as chart_lib
from eblparse.parsing import cfg_parser
from eblparse.parsing.chart import ItemKey
from eblparse.treebank import treebank

# (elementary tree index, item key matched by each frontier position)
Analysis = tuple[int, tuple[ItemKey, ...]]


@dataclasses.dataclass(frozen=True)
class ElementaryTree:
    """An associated subtree used as a TSG elementary tree.

    Attributes:
        theta: Highest theta of the entries the tree was learned from.
        provenance: (iteration, ssf, context) of every source entry.
        bound: No source entry reaching theta was learned under the all-wildcard pattern.
            The partial-parser ignores context, so a bound tree may be applied where its
            pattern does not hold.
    """

    tree: treebank.Tree
    theta: float
    provenance: tuple[tuple[int, tuple[str, ...], str], ...]
    bound: bool = False

    @property
    def sure(self) -> bool:
        return self.theta >= 1.0

    @property
    def general(self) -> bool:
        return self.sure and not self.bound

    @property
    def root(self) -> str:
        return self.tree.root_label

    @property
    def frontier(self) -> tuple[str, ...]:
        return self.tree.frontier_labels()


@dataclasses.dataclass(frozen=True)
class Tsg:
    elementary_trees: tuple[ElementaryTree, ...]
    start: str = "S"

    def __len__(self) -> int:
        return len(self.elementary_trees)

    def num_nodes(self) -> int:
        return sum(len(elementary.tree) for elementary in self.elementary_trees)

    def rule_index(self) -> chart_lib.RuleIndex:
        return chart_lib.RuleIndex(
            chart_lib.ChartRule(elementary.root, elementary.frontier, index)
            for index, elementary in enumerate(self.elementary_trees)
        )


def build_tsg(lex: learner.LearnedLexicon, start: str = "S") -> Tsg:
    """Collect the associated subtrees of a lexicon, deduplicated by structure."""
    thetas: dict[treebank.Tree, float] = {}
    general_thetas: dict[treebank.Tree, float] = {}
    provenance: dict[treebank.Tree, list[tuple[int, tuple[str, ...], str]]] = {}
    for entry in lex.entries:
        for tree, _ in entry.subtrees:
            thetas[tree] = max(thetas.get(tree, 0.0), entry.theta)
            if entry.context == learner.ANY_CONTEXT:
                general_thetas[tree] = max(general_thetas.get(tree, 0.0), entry.theta)
            provenance.setdefault(tree, []).append(
                (entry.iteration, entry.ssf, str(entry.context))
            )
    elementary = [
        ElementaryTree(
            tree,
            thetas[tree],
            tuple(provenance[tree]),
            bound=general_thetas.get(tree, 0.0) < thetas[tree],
        )
        for tree in sorted(thetas, key=treebank.Tree.to_string)
    ]
    return Tsg(tuple(elementary), start)


@dataclasses.dataclass
class PartialItem:
    """A recognized span.

    Attributes:
        sure: Some analysis uses sure elementary trees only.
        general: Some analysis uses sure elementary trees that are not bound to a context.
    """

    start: int
    end: int
    label: str
    analyses: frozenset[Analysis]
    sure: bool = False
    general: bool = False

    @property
    def key(self) -> ItemKey:
        return self.start, self.end, self.label

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


@dataclasses.dataclass
class PartialChart:
    """Items recognized by the partial-parser over one input.

    Attributes:
        lexical: Length-one seeds from the input lattice.
        removed_pairs: Crossing sure items removed by resolve_crossings.
    """

    n: int
    tsg: Tsg
    items: dict[ItemKey, PartialItem]
    lexical: frozenset[ItemKey]
    removed_pairs: tuple[tuple[ItemKey, ItemKey], ...] = ()

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, key: ItemKey) -> bool:
        return key in self.items

    def sorted_items(self) -> list[PartialItem]:
        return [self.items[key] for key in sorted(self.items)]

    def dump(self) -> str:
        lines = ["# start end label sure analyses"]
        for item in self.sorted_items():
            lines.append(
                f"{item.start} {item.end} {item.label} {int(item.sure)} {len(item.analyses)}"
            )
        return "\n".join(lines) + "\n"


def _closure(
    items: dict[ItemKey, frozenset[Analysis]],
    lexical: frozenset[ItemKey],
    g: Tsg,
    accepts: Callable[[ElementaryTree], bool],
) -> set[ItemKey]:
    """Items with an analysis built from accepted elementary trees only (least fixpoint)."""
    found: set[ItemKey] = set()
    changed = True
    while changed:
        changed = False
        for key, analyses in items.items():
            if key in found:
                continue
            for index, kids in analyses:
                if accepts(g.elementary_trees[index]) and all(
                    kid in found or kid in lexical for kid in kids
                ):
                    found.add(key)
                    changed = True
                    break
    return found


def make_chart(
    n: int,
    items: dict[ItemKey, frozenset[Analysis]],
    lexical: frozenset[ItemKey],
    g: Tsg,
    removed_pairs: tuple[tuple[ItemKey, ItemKey], ...] = (),
) -> PartialChart:
    """Build a partial chart after dropping analyses that depend on missing items."""
    items = dict(items)
    changed = True
    while changed:
        changed = False
        for key in list(items):
            valid = frozenset(
                analysis
                for analysis in items[key]
                if all(kid in items or kid in lexical for kid in analysis[1])
            )
            if valid != items[key]:
                changed = True
                if valid:
                    items[key] = valid
                else:
                    del items[key]
    sure = _closure(items, lexical, g, lambda elementary: elementary.sure)
    general = _closure(items, lexical, g, lambda elementary: elementary.general)
    return PartialChart(
        n=n,
        tsg=g,
        items={
            key: PartialItem(*key, analyses=analyses, sure=key in sure, general=key in general)
            for key, analyses in items.items()
        },
        lexical=lexical,
        removed_pairs=removed_pairs,
    )


def partial_parse(symbols: Sequence[str] | Sequence[Iterable[str]], g: Tsg) -> PartialChart:
    """Recognize every span derivable by substitution-composing elementary trees.

    Args:
        symbols: Pos-tag sequence or tag lattice.
        g: (Tsg) Elementary trees compiled to root -> frontier rules.
    """
    lattice = cfg_parser.as_lattice(symbols)
    chart = chart_lib.Chart(len(lattice), g.start)
    for position, tags in enumerate(lattice):
        for tag in sorted(tags):
            chart.seed(position, tag)
    lexical = frozenset(chart.keys())
    chart_lib.fill(chart, g.rule_index())

    items = {
        item.key: frozenset(item.backpointers) for item in chart.items() if item.backpointers
    }
    return make_chart(len(lattice), items, lexical, g)


def analysis_tree(pc: PartialChart, g: Tsg, key: ItemKey) -> treebank.Tree:
    """Expand one well-founded analysis of an item into the tree it stands for."""

    def expand(key: ItemKey, path: frozenset[ItemKey]) -> str | tuple | None:
        item = pc.items.get(key)
        if item is None or key in path:
            return key[2] if key in pc.lexical else None
        for index, kids in sorted(item.analyses):
            subtrees = [expand(kid, path | {key}) for kid in kids]
            if any(subtree is None for subtree in subtrees):
                continue
            elementary = g.elementary_trees[index].tree
            frontier = iter(subtrees)

            def graft(address: int) -> str | tuple:
                if elementary.is_leaf(address):
                    return next(frontier)
                return (
                    elementary.labels[address],
                    [graft(kid) for kid in elementary.children[address]],
                )

            return graft(0)
        return key[2] if key in pc.lexical else None

    nested = expand(key, frozenset())
    if nested is None:
        raise treebank.InvariantViolation("witnessed-items", f"item {key} has no finite analysis")
    return treebank.Tree.from_nested(nested)
