#!/usr/bin/env python3

from __future__ import annotations

import collections
import dataclasses
from collections.abc import Callable, Hashable, Iterable, Iterator, Sequence

# (start, end, label) over half-open input positions
ItemKey = tuple[int, int, str]
# (rule or elementary tree id, child item keys)
Backpointer = tuple[Hashable, tuple[ItemKey, ...]]


def crosses(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True iff two spans properly overlap."""
    i, j = a
    k, m = b
    return i < k < j < m or k < i < m < j


@dataclasses.dataclass
class ChartItem:
    start: int
    end: int
    label: str
    lexical: bool = False
    sure: bool = False
    backpointers: set[Backpointer] = dataclasses.field(default_factory=set)

    @property
    def key(self) -> ItemKey:
        return self.start, self.end, self.label

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end

    def num_analyses(self) -> int:
        return len(self.backpointers) + int(self.lexical)


class Chart:
    """Span-indexed items with packed backpointers."""

    def __init__(self, n: int, start: str = "S"):
        self.n = n
        self.start = start
        self._items: dict[ItemKey, ChartItem] = {}
        # start position -> label -> end positions
        self._ends: dict[int, dict[str, set[int]]] = collections.defaultdict(
            lambda: collections.defaultdict(set)
        )
        self._cells: dict[tuple[int, int], set[str]] = collections.defaultdict(set)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, key: ItemKey) -> bool:
        return key in self._items

    def __getitem__(self, key: ItemKey) -> ChartItem:
        return self._items[key]

    def get(self, key: ItemKey) -> ChartItem | None:
        return self._items.get(key)

    def items(self) -> list[ChartItem]:
        return [self._items[key] for key in sorted(self._items)]

    def keys(self) -> Iterator[ItemKey]:
        return iter(self._items)

    def labels_at(self, start: int) -> list[str]:
        return list(self._ends[start])

    def ends(self, start: int, label: str) -> set[int]:
        return self._ends[start].get(label, set())

    def cell(self, start: int, end: int) -> set[str]:
        return self._cells.get((start, end), set())

    def _item(self, key: ItemKey) -> tuple[ChartItem, bool]:
        item = self._items.get(key)
        if item is not None:
            return item, False
        start, end, label = key
        item = ChartItem(start, end, label)
        self._items[key] = item
        self._ends[start][label].add(end)
        self._cells[(start, end)].add(label)
        return item, True

    def seed(self, start: int, label: str) -> bool:
        """Add a lexical item of length one. Returns True if the item is new."""
        item, new = self._item((start, start + 1, label))
        item.lexical = True
        return new

    def add(self, key: ItemKey, backpointer: Backpointer) -> bool:
        """Add an analysis. Returns True if the item or the backpointer is new."""
        item, new = self._item(key)
        if backpointer in item.backpointers:
            return new
        item.backpointers.add(backpointer)
        return True

    def dump(self) -> str:
        lines = ["# start end label sure analyses"]
        for item in self.items():
            lines.append(
                f"{item.start} {item.end} {item.label} {int(item.sure)} {item.num_analyses()}"
            )
        return "\n".join(lines) + "\n"


@dataclasses.dataclass(frozen=True)
class ChartRule:
    lhs: str
    rhs: tuple[str, ...]
    payload: Hashable


class RuleIndex:
    """Rules indexed by their first right-hand-side symbol."""

    def __init__(self, rules: Iterable[ChartRule]):
        self.by_first: dict[str, list[ChartRule]] = collections.defaultdict(list)
        self.unary: dict[str, list[ChartRule]] = collections.defaultdict(list)
        for rule in rules:
            if not rule.rhs:
                continue
            if len(rule.rhs) == 1:
                self.unary[rule.rhs[0]].append(rule)
            else:
                self.by_first[rule.rhs[0]].append(rule)


def _match(
    chart: Chart, rhs: Sequence[str], index: int, position: int, end: int
) -> Iterator[tuple[ItemKey, ...]]:
    label = rhs[index]
    remaining = len(rhs) - index - 1
    for stop in chart.ends(position, label):
        if remaining == 0:
            if stop == end:
                yield ((position, stop, label),)
        elif stop + remaining <= end:
            for rest in _match(chart, rhs, index + 1, stop, end):
                yield ((position, stop, label),) + rest


def fill(
    chart: Chart,
    index: RuleIndex,
    allows: Callable[[int, int], bool] | None = None,
) -> None:
    """Close a seeded chart under a rule index, bottom-up by span length.

    Rules with several right-hand-side symbols are matched left to right against the items
    already in the chart; unary rules are applied to a fixpoint within each span.

    Args:
        chart: (Chart) Chart holding the lexical seeds and any pre-seeded items.
        index: (RuleIndex) Rules to apply.
        allows: (function) Predicate on (start, end); spans it rejects get no new analyses.
    """
    n = chart.n
    for length in range(1, n + 1):
        for start in range(n - length + 1):
            end = start + length
            if allows is not None and not allows(start, end):
                continue
            for first in chart.labels_at(start):
                for rule in index.by_first.get(first, ()):
                    if len(rule.rhs) > length:
                        continue
                    for kids in list(_match(chart, rule.rhs, 0, start, end)):
                        chart.add((start, end, rule.lhs), (rule.payload, kids))

            changed = True
            while changed:
                changed = False
                for label in list(chart.cell(start, end)):
                    for rule in index.unary.get(label, ()):
                        kid = (start, end, label)
                        if chart.add((start, end, rule.lhs), (rule.payload, (kid,))):
                            changed = True
