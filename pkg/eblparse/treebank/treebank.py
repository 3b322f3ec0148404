#!/usr/bin/env python3

from __future__ import annotations

import dataclasses
import enum
import functools
from collections.abc import Iterable, Iterator, Mapping, Sequence

import nltk

# Markers shared by the learner context patterns and the lexicon file format
BOUNDARY = "#"
WILDCARD = "*"

_FLAT_MARGIN = 1 << 30


class TreebankSyntaxError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyCorpusError(Exception):
    pass


class AnnotationError(Exception):
    pass


class AddressError(Exception):
    pass


class GrammarFormatError(Exception):
    pass


class InvariantViolation(Exception):
    """An internal invariant does not hold. The name of the invariant is kept for reporting."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class SymbolKind(enum.Enum):
    word = enum.auto()
    pos = enum.auto()
    phrasal = enum.auto()
    start = enum.auto()


@dataclasses.dataclass(frozen=True)
class Symbol:
    name: str
    kind: SymbolKind


@dataclasses.dataclass(frozen=True)
class Tree:
    """Ordered labeled tree with dense pre-order addresses.

    Address 0 is the root. Two trees compare equal iff they are structurally identical.
    """

    labels: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]

    @classmethod
    def from_nested(cls, nested: str | tuple) -> Tree:
        """Create a tree from nested (label, [children]) tuples. Bare strings are leaves."""
        labels: list[str] = []
        children: list[list[int]] = []

        def visit(node: str | tuple) -> int:
            address = len(labels)
            children.append([])
            if isinstance(node, str):
                labels.append(node)
                return address
            label, kids = node
            labels.append(label)
            for kid in kids:
                children[address].append(visit(kid))
            return address

        visit(nested)
        return cls(tuple(labels), tuple(tuple(c) for c in children))

    @classmethod
    def from_nltk(cls, tree: nltk.Tree | str) -> Tree:
        def convert(node: nltk.Tree | str) -> str | tuple:
            if isinstance(node, str):
                return node
            return (node.label(), [convert(kid) for kid in node])

        return cls.from_nested(convert(tree))

    @classmethod
    def fromstring(cls, text: str) -> Tree:
        """Read a single bracketed tree."""
        trees = read_treebank(text).trees
        if len(trees) != 1:
            raise TreebankSyntaxError(f"expected one tree, found {len(trees)}", 1)
        return trees[0]

    def __len__(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return self.to_string()

    @property
    def root(self) -> int:
        return 0

    @property
    def root_label(self) -> str:
        return self.labels[0]

    def check(self, address: int) -> None:
        if not 0 <= address < len(self.labels):
            raise AddressError(f"Address {address} not in tree of {len(self.labels)} nodes.")

    def label(self, address: int) -> str:
        self.check(address)
        return self.labels[address]

    def is_leaf(self, address: int) -> bool:
        return not self.children[address]

    @functools.cached_property
    def parents(self) -> tuple[int | None, ...]:
        parents: list[int | None] = [None] * len(self.labels)
        for parent, kids in enumerate(self.children):
            for kid in kids:
                parents[kid] = parent
        return tuple(parents)

    @functools.cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(n for n in range(len(self.labels)) if not self.children[n])

    @functools.cached_property
    def spans(self) -> tuple[tuple[int, int], ...]:
        """Half-open leaf span [i, j) of every node."""
        spans: list[tuple[int, int]] = [(0, 0)] * len(self.labels)
        position = 0
        for address in range(len(self.labels)):
            if not self.children[address]:
                spans[address] = (position, position + 1)
                position += 1
        for address in reversed(range(len(self.labels))):
            kids = self.children[address]
            if kids:
                spans[address] = (spans[kids[0]][0], spans[kids[-1]][1])
        return tuple(spans)

    @functools.cached_property
    def ends(self) -> tuple[int, ...]:
        """One past the last descendant address of every node."""
        ends = list(range(1, len(self.labels) + 1))
        for address in reversed(range(len(self.labels))):
            kids = self.children[address]
            if kids:
                ends[address] = ends[kids[-1]]
        return tuple(ends)

    def frontier_labels(self) -> tuple[str, ...]:
        return tuple(self.labels[n] for n in self.leaves)

    def internal_nodes(self) -> list[int]:
        return [n for n in range(len(self.labels)) if self.children[n]]

    def descendants(self, address: int) -> range:
        self.check(address)
        return range(address + 1, self.ends[address])

    def ancestors(self, address: int) -> list[int]:
        self.check(address)
        result = []
        parent = self.parents[address]
        while parent is not None:
            result.append(parent)
            parent = self.parents[parent]
        return result

    def dominates(self, upper: int, lower: int) -> bool:
        return upper < lower < self.ends[upper]

    def subtree(self, address: int) -> Tree:
        """Copy the partial-tree rooted at an address, with fresh addresses."""
        self.check(address)
        return Tree.from_nested(self._nested(address))

    def rules(self) -> Iterator[tuple[str, tuple[str, ...]]]:
        for address in self.internal_nodes():
            yield self.labels[address], tuple(self.labels[k] for k in self.children[address])

    def depth(self, address: int = 0) -> int:
        kids = self.children[address]
        if not kids:
            return 0
        return 1 + max(self.depth(kid) for kid in kids)

    def to_nltk(self) -> nltk.Tree | str:
        def convert(address: int) -> nltk.Tree | str:
            kids = self.children[address]
            if not kids:
                return self.labels[address]
            return nltk.Tree(self.labels[address], [convert(kid) for kid in kids])

        return convert(0)

    def to_string(self) -> str:
        """Canonical single-line bracketed form."""
        tree = self.to_nltk()
        if isinstance(tree, str):
            return f"({tree})"
        return tree.pformat(margin=_FLAT_MARGIN)

    def _nested(self, address: int) -> str | tuple:
        kids = self.children[address]
        if not kids:
            return self.labels[address]
        return (self.labels[address], [self._nested(kid) for kid in kids])


@dataclasses.dataclass(frozen=True)
class TreeBank:
    trees: tuple[Tree, ...]
    start: str = "S"

    def __post_init__(self):
        for index, tree in enumerate(self.trees):
            if tree.root_label != self.start:
                raise AnnotationError(
                    f"Tree {index} has root {tree.root_label!r}, expected {self.start!r}."
                )

    def __len__(self) -> int:
        return len(self.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def subset(self, indices: Iterable[int]) -> TreeBank:
        return TreeBank(tuple(self.trees[i] for i in indices), self.start)

    def num_nodes(self) -> int:
        return sum(len(tree) for tree in self.trees)


@dataclasses.dataclass(frozen=True, order=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs)}"


@dataclasses.dataclass(frozen=True)
class CFGrammar:
    rules: frozenset[Rule]
    start: str = "S"

    def __len__(self) -> int:
        return len(self.rules)

    @functools.cached_property
    def symbols(self) -> frozenset[str]:
        symbols = {self.start}
        for rule in self.rules:
            symbols.add(rule.lhs)
            symbols.update(rule.rhs)
        return frozenset(symbols)


@dataclasses.dataclass(frozen=True)
class PosLexicon:
    entries: Mapping[str, frozenset[str]]

    def tags(self, word: str) -> frozenset[str]:
        return self.entries.get(word, frozenset())

    def lattice(self, words: Sequence[str]) -> tuple[frozenset[str], ...]:
        """Tag lattice for a sentence; unknown words get an empty tag set."""
        return tuple(self.tags(word) for word in words)


def read_treebank(text: str) -> TreeBank:
    """Read a bracketed corpus.

    Records may span several lines. Lines starting with '#' outside a record are comments.

    Args:
        text: (str) Corpus text.
    """
    trees = []
    for record, line in _split_records(text):
        try:
            parsed = nltk.Tree.fromstring(record, remove_empty_top_bracketing=True)
        except ValueError as e:
            raise TreebankSyntaxError(str(e), line)
        if isinstance(parsed, str) or not parsed.label():
            raise TreebankSyntaxError("tree without a root label", line)
        trees.append(Tree.from_nltk(parsed))

    if not trees:
        raise EmptyCorpusError("Corpus contains no trees.")
    return TreeBank(tuple(trees), trees[0].root_label)


def _split_records(text: str) -> Iterator[tuple[str, int]]:
    depth = 0
    buffer: list[str] = []
    start_line = 0
    line_num = 0
    for line_num, line in enumerate(text.splitlines(), start=1):
        if depth == 0:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if not stripped.startswith("("):
                raise TreebankSyntaxError(f"expected '(' but found {stripped[:20]!r}", line_num)
            start_line = line_num
        elif line.startswith("("):
            # Continuation lines are indented; a bracket in column one starts a new tree
            raise TreebankSyntaxError(
                f"tree opened on line {start_line} is not closed before the next tree", line_num
            )
        for char in line:
            if char == "(":
                depth += 1
            elif char == ")":
                depth -= 1
                if depth < 0:
                    raise TreebankSyntaxError("unbalanced ')'", line_num)
        buffer.append(line)
        if depth == 0:
            record = " ".join(buffer).strip()
            buffer = []
            # Trailing tokens after the closing bracket are not allowed
            if not record.endswith(")"):
                raise TreebankSyntaxError("text after closing bracket", line_num)
            yield record, start_line
    if depth:
        raise TreebankSyntaxError("unexpected end of input", max(line_num, 1))


def write_treebank(tb: TreeBank) -> str:
    return "".join(f"{tree.to_string()}\n" for tree in tb.trees)


def classify_symbols(tb: TreeBank, pos_tags: Iterable[str] | None = None) -> dict[str, Symbol]:
    """Infer the kind of every label from its position in the (word-bearing) tree-bank.

    A label seen in several positions gets the highest kind in the order
    word < pos < phrasal < start.

    Args:
        tb: (TreeBank) Tree-bank with words at the leaves.
        pos_tags: (list) Declared pos-tag alphabet overriding the positional inference.
    """
    declared = set(pos_tags) if pos_tags is not None else None
    rank = {kind: rank for rank, kind in enumerate(SymbolKind)}
    kinds: dict[str, SymbolKind] = {tb.start: SymbolKind.start}
    for tree in tb.trees:
        for address, label in enumerate(tree.labels[1:], start=1):
            if tree.is_leaf(address):
                kind = SymbolKind.word
            elif declared is not None:
                kind = SymbolKind.pos if label in declared else SymbolKind.phrasal
            elif all(tree.is_leaf(kid) for kid in tree.children[address]):
                kind = SymbolKind.pos
            else:
                kind = SymbolKind.phrasal
            kinds[label] = max(kinds.get(label, kind), kind, key=rank.__getitem__)
    return {name: Symbol(name, kind) for name, kind in kinds.items()}


def split_words(tree: Tree, pos_tags: Iterable[str] | None = None) -> tuple[Tree, tuple[str, ...]]:
    """Delete the word leaves of a tree. Returns the stripped tree and its words.

    Args:
        tree: (Tree) Tree with words at its leaves.
        pos_tags: (list) Declared pos-tags. Nodes carrying one become leaves and the words below
            them are joined with '_' into one token.
    """
    if pos_tags is not None:
        return _split_declared(tree, frozenset(pos_tags))
    words = []
    for leaf in tree.leaves:
        parent = tree.parents[leaf]
        if parent is None:
            raise AnnotationError(f"Tree {tree} has no pos-tag above its only word.")
        if len(tree.children[parent]) != 1:
            raise AnnotationError(
                f"Word {tree.labels[leaf]!r} under {tree.labels[parent]!r} has siblings; "
                "a pos-tag must dominate exactly one word."
            )
        words.append(tree.labels[leaf])
    leaves = set(tree.leaves)

    def nested(address: int) -> str | tuple:
        kids = [kid for kid in tree.children[address] if kid not in leaves]
        if not kids:
            return tree.labels[address]
        return (tree.labels[address], [nested(kid) for kid in kids])

    return Tree.from_nested(nested(0)), tuple(words)


def _split_declared(tree: Tree, pos_tags: frozenset[str]) -> tuple[Tree, tuple[str, ...]]:
    words: list[str] = []

    def nested(address: int) -> str | tuple:
        label = tree.labels[address]
        if label in pos_tags and address != 0:
            i, j = tree.spans[address]
            words.append("_".join(tree.labels[leaf] for leaf in tree.leaves[i:j]))
            return label
        if tree.is_leaf(address):
            raise AnnotationError(
                f"Word {label!r} in {tree} is not below a declared pos-tag."
            )
        return (label, [nested(kid) for kid in tree.children[address]])

    return Tree.from_nested(nested(0)), tuple(words)


def attach_words(tree: Tree, words: Sequence[str]) -> Tree:
    """Inverse of split_words: put one word below every leaf of a stripped tree."""
    if len(words) != len(tree.leaves):
        raise AnnotationError(f"{len(words)} words for a frontier of {len(tree.leaves)} symbols.")
    position = iter(words)

    def nested(address: int) -> tuple:
        kids = tree.children[address]
        if not kids:
            return (tree.labels[address], [next(position)])
        return (tree.labels[address], [nested(kid) for kid in kids])

    return Tree.from_nested(nested(0))


def strip_words(tb: TreeBank, pos_tags: Iterable[str] | None = None) -> TreeBank:
    return TreeBank(tuple(split_words(tree, pos_tags)[0] for tree in tb.trees), tb.start)


def pos_lexicon(tb: TreeBank, pos_tags: Iterable[str] | None = None) -> PosLexicon:
    entries: dict[str, set[str]] = {}
    for tree in tb.trees:
        stripped, words = split_words(tree, pos_tags)
        for leaf, word in zip(stripped.leaves, words):
            entries.setdefault(word, set()).add(stripped.labels[leaf])
    return PosLexicon({word: frozenset(tags) for word, tags in entries.items()})


def extract_cfg(tb: TreeBank) -> CFGrammar:
    rules = {Rule(lhs, rhs) for tree in tb.trees for lhs, rhs in tree.rules()}
    return CFGrammar(frozenset(rules), tb.start)


def write_grammar(g: CFGrammar) -> str:
    lines = [f"%start {g.start}"] + [str(rule) for rule in sorted(g.rules)]
    return "\n".join(lines) + "\n"


def read_grammar(text: str) -> CFGrammar:
    """Read a rule file: an optional '%start X' line, then 'lhs -> rhs ...' rules."""
    start = None
    rules = []
    for line_num, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("%start"):
            fields = line.split()
            if len(fields) != 2:
                raise GrammarFormatError(f"line {line_num}: malformed start directive.")
            start = fields[1]
            continue
        lhs, arrow, rhs = line.partition("->")
        if not arrow or len(lhs.split()) != 1 or not rhs.split():
            raise GrammarFormatError(f"line {line_num}: expected 'lhs -> rhs ...'.")
        rules.append(Rule(lhs.strip(), tuple(rhs.split())))
    if not rules:
        raise GrammarFormatError("Grammar contains no rules.")
    return CFGrammar(frozenset(rules), start or rules[0].lhs)


def frontier(t: Tree, n: int) -> tuple[str, ...]:
    """Left-to-right leaf labels of the partial-tree rooted at an address."""
    t.check(n)
    i, j = t.spans[n]
    return tuple(t.labels[leaf] for leaf in t.leaves[i:j])


@dataclasses.dataclass(frozen=True)
class Excision:
    """A partial-tree cut out of a tree by reduce_at.

    Attributes:
        address: Address of the marked node before the reduction.
        leaf: Address of the leaf it became after the reduction.
        subtree: The excised partial-tree (an associated subtree).
    """

    address: int
    leaf: int
    subtree: Tree

    @property
    def ssf(self) -> tuple[str, ...]:
        return self.subtree.frontier_labels()


@dataclasses.dataclass(frozen=True)
class Reduction:
    tree: Tree
    excised: tuple[Excision, ...]
    # Address in the reduced tree -> address in the tree before the reduction
    origin: tuple[int, ...]


def reduce_at(t: Tree, marked: Iterable[int]) -> Reduction:
    """Turn every marked node into a leaf, excising the partial-tree below it.

    Args:
        t: (Tree) Tree to reduce.
        marked: (set) Pairwise non-nested addresses.
    """
    marked = set(marked)
    for address in marked:
        t.check(address)
    for address in marked:
        for ancestor in t.ancestors(address):
            if ancestor in marked:
                raise InvariantViolation(
                    "non-nesting", f"marked node {ancestor} dominates marked node {address}"
                )

    origin: list[int] = []
    leaf_of: dict[int, int] = {}

    def nested(address: int) -> str | tuple:
        origin.append(address)
        kids = t.children[address]
        if address in marked:
            leaf_of[address] = len(origin) - 1
            return t.labels[address]
        if not kids:
            return t.labels[address]
        return (t.labels[address], [nested(kid) for kid in kids])

    reduced = Tree.from_nested(nested(0))
    excised = tuple(
        Excision(address, leaf_of[address], t.subtree(address))
        for address in sorted(marked)
        if not t.is_leaf(address)
    )
    return Reduction(reduced, excised, tuple(origin))


def expand_at(t: Tree, leaf: int, subtree: Tree) -> Tree:
    """Substitute a partial-tree at a leaf whose label equals the partial-tree's root."""
    t.check(leaf)
    if not t.is_leaf(leaf):
        raise AddressError(f"Address {leaf} is not a leaf.")
    if t.labels[leaf] != subtree.root_label:
        raise InvariantViolation(
            "substitution",
            f"leaf {t.labels[leaf]!r} cannot take a subtree rooted {subtree.root_label!r}",
        )

    def nested(address: int) -> str | tuple:
        if address == leaf:
            return subtree._nested(0)
        kids = t.children[address]
        if not kids:
            return t.labels[address]
        return (t.labels[address], [nested(kid) for kid in kids])

    return Tree.from_nested(nested(0))
