#!/usr/bin/env python3

from __future__ import annotations

import collections
import dataclasses
import itertools
from collections.abc import Iterator, Sequence

from eblparse.learner import learner
from eblparse.treebank import treebank


class ProvenanceError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class NodeMarking:
    """Cut-node marking of a word-stripped tree-bank, one address set per tree."""

    marked: tuple[frozenset[int], ...]

    @classmethod
    def all_marked(cls, tb: treebank.TreeBank) -> NodeMarking:
        return cls(tuple(frozenset(range(len(tree))) for tree in tb.trees))

    def __len__(self) -> int:
        return len(self.marked)

    def __getitem__(self, index: int) -> frozenset[int]:
        return self.marked[index]


def _match(
    t: treebank.Tree,
    pattern: treebank.Tree,
    address: int,
    reduced_before: dict[int, int],
    iteration: int,
) -> list[int] | None:
    """Nodes of t covered by the pattern's internal nodes, or None if it does not match.

    A pattern leaf matches an original leaf or a node reduced in an earlier iteration. A pattern
    internal node matches a node that was still expanded at the given iteration.
    """
    internal: list[int] = []

    def visit(p: int, n: int) -> bool:
        if pattern.labels[p] != t.labels[n]:
            return False
        was_leaf = t.is_leaf(n) or reduced_before.get(n, iteration) < iteration
        if pattern.is_leaf(p):
            return was_leaf
        if was_leaf or len(pattern.children[p]) != len(t.children[n]):
            return False
        internal.append(n)
        return all(visit(pk, nk) for pk, nk in zip(pattern.children[p], t.children[n]))

    if not visit(0, address):
        return None
    return internal


def mark_for_dop(tb: treebank.TreeBank, lex: learner.LearnedLexicon) -> NodeMarking:
    """Mark every node that is not strictly inside an associated-subtree occurrence.

    Args:
        tb: (TreeBank) The word-stripped tree-bank the lexicon was learned from.
        lex: (LearnedLexicon) Lexicon with recorded occurrences.

    Returns:
        The marking. Pos-tag nodes, occurrence roots and occurrence frontiers are marked.
    """
    reduced_at: list[dict[int, int]] = [{} for _ in tb.trees]
    for entry in lex.entries:
        for index, address in entry.occurrences:
            if not 0 <= index < len(tb.trees):
                raise ProvenanceError(
                    f"Entry {' '.join(entry.ssf)!r} refers to tree {index}, "
                    f"the tree-bank has {len(tb.trees)}."
                )
            if not 0 <= address < len(tb.trees[index]):
                raise ProvenanceError(
                    f"Entry {' '.join(entry.ssf)!r} refers to address {address} of tree {index}."
                )
            reduced_at[index][address] = entry.iteration

    inside: list[set[int]] = [set() for _ in tb.trees]
    for entry in lex.entries:
        for index, address in entry.occurrences:
            tree = tb.trees[index]
            for subtree, _ in entry.subtrees:
                covered = _match(tree, subtree, address, reduced_at[index], entry.iteration)
                if covered is not None:
                    inside[index].update(covered[1:])
                    break
            else:
                raise ProvenanceError(
                    f"No associated subtree of {' '.join(entry.ssf)!r} matches tree {index} "
                    f"at address {address}."
                )

    return NodeMarking(
        tuple(
            frozenset(n for n in range(len(tree)) if n not in inside[index] or tree.is_leaf(n))
            for index, tree in enumerate(tb.trees)
        )
    )


@dataclasses.dataclass(frozen=True)
class ProjectionLimits:
    """Fragment bounds. None means unlimited.

    Attributes:
        depth: Maximum fragment depth.
        subst_sites: Maximum number of nonterminal frontier nodes.
        words: Maximum number of frontier words.
        consecutive_words: Maximum run of adjacent frontier words.
    """

    depth: int | None = 4
    subst_sites: int | None = 2
    words: int | None = 7
    consecutive_words: int | None = 2

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if value is not None and value < 1:
                raise ValueError(f"{field.name}: must be a positive integer or unlimited.")

    @classmethod
    def unlimited(cls) -> ProjectionLimits:
        return cls(None, None, None, None)


@dataclasses.dataclass(frozen=True)
class _Fragment:
    nested: str | tuple
    depth: int
    # True for a word, False for a substitution site
    frontier: tuple[bool, ...]

    @property
    def sites(self) -> int:
        return self.frontier.count(False)

    @property
    def words(self) -> int:
        return self.frontier.count(True)

    def longest_run(self) -> int:
        return max(
            (len(list(run)) for word, run in itertools.groupby(self.frontier) if word), default=0
        )


def _within(value: int, limit: int | None) -> bool:
    return limit is None or value <= limit


def _check_words(words: Sequence[str], labels: frozenset[str]) -> None:
    """Reject words spelled like a label; a bracketed fragment could not tell them apart."""
    clashes = labels.intersection(words)
    if clashes:
        raise treebank.AnnotationError(
            f"The word {min(clashes)!r} is also a tree label, so fragments using it are "
            "ambiguous."
        )


class _Projector:
    def __init__(
        self,
        t: treebank.Tree,
        marked: frozenset[int],
        lim: ProjectionLimits,
        words: Sequence[str] | None,
        labels: frozenset[str] | None = None,
    ):
        if words is not None and len(words) != len(t.leaves):
            raise treebank.AnnotationError(
                f"{len(words)} words for a frontier of {len(t.leaves)} symbols."
            )
        if words is not None:
            _check_words(words, labels if labels is not None else frozenset(t.labels))
        self.t = t
        self.marked = marked
        self.lim = lim
        self.word_at = dict(zip(t.leaves, words)) if words is not None else {}
        self._cache: dict[tuple[int, int | None], list[_Fragment]] = {}

    def _fits(self, fragment: _Fragment) -> bool:
        return (
            _within(fragment.sites, self.lim.subst_sites)
            and _within(fragment.words, self.lim.words)
            and _within(fragment.longest_run(), self.lim.consecutive_words)
        )

    def rooted_at(self, n: int, depth_left: int | None) -> list[_Fragment]:
        """Fragments whose root is n, ignoring whether n itself is marked."""
        key = (n, depth_left)
        if key not in self._cache:
            self._cache[key] = self._expand(n, depth_left)
        return self._cache[key]

    def _expand(self, n: int, depth_left: int | None) -> list[_Fragment]:
        if depth_left is not None and depth_left < 1:
            return []
        t = self.t
        label = t.labels[n]
        if t.is_leaf(n):
            if n not in self.word_at:
                return []
            return [_Fragment((label, [self.word_at[n]]), 1, (True,))]

        next_left = None if depth_left is None else depth_left - 1
        options = [self._options(kid, next_left) for kid in t.children[n]]
        fragments: list[_Fragment] = []
        partial: list[tuple[list, int, tuple[bool, ...]]] = [([], 0, ())]
        for kid_options in options:
            extended = []
            for nested, depth, frontier in partial:
                for option in kid_options:
                    candidate = _Fragment(
                        None, max(depth, option.depth), frontier + option.frontier
                    )
                    if self._fits(candidate):
                        extended.append(
                            (nested + [option.nested], candidate.depth, candidate.frontier)
                        )
            partial = extended
            if not partial:
                return []
        for nested, depth, frontier in partial:
            fragments.append(_Fragment((label, nested), depth + 1, frontier))
        return fragments

    def _options(self, n: int, depth_left: int | None) -> list[_Fragment]:
        """Ways a child can appear in a fragment: as a substitution site or expanded."""
        options = []
        if n in self.marked:
            options.append(_Fragment(self.t.labels[n], 0, (False,)))
        options.extend(self.rooted_at(n, depth_left))
        return options


def project_subtrees(
    t: treebank.Tree,
    marked: frozenset[int],
    lim: ProjectionLimits,
    words: Sequence[str] | None = None,
    labels: frozenset[str] | None = None,
) -> collections.Counter[str]:
    """Count the fragments of a tree whose root and frontier nonterminals are marked.

    Args:
        t: (Tree) Word-stripped tree.
        marked: (frozenset) Marked addresses of t.
        lim: (ProjectionLimits) Depth, substitution-site, word and word-run bounds.
        words: (list) Words below the pos-tags of t; fragments are lexicalized when given.
        labels: (frozenset) Labels no word may equal. [default: the labels of t]

    Returns:
        Canonical bracketed fragment -> number of projections from t.
    """
    projector = _Projector(t, marked, lim, words, labels)
    counts: collections.Counter[str] = collections.Counter()
    for n in range(len(t)):
        if n not in marked:
            continue
        for fragment in projector.rooted_at(n, lim.depth):
            counts[treebank.Tree.from_nested(fragment.nested).to_string()] += 1
    return counts


@dataclasses.dataclass(frozen=True)
class GrammarSize:
    """Size of a projected fragment grammar.

    Attributes:
        fragments: Number of distinct fragments.
        nodes: Total nodes over the distinct fragments.
        tokens: Number of projections, multiplicity included.
    """

    fragments: int
    nodes: int
    tokens: int


def project_corpus(
    tb: treebank.TreeBank,
    m: NodeMarking | None,
    lim: ProjectionLimits,
    words: Sequence[Sequence[str]] | None = None,
) -> collections.Counter[str]:
    """Sum of project_subtrees over a tree-bank. No marking means every node is marked."""
    if m is None:
        m = NodeMarking.all_marked(tb)
    if len(m) != len(tb):
        raise ProvenanceError(f"Marking covers {len(m)} trees, the tree-bank has {len(tb)}.")
    labels = frozenset(label for tree in tb.trees for label in tree.labels)
    counts: collections.Counter[str] = collections.Counter()
    for index, tree in enumerate(tb.trees):
        tree_words = words[index] if words is not None else None
        counts.update(project_subtrees(tree, m[index], lim, tree_words, labels))
    return counts


def _num_nodes(fragment: str) -> int:
    return len(treebank.Tree.fromstring(fragment))


def size_of(counts: collections.Counter[str]) -> GrammarSize:
    return GrammarSize(
        fragments=len(counts),
        nodes=sum(_num_nodes(fragment) for fragment in counts),
        tokens=sum(counts.values()),
    )


def grammar_size(
    tb: treebank.TreeBank,
    m: NodeMarking | None = None,
    lim: ProjectionLimits = ProjectionLimits(),
    words: Sequence[Sequence[str]] | None = None,
) -> GrammarSize:
    return size_of(project_corpus(tb, m, lim, words))


def fragment_table(counts: collections.Counter[str]) -> Iterator[tuple[str, str, int]]:
    """Rows of (fragment, root label, count), sorted by root, then by fragment."""
    rows = [
        (fragment, treebank.Tree.fromstring(fragment).root_label, count)
        for fragment, count in counts.items()
    ]
    yield from sorted(rows, key=lambda row: (row[1], row[0]))
