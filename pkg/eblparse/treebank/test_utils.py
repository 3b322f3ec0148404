#!/usr/bin/env python3

"""Fixture corpora and brute-force oracles for testing the learner, parsers and projector"""

from __future__ import annotations

import collections
import itertools
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from eblparse.learner import learner
from eblparse.treebank import treebank

# A four-symbol route, a route with a trailing infinitive, and the frequent short request
ROUTE_LONG = "(S (mp (p van) (np amsterdam) (p naar) (np utrecht)))"
ROUTE_INF = "(S (per ik) (v wil) (mp (p van) (np nijmegen)) (infp vertrekken))"
ROUTE_SHORT = "(S (per ik) (v wil) (mp (p naar) (np utrecht)))"

PHRASAL = ("A", "B")
TAGS = ("x", "y", "z")


def route_treebank(k: int = 2, m: int = 10) -> treebank.TreeBank:
    """k copies of each route tree followed by m copies of the short request, with words."""
    text = "\n".join([ROUTE_LONG] * k + [ROUTE_INF] * k + [ROUTE_SHORT] * m)
    return treebank.read_treebank(text)


def route_config(retreat: bool = True) -> learner.LearnerConfig:
    return learner.LearnerConfig(tau_abs=2, tau_frac=0.0, retreat=retreat)


def random_tree(
    rng: np.random.Generator,
    *,
    phrasal: Sequence[str] = PHRASAL,
    tags: Sequence[str] = TAGS,
    max_children: int = 3,
    max_depth: int = 3,
    start: str = "S",
) -> treebank.Tree:
    """A random word-stripped tree whose leaves are pos-tags."""

    def node(label: str, depth: int) -> str | tuple:
        kids = []
        for _ in range(int(rng.integers(1, max_children + 1))):
            if depth + 1 < max_depth and rng.random() < 0.4:
                kids.append(node(str(rng.choice(phrasal)), depth + 1))
            else:
                kids.append(str(rng.choice(tags)))
        return (label, kids)

    return treebank.Tree.from_nested(node(start, 0))


def random_treebank(
    rng: np.random.Generator, n: int, *, max_nodes: int | None = None, **kwargs
) -> treebank.TreeBank:
    trees = []
    while len(trees) < n:
        tree = random_tree(rng, **kwargs)
        if max_nodes is None or len(tree) <= max_nodes:
            trees.append(tree)
    return treebank.TreeBank(tuple(trees))


def words_for(t: treebank.Tree) -> tuple[str, ...]:
    return tuple(f"w{position}" for position in range(len(t.leaves)))


def tabulate_oracle(
    tb: treebank.TreeBank, ssf: Sequence[str], ctx: learner.ContextPattern
) -> tuple[int, int]:
    """(fc, f) of one SSF under one context pattern, by scanning every frontier position."""
    ssf = tuple(ssf)
    fc = f = 0
    for tree in tb.trees:
        frontier = tree.frontier_labels()
        padded = ("#", "#") + frontier + ("#", "#")
        spans = {tree.spans[n] for n in range(len(tree))}
        for i in range(len(frontier) - len(ssf) + 1):
            j = i + len(ssf)
            if frontier[i:j] != ssf:
                continue
            around = (padded[i], padded[i + 1], padded[j + 2], padded[j + 3])
            fields = (ctx.left2, ctx.left1, ctx.right1, ctx.right2)
            if any(want != "*" and want != got for want, got in zip(fields, around)):
                continue
            f += 1
            if (i, j) in spans:
                fc += 1
    return fc, f


def states_before(
    tb: treebank.TreeBank, result: learner.LearnResult, iteration: int
) -> treebank.TreeBank:
    """The trees the learner still worked on when the given iteration started."""
    iterations_of: dict[int, set[int]] = collections.defaultdict(set)
    for entry in result.lexicon.entries:
        for index, _ in entry.occurrences:
            iterations_of[index].add(entry.iteration)

    trees = []
    for index, tree in enumerate(tb.trees):
        for reduction, done in zip(result.reductions[index], sorted(iterations_of[index])):
            if done >= iteration:
                break
            tree = reduction.tree
        if len(tree) > 1:
            trees.append(tree)
    return treebank.TreeBank(tuple(trees), tb.start)


def inside_oracle(tb: treebank.TreeBank, result: learner.LearnResult) -> list[frozenset[int]]:
    """Original addresses that were internal to an excised subtree, tracked through origins."""
    inside = []
    for index, reductions in enumerate(result.reductions):
        origin = list(range(len(tb.trees[index])))
        covered: set[int] = set()
        for reduction in reductions:
            for excision in reduction.excised:
                subtree = excision.subtree
                for offset in range(1, len(subtree)):
                    if not subtree.is_leaf(offset):
                        covered.add(origin[excision.address + offset])
            origin = [origin[old] for old in reduction.origin]
        inside.append(frozenset(covered))
    return inside


Rules = Mapping[str, Sequence[tuple[str, ...]]]


def as_rules(pairs: Iterable[tuple[str, tuple[str, ...]]]) -> dict[str, list[tuple[str, ...]]]:
    rules: dict[str, list[tuple[str, ...]]] = collections.defaultdict(list)
    for lhs, rhs in pairs:
        rules[lhs].append(tuple(rhs))
    return dict(rules)


def derives(rules: Rules, symbol: str, target: Sequence[str]) -> bool:
    """True iff target is derivable from symbol in one or more rewrites.

    Leftmost rewriting of every form no longer than the target. Target symbols must not have
    rules of their own.
    """
    target = tuple(target)
    agenda = [rhs for rhs in rules.get(symbol, ()) if len(rhs) <= len(target)]
    seen = set(agenda)
    while agenda:
        form = agenda.pop()
        if form == target:
            return True
        k = next((k for k, sym in enumerate(form) if sym in rules), None)
        if k is None or form[:k] != target[:k]:
            continue
        for rhs in rules[form[k]]:
            rewritten = form[:k] + rhs + form[k + 1 :]
            if len(rewritten) <= len(target) and rewritten not in seen:
                seen.add(rewritten)
                agenda.append(rewritten)
    return False


def derivable_items(rules: Rules, symbols: Sequence[str]) -> set[tuple[int, int, str]]:
    """Every (start, end, label) whose slice of the input is derivable from the label."""
    n = len(symbols)
    return {
        (i, j, label)
        for label in rules
        for i in range(n)
        for j in range(i + 1, n + 1)
        if derives(rules, label, symbols[i:j])
    }


def random_rules(
    rng: np.random.Generator,
    num_rules: int,
    *,
    lhs: Sequence[str] = ("S",) + PHRASAL,
    tags: Sequence[str] = TAGS,
    max_rhs: int = 3,
) -> list[tuple[str, tuple[str, ...]]]:
    symbols = tuple(lhs) + tuple(tags)
    rules = set()
    while len(rules) < num_rules:
        rhs_len = int(rng.integers(1, max_rhs + 1))
        rhs = tuple(str(rng.choice(symbols)) for _ in range(rhs_len))
        rules.add((str(rng.choice(lhs)), rhs))
    return sorted(rules)


def fragments_oracle(
    t: treebank.Tree,
    marked: frozenset[int],
    *,
    depth: int | None,
    subst_sites: int | None,
    words: int | None,
    consecutive_words: int | None,
    sentence: Sequence[str] | None = None,
) -> collections.Counter[str]:
    """Fragments by trying every node subset below every marked root.

    A chosen set of expanded nodes is a fragment iff it is connected through the root, every
    unexpanded child is marked, and leaves are only expanded when there are words.
    """
    word_at = dict(zip(t.leaves, sentence)) if sentence is not None else {}
    counts: collections.Counter[str] = collections.Counter()

    def within(value: int, limit: int | None) -> bool:
        return limit is None or value <= limit

    for root in sorted(marked):
        below = [n for n in t.descendants(root) if n != root]
        for size in range(len(below) + 1):
            for chosen in itertools.combinations(below, size):
                expanded = {root, *chosen}
                if any(t.parents[n] not in expanded for n in chosen):
                    continue
                if any(t.is_leaf(n) and n not in word_at for n in expanded):
                    continue

                frontier: list[bool] = []
                deepest = 0
                valid = True

                def build(n: int, level: int) -> str | tuple:
                    nonlocal deepest, valid
                    if n not in expanded:
                        if n not in marked:
                            valid = False
                        frontier.append(False)
                        deepest = max(deepest, level)
                        return t.labels[n]
                    if t.is_leaf(n):
                        frontier.append(True)
                        deepest = max(deepest, level + 1)
                        return (t.labels[n], [word_at[n]])
                    return (t.labels[n], [build(kid, level + 1) for kid in t.children[n]])

                nested = build(root, 0)
                runs = [len(list(run)) for word, run in itertools.groupby(frontier) if word]
                if (
                    valid
                    and within(deepest, depth)
                    and within(frontier.count(False), subst_sites)
                    and within(frontier.count(True), words)
                    and within(max(runs, default=0), consecutive_words)
                ):
                    counts[treebank.Tree.from_nested(nested).to_string()] += 1
    return counts
