#!/usr/bin/env python3

from __future__ import annotations

import collections
import dataclasses
import logging
import math
from collections.abc import Iterator

from eblparse.treebank import treebank
from eblparse.treebank.treebank import BOUNDARY, WILDCARD

SSF = tuple[str, ...]

NEG_INF = float("-inf")

# Float slack when comparing a lowered theta against its floor
_THETA_EPS = 1e-9


class LearnerConfigError(Exception):
    pass


@dataclasses.dataclass(frozen=True, order=True)
class ContextPattern:
    """Local context of an SSF: two symbols to the left and two to the right."""

    left2: str = WILDCARD
    left1: str = WILDCARD
    right1: str = WILDCARD
    right2: str = WILDCARD

    @classmethod
    def from_string(cls, text: str) -> ContextPattern:
        fields = text.split()
        if len(fields) != 4:
            raise ValueError(f"Context pattern needs four fields: {text!r}")
        pattern = cls(*fields)
        if pattern.num_concrete() > 1:
            raise ValueError(f"Context pattern has more than one concrete field: {text!r}")
        return pattern

    def __str__(self) -> str:
        return " ".join(dataclasses.astuple(self))

    def num_concrete(self) -> int:
        return sum(field != WILDCARD for field in dataclasses.astuple(self))


ANY_CONTEXT = ContextPattern()


def _contexts(frontier: SSF, i: int, j: int) -> list[ContextPattern]:
    """All-wildcard pattern followed by the four single-field patterns of span [i, j)."""

    def at(position: int) -> str:
        return frontier[position] if 0 <= position < len(frontier) else BOUNDARY

    return [
        ANY_CONTEXT,
        ContextPattern(left2=at(i - 2)),
        ContextPattern(left1=at(i - 1)),
        ContextPattern(right1=at(j)),
        ContextPattern(right2=at(j + 1)),
    ]


class SsfStats:
    """Occurrence counts f and constituent counts fc per (SSF, context pattern)."""

    def __init__(self):
        self.f: collections.Counter[tuple[SSF, ContextPattern]] = collections.Counter()
        self.fc: collections.Counter[tuple[SSF, ContextPattern]] = collections.Counter()

    def __len__(self) -> int:
        return len(self.f)

    def __contains__(self, key: tuple[SSF, ContextPattern]) -> bool:
        return key in self.f

    def counts(self, ssf: SSF, ctx: ContextPattern = ANY_CONTEXT) -> tuple[int, int]:
        """Return (fc, f)."""
        key = (tuple(ssf), ctx)
        return self.fc.get(key, 0), self.f.get(key, 0)

    def keys(self) -> Iterator[tuple[SSF, ContextPattern]]:
        return iter(self.f)

    def update(self, other: SsfStats) -> None:
        self.f.update(other.f)
        self.fc.update(other.fc)


def check_labels(tb: treebank.TreeBank) -> None:
    """Reject labels that collide with the context-pattern markers."""
    for index, tree in enumerate(tb.trees):
        reserved = {BOUNDARY, WILDCARD}.intersection(tree.labels)
        if reserved:
            raise treebank.AnnotationError(
                f"Tree {index} uses the label {min(reserved)!r}, which marks sentence "
                "boundaries and wild-cards in context patterns; rename it."
            )


def tabulate_tree(t: treebank.Tree, *, contexts: bool = True) -> SsfStats:
    stats = SsfStats()
    frontier = t.frontier_labels()
    constituents = set(t.spans)
    for i in range(len(frontier)):
        for j in range(i + 1, len(frontier) + 1):
            ssf = frontier[i:j]
            patterns = _contexts(frontier, i, j) if contexts else [ANY_CONTEXT]
            is_constituent = (i, j) in constituents
            for ctx in patterns:
                key = (ssf, ctx)
                stats.f[key] += 1
                if is_constituent:
                    stats.fc[key] += 1
    return stats


def tabulate(tb: treebank.TreeBank, *, contexts: bool = True) -> SsfStats:
    """Count every contiguous frontier subsequence, in total and as a constituent.

    Args:
        tb: (TreeBank) Word-stripped tree-bank.
        contexts: (bool) Also count under the single-field context patterns.
    """
    stats = SsfStats()
    for tree in tb.trees:
        stats.update(tabulate_tree(tree, contexts=contexts))
    return stats


def is_pa_ssf(
    stats: SsfStats, ssf: SSF, ctx: ContextPattern, theta: float, tau: int
) -> bool:
    fc, f = stats.counts(ssf, ctx)
    if f == 0:
        return False
    return f >= tau and fc / f >= theta - _THETA_EPS


def grf(ssf: SSF, fc: int, pa: bool) -> float:
    if not pa:
        return NEG_INF
    return float(fc * (len(ssf) - 1))


def competitors(t: treebank.Tree, n: int) -> set[int]:
    """Addresses strictly above or strictly below a node."""
    return set(t.ancestors(n)) | set(t.descendants(n))


def admissible_contexts(
    t: treebank.Tree, n: int, *, retreat: bool = True
) -> list[ContextPattern]:
    t.check(n)
    if not retreat:
        return [ANY_CONTEXT]
    i, j = t.spans[n]
    return _contexts(t.frontier_labels(), i, j)


@dataclasses.dataclass(frozen=True)
class NodeScore:
    grf: float
    context: ContextPattern | None = None
    fc: int = 0
    f: int = 0


def score_node(
    t: treebank.Tree, n: int, stats: SsfStats, theta: float, tau: int, retreat: bool
) -> NodeScore:
    """GRF of a node's frontier under its first admissible context that passes the PA test."""
    ssf = treebank.frontier(t, n)
    for ctx in admissible_contexts(t, n, retreat=retreat):
        if is_pa_ssf(stats, ssf, ctx, theta, tau):
            fc, f = stats.counts(ssf, ctx)
            return NodeScore(grf(ssf, fc, True), ctx, fc, f)
    return NodeScore(NEG_INF)


def score_tree(
    t: treebank.Tree, stats: SsfStats, theta: float, tau: int, retreat: bool
) -> dict[int, NodeScore]:
    """Mark a tree and return the scores of the marked nodes."""
    scores = [score_node(t, n, stats, theta, tau, retreat) for n in range(len(t))]
    marked: dict[int, NodeScore] = {}
    for n in t.internal_nodes():
        # A unary chain over one span is one frontier occurrence; its lowest internal node,
        # the constituent the frontier belongs to, stands for it
        if any(not t.is_leaf(kid) and t.spans[kid] == t.spans[n] for kid in t.children[n]):
            continue
        score = scores[n].grf
        if score == NEG_INF:
            continue
        if all(
            score > scores[other].grf
            for other in competitors(t, n)
            if t.spans[other] != t.spans[n]
        ):
            marked[n] = scores[n]

    for n in marked:
        for ancestor in t.ancestors(n):
            if ancestor in marked:
                raise treebank.InvariantViolation(
                    "non-nesting", f"marked node {ancestor} dominates marked node {n} in {t}"
                )
    return marked


def mark_tree(
    t: treebank.Tree, stats: SsfStats, theta: float, tau: int, retreat: bool
) -> set[int]:
    return set(score_tree(t, stats, theta, tau, retreat))


@dataclasses.dataclass(frozen=True)
class LearnerConfig:
    theta_start: float = 1.0
    theta_floor: float = 1.0
    theta_step: float = 0.05
    tau_abs: int = 10
    tau_frac: float = 0.003
    retreat: bool = True

    def __post_init__(self):
        if not 0 < self.theta_floor <= 1:
            raise LearnerConfigError("theta-floor: must be in (0, 1].")
        if not 0 < self.theta_start <= 1:
            raise LearnerConfigError("theta-start: must be in (0, 1].")
        if self.theta_floor > self.theta_start:
            raise LearnerConfigError("theta-floor: must not exceed theta-start.")
        if self.theta_step <= 0:
            raise LearnerConfigError("theta-step: must be greater than zero.")
        if self.tau_abs < 1:
            raise LearnerConfigError("tau-abs: must be at least one.")
        if self.tau_frac < 0:
            raise LearnerConfigError("tau-frac: must not be negative.")

    def effective_tau(self, num_trees: int) -> int:
        return max(self.tau_abs, math.ceil(self.tau_frac * num_trees))

    def theta_steps(self) -> int:
        return math.ceil((self.theta_start - self.theta_floor) / self.theta_step - _THETA_EPS)


@dataclasses.dataclass(frozen=True)
class LearnedEntry:
    """A learned PA-SSF with its associated subtrees.

    Attributes:
        occurrences: (tree index, original address) of every excised occurrence.
    """

    ssf: SSF
    context: ContextPattern
    theta: float
    iteration: int
    fc: int
    f: int
    subtrees: tuple[tuple[treebank.Tree, int], ...]
    occurrences: tuple[tuple[int, int], ...] = ()

    @property
    def sure(self) -> bool:
        return self.theta >= 1.0 - _THETA_EPS

    @property
    def key(self) -> tuple[SSF, ContextPattern, int]:
        return self.ssf, self.context, self.iteration

    def sort_key(self) -> tuple:
        return self.iteration, self.ssf, str(self.context)


@dataclasses.dataclass(frozen=True)
class LearnedLexicon:
    entries: tuple[LearnedEntry, ...]
    config: LearnerConfig = LearnerConfig()
    tau: int = 10

    def __post_init__(self):
        keys = [entry.key for entry in self.entries]
        if len(set(keys)) != len(keys):
            raise treebank.InvariantViolation(
                "unique-entries", "duplicate (ssf, context, iteration)"
            )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LearnedEntry]:
        return iter(self.entries)


@dataclasses.dataclass(frozen=True)
class IterationRecord:
    iteration: int
    theta: float
    marks: int
    entries: int


@dataclasses.dataclass(frozen=True)
class LearnResult:
    """Lexicon plus everything needed to reconstruct the input tree-bank.

    Attributes:
        iterations: Number of passes of the learning loop, theta-lowering passes included.
        reductions: Per tree, the reductions applied to it in order.
    """

    lexicon: LearnedLexicon
    residual: treebank.TreeBank
    iterations: int
    transcript: tuple[IterationRecord, ...]
    reductions: tuple[tuple[treebank.Reduction, ...], ...]


class _EntryBuilder:
    def __init__(self, theta: float, fc: int, f: int):
        self.theta = theta
        self.fc = fc
        self.f = f
        self.subtrees: collections.Counter[treebank.Tree] = collections.Counter()
        self.occurrences: list[tuple[int, int]] = []

    def build(self, ssf: SSF, ctx: ContextPattern, iteration: int) -> LearnedEntry:
        subtrees = sorted(self.subtrees.items(), key=lambda item: item[0].to_string())
        return LearnedEntry(
            ssf=ssf,
            context=ctx,
            theta=self.theta,
            iteration=iteration,
            fc=self.fc,
            f=self.f,
            subtrees=tuple(subtrees),
            occurrences=tuple(sorted(self.occurrences)),
        )


def learn(tb: treebank.TreeBank, cfg: LearnerConfig, *, verbose: bool = False) -> LearnResult:
    """Learn PA-SSFs by iterative marking and reduction.

    Args:
        tb: (TreeBank) Word-stripped tree-bank.
        cfg: (LearnerConfig) Thresholds and schedule.
        verbose: (bool) Log iterations as info instead of debug.
    """
    log_func = logging.info if verbose else logging.debug
    check_labels(tb)
    tau = cfg.effective_tau(len(tb))
    theta = cfg.theta_start
    steps_taken = 0

    trees = list(tb.trees)
    origins = [tuple(range(len(tree))) for tree in trees]
    history: list[list[treebank.Reduction]] = [[] for _ in trees]
    builders: dict[tuple[SSF, ContextPattern, int], _EntryBuilder] = {}
    transcript: list[IterationRecord] = []
    iteration = 0
    passes = 0

    while True:
        passes += 1
        active = [index for index, tree in enumerate(trees) if len(tree) > 1]
        if not active:
            log_func(f"All {len(trees)} trees fully reduced.")
            break

        stats = SsfStats()
        for index in active:
            stats.update(tabulate_tree(trees[index], contexts=cfg.retreat))
        marks = {
            index: score_tree(trees[index], stats, theta, tau, cfg.retreat) for index in active
        }
        marks = {index: scored for index, scored in marks.items() if scored}

        if not marks:
            if steps_taken < cfg.theta_steps():
                steps_taken += 1
                theta = round(cfg.theta_start - steps_taken * cfg.theta_step, 10)
                log_func(f"No PA-SSFs left, lowering theta to {theta}")
                continue
            log_func(f"No PA-SSFs left at theta {theta}, {len(active)} trees not fully reduced.")
            break

        num_entries = len(builders)
        for index, scored in marks.items():
            reduction = treebank.reduce_at(trees[index], scored)
            for excision in reduction.excised:
                score = scored[excision.address]
                assert score.context is not None
                key = (excision.ssf, score.context, iteration)
                if key not in builders:
                    builders[key] = _EntryBuilder(theta, score.fc, score.f)
                builders[key].subtrees[excision.subtree] += 1
                builders[key].occurrences.append((index, origins[index][excision.address]))
            origins[index] = tuple(origins[index][old] for old in reduction.origin)
            trees[index] = reduction.tree
            history[index].append(reduction)

        record = IterationRecord(
            iteration=iteration,
            theta=theta,
            marks=sum(len(scored) for scored in marks.values()),
            entries=len(builders) - num_entries,
        )
        transcript.append(record)
        log_func(
            f"Iteration {iteration}: theta {theta}, {record.marks} marks, "
            f"{record.entries} new entries"
        )
        iteration += 1

    entries = sorted(
        (builder.build(*key) for key, builder in builders.items()),
        key=LearnedEntry.sort_key,
    )
    lexicon = LearnedLexicon(tuple(entries), cfg, tau)
    return LearnResult(
        lexicon=lexicon,
        residual=treebank.TreeBank(tuple(trees), tb.start),
        iterations=passes,
        transcript=tuple(transcript),
        reductions=tuple(tuple(reductions) for reductions in history),
    )


def replay(result: LearnResult) -> treebank.TreeBank:
    """Re-expand all excised subtrees in reverse order, recovering the learner's input."""
    trees = []
    for tree, reductions in zip(result.residual.trees, result.reductions):
        for reduction in reversed(reductions):
            for excision in sorted(reduction.excised, key=lambda e: e.leaf, reverse=True):
                tree = treebank.expand_at(tree, excision.leaf, excision.subtree)
        trees.append(tree)
    return treebank.TreeBank(tuple(trees), result.residual.start)
