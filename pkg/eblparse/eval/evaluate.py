#!/usr/bin/env python3

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import multiprocessing
import pathlib
import time
from collections.abc import Iterable, Sequence
from typing import Protocol

import numpy as np

from eblparse.learner import learner
from eblparse.parsing import cfg_parser
from eblparse.parsing import combiner
from eblparse.parsing import tsg_parser
from eblparse.treebank import treebank


class SplitError(Exception):
    pass


class Parser(Protocol):
    name: str

    def parse(self, lattice: Sequence[Iterable[str]]) -> cfg_parser.ParseForest: ...


@dataclasses.dataclass(frozen=True)
class SplitSpec:
    """A seeded random train/test split.

    Attributes:
        min_sentence_length: Shorter test sentences are not evaluated.
    """

    seed: int = 0
    train_size: int = 0
    test_size: int = 1
    min_sentence_length: int = 2

    def __post_init__(self):
        if self.train_size < 0:
            raise SplitError("train-size: must not be negative.")
        if self.test_size < 1:
            raise SplitError("test-size: must be at least one.")
        if self.min_sentence_length < 1:
            raise SplitError("min-length: must be at least one.")


def split(tb: treebank.TreeBank, s: SplitSpec) -> tuple[treebank.TreeBank, treebank.TreeBank]:
    """Draw disjoint train and test sets. The same seed gives the same split."""
    if s.train_size + s.test_size > len(tb):
        raise SplitError(
            f"train-size + test-size = {s.train_size + s.test_size} exceeds the "
            f"{len(tb)} trees of the corpus."
        )
    order = np.random.default_rng(s.seed).permutation(len(tb))
    train = sorted(int(i) for i in order[: s.train_size])
    test = sorted(int(i) for i in order[s.train_size : s.train_size + s.test_size])
    return tb.subset(train), tb.subset(test)


@dataclasses.dataclass(frozen=True)
class SentenceResult:
    index: int
    length: int
    right_parse: bool
    any_parse: bool
    active_nodes: int
    seconds: float


@dataclasses.dataclass(frozen=True)
class Metrics:
    """Aggregated parser results over the evaluated sentences.

    Attributes:
        precision_defined: False when no sentence got any parse; precision_pct is 0 then.
    """

    sentences: int
    right_parse_pct: float
    any_parse_pct: float
    precision_pct: float
    precision_defined: bool
    mean_active_nodes: float
    std_active_nodes: float
    mean_cpu_seconds: float

    @classmethod
    def from_results(cls, results: Sequence[SentenceResult]) -> Metrics:
        if not results:
            return cls(0, 0.0, 0.0, 0.0, False, 0.0, 0.0, 0.0)
        right = np.array([r.right_parse for r in results], dtype=float)
        any_parse = np.array([r.any_parse for r in results], dtype=float)
        nodes = np.array([r.active_nodes for r in results], dtype=float)
        seconds = np.array([r.seconds for r in results], dtype=float)
        right_pct = 100.0 * right.mean()
        any_pct = 100.0 * any_parse.mean()
        defined = bool(any_parse.sum() > 0)
        return cls(
            sentences=len(results),
            right_parse_pct=float(right_pct),
            any_parse_pct=float(any_pct),
            precision_pct=float(100.0 * right.sum() / any_parse.sum()) if defined else 0.0,
            precision_defined=defined,
            mean_active_nodes=float(nodes.mean()),
            std_active_nodes=float(nodes.std(ddof=1)) if len(results) > 1 else 0.0,
            mean_cpu_seconds=float(seconds.mean()),
        )


def evaluate_sentence(
    parser: Parser,
    index: int,
    tree: treebank.Tree,
    lexicon: treebank.PosLexicon,
    pos_tags: Sequence[str] | None = None,
) -> SentenceResult:
    gold, words = treebank.split_words(tree, pos_tags)
    lattice = lexicon.lattice(words)
    start_time = time.process_time()
    forest = parser.parse(lattice)
    seconds = time.process_time() - start_time
    return SentenceResult(
        index=index,
        length=len(words),
        right_parse=cfg_parser.contains_parse(forest, gold),
        any_parse=forest.root in forest,
        active_nodes=cfg_parser.count_active_nodes(forest),
        seconds=seconds,
    )


_worker_state: dict = {}


def _init_worker(
    parser: Parser, lexicon: treebank.PosLexicon, pos_tags: Sequence[str] | None
) -> None:
    _worker_state["parser"] = parser
    _worker_state["lexicon"] = lexicon
    _worker_state["pos_tags"] = pos_tags


def _worker(args: tuple[int, treebank.Tree]) -> SentenceResult:
    index, tree = args
    return evaluate_sentence(
        _worker_state["parser"], index, tree, _worker_state["lexicon"], _worker_state["pos_tags"]
    )


def evaluate_sentences(
    parser: Parser,
    test: treebank.TreeBank,
    lexicon: treebank.PosLexicon,
    *,
    min_length: int = 2,
    pos_tags: Sequence[str] | None = None,
    jobs: int = 1,
    verbose: bool = False,
) -> list[SentenceResult]:
    """Parse every test sentence of at least min_length words, in test-set order.

    Args:
        parser: (Parser) TParser or CombinedParser.
        test: (TreeBank) Word-annotated gold trees.
        lexicon: (PosLexicon) Word to pos-tag mapping used to build input lattices.
        min_length: (int) Shorter sentences are skipped.
        pos_tags: (list) Declared pos-tags, for corpora outside the one-word-per-tag convention.
        jobs: (int) Number of worker processes.
        verbose: (bool) Log progress as info instead of debug.
    """
    log_func = logging.info if verbose else logging.debug
    work = [
        (index, tree)
        for index, tree in enumerate(test.trees)
        if len(tree.leaves) >= min_length
    ]
    log_func(f"Evaluating {parser.name} on {len(work)} of {len(test)} sentences")
    if jobs > 1 and len(work) > 1:
        with multiprocessing.Pool(
            processes=jobs, initializer=_init_worker, initargs=(parser, lexicon, pos_tags)
        ) as pool:
            return pool.map(_worker, work, chunksize=max(1, len(work) // (4 * jobs)))
    return [evaluate_sentence(parser, index, tree, lexicon, pos_tags) for index, tree in work]


def evaluate(
    parser: Parser,
    test: treebank.TreeBank,
    lexicon: treebank.PosLexicon,
    *,
    min_length: int = 2,
    pos_tags: Sequence[str] | None = None,
    jobs: int = 1,
    verbose: bool = False,
) -> Metrics:
    results = evaluate_sentences(
        parser,
        test,
        lexicon,
        min_length=min_length,
        pos_tags=pos_tags,
        jobs=jobs,
        verbose=verbose,
    )
    return Metrics.from_results(results)


@dataclasses.dataclass(frozen=True)
class Model:
    """Everything learned from one training set."""

    grammar: treebank.CFGrammar
    learned: learner.LearnResult
    tsg: tsg_parser.Tsg

    def parsers(self, trust: combiner.Trust = combiner.Trust.general) -> list[Parser]:
        return [
            cfg_parser.TParser(self.grammar),
            combiner.CombinedParser(self.grammar, self.tsg, trust=trust),
        ]


def train(
    train_set: treebank.TreeBank,
    cfg: learner.LearnerConfig,
    *,
    pos_tags: Sequence[str] | None = None,
    verbose: bool = False,
) -> Model:
    stripped = treebank.strip_words(train_set, pos_tags)
    learned = learner.learn(stripped, cfg, verbose=verbose)
    return Model(
        grammar=treebank.extract_cfg(stripped),
        learned=learned,
        tsg=tsg_parser.build_tsg(learned.lexicon, train_set.start),
    )


@dataclasses.dataclass(frozen=True)
class SplitRow:
    split: int
    seed: int
    parser: str
    train: int
    test: int
    entries: int
    metrics: Metrics
    tsg_trees: int = 0
    tsg_nodes: int = 0
    results: tuple[SentenceResult, ...] = ()


def run_splits(
    tb: treebank.TreeBank,
    num_splits: int,
    s: SplitSpec,
    cfg: learner.LearnerConfig,
    *,
    trust: combiner.Trust = combiner.Trust.general,
    pos_tags: Sequence[str] | None = None,
    jobs: int = 1,
    verbose: bool = False,
) -> list[SplitRow]:
    """Independent experiments, one row per split and parser.

    Split k uses seed s.seed + k. Input lattices come from the whole corpus's word lexicon.
    """
    log_func = logging.info if verbose else logging.debug
    lexicon = treebank.pos_lexicon(tb, pos_tags)
    rows = []
    for k in range(num_splits):
        spec = dataclasses.replace(s, seed=s.seed + k)
        train_set, test_set = split(tb, spec)
        model = train(train_set, cfg, pos_tags=pos_tags, verbose=verbose)
        log_func(
            f"Split {k}: {len(train_set)} train, {len(test_set)} test, "
            f"{len(model.learned.lexicon)} entries"
        )
        for parser in model.parsers(trust):
            results = evaluate_sentences(
                parser,
                test_set,
                lexicon,
                min_length=s.min_sentence_length,
                pos_tags=pos_tags,
                jobs=jobs,
                verbose=verbose,
            )
            rows.append(
                SplitRow(
                    k,
                    spec.seed,
                    parser.name,
                    len(train_set),
                    len(test_set),
                    len(model.learned.lexicon),
                    Metrics.from_results(results),
                    tsg_trees=len(model.tsg),
                    tsg_nodes=model.tsg.num_nodes(),
                    results=tuple(results),
                )
            )
    return rows


@dataclasses.dataclass(frozen=True)
class CurvePoint:
    """One learning-curve size.

    Attributes:
        active_node_ratio: Mean active nodes of the combined parser over the T-parser's.
    """

    size: int
    entries: int
    right_parse_pct: float
    any_parse_pct: float
    precision_pct: float
    active_node_ratio: float


def learning_curve(
    tb: treebank.TreeBank,
    sizes: Sequence[int],
    cfg: learner.LearnerConfig,
    s: SplitSpec,
    *,
    trust: combiner.Trust = combiner.Trust.general,
    pos_tags: Sequence[str] | None = None,
    jobs: int = 1,
    verbose: bool = False,
) -> list[CurvePoint]:
    """Learn on growing training subsets and evaluate on one fixed test set.

    The split gives a training pool and the test set. Subsets are prefixes of one seeded
    permutation of the pool, so a larger size always extends a smaller one. The T-parser
    grammar comes from the whole pool.
    """
    log_func = logging.info if verbose else logging.debug
    pool, test_set = split(tb, s)
    for size in sizes:
        if not 0 <= size <= len(pool):
            raise SplitError(f"curve-sizes: {size} is outside the training pool of {len(pool)}.")
    lexicon = treebank.pos_lexicon(tb, pos_tags)
    stripped_pool = treebank.strip_words(pool, pos_tags)
    grammar = treebank.extract_cfg(stripped_pool)
    baseline = evaluate(
        cfg_parser.TParser(grammar),
        test_set,
        lexicon,
        min_length=s.min_sentence_length,
        pos_tags=pos_tags,
        jobs=jobs,
        verbose=verbose,
    )
    order = np.random.default_rng(s.seed).permutation(len(pool))

    points = []
    for size in sizes:
        subset = stripped_pool.subset(sorted(int(i) for i in order[:size]))
        learned = learner.learn(subset, cfg, verbose=verbose)
        tsg = tsg_parser.build_tsg(learned.lexicon, tb.start)
        metrics = evaluate(
            combiner.CombinedParser(grammar, tsg, trust=trust),
            test_set,
            lexicon,
            min_length=s.min_sentence_length,
            pos_tags=pos_tags,
            jobs=jobs,
            verbose=verbose,
        )
        if baseline.mean_active_nodes > 0:
            ratio = metrics.mean_active_nodes / baseline.mean_active_nodes
        else:
            ratio = 1.0
        log_func(f"Size {size}: {len(learned.lexicon)} entries, active-node ratio {ratio:.4f}")
        points.append(
            CurvePoint(
                size=size,
                entries=len(learned.lexicon),
                right_parse_pct=metrics.right_parse_pct,
                any_parse_pct=metrics.any_parse_pct,
                precision_pct=metrics.precision_pct,
                active_node_ratio=ratio,
            )
        )
    return points


SPLIT_COLUMNS = [
    "split",
    "seed",
    "parser",
    "train",
    "test",
    "sentences",
    "entries",
    "tsg_trees",
    "tsg_nodes",
    "right_parse_pct",
    "any_parse_pct",
    "precision_pct",
    "precision_defined",
    "mean_active_nodes",
    "std_active_nodes",
]
CURVE_COLUMNS = [
    "size",
    "entries",
    "right_parse_pct",
    "any_parse_pct",
    "precision_pct",
    "active_node_ratio",
]


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def splits_csv(rows: Sequence[SplitRow], *, timing: bool = False) -> str:
    """CSV of split rows. Timing is excluded unless asked for, so reruns are byte-identical."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SPLIT_COLUMNS + (["mean_cpu_seconds"] if timing else []))
    for row in rows:
        m = row.metrics
        record = [
            row.split,
            row.seed,
            row.parser,
            row.train,
            row.test,
            m.sentences,
            row.entries,
            row.tsg_trees,
            row.tsg_nodes,
            _fmt(m.right_parse_pct),
            _fmt(m.any_parse_pct),
            _fmt(m.precision_pct),
            int(m.precision_defined),
            _fmt(m.mean_active_nodes),
            _fmt(m.std_active_nodes),
        ]
        if timing:
            record.append(f"{m.mean_cpu_seconds:.6f}")
        writer.writerow(record)
    return out.getvalue()


def curve_csv(points: Sequence[CurvePoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for p in points:
        writer.writerow(
            [
                p.size,
                p.entries,
                _fmt(p.right_parse_pct),
                _fmt(p.any_parse_pct),
                _fmt(p.precision_pct),
                _fmt(p.active_node_ratio),
            ]
        )
    return out.getvalue()


def plot_curve(points: Sequence[CurvePoint], path: str | pathlib.Path) -> None:
    """Plot precision and active-node ratio against training size."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    sizes = [p.size for p in points]
    fig, (ax_precision, ax_ratio) = plt.subplots(2, 1, sharex=True, figsize=(6, 6))
    ax_precision.plot(sizes, [p.precision_pct for p in points], marker="o")
    ax_precision.set_ylabel("precision (%)")
    ax_ratio.plot(sizes, [p.active_node_ratio for p in points], marker="o", color="tab:orange")
    ax_ratio.set_ylabel("active-node ratio")
    ax_ratio.set_xlabel("training trees")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


LENGTH_THRESHOLDS = (2, 7, 10)
TIMING_COLUMNS = [
    "split",
    "parser",
    "min_length",
    "sentences",
    "mean_cpu_seconds",
    "std_cpu_seconds",
    "mean_active_nodes",
    "active_node_ratio",
]


@dataclasses.dataclass(frozen=True)
class TimingRow:
    """Cost of one parser on the test sentences of at least min_length words.

    Attributes:
        active_node_ratio: Mean active nodes over the T-parser's on the same sentences.
    """

    split: int
    parser: str
    min_length: int
    sentences: int
    mean_cpu_seconds: float
    std_cpu_seconds: float
    mean_active_nodes: float
    active_node_ratio: float


def _mean_nodes(results: Sequence[SentenceResult]) -> float:
    return float(np.mean([r.active_nodes for r in results])) if results else 0.0


def timing_rows(
    rows: Sequence[SplitRow], thresholds: Sequence[int] = LENGTH_THRESHOLDS
) -> list[TimingRow]:
    """Bucket each split row's sentences by minimum length."""
    baselines = {row.split: row.results for row in rows if row.parser == cfg_parser.TParser.name}
    out = []
    for row in rows:
        for threshold in thresholds:
            bucket = [r for r in row.results if r.length >= threshold]
            baseline = _mean_nodes(
                [r for r in baselines.get(row.split, ()) if r.length >= threshold]
            )
            seconds = np.array([r.seconds for r in bucket], dtype=float)
            nodes = _mean_nodes(bucket)
            out.append(
                TimingRow(
                    split=row.split,
                    parser=row.parser,
                    min_length=threshold,
                    sentences=len(bucket),
                    mean_cpu_seconds=float(seconds.mean()) if bucket else 0.0,
                    std_cpu_seconds=float(seconds.std(ddof=1)) if len(bucket) > 1 else 0.0,
                    mean_active_nodes=nodes,
                    active_node_ratio=nodes / baseline if baseline > 0 else 1.0,
                )
            )
    return out


def timing_csv(rows: Sequence[TimingRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TIMING_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.split,
                row.parser,
                row.min_length,
                row.sentences,
                f"{row.mean_cpu_seconds:.6f}",
                f"{row.std_cpu_seconds:.6f}",
                _fmt(row.mean_active_nodes),
                _fmt(row.active_node_ratio),
            ]
        )
    return out.getvalue()


def cpu_profile(results: Sequence[SentenceResult]) -> tuple[np.ndarray, np.ndarray]:
    """Sorted CPU seconds and the percentage of sentences parsed within each.

    Read as a deadline curve: 100 minus the y value at deadline x is the miss rate.
    """
    seconds = np.sort(np.array([r.seconds for r in results], dtype=float))
    within = 100.0 * np.arange(1, len(seconds) + 1) / max(len(seconds), 1)
    return seconds, within


def deadline_miss_pct(results: Sequence[SentenceResult], deadline: float) -> float:
    if not results:
        return 0.0
    return 100.0 * sum(r.seconds > deadline for r in results) / len(results)


def plot_cpu_profile(rows: Sequence[SplitRow], path: str | pathlib.Path) -> None:
    """Plot the cumulative CPU-time curve of each parser, pooled over splits."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    pooled: dict[str, list[SentenceResult]] = {}
    for row in rows:
        pooled.setdefault(row.parser, []).extend(row.results)
    fig, ax = plt.subplots(figsize=(6, 4))
    for parser, results in pooled.items():
        seconds, within = cpu_profile(results)
        ax.step(seconds, within, where="post", label=parser)
    ax.set_xlabel("CPU seconds per sentence")
    ax.set_ylabel("sentences parsed within (%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
