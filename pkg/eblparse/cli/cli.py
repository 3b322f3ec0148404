#!/usr/bin/env python3

from __future__ import annotations

import logging
import os
import pathlib
import sys
import tempfile
from collections.abc import Callable, Sequence

import click

from eblparse.cli import config
from eblparse.cli import logs
from eblparse.dop import dop
from eblparse.eval import corpus_gen
from eblparse.eval import evaluate
from eblparse.learner import learner
from eblparse.learner import lexicon as lexicon_io
from eblparse.parsing import cfg_parser
from eblparse.parsing import combiner
from eblparse.parsing import tsg_parser
from eblparse.treebank import treebank

# Exit code 1
USAGE_ERRORS = (
    config.ConfigError,
    evaluate.SplitError,
    learner.LearnerConfigError,
    corpus_gen.GeneratorConfigError,
    OSError,
)
# Exit code 2
FORMAT_ERRORS = (
    treebank.TreebankSyntaxError,
    treebank.EmptyCorpusError,
    treebank.AnnotationError,
    treebank.GrammarFormatError,
    lexicon_io.LexiconFormatError,
    cfg_parser.InputError,
    dop.ProvenanceError,
)

EXISTING_FILE = click.Path(exists=True, dir_okay=False)
OUTPUT_FILE = click.Path(dir_okay=False, writable=True)


def write_atomic(path: str | pathlib.Path, text: str) -> None:
    """Write a file through a temporary file in the same directory and a rename."""
    path = pathlib.Path(path)
    with tempfile.NamedTemporaryFile(
        "w", dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False
    ) as f:
        f.write(text)
    os.replace(f.name, path)


def _plot_atomic(plot: Callable[[pathlib.Path], None], path: str) -> None:
    path = pathlib.Path(path)
    tmp_path = path.with_name(f".{path.stem}.tmp{path.suffix}")
    plot(tmp_path)
    os.replace(tmp_path, path)


def _emit(path: str | None, text: str) -> None:
    if path:
        write_atomic(path, text)
    else:
        click.echo(text, nl=False)


def _require(value: str | None, name: str) -> str:
    if value is None:
        raise config.ConfigError(f"{name}: required, as a flag or in the config file.")
    return value


def _read_text(path: str) -> str:
    try:
        return pathlib.Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise config.ConfigError(f"Cannot read {path}: {e.strerror}")


def _read_corpus(cfg: config.RunConfig) -> treebank.TreeBank:
    return treebank.read_treebank(_read_text(_require(cfg.corpus, "corpus")))


def learner_options(func: Callable) -> Callable:
    """Flags that override the learner settings of the config file."""
    options = [
        click.option("--theta-start", type=float, help="Initial theta. [default: 1.0]"),
        click.option("--theta-floor", type=float, help="Lowest theta tried. [default: 1.0]"),
        click.option("--theta-step", type=float, help="Theta decrement. [default: 0.05]"),
        click.option("--tau-abs", type=int, help="Absolute frequency threshold. [default: 10]"),
        click.option(
            "--tau-frac",
            type=float,
            help="Frequency threshold as a fraction of the corpus. [default: 0.003]",
        ),
        click.option(
            "--retreat/--no-retreat",
            default=None,
            help="Fall back to one-symbol context patterns. [default: retreat]",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option(
    "-c",
    "--config",
    "config_path",
    type=EXISTING_FILE,
    help="YAML run configuration. Flags take precedence over it.",
)
@click.option("-j", "--jobs", type=int, help="Worker processes for evaluation. [default: 1]")
@click.option("-v", "--verbose", is_flag=True, help="Log DEBUG messages.")
@click.option("-q", "--quiet", is_flag=True, help="Only log warnings and errors.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, jobs: int | None, verbose: bool, quiet: bool):
    """Learn, apply and evaluate partial-parsers from a tree-bank."""
    logs.setup(logs.level_for(verbose, quiet))
    cfg = config.load_config(config_path) if config_path else config.RunConfig()
    ctx.obj = cfg.merge(jobs=jobs, verbose=verbose or None)


@cli.command()
@click.option("--corpus", type=EXISTING_FILE, help="Bracketed tree-bank with words.")
@click.option("-o", "--out", type=OUTPUT_FILE, help="Lexicon file to write.")
@learner_options
@click.pass_obj
def learn(cfg: config.RunConfig, corpus: str | None, out: str | None, **learner_flags):
    """Learn a lexicon of probably-always-constituent SSFs."""
    cfg = cfg.merge(corpus=corpus, out=out, **learner_flags)
    out_path = _require(cfg.out, "out")
    tb = _read_corpus(cfg)
    symbols = treebank.classify_symbols(tb, cfg.pos_tags)
    kinds = [symbol.kind for symbol in symbols.values()]
    logging.debug(
        f"{kinds.count(treebank.SymbolKind.pos)} pos-tags, "
        f"{kinds.count(treebank.SymbolKind.phrasal)} phrasal labels"
    )

    result = learner.learn(
        treebank.strip_words(tb, cfg.pos_tags), cfg.learner_config(), verbose=cfg.verbose
    )
    write_atomic(out_path, lexicon_io.write_lexicon(result.lexicon))
    click.echo(f"entries: {len(result.lexicon)}")
    click.echo(f"iterations: {result.iterations}")
    click.echo(f"residual nodes: {result.residual.num_nodes()}")


@cli.command()
@click.option("--lexicon", type=EXISTING_FILE, help="Lexicon written by 'learn'.")
@click.option(
    "--grammar",
    type=str,
    help=f"Rule file, or '{config.FROM_CORPUS}' to read the grammar off --corpus.",
)
@click.option("--corpus", type=EXISTING_FILE, help="Tree-bank for the grammar and word tags.")
@click.option("--input", "tags", type=str, help="Space-separated pos-tags to parse.")
@click.option("--words", type=str, help="Space-separated words, tagged through --corpus.")
@click.option("--trust", type=click.Choice(config.TRUST_NAMES), help="[default: general]")
@click.option("--emit-forest", type=OUTPUT_FILE, help="Forest dump file. [default: stdout]")
@click.option("--emit-partial", type=OUTPUT_FILE, help="Also write the partial chart dump.")
@click.pass_obj
def parse(
    cfg: config.RunConfig,
    lexicon: str | None,
    grammar: str | None,
    corpus: str | None,
    tags: str | None,
    words: str | None,
    trust: str | None,
    emit_forest: str | None,
    emit_partial: str | None,
):
    """Parse one input with the combined parser and dump its forest.

    The dump has one line per active item: start, end, label, sure flag and number of analyses.
    """
    cfg = cfg.merge(lexicon=lexicon, grammar=grammar, corpus=corpus, trust=trust)
    if (tags is None) == (words is None):
        raise click.UsageError("Give exactly one of --input and --words.")

    lex = lexicon_io.read_lexicon(_read_text(_require(cfg.lexicon, "lexicon")))
    tb = _read_corpus(cfg) if cfg.corpus is not None else None
    if cfg.grammar == config.FROM_CORPUS:
        if tb is None:
            raise config.ConfigError(f"corpus: required with --grammar {config.FROM_CORPUS}.")
        g = treebank.extract_cfg(treebank.strip_words(tb, cfg.pos_tags))
    else:
        g = treebank.read_grammar(_read_text(cfg.grammar))

    if words is not None:
        if tb is None:
            raise config.ConfigError("corpus: required to tag --words.")
        lattice = treebank.pos_lexicon(tb, cfg.pos_tags).lattice(words.split())
    else:
        lattice = cfg_parser.as_lattice(tags.split())
    if not lattice:
        raise cfg_parser.InputError("Empty input.")

    tsg = tsg_parser.build_tsg(lex, g.start)
    parser = combiner.CombinedParser(g, tsg, trust=cfg.trust_mode(), verbose=cfg.verbose)
    if emit_partial:
        write_atomic(emit_partial, tsg_parser.partial_parse(lattice, tsg).dump())
    parsed = parser.parse_combined(lattice)
    logging.info(
        f"{cfg_parser.count_active_nodes(parsed.forest)} active nodes, "
        f"{len(parsed.partial_items_used)} partial items, "
        f"{len(parsed.removed_crossing_pairs)} crossing pairs removed"
    )
    _emit(emit_forest, parsed.forest.dump())


@cli.command(name="eval")
@click.option("--corpus", type=EXISTING_FILE, help="Bracketed tree-bank with words.")
@click.option("--splits", type=int, help="Number of independent random splits. [default: 1]")
@click.option("--seed", type=int, help="Seed of the first split; split k uses seed + k.")
@click.option("--train-size", type=int, help="Training trees per split.")
@click.option("--test-size", type=int, help="Test trees per split. [default: a tenth]")
@click.option("--min-length", type=int, help="Shortest evaluated sentence. [default: 2]")
@click.option("--trust", type=click.Choice(config.TRUST_NAMES), help="[default: general]")
@click.option("-o", "--out", type=OUTPUT_FILE, help="Split CSV file. [default: stdout]")
@click.option("--timing", is_flag=True, help="Add the mean_cpu_seconds column.")
@click.option("--timing-out", type=OUTPUT_FILE, help="CPU time and space per length bucket CSV.")
@click.option("--timing-plot", type=OUTPUT_FILE, help="Cumulative CPU-time plot image.")
@click.option("--curve-sizes", type=str, help="Comma-separated training sizes for a curve.")
@click.option("--curve-out", type=OUTPUT_FILE, help="Learning-curve CSV file.")
@click.option("--plot", type=OUTPUT_FILE, help="Learning-curve plot image.")
@learner_options
@click.pass_obj
def eval_cmd(
    cfg: config.RunConfig,
    corpus: str | None,
    splits: int | None,
    seed: int | None,
    train_size: int | None,
    test_size: int | None,
    min_length: int | None,
    trust: str | None,
    out: str | None,
    timing: bool,
    timing_out: str | None,
    timing_plot: str | None,
    curve_sizes: str | None,
    curve_out: str | None,
    plot: str | None,
    **learner_flags,
):
    """Compare the T-parser and the combined parser over random splits.

    The split CSV has two rows per split, one per parser, with the columns split, seed,
    parser, train, test, sentences, entries, tsg_trees, tsg_nodes, right_parse_pct,
    any_parse_pct, precision_pct, precision_defined, mean_active_nodes, std_active_nodes and,
    with --timing, mean_cpu_seconds. The timing CSV buckets the test sentences of each row by
    minimum length 2, 7 and 10. The curve CSV has the columns size, entries, right_parse_pct,
    any_parse_pct, precision_pct and active_node_ratio.
    """
    cfg = cfg.merge(
        corpus=corpus,
        splits=splits,
        seed=seed,
        train_size=train_size,
        test_size=test_size,
        min_length=min_length,
        trust=trust,
        out=out,
        **learner_flags,
    )
    tb = _read_corpus(cfg)
    spec = cfg.split_spec(len(tb))
    rows = evaluate.run_splits(
        tb,
        cfg.splits,
        spec,
        cfg.learner_config(),
        trust=cfg.trust_mode(),
        pos_tags=cfg.pos_tags,
        jobs=cfg.jobs,
        verbose=cfg.verbose,
    )
    _emit(cfg.out, evaluate.splits_csv(rows, timing=timing))
    if timing_out:
        write_atomic(timing_out, evaluate.timing_csv(evaluate.timing_rows(rows)))
    if timing_plot:
        _plot_atomic(lambda path: evaluate.plot_cpu_profile(rows, path), timing_plot)

    if curve_sizes is None:
        if curve_out or plot:
            raise click.UsageError("--curve-out and --plot need --curve-sizes.")
        return
    try:
        sizes = [int(size) for size in curve_sizes.split(",") if size.strip()]
    except ValueError:
        raise click.BadParameter("must be comma-separated integers.", param_hint="--curve-sizes")
    points = evaluate.learning_curve(
        tb,
        sizes,
        cfg.learner_config(),
        spec,
        trust=cfg.trust_mode(),
        pos_tags=cfg.pos_tags,
        jobs=cfg.jobs,
        verbose=cfg.verbose,
    )
    _emit(curve_out, evaluate.curve_csv(points))
    if plot:
        _plot_atomic(lambda path: evaluate.plot_curve(points, path), plot)


def _limit_option(name: str, default: int, what: str) -> Callable:
    return click.option(name, type=click.IntRange(min=1), help=f"{what}. [default: {default}]")


@cli.command(name="dop-project")
@click.option("--corpus", type=EXISTING_FILE, help="Tree-bank the lexicon was learned from.")
@click.option("--lexicon", type=EXISTING_FILE, help="Lexicon giving the cut-node marking.")
@_limit_option("--max-depth", 4, "Maximum fragment depth")
@_limit_option("--max-subst-sites", 2, "Maximum substitution sites per fragment")
@_limit_option("--max-words", 7, "Maximum words per fragment")
@_limit_option("--max-consecutive-words", 2, "Maximum run of adjacent words")
@click.option("--table", type=OUTPUT_FILE, help="Write the fragment, root, count table here.")
@click.option("-o", "--out", type=OUTPUT_FILE, help="Report file. [default: stdout]")
@click.pass_obj
def dop_project(
    cfg: config.RunConfig,
    corpus: str | None,
    lexicon: str | None,
    max_depth: int | None,
    max_subst_sites: int | None,
    max_words: int | None,
    max_consecutive_words: int | None,
    table: str | None,
    out: str | None,
):
    """Count the DOP fragments projectable under the lexicon's cut-node marking.

    Without a lexicon only the all-marked projection is reported.
    """
    cfg = cfg.merge(
        corpus=corpus,
        lexicon=lexicon,
        max_depth=max_depth,
        max_subst_sites=max_subst_sites,
        max_words=max_words,
        max_consecutive_words=max_consecutive_words,
        out=out,
    )
    tb = _read_corpus(cfg)
    lim = cfg.projection_limits()
    split_trees = [treebank.split_words(tree, cfg.pos_tags) for tree in tb.trees]
    stripped = treebank.TreeBank(tuple(tree for tree, _ in split_trees), tb.start)
    words = [tree_words for _, tree_words in split_trees]

    lines = ["projection fragments nodes tokens"]
    projections = [("all-marked", None)]
    if cfg.lexicon is not None:
        lex = lexicon_io.read_lexicon(_read_text(cfg.lexicon))
        projections.append(("marked", dop.mark_for_dop(stripped, lex)))
    for name, marking in projections:
        counts = dop.project_corpus(stripped, marking, lim, words)
        size = dop.size_of(counts)
        lines.append(f"{name} {size.fragments} {size.nodes} {size.tokens}")
        if table and name == projections[-1][0]:
            rows = dop.fragment_table(counts)
            write_atomic(table, "".join(f"{frag}\t{root}\t{n}\n" for frag, root, n in rows))
    _emit(cfg.out, "\n".join(lines) + "\n")


@cli.command(name="gen-corpus")
@click.option(
    "--preset",
    default="route",
    show_default=True,
    help=f"Preset name ({', '.join(corpus_gen.list_presets())}) or YAML file.",
)
@click.option("--size", default=1000, type=click.IntRange(min=1), show_default=True)
@click.option("--seed", type=int, help="Generator seed. [default: config seed]")
@click.option("-o", "--out", type=OUTPUT_FILE, help="Corpus file. [default: stdout]")
@click.pass_obj
def gen_corpus(cfg: config.RunConfig, preset: str, size: int, seed: int | None, out: str | None):
    """Generate a synthetic word-annotated tree-bank from a template grammar."""
    cfg = cfg.merge(seed=seed, out=out)
    tb = corpus_gen.generate_corpus(size, cfg.seed, corpus_gen.load_preset(preset))
    _emit(cfg.out, treebank.write_treebank(tb))


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line. Returns 0, or 1, 2, 3 for usage, input and invariant errors."""
    exit_code = 1
    try:
        result = cli.main(args=argv, prog_name="ebl-parse", standalone_mode=False)
        exit_code = result if isinstance(result, int) else 0
    except click.ClickException as e:
        e.show()
    except click.exceptions.Abort:
        logging.error("Aborted.")
    except USAGE_ERRORS as e:
        logs.log_exception(e, logging.error)
    except FORMAT_ERRORS as e:
        logs.log_exception(e, logging.error)
        exit_code = 2
    except treebank.InvariantViolation as e:
        logs.log_exception(e, logging.critical)
        exit_code = 3
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
