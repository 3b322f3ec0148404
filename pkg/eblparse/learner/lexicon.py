#!/usr/bin/env python3

from __future__ import annotations

from typing import Any

import yaml

from eblparse.learner import learner
from eblparse.treebank import treebank


class LexiconFormatError(Exception):
    pass


def _entry_to_dict(entry: learner.LearnedEntry) -> dict[str, Any]:
    return {
        "iteration": entry.iteration,
        "theta": entry.theta,
        "context": str(entry.context),
        "ssf": " ".join(entry.ssf),
        "fc": entry.fc,
        "f": entry.f,
        "subtrees": [{"tree": tree.to_string(), "count": count} for tree, count in entry.subtrees],
        "occurrences": " ".join(f"{index}:{address}" for index, address in entry.occurrences),
    }


def write_lexicon(lex: learner.LearnedLexicon) -> str:
    """Serialize a lexicon as YAML, entries ordered by iteration then SSF."""
    cfg = lex.config
    document = {
        "config": {
            "theta-start": cfg.theta_start,
            "theta-floor": cfg.theta_floor,
            "theta-step": cfg.theta_step,
            "tau-abs": cfg.tau_abs,
            "tau-frac": cfg.tau_frac,
            "tau": lex.tau,
            "retreat": cfg.retreat,
        },
        "entries": [
            _entry_to_dict(entry)
            for entry in sorted(lex.entries, key=learner.LearnedEntry.sort_key)
        ],
    }
    return yaml.safe_dump(document, sort_keys=False, default_flow_style=False)


def _require(record: dict[str, Any], key: str, where: str) -> Any:
    if key not in record:
        raise LexiconFormatError(f"{where}: missing {key!r}.")
    return record[key]


def _parse_occurrences(text: str, where: str) -> tuple[tuple[int, int], ...]:
    occurrences = []
    for token in str(text or "").split():
        index, sep, address = token.partition(":")
        if not sep:
            raise LexiconFormatError(f"{where}: malformed occurrence {token!r}.")
        try:
            occurrences.append((int(index), int(address)))
        except ValueError:
            raise LexiconFormatError(f"{where}: malformed occurrence {token!r}.")
    return tuple(occurrences)


def _entry_from_dict(record: dict[str, Any], where: str) -> learner.LearnedEntry:
    try:
        context = learner.ContextPattern.from_string(_require(record, "context", where))
    except ValueError as e:
        raise LexiconFormatError(f"{where}: {e}")
    ssf = tuple(str(_require(record, "ssf", where)).split())
    if not ssf:
        raise LexiconFormatError(f"{where}: empty ssf.")

    subtrees = []
    for item in _require(record, "subtrees", where) or []:
        try:
            tree = treebank.Tree.fromstring(_require(item, "tree", where))
        except (treebank.TreebankSyntaxError, treebank.EmptyCorpusError) as e:
            raise LexiconFormatError(f"{where}: bad subtree: {e}")
        if tree.frontier_labels() != ssf:
            raise LexiconFormatError(f"{where}: subtree {tree} does not have frontier {ssf}.")
        subtrees.append((tree, int(_require(item, "count", where))))

    return learner.LearnedEntry(
        ssf=ssf,
        context=context,
        theta=float(_require(record, "theta", where)),
        iteration=int(_require(record, "iteration", where)),
        fc=int(_require(record, "fc", where)),
        f=int(_require(record, "f", where)),
        subtrees=tuple(subtrees),
        occurrences=_parse_occurrences(record.get("occurrences", ""), where),
    )


def read_lexicon(text: str) -> learner.LearnedLexicon:
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise LexiconFormatError(f"Invalid YAML: {e}")
    if not isinstance(document, dict):
        raise LexiconFormatError("Lexicon file must be a mapping with 'config' and 'entries'.")

    conf = document.get("config") or {}
    try:
        cfg = learner.LearnerConfig(
            theta_start=float(conf.get("theta-start", 1.0)),
            theta_floor=float(conf.get("theta-floor", 1.0)),
            theta_step=float(conf.get("theta-step", 0.05)),
            tau_abs=int(conf.get("tau-abs", 10)),
            tau_frac=float(conf.get("tau-frac", 0.003)),
            retreat=bool(conf.get("retreat", True)),
        )
    except learner.LearnerConfigError as e:
        raise LexiconFormatError(f"config: {e}")

    entries = tuple(
        _entry_from_dict(record, f"entry {index}")
        for index, record in enumerate(document.get("entries") or [])
    )
    try:
        return learner.LearnedLexicon(entries, cfg, int(conf.get("tau", cfg.tau_abs)))
    except treebank.InvariantViolation as e:
        raise LexiconFormatError(str(e))
