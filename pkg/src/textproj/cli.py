"""Command-line orchestration: one subcommand family per analysis module plus
``run`` for whole pipelines driven by a JSON config.

Logs go to standard error only; machine-readable results go to standard out
or to files. Exit codes: 0 success, 1 stage failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, clone_detect, coding, corpus as corpus_mod, ngram, pos_extract, topics, viz_report
from .errors import TextProjError, ConfigurationError
from .stopwords import ENGLISH_STOPWORDS, load_stopwords

log = logging.getLogger("textproj")

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "textproj pipeline configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["output_dir"],
    "properties": {
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "corpus": {
            "type": "object",
            "additionalProperties": False,
            "required": ["root"],
            "properties": {
                "root": {"type": "string"},
                "manifest": {"type": "string"},
                "ignore_patterns": {"type": "array", "items": {"type": "string"}},
            },
        },
        "clones": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min_length": {"type": "integer", "minimum": 2},
                "max_gap": {"type": "integer", "minimum": 0},
            },
        },
        "wordcloud": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_words": {"type": "integer", "minimum": 1},
                "canvas": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
            },
        },
        "phrasenet": {
            "type": "object",
            "additionalProperties": False,
            "required": ["connector"],
            "properties": {
                "connector": {"type": "string"},
                "min_weight": {"type": "integer", "minimum": 1},
            },
        },
        "textflow": {
            "type": "object",
            "additionalProperties": False,
            "required": ["terms"],
            "properties": {"terms": {"type": "array", "items": {"type": "string"}, "minItems": 1}},
        },
        "topics": {
            "type": "object",
            "additionalProperties": False,
            "required": ["k"],
            "properties": {
                "k": {"type": "integer", "minimum": 1},
                "iterations": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number"},
                "beta": {"type": "number"},
                "stopwords": {"type": "string"},
            },
        },
    },
}

EXAMPLE_CONFIG = {
    "output_dir": "out",
    "seed": 42,
    "corpus": {"root": "tests/fixtures/rfc", "manifest": "tests/fixtures/rfc_manifest.json"},
    "clones": {"min_length": 20, "max_gap": 2},
    "wordcloud": {"max_words": 60, "canvas": [800, 500]},
    "phrasenet": {"connector": "is", "min_weight": 1},
    "textflow": {"terms": ["request", "response", "header"]},
    "topics": {"k": 5, "iterations": 50},
}

_STOCHASTIC_STAGES = ("wordcloud", "topics")


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except ConfigurationError as exc:
        log.error("%s", exc)
        return 2
    except TextProjError as exc:
        log.error("%s", exc)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textproj", description="Text analytics for software project artifacts."
    )
    parser.add_argument("--version", action="version", version=f"textproj {__version__}")
    sub = parser.add_subparsers(dest="command")

    _corpus_commands(sub)
    _clones_commands(sub)
    _ngram_commands(sub)
    _topics_commands(sub)
    _pos_commands(sub)
    _coding_commands(sub)
    _viz_commands(sub)
    _run_command(sub)
    return parser


def _add(sub, name, help_text):
    p = sub.add_parser(name, help=help_text)
    inner = p.add_subparsers(dest="subcommand", required=True)
    return inner


# ---------------------------------------------------------------------------
# corpus


def _corpus_commands(sub):
    inner = _add(sub, "corpus", "ingest documents and build a corpus file")
    ingest = inner.add_parser("ingest", help="read a directory tree into corpus.json")
    ingest.add_argument("--root", required=True)
    ingest.add_argument("--manifest")
    ingest.add_argument("--out", default="corpus.json")
    ingest.set_defaults(func=cmd_corpus_ingest, command="corpus")


def cmd_corpus_ingest(args) -> int:
    built = _build_corpus(args.root, args.manifest)
    built.save(args.out)
    log.info("wrote %s (%d documents)", args.out, len(built.documents))
    return 0


def _build_corpus(root, manifest_path=None, ignore_patterns=()) -> corpus_mod.Corpus:
    manifest = corpus_mod.load_manifest(manifest_path) if manifest_path else None
    report = corpus_mod.ingest_path(
        root,
        class_map=manifest.class_map if manifest else None,
        versions=manifest.versions if manifest else None,
    )
    for failure in report.failures:
        log.warning("skipped %s: %s", failure.path, failure.reason)
    links = manifest.links if manifest else ()
    return corpus_mod.Corpus(report.documents, links, ignore_patterns)


def _load_corpus(path) -> corpus_mod.Corpus:
    return corpus_mod.Corpus.load(path)


# ---------------------------------------------------------------------------
# clones


def _clones_commands(sub):
    inner = _add(sub, "clones", "token-based clone detection and statistics")
    detect = inner.add_parser("detect", help="find exact and gapped clones")
    detect.add_argument("--corpus", required=True)
    detect.add_argument("--min-length", type=int, default=20)
    detect.add_argument("--max-gap", type=int, default=2)
    detect.add_argument("--ignore", help="file with one ignore regex per line")
    detect.add_argument("--out", default="clones.json")
    detect.set_defaults(func=cmd_clones_detect, command="clones")

    stats = inner.add_parser("stats", help="coverage and counts per document")
    stats.add_argument("--corpus", required=True)
    stats.add_argument("--clones", required=True)
    stats.add_argument("--out")
    stats.set_defaults(func=cmd_clones_stats, command="clones")

    diff = inner.add_parser("diff", help="line differences of one clone group")
    diff.add_argument("group_id")
    diff.add_argument("--corpus", required=True)
    diff.add_argument("--clones", required=True)
    diff.set_defaults(func=cmd_clones_diff, command="clones")


def _read_patterns(path) -> list[str]:
    patterns = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            patterns.append(line)
    return patterns


def cmd_clones_detect(args) -> int:
    built = _load_corpus(args.corpus)
    if args.ignore:
        built = built.with_ignore_patterns(_read_patterns(args.ignore))
    groups = clone_detect.detect_gapped_clones(built, args.min_length, args.max_gap)
    clone_detect.save_groups(groups, args.out, args.min_length, args.max_gap)
    log.info("wrote %s (%d groups)", args.out, len(groups))
    return 0


def _stats_table(stats: clone_detect.CloneStats) -> dict:
    return {
        "per_document": [
            {
                "document_id": r.document_id,
                "clone_coverage": round(r.clone_coverage, 6),
                "clone_group_count": r.clone_group_count,
                "clone_instance_count": r.clone_instance_count,
                "total_lines": r.total_lines,
            }
            for r in stats.per_document
        ],
        "corpus": {
            "clone_coverage": round(stats.corpus_coverage, 6),
            "total_groups": stats.total_groups,
            "total_instances": stats.total_instances,
            "total_lines": stats.total_lines,
        },
    }


def cmd_clones_stats(args) -> int:
    built = _load_corpus(args.corpus)
    groups = clone_detect.load_groups(args.clones)
    table = _stats_table(clone_detect.clone_stats(built, groups))
    payload = json.dumps(table, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return 0


def cmd_clones_diff(args) -> int:
    built = _load_corpus(args.corpus)
    groups = {g.id: g for g in clone_detect.load_groups(args.clones)}
    if args.group_id not in groups:
        raise ConfigurationError(f"unknown clone group {args.group_id!r}")
    diffs = clone_detect.diff_instances(built, groups[args.group_id])
    payload = [
        {
            "document_id": d.document_id,
            "start_line": d.start_line,
            "end_line": d.end_line,
            "edits": [
                {"op": e.op, "reference": list(e.reference_lines), "instance": list(e.instance_lines)}
                for e in d.edits
            ],
        }
        for d in diffs
    ]
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# ngram


def _ngram_commands(sub):
    inner = _add(sub, "ngram", "word n-gram models and char-gram categorization")
    train = inner.add_parser("train", help="train a word n-gram model")
    train.add_argument("--corpus", required=True)
    train.add_argument("--n", type=int, required=True)
    train.add_argument("--smoothing", choices=["none", "add_one"], default="add_one")
    train.add_argument("--out", default="ngram.json")
    train.set_defaults(func=cmd_ngram_train, command="ngram")

    entropy = inner.add_parser("entropy", help="cross-entropy of a document under a model")
    entropy.add_argument("--corpus", required=True)
    entropy.add_argument("--n", type=int, default=3)
    entropy.add_argument("--smoothing", choices=["none", "add_one"], default="add_one")
    entropy.add_argument("--doc", required=True, help="held-out document id")
    entropy.set_defaults(func=cmd_ngram_entropy, command="ngram")

    profile = inner.add_parser("profile", help="build a character n-gram category profile")
    profile.add_argument("--category", required=True)
    profile.add_argument("--text", required=True, help="training text file")
    profile.add_argument("--out", default=None)
    profile.set_defaults(func=cmd_ngram_profile, command="ngram")

    categorize = inner.add_parser("categorize", help="rank category profiles for a text")
    categorize.add_argument("--profiles", required=True, help="directory of profile JSON files")
    categorize.add_argument("--text", required=True, help="text file to categorize")
    categorize.set_defaults(func=cmd_ngram_categorize, command="ngram")

    series = inner.add_parser("series", help="n-gram frequency per corpus version")
    series.add_argument("--corpus", required=True)
    series.add_argument("--query", required=True, help="space-separated token sequence")
    series.set_defaults(func=cmd_ngram_series, command="ngram")


def cmd_ngram_train(args) -> int:
    built = _load_corpus(args.corpus)
    model = ngram.train_word_model(built, args.n, args.smoothing)
    payload = {
        "n": model.n,
        "smoothing": model.smoothing,
        "vocabulary_size": len(model.vocabulary),
        "total_tokens": model.total_tokens,
        "windows": ngram.window_count(model),
    }
    Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("trained order-%d model over %d tokens", model.n, model.total_tokens)
    return 0


def cmd_ngram_entropy(args) -> int:
    built = _load_corpus(args.corpus)
    if args.doc not in built.document_ids():
        raise ConfigurationError(f"unknown document {args.doc!r}")
    train = [built.word_tokens(d) for d in built.document_ids() if d != args.doc]
    model = ngram.train_word_model(train, args.n, args.smoothing)
    value = ngram.cross_entropy(model, built.word_tokens(args.doc))
    print(json.dumps({"document": args.doc, "bits_per_token": value}))
    return 0


def cmd_ngram_profile(args) -> int:
    text = Path(args.text).read_text(encoding="utf-8")
    profile = ngram.train_char_profile(text, args.category)
    out = args.out or f"{args.category}.profile.json"
    ngram.save_profile(profile, out)
    log.info("wrote %s (%d grams)", out, len(profile.grams))
    return 0


def cmd_ngram_categorize(args) -> int:
    profile_dir = Path(args.profiles)
    profiles = [ngram.load_profile(p) for p in sorted(profile_dir.glob("*.json"))]
    text = Path(args.text).read_text(encoding="utf-8")
    result = ngram.categorize(profiles, text)
    print(
        json.dumps(
            {
                "matches": [{"category": c, "distance": d} for c, d in result.matches],
                "low_confidence": result.low_confidence,
            },
            indent=2,
        )
    )
    return 0


def cmd_ngram_series(args) -> int:
    built = _load_corpus(args.corpus)
    series = ngram.frequency_series(built, args.query)
    print(json.dumps([{"version": v, "frequency": f} for v, f in series], indent=2))
    return 0


# ---------------------------------------------------------------------------
# topics


def _topics_commands(sub):
    inner = _add(sub, "topics", "LDA topic models over the corpus")
    fit = inner.add_parser("fit", help="fit a topic model by collapsed Gibbs sampling")
    fit.add_argument("--corpus", required=True)
    fit.add_argument("--k", type=int, required=True)
    fit.add_argument("--alpha", type=float)
    fit.add_argument("--beta", type=float, default=topics.DEFAULT_BETA)
    fit.add_argument("--iterations", type=int, default=topics.DEFAULT_ITERATIONS)
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("--stopwords", help="file with one stop word per line")
    fit.add_argument("--out", default="topics.json")
    fit.set_defaults(func=cmd_topics_fit, command="topics")

    show = inner.add_parser("show", help="top words of one topic")
    show.add_argument("--model", required=True)
    show.add_argument("--topic", type=int, required=True)
    show.add_argument("--top", type=int, default=10)
    show.set_defaults(func=cmd_topics_show, command="topics")

    network = inner.add_parser("network", help="document-topic network above a threshold")
    network.add_argument("--model", required=True)
    network.add_argument("--threshold", type=float, default=0.2)
    network.add_argument("--out")
    network.set_defaults(func=cmd_topics_network, command="topics")


def _resolve_seed(explicit) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("TEXTPROJ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigurationError(f"TEXTPROJ_SEED must be an integer, got {env!r}") from exc
    raise ConfigurationError("a seed is required: pass --seed or set TEXTPROJ_SEED")


def cmd_topics_fit(args) -> int:
    built = _load_corpus(args.corpus)
    stop = load_stopwords(args.stopwords) if args.stopwords else None
    model = topics.fit_lda(
        built, args.k, alpha=args.alpha, beta=args.beta, iterations=args.iterations,
        seed=_resolve_seed(args.seed), stopwords=stop,
    )
    topics.save_model(model, args.out)
    log.info("fitted %d topics over %d documents", model.k, len(model.doc_ids))
    return 0


def cmd_topics_show(args) -> int:
    model = topics.load_model(args.model)
    words = topics.top_words(model, args.topic, args.top)
    print(json.dumps({"topic": args.topic, "top_words": words}))
    return 0


def cmd_topics_network(args) -> int:
    model = topics.load_model(args.model)
    network = topics.topic_network(model, args.threshold)
    payload = {
        "threshold": args.threshold,
        "edges": [
            {"document_id": e.document_id, "topic": e.topic, "weight": round(e.weight, 6)}
            for e in network.edges
        ],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------
# pos


def _pos_commands(sub):
    inner = _add(sub, "pos", "POS tagging, terms, ER graphs, and smells")
    for name, help_text in (
        ("tag", "tag every sentence of a document"),
        ("terms", "extract multiword terms"),
        ("er", "extract an entity-relationship graph"),
        ("smells", "detect passive-voice findings"),
    ):
        p = inner.add_parser(name, help=help_text)
        p.add_argument("--corpus", required=True)
        p.add_argument("--doc", help="restrict to one document id")
        p.add_argument("--out")
        p.set_defaults(func=cmd_pos, command="pos", pos_kind=name)


def cmd_pos(args) -> int:
    built = _load_corpus(args.corpus)
    doc_ids = [args.doc] if args.doc else list(built.document_ids())
    for doc_id in doc_ids:
        if doc_id not in built.document_ids():
            raise ConfigurationError(f"unknown document {args.doc!r}")
    result: dict = {}
    for doc_id in doc_ids:
        sentences = pos_extract.split_sentences(built.token_stream(doc_id))
        tagged = [pos_extract.tag(s) for s in sentences]
        if args.pos_kind == "tag":
            result[doc_id] = [
                [{"token": t.token.surface, "tag": t.tag} for t in sentence]
                for sentence in tagged
            ]
        elif args.pos_kind == "terms":
            result[doc_id] = [
                {"text": term.text, "qualifiers": list(term.qualifiers)}
                for sentence in tagged
                for term in pos_extract.extract_terms(sentence)
            ]
        elif args.pos_kind == "er":
            graph = pos_extract.extract_er_document(tagged)
            result[doc_id] = {
                "entities": graph.entities,
                "relationships": [
                    {"source": r.source, "target": r.target, "label": r.label}
                    for r in graph.relationships
                ],
            }
        else:
            findings = [
                f for sentence in tagged for f in pos_extract.detect_passive(sentence, doc_id)
            ]
            result[doc_id] = [
                {"start": f.start, "end": f.end, "kind": f.kind, "evidence": f.evidence}
                for f in findings
            ]
    payload = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        if args.pos_kind == "er":
            dot_path = Path(args.out).with_suffix(".dot")
            dot_path.write_text(_er_dot(result), encoding="utf-8")
    else:
        print(payload)
    return 0


def _er_dot(result: dict) -> str:
    lines = ["digraph er {"]
    for doc_id in sorted(result):
        graph = result[doc_id]
        for entity in graph["entities"]:
            lines.append(f'  "{entity}" [shape=box];')
        for rel in graph["relationships"]:
            lines.append(f'  "{rel["source"]}" -> "{rel["target"]}" [label="{rel["label"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# coding


def _coding_commands(sub):
    inner = _add(sub, "coding", "qualitative coding analytics")
    validate = inner.add_parser("validate", help="structural validation of a codebook")
    validate.add_argument("--codebook", required=True)
    validate.add_argument("--corpus")
    validate.set_defaults(func=cmd_coding_validate, command="coding")

    counts = inner.add_parser("counts", help="occurrence count per code")
    counts.add_argument("--codebook", required=True)
    counts.set_defaults(func=cmd_coding_counts, command="coding")

    condense = inner.add_parser("condense", help="drop nodes below an occurrence threshold")
    condense.add_argument("--codebook", required=True)
    condense.add_argument("--min", type=int, required=True)
    condense.add_argument("--out")
    condense.set_defaults(func=cmd_coding_condense, command="coding")

    agree = inner.add_parser("agreement", help="percent agreement and Cohen's kappa")
    agree.add_argument("--codebook", required=True)
    agree.add_argument("--coder", action="append", required=True,
                       help="coder id; give exactly twice")
    agree.add_argument("--unit", choices=["document", "segment"], default="document")
    agree.set_defaults(func=cmd_coding_agreement, command="coding")

    saturation = inner.add_parser("saturation", help="new codes per batch of segments")
    saturation.add_argument("--codebook", required=True)
    saturation.add_argument("--batch", type=int, required=True)
    saturation.set_defaults(func=cmd_coding_saturation, command="coding")


def cmd_coding_validate(args) -> int:
    codebook = coding.load_codebook(args.codebook)
    built = _load_corpus(args.corpus) if args.corpus else None
    violations = coding.validate_codebook(codebook, built)
    print(
        json.dumps(
            {
                "valid": not violations,
                "violations": [
                    {"kind": v.kind, "subject": v.subject, "detail": v.detail} for v in violations
                ],
            },
            indent=2,
        )
    )
    return 0 if not violations else 1


def cmd_coding_counts(args) -> int:
    codebook = coding.load_codebook(args.codebook)
    counts = coding.occurrence_counts(codebook.segments, codebook)
    print(json.dumps(dict(sorted(counts.items())), indent=2))
    return 0


def cmd_coding_condense(args) -> int:
    codebook = coding.load_codebook(args.codebook)
    graph = coding.condense_graph(coding.build_axial_graph(codebook), args.min)
    payload = {
        "nodes": dict(sorted(graph.nodes.items())),
        "edges": [
            {"from": e.from_code, "to": e.to_code, "kind": e.kind, "weight": e.weight}
            for e in graph.edges
        ],
        "core_category": graph.core_category,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_coding_agreement(args) -> int:
    if len(args.coder) != 2:
        raise ConfigurationError("agreement needs exactly two --coder arguments")
    codebook = coding.load_codebook(args.codebook)
    a = coding.units_by_coder(codebook.segments, args.coder[0], args.unit)
    b = coding.units_by_coder(codebook.segments, args.coder[1], args.unit)
    result = coding.agreement(a, b)
    print(
        json.dumps(
            {
                "percent_agreement": result.percent_agreement,
                "kappa": result.kappa,
                "units": result.units,
            }
        )
    )
    return 0


def cmd_coding_saturation(args) -> int:
    codebook = coding.load_codebook(args.codebook)
    curve = coding.saturation_curve(codebook.segments, args.batch)
    print(json.dumps({"batch_size": args.batch, "new_codes_per_batch": curve}))
    return 0


# ---------------------------------------------------------------------------
# viz


def _viz_commands(sub):
    inner = _add(sub, "viz", "deterministic SVG layouts and the report bundle")
    wc = inner.add_parser("wordcloud", help="word cloud of corpus frequencies")
    wc.add_argument("--corpus", required=True)
    wc.add_argument("--max-words", type=int, default=80)
    wc.add_argument("--seed", type=int, default=None)
    wc.add_argument("--canvas", default="800x500")
    wc.add_argument("--out", default="wordcloud.svg")
    wc.set_defaults(func=cmd_viz_wordcloud, command="viz")

    pn = inner.add_parser("phrasenet", help="words linked by a connector word")
    pn.add_argument("--corpus", required=True)
    pn.add_argument("--connector", required=True)
    pn.add_argument("--min-weight", type=int, default=1)
    pn.add_argument("--canvas", default="800x600")
    pn.add_argument("--out", default="phrasenet.svg")
    pn.set_defaults(func=cmd_viz_phrasenet, command="viz")

    tm = inner.add_parser("treemap", help="squarified treemap from clones or a spec file")
    tm.add_argument("--corpus")
    tm.add_argument("--clones")
    tm.add_argument("--specs", help="JSON file with {specs:[{id,size,coverage}]}")
    tm.add_argument("--canvas", default="800x500")
    tm.add_argument("--out", default="treemap.svg")
    tm.set_defaults(func=cmd_viz_treemap, command="viz")

    tf = inner.add_parser("textflow", help="term frequency streams across versions")
    tf.add_argument("--corpus", required=True)
    tf.add_argument("--terms", required=True, help="comma-separated terms")
    tf.add_argument("--canvas", default="800x400")
    tf.add_argument("--out", default="textflow.svg")
    tf.set_defaults(func=cmd_viz_textflow, command="viz")

    rp = inner.add_parser("report", help="assemble a static HTML bundle from SVGs")
    rp.add_argument("--in", dest="in_dir", required=True, help="directory with stage outputs")
    rp.add_argument("--out", required=True)
    rp.set_defaults(func=cmd_viz_report, command="viz")


def _parse_canvas(text) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return (int(w), int(h))
    except ValueError as exc:
        raise ConfigurationError(f"canvas must look like 800x500, got {text!r}") from exc


def _corpus_frequencies(built: corpus_mod.Corpus) -> dict[str, int]:
    freq: dict[str, int] = {}
    for doc_id in built.document_ids():
        for word in built.word_tokens(doc_id):
            freq[word] = freq.get(word, 0) + 1
    return freq


def cmd_viz_wordcloud(args) -> int:
    built = _load_corpus(args.corpus)
    layout = viz_report.word_cloud(
        _corpus_frequencies(built),
        max_words=args.max_words,
        canvas=_parse_canvas(args.canvas),
        seed=_resolve_seed(args.seed),
    )
    Path(args.out).write_text(viz_report.word_cloud_svg(layout), encoding="utf-8")
    log.info("wrote %s (%d words placed)", args.out, len(layout.entries))
    return 0


def cmd_viz_phrasenet(args) -> int:
    built = _load_corpus(args.corpus)
    graph = viz_report.phrase_net(built, args.connector, args.min_weight)
    Path(args.out).write_text(
        viz_report.phrase_net_svg(graph, _parse_canvas(args.canvas)), encoding="utf-8"
    )
    log.info("wrote %s (%d edges)", args.out, len(graph.edges))
    return 0


def cmd_viz_treemap(args) -> int:
    if args.specs:
        raw = json.loads(Path(args.specs).read_text(encoding="utf-8"))
        sizes = {s["id"]: s["size"] for s in raw["specs"]}
        colors = {s["id"]: s["coverage"] for s in raw["specs"]}
    elif args.corpus and args.clones:
        built = _load_corpus(args.corpus)
        groups = clone_detect.load_groups(args.clones)
        stats = clone_detect.clone_stats(built, groups)
        sizes = {r.document_id: max(r.total_lines, 1) for r in stats.per_document}
        colors = {r.document_id: r.clone_coverage for r in stats.per_document}
    else:
        raise ConfigurationError("treemap needs either --specs or both --corpus and --clones")
    layout = viz_report.treemap(sizes, colors, _parse_canvas(args.canvas))
    Path(args.out).write_text(viz_report.treemap_svg(layout), encoding="utf-8")
    log.info("wrote %s (%d rectangles)", args.out, len(layout.rectangles))
    return 0


def cmd_viz_textflow(args) -> int:
    built = _load_corpus(args.corpus)
    terms = [t.strip() for t in args.terms.split(",") if t.strip()]
    layout = viz_report.text_flow(built, terms)
    Path(args.out).write_text(
        viz_report.text_flow_svg(layout, _parse_canvas(args.canvas)), encoding="utf-8"
    )
    log.info("wrote %s", args.out)
    return 0


def cmd_viz_report(args) -> int:
    in_dir = Path(args.in_dir)
    inputs = viz_report.ReportInputs()
    for key in ("wordcloud", "phrasenet", "treemap", "textflow"):
        candidate = in_dir / f"{key}.svg"
        if candidate.exists():
            setattr(inputs, f"{key}_svg", candidate.read_text(encoding="utf-8"))
    for table in sorted(in_dir.glob("*.table.json")):
        inputs.tables[table.name[: -len(".table.json")]] = json.loads(
            table.read_text(encoding="utf-8")
        )
    bundle = viz_report.render_report(inputs, args.out)
    log.info("wrote %s (%d files, missing: %s)", bundle.directory, len(bundle.files),
             ", ".join(bundle.missing) or "none")
    return 0


# ---------------------------------------------------------------------------
# run


def _run_command(sub):
    run = sub.add_parser("run", help="run a configured pipeline end to end")
    run.add_argument("--config", help="pipeline config JSON")
    run.add_argument("--schema", action="store_true", help="print the config schema and exit")
    run.set_defaults(func=cmd_run, command="run")


def cmd_run(args) -> int:
    if args.schema:
        print(json.dumps({"schema": CONFIG_SCHEMA, "example": EXAMPLE_CONFIG}, indent=2, sort_keys=True))
        return 0
    if not args.config:
        raise ConfigurationError("run needs --config (or --schema)")
    try:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
    return run_pipeline(config, Path(args.config).parent)


def validate_config(config: dict) -> None:
    if not isinstance(config, dict):
        raise ConfigurationError("config must be a JSON object")
    unknown = set(config) - set(CONFIG_SCHEMA["properties"])
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    if "output_dir" not in config:
        raise ConfigurationError("config requires output_dir")
    analyses = [k for k in ("clones", "wordcloud", "phrasenet", "textflow", "topics") if k in config]
    if analyses and "corpus" not in config:
        raise ConfigurationError(f"stages {analyses} need a corpus block")
    if "corpus" in config and "root" not in config["corpus"]:
        raise ConfigurationError("corpus block requires root")
    stochastic = [k for k in _STOCHASTIC_STAGES if k in config]
    if stochastic and "seed" not in config and "TEXTPROJ_SEED" not in os.environ:
        raise ConfigurationError(
            f"stages {stochastic} are seeded: set \"seed\" in the config or TEXTPROJ_SEED"
        )
    if "phrasenet" in config and not config["phrasenet"].get("connector"):
        raise ConfigurationError("phrasenet block requires a connector word")
    if "textflow" in config and not config["textflow"].get("terms"):
        raise ConfigurationError("textflow block requires terms")
    if "topics" in config and "k" not in config["topics"]:
        raise ConfigurationError("topics block requires k")


def run_pipeline(config: dict, base_dir: Path = Path(".")) -> int:
    """Run the configured stages in dependency order.

    Stage failures are logged and do not stop later stages; partial outputs
    are retained and the exit status is 1 when anything failed.
    """
    validate_config(config)
    out_dir = Path(config["output_dir"])
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = config.get("seed")
    if seed is None and any(k in config for k in _STOCHASTIC_STAGES):
        seed = _resolve_seed(None)

    failures: list[str] = []
    built = None
    if "corpus" in config:
        spec = config["corpus"]
        root = Path(spec["root"])
        if not root.is_absolute():
            root = base_dir / root
        manifest = spec.get("manifest")
        if manifest and not Path(manifest).is_absolute():
            manifest = base_dir / manifest
        try:
            built = _build_corpus(root, manifest, spec.get("ignore_patterns", ()))
            built.save(out_dir / "corpus.json")
        except TextProjError as exc:
            log.error("corpus stage failed: %s", exc)
            raise ConfigurationError(f"corpus stage failed: {exc}") from exc

    inputs = viz_report.ReportInputs()
    if built is not None and "clones" in config:
        spec = config["clones"]
        min_length = spec.get("min_length", 20)
        max_gap = spec.get("max_gap", 2)
        try:
            groups = clone_detect.detect_gapped_clones(built, min_length, max_gap)
            clone_detect.save_groups(groups, out_dir / "clones.json", min_length, max_gap)
            table = _stats_table(clone_detect.clone_stats(built, groups))
            (out_dir / "clone_stats.table.json").write_text(
                json.dumps(table, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            inputs.tables["clone_stats"] = table
            sizes = {r["document_id"]: max(r["total_lines"], 1) for r in table["per_document"]}
            colors = {r["document_id"]: r["clone_coverage"] for r in table["per_document"]}
            layout = viz_report.treemap(sizes, colors)
            inputs.treemap_svg = viz_report.treemap_svg(layout)
            (out_dir / "treemap.svg").write_text(inputs.treemap_svg, encoding="utf-8")
        except TextProjError as exc:
            failures.append(f"clones: {exc}")
            log.error("clones stage failed: %s", exc)

    if built is not None and "wordcloud" in config:
        spec = config["wordcloud"]
        try:
            layout = viz_report.word_cloud(
                _corpus_frequencies(built),
                max_words=spec.get("max_words", 80),
                canvas=tuple(spec.get("canvas", (800, 500))),
                seed=seed,
            )
            inputs.wordcloud_svg = viz_report.word_cloud_svg(layout)
            (out_dir / "wordcloud.svg").write_text(inputs.wordcloud_svg, encoding="utf-8")
        except TextProjError as exc:
            failures.append(f"wordcloud: {exc}")
            log.error("wordcloud stage failed: %s", exc)

    if built is not None and "phrasenet" in config:
        spec = config["phrasenet"]
        try:
            graph = viz_report.phrase_net(built, spec["connector"], spec.get("min_weight", 1))
            inputs.phrasenet_svg = viz_report.phrase_net_svg(graph)
            (out_dir / "phrasenet.svg").write_text(inputs.phrasenet_svg, encoding="utf-8")
        except TextProjError as exc:
            failures.append(f"phrasenet: {exc}")
            log.error("phrasenet stage failed: %s", exc)

    if built is not None and "textflow" in config:
        spec = config["textflow"]
        try:
            layout = viz_report.text_flow(built, spec["terms"])
            inputs.textflow_svg = viz_report.text_flow_svg(layout)
            (out_dir / "textflow.svg").write_text(inputs.textflow_svg, encoding="utf-8")
        except TextProjError as exc:
            failures.append(f"textflow: {exc}")
            log.error("textflow stage failed: %s", exc)

    if built is not None and "topics" in config:
        spec = config["topics"]
        try:
            model = topics.fit_lda(
                built, spec["k"], alpha=spec.get("alpha"), beta=spec.get("beta", topics.DEFAULT_BETA),
                iterations=spec.get("iterations", topics.DEFAULT_ITERATIONS), seed=seed,
                stopwords=load_stopwords(spec["stopwords"]) if spec.get("stopwords") else None,
            )
            topics.save_model(model, out_dir / "topics.json")
            table = {
                f"topic_{t}": topics.top_words(model, t, 10) for t in range(model.k)
            }
            inputs.tables["topics"] = table
            (out_dir / "topics.table.json").write_text(
                json.dumps(table, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
        except TextProjError as exc:
            failures.append(f"topics: {exc}")
            log.error("topics stage failed: %s", exc)

    bundle = viz_report.render_report(inputs, out_dir / "report")
    log.info("report bundle at %s (missing: %s)", bundle.directory,
             ", ".join(bundle.missing) or "none")
    if failures:
        log.error("%d stage(s) failed", len(failures))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
