"""Latent topic extraction via collapsed Gibbs sampling.

The sampler is deliberately single-threaded and driven by one seeded RNG so
that identical inputs always yield an identical model; the final assignment
state is kept (no burn-in averaging). Topic identity is label-symmetric:
consumers must match topics by content, never by index.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import ConfigurationError, TrainingError
from .stopwords import ENGLISH_STOPWORDS

DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 1000


@dataclass
class TopicModel:
    k: int
    alpha: float
    beta: float
    seed: int
    iterations: int
    vocabulary: tuple[str, ...]
    doc_ids: tuple[str, ...]
    topic_word: list[list[int]]  # K x V counts
    doc_topic: list[list[int]]  # D x K counts
    topic_totals: list[int]  # K
    doc_lengths: list[int]  # D
    assignments: list[list[int]]  # per document, per token position

    def doc_index(self, document_id: str) -> int:
        try:
            return self.doc_ids.index(document_id)
        except ValueError:
            raise KeyError(f"document {document_id!r} was not in the training corpus") from None


def _doc_token_lists(corpus) -> dict[str, list[str]]:
    if isinstance(corpus, Corpus):
        return {doc_id: corpus.word_tokens(doc_id) for doc_id in corpus.document_ids()}
    return {doc_id: list(tokens) for doc_id, tokens in corpus.items()}


def _filter_vocabulary(tokens: Sequence[str], stopwords: frozenset[str]) -> list[str]:
    # Stop words, very short tokens, and pure numbers carry no topical signal.
    return [t for t in tokens if len(t) >= 3 and not t.isdigit() and t not in stopwords]


def fit_lda(
    corpus: Corpus | Mapping[str, Sequence[str]],
    k: int,
    alpha: float | None = None,
    beta: float = DEFAULT_BETA,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    stopwords: frozenset[str] | None = None,
) -> TopicModel:
    """Fit a K-topic model by collapsed Gibbs sampling.

    Each token's topic is resampled every iteration from the conditional
    proportional to (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta), counts
    excluding the token itself. ``alpha`` defaults to 50/K.
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if iterations < 1:
        raise ConfigurationError(f"iterations must be >= 1, got {iterations}")
    if alpha is None:
        alpha = 50.0 / k
    if stopwords is None:
        stopwords = ENGLISH_STOPWORDS

    token_lists = _doc_token_lists(corpus)
    doc_ids = tuple(sorted(token_lists))
    vocab_set: set[str] = set()
    filtered: dict[str, list[str]] = {}
    for doc_id in doc_ids:
        kept = _filter_vocabulary(token_lists[doc_id], stopwords)
        filtered[doc_id] = kept
        vocab_set.update(kept)
    if not vocab_set:
        raise TrainingError("vocabulary is empty after stop-word removal")
    vocabulary = tuple(sorted(vocab_set))
    word_index = {w: i for i, w in enumerate(vocabulary)}
    docs = [[word_index[t] for t in filtered[doc_id]] for doc_id in doc_ids]
    total_tokens = sum(len(d) for d in docs)
    if k > total_tokens:
        raise TrainingError(f"k={k} exceeds the corpus size of {total_tokens} tokens")

    v = len(vocabulary)
    rng = random.Random(seed)
    topic_word = [[0] * v for _ in range(k)]
    doc_topic = [[0] * k for _ in range(len(docs))]
    topic_totals = [0] * k
    assignments = []
    for d, words in enumerate(docs):
        z_doc = []
        for w in words:
            z = rng.randrange(k)
            z_doc.append(z)
            topic_word[z][w] += 1
            doc_topic[d][z] += 1
            topic_totals[z] += 1
        assignments.append(z_doc)

    vbeta = v * beta
    weights = [0.0] * k
    for _ in range(iterations):
        for d, words in enumerate(docs):
            z_doc = assignments[d]
            dt = doc_topic[d]
            for pos, w in enumerate(words):
                old = z_doc[pos]
                topic_word[old][w] -= 1
                dt[old] -= 1
                topic_totals[old] -= 1
                total = 0.0
                for t in range(k):
                    total += (dt[t] + alpha) * (topic_word[t][w] + beta) / (
                        topic_totals[t] + vbeta
                    )
                    weights[t] = total
                r = rng.random() * total
                new = 0
                while weights[new] < r:
                    new += 1
                z_doc[pos] = new
                topic_word[new][w] += 1
                dt[new] += 1
                topic_totals[new] += 1

    return TopicModel(
        k, alpha, beta, seed, iterations, vocabulary, doc_ids,
        topic_word, doc_topic, topic_totals, [len(d) for d in docs], assignments,
    )


def top_words(model: TopicModel, topic: int, k: int) -> list[str]:
    """Words ranked by smoothed topic probability, ties broken alphabetically."""
    if not 0 <= topic < model.k:
        raise ConfigurationError(f"topic {topic} out of range 0..{model.k - 1}")
    counts = model.topic_word[topic]
    ranked = sorted(
        range(len(model.vocabulary)),
        key=lambda w: (-(counts[w] + model.beta), model.vocabulary[w]),
    )
    return [model.vocabulary[w] for w in ranked[:k]]


def doc_topics(model: TopicModel, document_id: str) -> list[float]:
    """Smoothed topic mixture of a training document; sums to 1."""
    d = model.doc_index(document_id)
    length = model.doc_lengths[d]
    denom = length + model.k * model.alpha
    return [(model.doc_topic[d][t] + model.alpha) / denom for t in range(model.k)]


@dataclass(frozen=True)
class TopicEdge:
    document_id: str
    topic: int
    weight: float


@dataclass
class TopicNetwork:
    document_ids: tuple[str, ...]
    topics: tuple[int, ...]
    edges: tuple[TopicEdge, ...]


def topic_network(model: TopicModel, threshold: float) -> TopicNetwork:
    """Bipartite document-topic graph keeping mixtures >= threshold."""
    if not 0.0 <= threshold:
        raise ConfigurationError(f"threshold must be >= 0, got {threshold}")
    edges = []
    for doc_id in model.doc_ids:
        mixture = doc_topics(model, doc_id)
        for topic, weight in enumerate(mixture):
            if weight >= threshold:
                edges.append(TopicEdge(doc_id, topic, weight))
    return TopicNetwork(model.doc_ids, tuple(range(model.k)), tuple(edges))


def check_count_consistency(model: TopicModel) -> None:
    """Raise AssertionError when the sufficient statistics disagree."""
    for d, length in enumerate(model.doc_lengths):
        assert sum(model.doc_topic[d]) == length, f"doc {d} topic counts != length"
    for t in range(model.k):
        assert sum(model.topic_word[t]) == model.topic_totals[t], f"topic {t} inconsistent"
    assert sum(model.topic_totals) == sum(model.doc_lengths)


def save_model(model: TopicModel, path: str | Path) -> None:
    payload = {
        "k": model.k,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "iterations": model.iterations,
        "vocabulary": list(model.vocabulary),
        "doc_ids": list(model.doc_ids),
        "topic_word": model.topic_word,
        "doc_topic": model.doc_topic,
        "topic_totals": model.topic_totals,
        "doc_lengths": model.doc_lengths,
        "assignments": model.assignments,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TopicModel:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return TopicModel(
        raw["k"], raw["alpha"], raw["beta"], raw["seed"], raw["iterations"],
        tuple(raw["vocabulary"]), tuple(raw["doc_ids"]), raw["topic_word"],
        raw["doc_topic"], raw["topic_totals"], raw["doc_lengths"], raw["assignments"],
    )
