"""Word-level n-gram models and character-level categorization profiles.

The word models give per-token probabilities and cross-entropy ("how
predictable is this text"); the character profiles implement rank-distance
text categorization: the top-K character n-grams of a text, compared with
category profiles by summed rank displacement (out-of-place distance).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, version_sort_key
from .errors import ConfigurationError, TrainingError

UNKNOWN = "<unk>"

PROFILE_SIZE = 300  # ranked grams kept per category profile
MISSING_GRAM_PENALTY = PROFILE_SIZE


@dataclass
class NGramModel:
    n: int
    smoothing: str  # "none" | "add_one"
    counts: dict[tuple[str, ...], dict[str, int]]
    context_totals: dict[tuple[str, ...], int]
    vocabulary: frozenset[str]
    total_tokens: int

    def probability(self, context: Sequence[str], token: str) -> float:
        """P(token | context); unseen tokens are mapped to the unknown marker."""
        context = tuple(t if t in self.vocabulary else UNKNOWN for t in context)
        token = token if token in self.vocabulary else UNKNOWN
        seen = self.counts.get(context, {})
        c = seen.get(token, 0)
        total = self.context_totals.get(context, 0)
        if self.smoothing == "add_one":
            # +1 in the denominator accounts for the unknown marker.
            return (c + 1) / (total + len(self.vocabulary) + 1)
        if total == 0 or c == 0:
            return 0.0
        return c / total


def _as_token_seqs(streams) -> list[list[str]]:
    if isinstance(streams, Corpus):
        return [streams.word_tokens(doc_id) for doc_id in streams.document_ids()]
    seqs = []
    for stream in streams:
        if hasattr(stream, "tokens"):
            seqs.append([t.normalized for t in stream.tokens if t.is_word])
        else:
            seqs.append(list(stream))
    return seqs


def train_word_model(streams, n: int, smoothing: str = "add_one") -> NGramModel:
    """Count n-gram windows over each token sequence separately.

    Windows never cross document boundaries; a document shorter than n
    contributes no windows. Raises :class:`TrainingError` when no window at
    all can be formed.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if smoothing not in ("none", "add_one"):
        raise ConfigurationError(f"unknown smoothing {smoothing!r}")
    seqs = _as_token_seqs(streams)
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    totals: dict[tuple[str, ...], int] = {}
    vocab: set[str] = set()
    total_tokens = 0
    windows = 0
    for seq in seqs:
        vocab.update(seq)
        total_tokens += len(seq)
        for i in range(len(seq) - n + 1):
            context = tuple(seq[i : i + n - 1])
            nxt = seq[i + n - 1]
            bucket = counts.setdefault(context, {})
            bucket[nxt] = bucket.get(nxt, 0) + 1
            totals[context] = totals.get(context, 0) + 1
            windows += 1
    if windows == 0:
        raise TrainingError(f"not enough tokens to train an order-{n} model")
    return NGramModel(n, smoothing, counts, totals, frozenset(vocab), total_tokens)


def window_count(model: NGramModel) -> int:
    return sum(model.context_totals.values())


def cross_entropy(model: NGramModel, tokens) -> float:
    """Average bits per token of the text under the model.

    ``tokens`` is one token sequence or several (evaluated per sequence, so
    the measure is length-normalized across documents). Under an unsmoothed
    model an unseen event makes the entropy infinite, which is returned
    explicitly as ``math.inf``.
    """
    if isinstance(tokens, Corpus) or hasattr(tokens, "tokens"):
        seqs = _as_token_seqs(tokens if isinstance(tokens, Corpus) else [tokens])
    else:
        items = list(tokens)
        if items and isinstance(items[0], str):
            seqs = [items]
        else:
            seqs = _as_token_seqs(items)
    n = model.n
    total_bits = 0.0
    events = 0
    for seq in seqs:
        for i in range(len(seq) - n + 1):
            context = tuple(seq[i : i + n - 1])
            p = model.probability(context, seq[i + n - 1])
            if p == 0.0:
                return math.inf
            total_bits += -math.log2(p)
            events += 1
    if events == 0:
        raise TrainingError(f"evaluation text is shorter than the model order {n}")
    return total_bits / events


# ---------------------------------------------------------------------------
# character profiles


@dataclass(frozen=True)
class CategoryProfile:
    category: str
    grams: tuple[str, ...]  # rank 0 first

    def rank(self, gram: str) -> int | None:
        try:
            return self.grams.index(gram)
        except ValueError:
            return None


@dataclass
class CategorizationResult:
    matches: list[tuple[str, int]]  # (category, distance), ascending distance
    low_confidence: bool


_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


def _char_grams(text: str) -> dict[str, int]:
    """Counts of 1..5-grams over lowercased words padded with spaces."""
    counts: dict[str, int] = {}
    for match in _LETTER_RUN.finditer(text.lower()):
        padded = " " + match.group(0) + " "
        for n in range(1, 6):
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n]
                if gram.strip():
                    counts[gram] = counts.get(gram, 0) + 1
    return counts


def _ranked(counts: Mapping[str, int], k: int) -> tuple[str, ...]:
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return tuple(gram for gram, _ in ordered[:k])


def train_char_profile(text: str, category: str, k: int = PROFILE_SIZE) -> CategoryProfile:
    """Ranked character n-gram profile of a training text (>= 500 chars)."""
    if len(text) < 500:
        raise TrainingError(
            f"category {category!r}: need at least 500 characters, got {len(text)}"
        )
    return CategoryProfile(category, _ranked(_char_grams(text), k))


def categorize(
    profiles: Sequence[CategoryProfile], text: str, k: int = PROFILE_SIZE
) -> CategorizationResult:
    """Rank categories by out-of-place distance to the text's own profile.

    For each gram of the text profile the distance contribution is the rank
    displacement against the category profile, or a fixed penalty when the
    gram is absent. Ties are broken by category name. When every category is
    at the same distance the result carries a low-confidence flag.
    """
    if not profiles:
        raise ConfigurationError("need at least one category profile")
    if len(text) < 50:
        raise ConfigurationError(f"text too short to categorize ({len(text)} chars)")
    text_grams = _ranked(_char_grams(text), k)
    matches = []
    for profile in profiles:
        distance = 0
        for text_rank, gram in enumerate(text_grams):
            profile_rank = profile.rank(gram)
            if profile_rank is None:
                distance += MISSING_GRAM_PENALTY
            else:
                distance += abs(text_rank - profile_rank)
        matches.append((profile.category, distance))
    matches.sort(key=lambda m: (m[1], m[0]))
    low_confidence = len(matches) > 1 and len({d for _, d in matches}) == 1
    return CategorizationResult(matches, low_confidence)


def out_of_place_distance(a: CategoryProfile, b: CategoryProfile) -> int:
    """Distance between two profiles; 0 iff they are rank-identical."""
    distance = 0
    for rank_a, gram in enumerate(a.grams):
        rank_b = b.rank(gram)
        distance += MISSING_GRAM_PENALTY if rank_b is None else abs(rank_a - rank_b)
    distance += MISSING_GRAM_PENALTY * sum(1 for g in b.grams if a.rank(g) is None)
    return distance


def save_profile(profile: CategoryProfile, path: str | Path) -> None:
    payload = {"category": profile.category, "ngrams": list(profile.grams)}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_profile(path: str | Path) -> CategoryProfile:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return CategoryProfile(raw["category"], tuple(raw["ngrams"]))


# ---------------------------------------------------------------------------
# frequency series over versions


def frequency_series(corpus: Corpus, query: Sequence[str] | str) -> list[tuple[str, float]]:
    """Relative frequency of a word n-gram per corpus version.

    The frequency at a version is (occurrences of the query window) divided by
    (total windows of that length) over all documents carrying that version
    label. Documents without a version label make ordering undefined and
    raise a configuration error.
    """
    if isinstance(query, str):
        query_tokens = tuple(query.lower().split())
    else:
        query_tokens = tuple(t.lower() for t in query)
    if not query_tokens:
        raise ConfigurationError("query n-gram is empty")
    n = len(query_tokens)
    labels = corpus.ordered_version_labels()
    by_label: dict[str, list[list[str]]] = {label: [] for label in labels}
    for doc in corpus.documents:
        by_label[doc.version_label].append(corpus.word_tokens(doc.id))
    series = []
    for label in labels:
        occurrences = 0
        windows = 0
        for seq in by_label[label]:
            windows += max(0, len(seq) - n + 1)
            for i in range(len(seq) - n + 1):
                if tuple(seq[i : i + n]) == query_tokens:
                    occurrences += 1
        series.append((label, occurrences / windows if windows else 0.0))
    return series
