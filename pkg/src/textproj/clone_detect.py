"""Token-based clone detection over normalized token streams.

Exact clones are maximal repeats: repeated normalized token sequences that
cannot be extended left or right in all occurrences simultaneously. They are
found with a suffix array plus LCP-interval enumeration over the concatenated
corpus token sequence, using unique sentinels at document boundaries and
ignored-region holes so no clone crosses either.

Gapped clones fuse exact clones across small line-level differences: seed
clones are chained when their combined instances differ by at most ``max_gap``
whole-line edits, and seeds fully absorbed by a chain are suppressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus
from .errors import ConfigurationError, UndefinedCoverageError

# Seeds shorter than this are never chained into gapped clones; tiny repeats
# (articles, punctuation runs) make the pair search quadratic without adding
# plausible clones.
_SEED_MIN_LENGTH = 5
# A chain gap may span at most max_gap + this many lines on either side.
_GAP_LINE_SLACK = 4


@dataclass(frozen=True)
class CloneInstance:
    """One occurrence of a clone. Token and line bounds are inclusive."""

    document_id: str
    start_token: int
    end_token: int
    start_line: int
    end_line: int


@dataclass(frozen=True)
class CloneGroup:
    id: str
    length_tokens: int  # length of the common token skeleton
    gap_edits: int  # 0 for exact clones
    instances: tuple[CloneInstance, ...]


@dataclass(frozen=True)
class DocumentCloneStats:
    document_id: str
    clone_coverage: float
    clone_group_count: int
    clone_instance_count: int
    total_lines: int


@dataclass(frozen=True)
class CloneStats:
    per_document: tuple[DocumentCloneStats, ...]
    corpus_coverage: float
    total_groups: int
    total_instances: int
    total_lines: int


# ---------------------------------------------------------------------------
# suffix array machinery


def _suffix_array(seq: Sequence[int]) -> list[int]:
    """Prefix-doubling suffix array over an integer sequence."""
    n = len(seq)
    if n == 0:
        return []
    order = {v: i for i, v in enumerate(sorted(set(seq)))}
    rank = [order[v] for v in seq]
    sa = list(range(n))
    k = 1
    while True:
        def key(i: int) -> tuple[int, int]:
            second = rank[i + k] if i + k < n else -1
            return (rank[i], second)

        sa.sort(key=key)
        new_rank = [0] * n
        for pos in range(1, n):
            prev, cur = sa[pos - 1], sa[pos]
            new_rank[cur] = new_rank[prev] + (1 if key(cur) != key(prev) else 0)
        rank = new_rank
        if rank[sa[-1]] == n - 1:
            return sa
        k *= 2


def _lcp_array(seq: Sequence[int], sa: Sequence[int]) -> list[int]:
    """Kasai LCP construction; lcp[i] = lcp(sa[i-1], sa[i]), lcp[0] = 0."""
    n = len(seq)
    rank = [0] * n
    for i, s in enumerate(sa):
        rank[s] = i
    lcp = [0] * n
    h = 0
    for i in range(n):
        if rank[i] > 0:
            j = sa[rank[i] - 1]
            while i + h < n and j + h < n and seq[i + h] == seq[j + h]:
                h += 1
            lcp[rank[i]] = h
            if h > 0:
                h -= 1
        else:
            h = 0
    return lcp


def _lcp_intervals(lcp: Sequence[int]) -> Iterable[tuple[int, int, int]]:
    """Yield (depth, lb, rb) for every branching repeat in suffix-array order."""
    n = len(lcp)
    stack: list[tuple[int, int]] = [(0, 0)]
    for i in range(1, n + 1):
        cur = lcp[i] if i < n else 0
        lb = i - 1
        while stack and cur < stack[-1][0]:
            depth, start = stack.pop()
            yield (depth, start, i - 1)
            lb = start
        if not stack or cur > stack[-1][0]:
            stack.append((cur, lb))


# ---------------------------------------------------------------------------
# exact detection


def _corpus_sequence(corpus: Corpus) -> tuple[list[int], list[tuple[str, int] | None]]:
    """Concatenated normalized token ids with unique sentinels at document
    boundaries and ignored-region holes; also the position -> token map."""
    token_ids: dict[str, int] = {}
    seq: list[int] = []
    pos_map: list[tuple[str, int] | None] = []
    sentinel = -1
    for doc_id in corpus.document_ids():
        tokens = corpus.token_stream(doc_id).tokens
        prev_index = None
        for idx in corpus.analyzable_indices(doc_id):
            if prev_index is not None and idx != prev_index + 1:
                seq.append(sentinel)
                pos_map.append(None)
                sentinel -= 1
            norm = tokens[idx].normalized
            token_id = token_ids.setdefault(norm, len(token_ids))
            seq.append(token_id)
            pos_map.append((doc_id, idx))
            prev_index = idx
        seq.append(sentinel)
        pos_map.append(None)
        sentinel -= 1
    return seq, pos_map


def detect_exact_clones(corpus: Corpus, min_length: int = 20) -> list[CloneGroup]:
    """All maximal repeated token sequences of at least ``min_length`` tokens.

    Groups are sorted by skeleton length (descending), then by the first
    instance's (document id, start token); instances within a group are in
    (document id, start token) order. Identical inputs produce identical
    output, including group ids.
    """
    if min_length < 2:
        raise ConfigurationError(f"min_length must be >= 2, got {min_length}")
    seq, pos_map = _corpus_sequence(corpus)
    if not seq:
        return []
    sa = _suffix_array(seq)
    lcp = _lcp_array(seq, sa)
    raw_groups: list[tuple[int, tuple[tuple[str, int], ...]]] = []
    for depth, lb, rb in _lcp_intervals(lcp):
        if depth < min_length:
            continue
        positions = sa[lb : rb + 1]
        # Left-maximality: at least two distinct preceding tokens. A document
        # start or sentinel counts as distinct because sentinels are unique.
        boundary = False
        preds = set()
        for p in positions:
            if p == 0 or seq[p - 1] < 0:
                boundary = True
            else:
                preds.add(seq[p - 1])
        if not boundary and len(preds) < 2:
            continue
        starts = sorted(pos_map[p] for p in positions)
        raw_groups.append((depth, tuple(starts)))
    return _build_groups(corpus, raw_groups)


def _build_groups(
    corpus: Corpus,
    raw_groups: list[tuple[int, tuple[tuple[str, int], ...]]],
) -> list[CloneGroup]:
    groups = []
    for length, starts in raw_groups:
        instances = []
        for doc_id, start in starts:
            tokens = corpus.token_stream(doc_id).tokens
            end = _advance(corpus, doc_id, start, length)
            instances.append(
                CloneInstance(doc_id, start, end, tokens[start].line, tokens[end].line)
            )
        instances.sort(key=lambda i: (i.document_id, i.start_token))
        groups.append((length, tuple(instances)))
    groups.sort(key=lambda g: (-g[0], g[1][0].document_id, g[1][0].start_token))
    return [
        CloneGroup(f"g{i:04d}", length, 0, instances)
        for i, (length, instances) in enumerate(groups)
    ]


def _advance(corpus: Corpus, doc_id: str, start: int, length: int) -> int:
    """Token index of the (length-1)-th analyzable token at or after start."""
    keep = corpus.analyzable_indices(doc_id)
    # start is itself analyzable; find its position within keep by bisection.
    lo, hi = 0, len(keep)
    while lo < hi:
        mid = (lo + hi) // 2
        if keep[mid] < start:
            lo = mid + 1
        else:
            hi = mid
    return keep[lo + length - 1]


# ---------------------------------------------------------------------------
# gapped detection


def _line_edit_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Levenshtein distance over whole lines."""
    # Trim the common prefix/suffix first; gaps are local.
    lo = 0
    while lo < len(a) and lo < len(b) and a[lo] == b[lo]:
        lo += 1
    ahi, bhi = len(a), len(b)
    while ahi > lo and bhi > lo and a[ahi - 1] == b[bhi - 1]:
        ahi -= 1
        bhi -= 1
    a, b = a[lo:ahi], b[lo:bhi]
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, line_a in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, line_b in enumerate(b, start=1):
            cost = 0 if line_a == line_b else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[-1]


def _span_lines(corpus: Corpus, doc_id: str, start_token: int, end_token: int) -> list[str]:
    """Normalized rendering of a token span, one string per text line."""
    tokens = corpus.token_stream(doc_id).tokens
    keep = set(corpus.analyzable_indices(doc_id))
    by_line: dict[int, list[str]] = {}
    for idx in range(start_token, end_token + 1):
        if idx in keep:
            by_line.setdefault(tokens[idx].line, []).append(tokens[idx].normalized)
    return [" ".join(by_line[line]) for line in sorted(by_line)]


@dataclass
class _Match:
    """A pair of same-skeleton spans, possibly extended across gaps."""

    doc_a: str
    a_start: int
    a_end: int
    doc_b: str
    b_start: int
    b_end: int
    skeleton: int
    seed_ids: tuple[int, ...]


def detect_gapped_clones(
    corpus: Corpus, min_length: int = 20, max_gap: int = 2
) -> list[CloneGroup]:
    """Exact clones plus groups fused across up to ``max_gap`` line edits.

    ``min_length`` constrains the common skeleton (gap lines excluded).
    With ``max_gap=0`` the result equals :func:`detect_exact_clones`.
    """
    if min_length < 2:
        raise ConfigurationError(f"min_length must be >= 2, got {min_length}")
    if max_gap < 0:
        raise ConfigurationError(f"max_gap must be >= 0, got {max_gap}")
    exact = detect_exact_clones(corpus, min_length)
    if max_gap == 0:
        return exact

    seed_min = min(min_length, _SEED_MIN_LENGTH)
    seeds = detect_exact_clones(corpus, seed_min)
    tokens_of = {d: corpus.token_stream(d).tokens for d in corpus.document_ids()}

    buckets: dict[tuple[str, str], list[_Match]] = {}
    for seed_idx, group in enumerate(seeds):
        insts = group.instances
        for i in range(len(insts)):
            for j in range(i + 1, len(insts)):
                a, b = insts[i], insts[j]
                m = _Match(
                    a.document_id, a.start_token, a.end_token,
                    b.document_id, b.start_token, b.end_token,
                    group.length_tokens, (seed_idx,),
                )
                buckets.setdefault((a.document_id, b.document_id), []).append(m)

    chains: list[_Match] = []
    for key in sorted(buckets):
        matches = sorted(buckets[key], key=lambda m: (m.a_start, m.b_start, -m.skeleton))
        for start in matches:
            chain = start
            extended = False
            while True:
                nxt_idx = _next_link(corpus, tokens_of, matches, chain, max_gap)
                if nxt_idx is None:
                    break
                nxt = matches[nxt_idx]
                chain = _Match(
                    chain.doc_a, chain.a_start, nxt.a_end,
                    chain.doc_b, chain.b_start, nxt.b_end,
                    chain.skeleton + nxt.skeleton,
                    chain.seed_ids + nxt.seed_ids,
                )
                extended = True
            # Subchains of a longer chain are removed later by containment.
            if extended:
                chains.append(chain)

    gapped = _chains_to_groups(corpus, chains, min_length, max_gap)
    kept_exact = [g for g in exact if not _absorbed(g, gapped)]
    combined = [(g.length_tokens, g.gap_edits, g.instances) for g in gapped + kept_exact]
    combined.sort(key=lambda g: (-g[0], g[2][0].document_id, g[2][0].start_token))
    return [
        CloneGroup(f"g{i:04d}", length, edits, instances)
        for i, (length, edits, instances) in enumerate(combined)
    ]


def _next_link(corpus, tokens_of, matches, chain: _Match, max_gap: int):
    """First match extending the chain within the line-edit budget."""
    a_end_line = tokens_of[chain.doc_a][chain.a_end].line
    b_end_line = tokens_of[chain.doc_b][chain.b_end].line
    line_bound = max_gap + _GAP_LINE_SLACK
    for idx, cand in enumerate(matches):
        if cand.a_start <= chain.a_end or cand.b_start <= chain.b_end:
            continue
        cand_a_line = tokens_of[cand.doc_a][cand.a_start].line
        cand_b_line = tokens_of[cand.doc_b][cand.b_start].line
        if cand_a_line - a_end_line > line_bound or cand_b_line - b_end_line > line_bound:
            if cand_a_line - a_end_line > line_bound and cand.a_start > chain.a_end:
                # matches are sorted by a_start; nothing closer remains
                break
            continue
        # Self-pairs inside one document must not overlap after extension.
        if cand.doc_a == cand.doc_b and cand.b_start <= chain.a_end:
            continue
        lines_a = _span_lines(corpus, chain.doc_a, chain.a_start, cand.a_end)
        lines_b = _span_lines(corpus, chain.doc_b, chain.b_start, cand.b_end)
        d = _line_edit_distance(lines_a, lines_b)
        # d == 0 means the gap text is identical, which a longer exact seed
        # already covers; skip to avoid duplicate groups.
        if 1 <= d <= max_gap:
            return idx
    return None


def _chains_to_groups(
    corpus: Corpus, chains: list[_Match], min_length: int, max_gap: int
) -> list[CloneGroup]:
    spans_by_sig: dict[tuple[int, ...], tuple[int, list[tuple[tuple, tuple]]]] = {}
    for chain in chains:
        if chain.skeleton < min_length:
            continue
        if chain.doc_a == chain.doc_b and chain.b_start <= chain.a_end:
            continue
        span_a = (chain.doc_a, chain.a_start, chain.a_end)
        span_b = (chain.doc_b, chain.b_start, chain.b_end)
        spans_by_sig.setdefault(chain.seed_ids, (chain.skeleton, []))[1].append(
            (span_a, span_b)
        )

    groups: list[tuple[int, int, tuple[CloneInstance, ...]]] = []
    seen_instance_sets: set[tuple] = set()
    for sig in sorted(spans_by_sig):
        skeleton, span_pairs = spans_by_sig[sig]
        # Union-find over spans: pairs sharing a span are one clone group.
        parent: dict[tuple, tuple] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for span_a, span_b in span_pairs:
            parent.setdefault(span_a, span_a)
            parent.setdefault(span_b, span_b)
            ra, rb = find(span_a), find(span_b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        clusters: dict[tuple, list[tuple]] = {}
        for span in parent:
            clusters.setdefault(find(span), []).append(span)
        for root in sorted(clusters):
            spans = sorted(set(clusters[root]))
            if len(spans) < 2:
                continue
            instances = tuple(
                _instance_from_span(corpus, doc, start, end) for doc, start, end in spans
            )
            key = tuple((i.document_id, i.start_token, i.end_token) for i in instances)
            if key in seen_instance_sets:
                continue
            seen_instance_sets.add(key)
            first_lines = _span_lines(corpus, spans[0][0], spans[0][1], spans[0][2])
            edits = max(
                _line_edit_distance(first_lines, _span_lines(corpus, d, s, e))
                for d, s, e in spans[1:]
            )
            if edits > max_gap:
                continue
            groups.append((skeleton, edits, instances))

    # Drop chains fully contained in a larger reported chain.
    groups.sort(key=lambda g: (-g[0], g[2][0].document_id, g[2][0].start_token))
    result: list[tuple[int, int, tuple[CloneInstance, ...]]] = []
    for cand in groups:
        contained = any(
            other is not cand and _all_contained(cand[2], other[2]) for other in groups
        )
        if not contained:
            result.append(cand)
    return [CloneGroup("", length, edits, inst) for length, edits, inst in result]


def _instance_from_span(corpus: Corpus, doc_id: str, start: int, end: int) -> CloneInstance:
    tokens = corpus.token_stream(doc_id).tokens
    return CloneInstance(doc_id, start, end, tokens[start].line, tokens[end].line)


def _all_contained(
    inner: Sequence[CloneInstance], outer: Sequence[CloneInstance]
) -> bool:
    for inst in inner:
        if not any(
            o.document_id == inst.document_id
            and o.start_token <= inst.start_token
            and inst.end_token <= o.end_token
            for o in outer
        ):
            return False
    return True


def _absorbed(exact_group: CloneGroup, gapped: Sequence[CloneGroup]) -> bool:
    return any(_all_contained(exact_group.instances, g.instances) for g in gapped)


# ---------------------------------------------------------------------------
# coverage and stats


def clone_coverage(
    corpus: Corpus, groups: Sequence[CloneGroup], document_id: str | None = None
) -> float:
    """Fraction of analyzable lines touched by at least one clone instance.

    Analyzable lines are those carrying at least one non-ignored token; blank
    and fully ignored lines do not count. With ``document_id`` the fraction is
    per document, otherwise numerators and denominators are summed corpus-wide.
    """
    doc_ids = [document_id] if document_id is not None else list(corpus.document_ids())
    covered_total = 0
    lines_total = 0
    covered_by_doc = _covered_lines(corpus, groups)
    for doc_id in doc_ids:
        lines = set(corpus.analyzable_lines(doc_id))
        covered = covered_by_doc.get(doc_id, set()) & lines
        covered_total += len(covered)
        lines_total += len(lines)
    if lines_total == 0:
        raise UndefinedCoverageError("no analyzable lines; coverage is undefined")
    return covered_total / lines_total


def _covered_lines(corpus: Corpus, groups: Sequence[CloneGroup]) -> dict[str, set[int]]:
    covered: dict[str, set[int]] = {}
    for group in groups:
        for inst in group.instances:
            covered.setdefault(inst.document_id, set()).update(
                range(inst.start_line, inst.end_line + 1)
            )
    return covered


def clone_stats(corpus: Corpus, groups: Sequence[CloneGroup]) -> CloneStats:
    """Per-document and corpus-level clone counts and coverage.

    A group counts for a document when any of its instances lies there;
    instances are counted per document. Documents without analyzable lines
    report coverage 0.0.
    """
    covered_by_doc = _covered_lines(corpus, groups)
    rows = []
    covered_sum = 0
    lines_sum = 0
    instance_sum = 0
    for doc_id in corpus.document_ids():
        lines = set(corpus.analyzable_lines(doc_id))
        covered = covered_by_doc.get(doc_id, set()) & lines
        doc_groups = sum(
            1 for g in groups if any(i.document_id == doc_id for i in g.instances)
        )
        doc_instances = sum(
            1 for g in groups for i in g.instances if i.document_id == doc_id
        )
        coverage = len(covered) / len(lines) if lines else 0.0
        rows.append(
            DocumentCloneStats(doc_id, coverage, doc_groups, doc_instances, len(lines))
        )
        covered_sum += len(covered)
        lines_sum += len(lines)
        instance_sum += doc_instances
    corpus_coverage = covered_sum / lines_sum if lines_sum else 0.0
    return CloneStats(tuple(rows), corpus_coverage, len(groups), instance_sum, lines_sum)


# ---------------------------------------------------------------------------
# instance diffs


@dataclass(frozen=True)
class LineEdit:
    op: str  # "replace" | "insert" | "delete"
    reference_lines: tuple[str, ...]
    instance_lines: tuple[str, ...]


@dataclass(frozen=True)
class InstanceDiff:
    document_id: str
    start_line: int
    end_line: int
    edits: tuple[LineEdit, ...]


def diff_instances(corpus: Corpus, group: CloneGroup) -> list[InstanceDiff]:
    """Line-level differences of each instance against the first instance.

    Exact groups (gap_edits == 0) report no edits by definition; gapped groups
    report the replaced, inserted, and deleted lines of each later instance
    relative to the first, on the normalized token rendering.
    """
    import difflib

    first = group.instances[0]
    diffs = [InstanceDiff(first.document_id, first.start_line, first.end_line, ())]
    if group.gap_edits == 0:
        for inst in group.instances[1:]:
            diffs.append(InstanceDiff(inst.document_id, inst.start_line, inst.end_line, ()))
        return diffs
    ref_lines = _span_lines(corpus, first.document_id, first.start_token, first.end_token)
    for inst in group.instances[1:]:
        inst_lines = _span_lines(corpus, inst.document_id, inst.start_token, inst.end_token)
        matcher = difflib.SequenceMatcher(a=ref_lines, b=inst_lines, autojunk=False)
        edits = []
        for op, i1, i2, j1, j2 in matcher.get_opcodes():
            if op == "equal":
                continue
            edits.append(LineEdit(op, tuple(ref_lines[i1:i2]), tuple(inst_lines[j1:j2])))
        diffs.append(InstanceDiff(inst.document_id, inst.start_line, inst.end_line, tuple(edits)))
    return diffs


# ---------------------------------------------------------------------------
# serialization


def groups_to_json_dict(groups: Sequence[CloneGroup], min_length: int, max_gap: int) -> dict:
    return {
        "min_length": min_length,
        "max_gap": max_gap,
        "groups": [
            {
                "id": g.id,
                "length_tokens": g.length_tokens,
                "gap_edits": g.gap_edits,
                "instances": [
                    {
                        "document_id": i.document_id,
                        "start_token": i.start_token,
                        "end_token": i.end_token,
                        "start_line": i.start_line,
                        "end_line": i.end_line,
                    }
                    for i in g.instances
                ],
            }
            for g in groups
        ],
    }


def save_groups(groups: Sequence[CloneGroup], path: str | Path, min_length: int, max_gap: int) -> None:
    Path(path).write_text(
        json.dumps(groups_to_json_dict(groups, min_length, max_gap), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )


def load_groups(path: str | Path) -> list[CloneGroup]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    groups = []
    for g in raw.get("groups", []):
        instances = tuple(
            CloneInstance(
                i["document_id"], i["start_token"], i["end_token"], i["start_line"], i["end_line"]
            )
            for i in g["instances"]
        )
        groups.append(CloneGroup(g["id"], g["length_tokens"], g["gap_edits"], instances))
    return groups
