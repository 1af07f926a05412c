"""Independent brute-force reference computations used by the tests.

These deliberately avoid the library's own algorithms: repeats are found by
window enumeration, phrase-net weights by direct triple counting.
"""

from __future__ import annotations


def maximal_repeats(
    docs: dict[str, list[str]], min_length: int
) -> set[tuple[int, tuple[tuple[str, int], ...]]]:
    """All maximal repeated windows of length >= min_length.

    A window value is maximal when its occurrences cannot all be extended by
    the same token on the left or on the right (document edges count as
    unique). Returns {(length, sorted (doc, start) positions)}.
    """
    results = set()
    length = min_length
    while True:
        windows: dict[tuple, list[tuple[str, int]]] = {}
        for doc_id in sorted(docs):
            tokens = docs[doc_id]
            for i in range(len(tokens) - length + 1):
                windows.setdefault(tuple(tokens[i : i + length]), []).append((doc_id, i))
        any_repeat = False
        for positions in windows.values():
            if len(positions) < 2:
                continue
            any_repeat = True
            preds, succs = set(), set()
            at_start = at_end = False
            for doc_id, i in positions:
                tokens = docs[doc_id]
                if i == 0:
                    at_start = True
                else:
                    preds.add(tokens[i - 1])
                if i + length == len(tokens):
                    at_end = True
                else:
                    succs.add(tokens[i + length])
            left_maximal = at_start or len(preds) >= 2
            right_maximal = at_end or len(succs) >= 2
            if left_maximal and right_maximal:
                results.add((length, tuple(sorted(positions))))
        if not any_repeat:
            return results
        length += 1


def triple_counts(docs: dict[str, list[str]], connector: str, stopwords) -> dict[tuple[str, str], int]:
    """Directed (w1, w2) counts for consecutive triples (w1, connector, w2)."""
    counts: dict[tuple[str, str], int] = {}
    for tokens in docs.values():
        for i in range(len(tokens) - 2):
            if tokens[i + 1] != connector:
                continue
            w1, w2 = tokens[i], tokens[i + 2]
            if w1 in stopwords or w2 in stopwords:
                continue
            counts[(w1, w2)] = counts.get((w1, w2), 0) + 1
    return counts
