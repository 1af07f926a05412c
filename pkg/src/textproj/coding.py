"""Data model and batch analytics for manual qualitative coding.

The interactive act of coding happens elsewhere; this module loads a codebook
snapshot (one diff-friendly JSON document holding codes, the category tree,
coded segments, axial edges, and the core category) and answers questions
about it: validity, occurrence counts, graph condensation, inter-coder
agreement, and saturation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import AgreementError, ConfigurationError


@dataclass(frozen=True)
class Code:
    id: str
    name: str
    rationale: str  # why this code exists; must not be empty
    category_path: tuple[str, ...] = ()


@dataclass(frozen=True)
class CodedSegment:
    document_id: str
    start: int
    end: int
    code_id: str
    coder_id: str = ""


@dataclass(frozen=True)
class AxialEdge:
    from_code: str
    to_code: str
    kind: str
    weight: int = 1


@dataclass
class AxialGraph:
    nodes: dict[str, int]  # code id -> occurrence count
    edges: list[AxialEdge]
    core_category: str | None = None


@dataclass
class Codebook:
    codes: list[Code]
    segments: list[CodedSegment]
    axial_edges: list[AxialEdge] = field(default_factory=list)
    core_category: str | None = None

    def code_ids(self) -> set[str]:
        return {c.id for c in self.codes}


def load_codebook(path: str | Path) -> Codebook:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read codebook {path}: {exc}") from exc
    return codebook_from_dict(raw)


def codebook_from_dict(raw: Mapping) -> Codebook:
    codes = [
        Code(c["id"], c.get("name", c["id"]), c.get("rationale", ""), tuple(c.get("category_path", ())))
        for c in raw.get("codes", [])
    ]
    segments = [
        CodedSegment(s["document_id"], s["start"], s["end"], s["code_id"], s.get("coder_id", ""))
        for s in raw.get("segments", [])
    ]
    edges = [
        AxialEdge(e["from"], e["to"], e.get("kind", ""), e.get("weight", 1))
        for e in raw.get("axial_edges", [])
    ]
    return Codebook(codes, segments, edges, raw.get("core_category"))


def save_codebook(codebook: Codebook, path: str | Path) -> None:
    payload = {
        "codes": [
            {
                "id": c.id,
                "name": c.name,
                "rationale": c.rationale,
                "category_path": list(c.category_path),
            }
            for c in codebook.codes
        ],
        "segments": [
            {
                "document_id": s.document_id,
                "start": s.start,
                "end": s.end,
                "code_id": s.code_id,
                "coder_id": s.coder_id,
            }
            for s in codebook.segments
        ],
        "axial_edges": [
            {"from": e.from_code, "to": e.to_code, "kind": e.kind, "weight": e.weight}
            for e in codebook.axial_edges
        ],
        "core_category": codebook.core_category,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str  # duplicate_id | empty_rationale | dangling_code | span_out_of_bounds
    subject: str
    detail: str


def validate_codebook(codebook: Codebook, corpus: Corpus | None = None) -> list[Violation]:
    """All structural defects of the codebook; an empty list means valid.

    Span bounds are only checked when a corpus is supplied.
    """
    violations = []
    seen_ids = set()
    for code in codebook.codes:
        if code.id in seen_ids:
            violations.append(Violation("duplicate_id", code.id, "code id appears twice"))
        seen_ids.add(code.id)
        if not code.rationale.strip():
            violations.append(Violation("empty_rationale", code.id, "code has no rationale"))
    for idx, segment in enumerate(codebook.segments):
        subject = f"segment[{idx}]"
        if segment.code_id not in seen_ids:
            violations.append(
                Violation("dangling_code", subject, f"references unknown code {segment.code_id!r}")
            )
        if segment.end <= segment.start:
            violations.append(
                Violation("span_out_of_bounds", subject, "span end must exceed start")
            )
        elif corpus is not None:
            try:
                doc = corpus.get(segment.document_id)
            except KeyError:
                violations.append(
                    Violation(
                        "dangling_document", subject,
                        f"references unknown document {segment.document_id!r}",
                    )
                )
                continue
            if segment.start < 0 or segment.end > len(doc.text):
                violations.append(
                    Violation(
                        "span_out_of_bounds", subject,
                        f"span {segment.start}..{segment.end} exceeds document length {len(doc.text)}",
                    )
                )
    for edge in codebook.axial_edges:
        for endpoint in (edge.from_code, edge.to_code):
            if endpoint not in seen_ids:
                violations.append(
                    Violation("dangling_code", f"edge {edge.from_code}->{edge.to_code}",
                              f"references unknown code {endpoint!r}")
                )
    return violations


# ---------------------------------------------------------------------------
# analytics


def occurrence_counts(
    segments: Sequence[CodedSegment], codebook: Codebook
) -> dict[str, int]:
    """Segments per code; codes without segments count zero."""
    counts = {code.id: 0 for code in codebook.codes}
    for segment in segments:
        if segment.code_id in counts:
            counts[segment.code_id] += 1
        else:
            raise ConfigurationError(f"segment references unknown code {segment.code_id!r}")
    return counts


def build_axial_graph(codebook: Codebook) -> AxialGraph:
    counts = occurrence_counts(codebook.segments, codebook)
    return AxialGraph(counts, list(codebook.axial_edges), codebook.core_category)


def condense_graph(graph: AxialGraph, min_occurrence: int) -> AxialGraph:
    """Keep nodes at or above the occurrence threshold and edges whose both
    endpoints survive; counts and weights are unchanged. Idempotent at a fixed
    threshold, monotone in the threshold."""
    if min_occurrence < 0:
        raise ConfigurationError(f"min_occurrence must be >= 0, got {min_occurrence}")
    nodes = {code: count for code, count in graph.nodes.items() if count >= min_occurrence}
    edges = [e for e in graph.edges if e.from_code in nodes and e.to_code in nodes]
    core = graph.core_category if graph.core_category in nodes else None
    return AxialGraph(nodes, edges, core)


@dataclass(frozen=True)
class AgreementResult:
    percent_agreement: float
    kappa: float
    units: int


def agreement(
    coder_a: Mapping[str, str], coder_b: Mapping[str, str]
) -> AgreementResult:
    """Percent agreement and Cohen's kappa over units coded by both coders.

    Each mapping assigns exactly one code per unit. Chance agreement uses the
    two coders' marginal code frequencies. When both coders used a single
    identical code everywhere, chance agreement is 1 and kappa is undefined;
    that degenerate case is reported as perfect agreement (kappa = 1).
    """
    shared = sorted(set(coder_a) & set(coder_b))
    if not shared:
        raise AgreementError("coders have no units in common")
    n = len(shared)
    observed = sum(1 for unit in shared if coder_a[unit] == coder_b[unit]) / n
    codes = sorted({coder_a[u] for u in shared} | {coder_b[u] for u in shared})
    expected = 0.0
    for code in codes:
        pa = sum(1 for u in shared if coder_a[u] == code) / n
        pb = sum(1 for u in shared if coder_b[u] == code) / n
        expected += pa * pb
    if expected >= 1.0:
        return AgreementResult(observed, 1.0, n)
    kappa = (observed - expected) / (1.0 - expected)
    return AgreementResult(observed, kappa, n)


def units_by_coder(
    segments: Sequence[CodedSegment], coder_id: str, unit: str = "document"
) -> dict[str, str]:
    """Unit -> code mapping for one coder. Units are documents or exact spans.

    Raises :class:`AgreementError` when the coder put more than one distinct
    code on a unit, since the agreement statistic assumes one code per unit.
    """
    mapping: dict[str, str] = {}
    for segment in segments:
        if segment.coder_id != coder_id:
            continue
        if unit == "document":
            key = segment.document_id
        elif unit == "segment":
            key = f"{segment.document_id}:{segment.start}-{segment.end}"
        else:
            raise ConfigurationError(f"unknown agreement unit {unit!r}")
        if key in mapping and mapping[key] != segment.code_id:
            raise AgreementError(
                f"coder {coder_id!r} assigned multiple codes to unit {key!r}"
            )
        mapping[key] = segment.code_id
    return mapping


def saturation_curve(segments: Sequence[CodedSegment], batch_size: int) -> list[int]:
    """Per batch of segments (in coding order), how many codes appear for the
    first time. Saturation is reached when trailing entries are zero."""
    if batch_size < 1:
        raise ConfigurationError(f"batch_size must be >= 1, got {batch_size}")
    seen: set[str] = set()
    curve = []
    for i in range(0, len(segments), batch_size):
        batch = segments[i : i + batch_size]
        new_codes = 0
        for segment in batch:
            if segment.code_id not in seen:
                seen.add(segment.code_id)
                new_codes += 1
        curve.append(new_codes)
    return curve
