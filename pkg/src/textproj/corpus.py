"""Corpus handling: ingestion from the file system, source classification,
inter-document links, tokenization, and ignored regions.

A built :class:`Corpus` is immutable; all analyses read from it concurrently
without coordination. Re-ingesting the same directory yields identical
documents (ids are relative paths, ordering is by path).
"""

from __future__ import annotations

import enum
import fnmatch
import json
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path, PurePosixPath
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, IngestError


class SourceClass(str, enum.Enum):
    """Closed set of process areas a project text can belong to."""

    CONTRACTING = "contracting"
    PLANNING_CONTROL = "planning_control"
    REPORTING = "reporting"
    CONFIG_CHANGE_MGMT = "config_change_mgmt"
    EVALUATION = "evaluation"
    REQUIREMENTS_ANALYSIS = "requirements_analysis"
    SOFTWARE_DESIGN = "software_design"
    SOFTWARE_ELEMENTS = "software_elements"
    LOGISTICS = "logistics"


DEFAULT_SOURCE_CLASS = SourceClass.REQUIREMENTS_ANALYSIS


@dataclass(frozen=True)
class Document:
    """One ingested text with its classification and optional version label."""

    id: str
    path: str
    source_class: SourceClass
    text: str
    version_label: str | None = None
    metadata: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Link:
    """Typed connection between two documents, e.g. commit -> change request."""

    from_id: str
    to_id: str
    kind: str


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    line: int  # 1-based
    start: int  # character offset, inclusive
    end: int  # character offset, exclusive

    @property
    def is_word(self) -> bool:
        """True for word tokens, False for single-character punctuation."""
        first = self.surface[0]
        return first.isalnum() or first == "_"


@dataclass(frozen=True)
class TokenStream:
    document_id: str
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class IgnoredRegion:
    """Character span excluded from all analyses, with the pattern that hit."""

    document_id: str
    start: int
    end: int
    reason: str


@dataclass(frozen=True)
class TokenizerConfig:
    keep_punctuation: bool = True
    lowercase: bool = True


DEFAULT_TOKENIZER = TokenizerConfig()

# Words are maximal runs of letters/digits/underscores, with internal hyphens
# allowed so compounds like "application-level" stay one token. Anything else
# that is not whitespace is a single-character punctuation token.
_TOKEN_RE = re.compile(r"\w(?:[\w-]*\w)?|[^\w\s]", re.UNICODE)


def tokenize(doc: Document, config: TokenizerConfig = DEFAULT_TOKENIZER) -> TokenStream:
    """Split a document into tokens with line numbers and character offsets.

    The substring of the document text at each token's offsets equals its
    surface form; offsets are strictly increasing and non-overlapping.
    """
    line_starts = [0]
    for idx, ch in enumerate(doc.text):
        if ch == "\n":
            line_starts.append(idx + 1)
    tokens: list[Token] = []
    for match in _TOKEN_RE.finditer(doc.text):
        surface = match.group(0)
        if not config.keep_punctuation and not (surface[0].isalnum() or surface[0] == "_"):
            continue
        normalized = surface.lower() if config.lowercase else surface
        line = bisect_right(line_starts, match.start())
        tokens.append(Token(surface, normalized, line, match.start(), match.end()))
    return TokenStream(doc.id, tuple(tokens))


def apply_ignore_patterns(doc: Document, patterns: Sequence[str]) -> tuple[IgnoredRegion, ...]:
    """Match every pattern against the document and merge overlapping hits.

    Returns pairwise-disjoint regions sorted by start offset. An invalid
    pattern raises :class:`ConfigurationError` naming the offending pattern.
    """
    spans: list[tuple[int, int, str]] = []
    for pattern in patterns:
        try:
            compiled = re.compile(pattern)
        except re.error as exc:
            raise ConfigurationError(f"invalid ignore pattern {pattern!r}: {exc}") from exc
        for match in compiled.finditer(doc.text):
            if match.end() > match.start():
                spans.append((match.start(), match.end(), pattern))
    spans.sort()
    merged: list[tuple[int, int, str]] = []
    for start, end, reason in spans:
        if merged and start <= merged[-1][1]:
            prev_start, prev_end, prev_reason = merged[-1]
            merged[-1] = (prev_start, max(prev_end, end), prev_reason)
        else:
            merged.append((start, end, reason))
    return tuple(IgnoredRegion(doc.id, s, e, r) for s, e, r in merged)


@dataclass
class IngestFailure:
    path: str
    reason: str


@dataclass
class IngestReport:
    documents: list[Document]
    failures: list[IngestFailure]


def ingest_path(
    root: str | Path,
    class_map: Mapping[str, SourceClass] | None = None,
    versions: Mapping[str, str] | None = None,
) -> IngestReport:
    """Read every regular file under ``root`` as a UTF-8 document.

    Document ids are relative paths with "/" separators, so re-ingestion is
    deterministic across platforms. ``class_map`` maps glob patterns (tested
    in insertion order against the id) to source classes; unmatched files
    default to requirements_analysis. Files that are empty or not valid UTF-8
    are reported as failures and excluded; the rest are still returned.
    """
    root = Path(root)
    if not root.exists() or not root.is_dir():
        raise IngestError(f"corpus root {root} does not exist or is not a directory")
    documents: list[Document] = []
    failures: list[IngestFailure] = []
    paths = sorted(p for p in root.rglob("*") if p.is_file())
    for path in paths:
        doc_id = str(PurePosixPath(path.relative_to(root)))
        try:
            text = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            failures.append(IngestFailure(str(path), f"not valid UTF-8: {exc}"))
            continue
        if not text:
            failures.append(IngestFailure(str(path), "file is empty"))
            continue
        source_class = DEFAULT_SOURCE_CLASS
        if class_map:
            for pattern, cls in class_map.items():
                if fnmatch.fnmatch(doc_id, pattern):
                    source_class = SourceClass(cls)
                    break
        version = versions.get(doc_id) if versions else None
        documents.append(Document(doc_id, str(path), source_class, text, version))
    return IngestReport(documents, failures)


@dataclass
class Manifest:
    links: list[Link]
    versions: dict[str, str]
    class_map: dict[str, SourceClass]


def load_manifest(path: str | Path) -> Manifest:
    """Parse the optional sidecar manifest (links, version labels, classes)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
    links = [Link(entry["from"], entry["to"], entry.get("kind", "")) for entry in raw.get("links", [])]
    versions = {str(k): str(v) for k, v in raw.get("versions", {}).items()}
    class_map = {}
    for pattern, cls in raw.get("classes", {}).items():
        try:
            class_map[pattern] = SourceClass(cls)
        except ValueError as exc:
            raise ConfigurationError(f"unknown source class {cls!r} in manifest") from exc
    return Manifest(links, versions, class_map)


def version_sort_key(label: str) -> tuple:
    """Order version labels: integers first, then ISO dates, then lexicographic."""
    try:
        return (0, int(label), "")
    except ValueError:
        pass
    try:
        return (1, date.fromisoformat(label).toordinal(), "")
    except ValueError:
        pass
    return (2, 0, label)


class Corpus:
    """Immutable set of documents with token streams and ignored regions.

    Documents are held in id order. Token streams are built once at
    construction; ignore patterns are part of the corpus identity, so a
    different filtering view is a new Corpus (see :meth:`with_ignore_patterns`).
    """

    def __init__(
        self,
        documents: Iterable[Document],
        links: Iterable[Link] = (),
        ignore_patterns: Sequence[str] = (),
        tokenizer_config: TokenizerConfig = DEFAULT_TOKENIZER,
    ):
        docs = sorted(documents, key=lambda d: d.id)
        self._docs: dict[str, Document] = {}
        for doc in docs:
            if doc.id in self._docs:
                raise ConfigurationError(f"duplicate document id {doc.id!r}")
            if not doc.text:
                raise ConfigurationError(f"document {doc.id!r} has empty text")
            self._docs[doc.id] = doc
        self.links: tuple[Link, ...] = tuple(links)
        for link in self.links:
            if link.from_id not in self._docs or link.to_id not in self._docs:
                raise ConfigurationError(
                    f"link {link.from_id!r} -> {link.to_id!r} references unknown documents"
                )
        self.tokenizer_config = tokenizer_config
        self.ignore_patterns: tuple[str, ...] = tuple(ignore_patterns)
        self._streams = {doc.id: tokenize(doc, tokenizer_config) for doc in self.documents}
        self._ignored = {
            doc.id: apply_ignore_patterns(doc, self.ignore_patterns) for doc in self.documents
        }

    @property
    def documents(self) -> tuple[Document, ...]:
        return tuple(self._docs.values())

    def document_ids(self) -> tuple[str, ...]:
        return tuple(self._docs)

    def get(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise KeyError(f"unknown document id {doc_id!r}") from None

    def token_stream(self, doc_id: str) -> TokenStream:
        return self._streams[doc_id]

    def ignored_regions(self, doc_id: str) -> tuple[IgnoredRegion, ...]:
        return self._ignored[doc_id]

    def with_ignore_patterns(self, patterns: Sequence[str]) -> "Corpus":
        return Corpus(self.documents, self.links, patterns, self.tokenizer_config)

    def analyzable_indices(self, doc_id: str) -> tuple[int, ...]:
        """Indices of tokens outside all ignored regions, in stream order."""
        regions = self._ignored[doc_id]
        tokens = self._streams[doc_id].tokens
        if not regions:
            return tuple(range(len(tokens)))
        out = []
        for idx, token in enumerate(tokens):
            inside = any(r.start <= token.start and token.end <= r.end for r in regions)
            if not inside:
                out.append(idx)
        return tuple(out)

    def analyzable_lines(self, doc_id: str) -> tuple[int, ...]:
        """Line numbers carrying at least one non-ignored token."""
        tokens = self._streams[doc_id].tokens
        keep = self.analyzable_indices(doc_id)
        return tuple(sorted({tokens[i].line for i in keep}))

    def word_tokens(self, doc_id: str) -> list[str]:
        """Normalized word tokens (punctuation skipped) outside ignored regions."""
        tokens = self._streams[doc_id].tokens
        return [tokens[i].normalized for i in self.analyzable_indices(doc_id) if tokens[i].is_word]

    def ordered_version_labels(self) -> list[str]:
        """Distinct version labels in version order; raises if any are missing."""
        labels = []
        for doc in self.documents:
            if doc.version_label is None:
                raise ConfigurationError(
                    f"document {doc.id!r} has no version label; version ordering is undefined"
                )
            labels.append(doc.version_label)
        return sorted(set(labels), key=version_sort_key)

    def to_json_dict(self) -> dict:
        return {
            "documents": [
                {
                    "id": d.id,
                    "path": d.path,
                    "source_class": d.source_class.value,
                    "version_label": d.version_label,
                    "text": d.text,
                    "metadata": dict(d.metadata),
                }
                for d in self.documents
            ],
            "links": [{"from": l.from_id, "to": l.to_id, "kind": l.kind} for l in self.links],
            "ignore_patterns": list(self.ignore_patterns),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def from_json_dict(cls, raw: dict) -> "Corpus":
        documents = [
            Document(
                entry["id"],
                entry.get("path", entry["id"]),
                SourceClass(entry.get("source_class", DEFAULT_SOURCE_CLASS.value)),
                entry["text"],
                entry.get("version_label"),
                entry.get("metadata", {}),
            )
            for entry in raw.get("documents", [])
        ]
        links = [Link(e["from"], e["to"], e.get("kind", "")) for e in raw.get("links", [])]
        return cls(documents, links, raw.get("ignore_patterns", ()))

    @classmethod
    def load(cls, path: str | Path) -> "Corpus":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read corpus file {path}: {exc}") from exc
        return cls.from_json_dict(raw)
