"""Part-of-speech tagging with a deterministic rule baseline, plus the
analyses built on top of it: multiword term extraction, entity/relationship
graphs, and passive-voice findings.

The tagger interface is pluggable; the built-in baseline combines a
closed-class lexicon, a small open-class verb lexicon with inflection
handling, suffix rules, and a mid-sentence capitalization heuristic. It is
documented, deterministic, and good enough for requirements-style prose; a
statistical tagger can be swapped in behind the same interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .corpus import Token, TokenStream


@dataclass(frozen=True)
class TaggedToken:
    token: Token
    tag: str


class Tagger(Protocol):
    def tag_sentence(self, tokens: Sequence[Token]) -> list[str]:
        """One Penn Treebank tag per token."""


_PUNCT_TAGS = {
    "(": "-LRB-",
    ")": "-RRB-",
    ",": ",",
    ".": ".",
    ":": ":",
    ";": ":",
    "?": ".",
    "!": ".",
    '"': "''",
    "'": "''",
}

_CLOSED_CLASS = {
    "the": "DT", "a": "DT", "an": "DT", "this": "DT", "that": "DT",
    "these": "DT", "those": "DT", "some": "DT", "each": "DT", "every": "DT",
    "any": "DT", "no": "DT", "all": "DT", "both": "DT", "another": "DT",
    "most": "JJS", "more": "JJR",
    "and": "CC", "or": "CC", "but": "CC", "nor": "CC",
    "of": "IN", "in": "IN", "on": "IN", "at": "IN", "by": "IN", "for": "IN",
    "with": "IN", "from": "IN", "as": "IN", "into": "IN", "over": "IN",
    "under": "IN", "between": "IN", "within": "IN", "without": "IN",
    "during": "IN", "before": "IN", "after": "IN", "if": "IN", "because": "IN",
    "while": "IN", "than": "IN", "via": "IN", "per": "IN", "about": "IN",
    "to": "TO",
    "can": "MD", "could": "MD", "may": "MD", "might": "MD", "must": "MD",
    "shall": "MD", "should": "MD", "will": "MD", "would": "MD",
    "is": "VBZ", "are": "VBP", "was": "VBD", "were": "VBD",
    "be": "VB", "been": "VBN", "being": "VBG", "am": "VBP",
    "has": "VBZ", "have": "VBP", "had": "VBD",
    "does": "VBZ", "do": "VBP", "did": "VBD",
    "not": "RB", "n't": "RB", "also": "RB", "only": "RB", "very": "RB",
    "then": "RB", "always": "RB", "never": "RB", "often": "RB",
    "usually": "RB", "sometimes": "RB", "there": "EX", "here": "RB",
    "when": "WRB", "where": "WRB",
    "how": "WRB", "why": "WRB", "which": "WDT", "who": "WP", "what": "WP",
    "it": "PRP", "he": "PRP", "she": "PRP", "they": "PRP", "we": "PRP",
    "i": "PRP", "you": "PRP", "them": "PRP", "him": "PRP", "her": "PRP$",
    "its": "PRP$", "their": "PRP$", "his": "PRP$", "our": "PRP$",
    "such": "JJ", "other": "JJ", "same": "JJ", "necessary": "JJ",
    "first": "JJ", "last": "JJ", "new": "JJ", "own": "JJ",
}

# Verb lemmas that requirements prose uses as verbs far more often than as
# nouns. Noun-primary words (request, response, message, comment, ...) are
# deliberately absent so they keep their noun reading.
_VERB_LEMMAS = frozenset(
    """
    accept allow appear apply assign assume attach avoid become begin belong
    cache close combine communicate compare complete conform connect consist
    constrain construct contain continue convert correspond create decide
    define deliver depend describe detect determine develop differ disconnect
    discard distribute enclose encode ensure establish examine exceed exclude
    execute exist expect expire fail follow forward generate happen identify
    ignore imply include indicate initiate insert intend interpret introduce
    invoke involve know lead maintain make mean modify notify obtain occur
    omit open parse perform permit precede prepare present preserve prevent
    proceed provide publish read receive recognize refer reflect register
    reject relate remain remove replace represent require resolve respond
    retain retrieve retry return rewrite satisfy select send separate serve
    specify store succeed supply surround terminate transmit treat understand
    update validate verify violate wait write
    """.split()
)

_NOUN_SUFFIXES = ("tion", "sion", "ness", "ment", "ance", "ence", "ity")
_ADJ_SUFFIXES = ("ive", "al", "able", "ible", "ous", "ical", "less", "ful")


def _verb_lemma_candidates(word: str) -> list[str]:
    if word.endswith("ies") and len(word) > 4:
        return [word[:-3] + "y"]
    if word.endswith("ied") and len(word) > 4:
        return [word[:-3] + "y"]
    if word.endswith("ing") and len(word) > 4:
        return [word[:-3], word[:-3] + "e"]
    if word.endswith("ed") and len(word) > 3:
        return [word[:-2], word[:-1]]
    if word.endswith("es") and len(word) > 3:
        return [word[:-2], word[:-1]]
    if word.endswith("s") and len(word) > 2:
        return [word[:-1]]
    return [word]


def _verb_tag(word: str) -> str | None:
    for lemma in _verb_lemma_candidates(word):
        if lemma in _VERB_LEMMAS:
            if word == lemma:
                return "VB"
            if word.endswith("ing"):
                return "VBG"
            if word.endswith("ed") or word.endswith("ied"):
                return "VBN"
            return "VBZ"
    return None


class BaselineTagger:
    """Rule and lexicon based tagger; same sentence always yields same tags."""

    def tag_sentence(self, tokens: Sequence[Token]) -> list[str]:
        tags = []
        for idx, token in enumerate(tokens):
            tags.append(self._tag_one(token, idx))
        return tags

    def _tag_one(self, token: Token, index: int) -> str:
        surface = token.surface
        if not surface[0].isalnum() and surface[0] != "_":
            return _PUNCT_TAGS.get(surface, "SYM")
        if surface.replace(".", "").replace("-", "").isdigit():
            return "CD"
        lower = surface.lower()
        if lower in _CLOSED_CLASS:
            return _CLOSED_CLASS[lower]
        if index > 0 and (surface[0].isupper() or surface.isupper()):
            return "NNP"
        verb = _verb_tag(lower)
        if verb is not None:
            return verb
        if lower.endswith(_NOUN_SUFFIXES):
            return "NN"
        if lower.endswith("ly"):
            return "RB"
        if lower.endswith(_ADJ_SUFFIXES) or "-" in surface:
            return "JJ"
        if lower.endswith("ed"):
            return "VBN"
        if lower.endswith("ing") and len(lower) > 4:
            return "VBG"
        if lower.endswith("s") and len(lower) > 3 and not lower.endswith(("ss", "us", "is")):
            return "NNS"
        return "NN"


DEFAULT_TAGGER = BaselineTagger()


def tag(tokens: Sequence[Token], tagger: Tagger | None = None) -> list[TaggedToken]:
    """Tag one sentence; the output always has one tag per token."""
    tagger = tagger or DEFAULT_TAGGER
    if not tokens:
        return []
    tags = tagger.tag_sentence(tokens)
    if len(tags) != len(tokens):
        raise ValueError("tagger returned a tag count different from the token count")
    return [TaggedToken(tok, t) for tok, t in zip(tokens, tags)]


# ---------------------------------------------------------------------------
# sentence splitting

_ABBREVIATIONS = frozenset(
    "e g i etc vs cf fig sec chap al no st dr mr mrs ms inc ltd".split()
)
_END_PUNCT = {".", "?", "!"}


def split_sentences(stream: TokenStream) -> list[list[Token]]:
    """Token runs split after ./?/! followed by an uppercase word.

    Single-letter tokens and a bundled abbreviation list suppress splits after
    abbreviations such as "e.g." or "etc.".
    """
    sentences: list[list[Token]] = []
    current: list[Token] = []
    tokens = stream.tokens
    for idx, token in enumerate(tokens):
        current.append(token)
        if token.surface not in _END_PUNCT:
            continue
        prev = tokens[idx - 1] if idx > 0 else None
        nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
        if prev is not None and prev.is_word:
            if len(prev.surface) == 1 or prev.surface.lower() in _ABBREVIATIONS:
                continue
        if nxt is None or (nxt.is_word and nxt.surface[0].isupper()):
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


# ---------------------------------------------------------------------------
# term extraction

_NOUN_TAGS = {"NN", "NNS", "NNP", "NNPS"}
_ADJ_TAGS = {"JJ", "JJR", "JJS"}


@dataclass(frozen=True)
class Term:
    text: str  # original casing, space-joined
    qualifiers: tuple[str, ...]  # preceding adjectives, textual order


def extract_terms(tagged: Sequence[TaggedToken]) -> list[Term]:
    """Maximal noun runs as terms, with immediately preceding adjectives
    (comma-separated coordinate adjectives included) attached as qualifiers."""
    terms = []
    i = 0
    while i < len(tagged):
        if tagged[i].tag in _NOUN_TAGS:
            j = i
            while j + 1 < len(tagged) and tagged[j + 1].tag in _NOUN_TAGS:
                j += 1
            qualifiers = []
            k = i - 1
            while k >= 0:
                if tagged[k].tag in _ADJ_TAGS:
                    qualifiers.append(tagged[k].token.surface)
                    k -= 1
                elif tagged[k].tag == "," and k - 1 >= 0 and tagged[k - 1].tag in _ADJ_TAGS:
                    k -= 1
                else:
                    break
            qualifiers.reverse()
            text = " ".join(t.token.surface for t in tagged[i : j + 1])
            terms.append(Term(text, tuple(qualifiers)))
            i = j + 1
        else:
            i += 1
    return terms


# ---------------------------------------------------------------------------
# entity/relationship extraction


@dataclass(frozen=True)
class Relationship:
    source: str
    target: str
    label: str


@dataclass
class ERGraph:
    entities: list[str]  # textual order, deduplicated case-insensitively
    relationships: list[Relationship]

    def merge(self, other: "ERGraph") -> "ERGraph":
        merged = ERGraph(list(self.entities), list(self.relationships))
        known = {e.lower() for e in merged.entities}
        for entity in other.entities:
            if entity.lower() not in known:
                merged.entities.append(entity)
                known.add(entity.lower())
        seen = {(r.source.lower(), r.target.lower(), r.label) for r in merged.relationships}
        for rel in other.relationships:
            key = (rel.source.lower(), rel.target.lower(), rel.label)
            if key not in seen:
                merged.relationships.append(rel)
                seen.add(key)
        return merged


_LINK_TAGS = {"VB", "VBZ", "VBP", "VBD", "VBN", "VBG", "MD", "TO", "IN", "RP", "RB"}


def extract_er(tagged: Sequence[TaggedToken]) -> ERGraph:
    """Noun runs become entities; the verb group between two adjacent
    entities becomes a directed relationship labeled with its text.

    Determiners and adjectives belonging to the following entity are not part
    of the label; leading conjunctions and commas are stripped. A bare
    preposition linking two entities is kept as a relationship of its own.
    """
    runs = []  # (start, end inclusive) indices of noun runs
    i = 0
    while i < len(tagged):
        if tagged[i].tag in _NOUN_TAGS:
            j = i
            while j + 1 < len(tagged) and tagged[j + 1].tag in _NOUN_TAGS:
                j += 1
            runs.append((i, j))
            i = j + 1
        else:
            i += 1
    entities = []
    known = {}
    for start, end in runs:
        name = " ".join(t.token.surface for t in tagged[start : end + 1])
        if name.lower() not in known:
            known[name.lower()] = name
            entities.append(name)
    relationships = []
    for run_a, run_b in zip(runs, runs[1:]):
        between = tagged[run_a[1] + 1 : run_b[0]]
        while between and between[0].tag in {"CC", ","}:
            between = between[1:]
        label_tokens = [t for t in between if t.tag not in {"DT", "PDT"} and t.tag not in _ADJ_TAGS]
        if not label_tokens or not all(t.tag in _LINK_TAGS for t in label_tokens):
            continue
        source = " ".join(t.token.surface for t in tagged[run_a[0] : run_a[1] + 1])
        target = " ".join(t.token.surface for t in tagged[run_b[0] : run_b[1] + 1])
        label = " ".join(t.token.surface for t in label_tokens)
        relationships.append(
            Relationship(known[source.lower()], known[target.lower()], label)
        )
    return ERGraph(entities, relationships)


def extract_er_document(sentences: Sequence[Sequence[TaggedToken]]) -> ERGraph:
    """Union of per-sentence graphs with case-insensitive entity merging."""
    graph = ERGraph([], [])
    for sentence in sentences:
        graph = graph.merge(extract_er(sentence))
    return graph


# ---------------------------------------------------------------------------
# passive voice smells

_BE_FORMS = {"is", "are", "was", "were", "be", "been", "being"}


@dataclass(frozen=True)
class SmellFinding:
    document_id: str
    start: int  # character span of the sentence
    end: int
    kind: str
    evidence: str  # matched auxiliary + participle


def detect_passive(
    tagged: Sequence[TaggedToken], document_id: str = ""
) -> list[SmellFinding]:
    """One finding per be-form followed within two tokens by a participle."""
    if not tagged:
        return []
    findings = []
    start = tagged[0].token.start
    end = tagged[-1].token.end
    for idx, item in enumerate(tagged):
        if item.token.normalized not in _BE_FORMS:
            continue
        for offset in (1, 2):
            j = idx + offset
            if j < len(tagged) and tagged[j].tag == "VBN":
                evidence = f"{item.token.surface} {tagged[j].token.surface}"
                findings.append(SmellFinding(document_id, start, end, "passive_voice", evidence))
                break
    return findings
