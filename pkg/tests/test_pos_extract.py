import pytest

from textproj import corpus as cp
from textproj import pos_extract as pos

TABLE_SENTENCE = (
    "The Hypertext Transfer Protocol (HTTP) is an application-level "
    "protocol with the lightness and speed necessary for distributed, "
    "collaborative, hypermedia information systems."
)

ER_SENTENCE = (
    "Most HTTP communication is initiated by a user agent and consists of "
    "a request to be applied to a resource on some origin server."
)


def tokens_of(text):
    doc = cp.Document("doc", "doc", cp.SourceClass.REQUIREMENTS_ANALYSIS, text)
    return cp.tokenize(doc).tokens


def tag_text(text):
    return pos.tag(tokens_of(text))


def tags_by_surface(tagged):
    return {t.token.surface: t.tag for t in tagged}


class TestBaselineTagger:
    def test_closed_class_and_default(self):
        tags = tags_by_surface(tag_text("The protocol"))
        assert tags["The"] == "DT"
        assert tags["protocol"] == "NN"

    def test_empty_sentence(self):
        assert pos.tag([]) == []

    def test_ness_suffix(self):
        tags = tags_by_surface(tag_text("with the lightness"))
        assert tags["lightness"] == "NN"

    def test_table_sentence_key_tags(self):
        tags = tags_by_surface(tag_text(TABLE_SENTENCE))
        assert tags["The"] == "DT"
        assert tags["Hypertext"] == "NNP"
        assert tags["is"] == "VBZ"
        assert tags["application-level"] == "JJ"
        assert tags["protocol"] == "NN"
        assert tags["lightness"] == "NN"
        assert tags["and"] == "CC"
        assert tags["for"] == "IN"
        assert tags["distributed"] == "VBN"
        assert tags["collaborative"] == "JJ"
        assert tags["systems"] == "NNS"
        assert tags["("] == "-LRB-"
        assert tags[")"] == "-RRB-"

    def test_totality(self):
        for text in (TABLE_SENTENCE, ER_SENTENCE, "One.", "a b c d"):
            toks = tokens_of(text)
            assert len(pos.tag(toks)) == len(toks)

    def test_determinism(self):
        assert tag_text(ER_SENTENCE) == tag_text(ER_SENTENCE)

    def test_verb_inflections(self):
        tags = tags_by_surface(tag_text("The server stores and distributes messages"))
        assert tags["stores"] == "VBZ"
        assert tags["distributes"] == "VBZ"
        assert tags["messages"] == "NNS"

    def test_pluggable_tagger_contract(self):
        class UpperTagger:
            def tag_sentence(self, tokens):
                return ["NN" for _ in tokens]

        tagged = pos.tag(tokens_of("alpha beta"), UpperTagger())
        assert [t.tag for t in tagged] == ["NN", "NN"]

        class BrokenTagger:
            def tag_sentence(self, tokens):
                return ["NN"]

        with pytest.raises(ValueError):
            pos.tag(tokens_of("alpha beta"), BrokenTagger())


class TestSentenceSplitting:
    def split(self, text):
        doc = cp.Document("doc", "doc", cp.SourceClass.REQUIREMENTS_ANALYSIS, text)
        return pos.split_sentences(cp.tokenize(doc))

    def test_basic_split(self):
        sentences = self.split("First sentence. Second sentence.")
        assert len(sentences) == 2
        assert sentences[0][-1].surface == "."

    def test_abbreviations_do_not_split(self):
        sentences = self.split("Use e.g. the GET method. Then stop.")
        assert len(sentences) == 2

    def test_question_mark(self):
        assert len(self.split("Is it cached? The server decides.")) == 2

    def test_decimal_numbers_do_not_split(self):
        assert len(self.split("Version 1.1 applies here.")) == 1


class TestExtractTerms:
    def test_table_sentence_terms(self):
        terms = pos.extract_terms(tag_text(TABLE_SENTENCE))
        texts = [t.text for t in terms]
        assert "Hypertext Transfer Protocol" in texts
        assert "hypermedia information systems" in texts
        assert "HTTP" in texts
        assert "protocol" in texts
        assert "lightness" in texts

    def test_adjective_qualifier_attached(self):
        terms = pos.extract_terms(tag_text("collaborative hypermedia information systems"))
        (term,) = terms
        assert term.text == "hypermedia information systems"
        assert term.qualifiers == ("collaborative",)

    def test_coordinate_adjectives_cross_commas(self):
        terms = pos.extract_terms(tag_text(TABLE_SENTENCE))
        systems = next(t for t in terms if t.text == "hypermedia information systems")
        assert systems.qualifiers == ("collaborative",)

    def test_sentence_without_nouns(self):
        assert pos.extract_terms(tag_text("is being included")) == []

    def test_terms_are_ordered_and_disjoint(self):
        terms = pos.extract_terms(tag_text(TABLE_SENTENCE))
        assert terms == sorted(terms, key=lambda t: TABLE_SENTENCE.index(t.text.split()[0]))


class TestExtractEr:
    def test_fig_sentence_entities_and_relationships(self):
        graph = pos.extract_er(tag_text(ER_SENTENCE))
        assert graph.entities == [
            "HTTP communication",
            "user agent",
            "request",
            "resource",
            "origin server",
        ]
        rels = {(r.source, r.target): r.label for r in graph.relationships}
        assert rels == {
            ("HTTP communication", "user agent"): "is initiated by",
            ("user agent", "request"): "consists of",
            ("request", "resource"): "to be applied to",
            ("resource", "origin server"): "on",
        }

    def test_minimal_pattern(self):
        graph = pos.extract_er(tag_text("Server stores message"))
        assert graph.entities == ["Server", "message"]
        (rel,) = graph.relationships
        assert (rel.source, rel.label, rel.target) == ("Server", "stores", "message")

    def test_second_sentence_hand_derived(self):
        # "The user agent returns a Cookie request header to the origin server."
        graph = pos.extract_er(tag_text(
            "The user agent returns a Cookie request header to the origin server."
        ))
        assert graph.entities[0] == "user agent"
        assert graph.entities[-1] == "origin server"
        rels = {(r.source, r.target): r.label for r in graph.relationships}
        assert rels[("user agent", "Cookie request header")] == "returns"
        assert rels[("Cookie request header", "origin server")] == "to"

    def test_single_entity_no_relationships(self):
        graph = pos.extract_er(tag_text("The server."))
        assert graph.entities == ["server"]
        assert graph.relationships == []

    def test_document_union_merges_case_insensitively(self):
        a = pos.extract_er(tag_text("The Server stores the message"))
        b = pos.extract_er(tag_text("A server receives the request"))
        merged = a.merge(b)
        lowered = [e.lower() for e in merged.entities]
        assert lowered.count("server") == 1
        assert merged.entities[0] == "Server"  # first casing wins


class TestDetectPassive:
    def test_modal_be_participle(self):
        findings = pos.detect_passive(
            tag_text("Comments can be included in some HTTP header fields"), "doc"
        )
        assert [f.evidence for f in findings] == ["be included"]
        assert findings[0].kind == "passive_voice"

    def test_be_form_participle(self):
        findings = pos.detect_passive(tag_text("is initiated by a user agent"), "doc")
        assert [f.evidence for f in findings] == ["is initiated"]

    def test_active_sentence_clean(self):
        assert pos.detect_passive(tag_text("The server stores the message."), "doc") == []

    def test_gap_of_one_token_allowed(self):
        findings = pos.detect_passive(tag_text("The request is always rejected there"), "doc")
        assert [f.evidence for f in findings] == ["is rejected"]

    def test_never_fires_without_participle(self):
        tagged = tag_text("The response is a message")
        assert all(t.tag != "VBN" for t in tagged)
        assert pos.detect_passive(tagged, "doc") == []

    def test_span_covers_sentence(self):
        text = "Comments can be included here"
        findings = pos.detect_passive(tag_text(text), "doc")
        assert findings[0].start == 0
        assert findings[0].end == len(text)
