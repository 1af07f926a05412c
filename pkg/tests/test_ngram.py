import json
import math
import random

import pytest

from textproj import ngram
from textproj.errors import ConfigurationError, TrainingError

from .conftest import corpus_from_tokens


class TestTrainWordModel:
    def test_unigram_repeat_counts(self):
        model = ngram.train_word_model([["a", "a", "a", "a"]], 2, "none")
        assert model.counts[("a",)] == {"a": 3}

    def test_alternating_bigram_counts(self):
        model = ngram.train_word_model([["a", "b", "a", "b"]], 2, "none")
        assert model.counts[("a",)] == {"b": 2}
        assert model.counts[("b",)] == {"a": 1}

    def test_window_count_formula_on_rfc(self, rfc_corpus):
        model = ngram.train_word_model(rfc_corpus, 3)
        expected = sum(
            max(0, len(rfc_corpus.word_tokens(d)) - 2) for d in rfc_corpus.document_ids()
        )
        assert ngram.window_count(model) == expected

    def test_windows_never_cross_documents(self):
        model = ngram.train_word_model([["a", "b"], ["c", "d"]], 2, "none")
        assert ("b",) not in model.counts
        assert ngram.window_count(model) == 2

    def test_insufficient_tokens(self):
        with pytest.raises(TrainingError):
            ngram.train_word_model([["a", "b"]], 3)

    def test_bad_order_and_smoothing(self):
        with pytest.raises(ConfigurationError):
            ngram.train_word_model([["a", "b"]], 0)
        with pytest.raises(ConfigurationError):
            ngram.train_word_model([["a", "b"]], 2, "kneser_ney")


class TestCrossEntropy:
    def test_deterministic_text_zero_bits(self):
        model = ngram.train_word_model([["a", "a", "a", "a"]], 2, "none")
        assert ngram.cross_entropy(model, ["a", "a", "a"]) == 0.0

    def test_add_one_hand_computed_value(self):
        # train "a b a b": count(b|a)=2 of 2, V={a,b}
        # P(b|a) = (2+1)/(2+2+1) = 0.6 -> 0.7369655941662062 bits
        model = ngram.train_word_model([["a", "b", "a", "b"]], 2, "add_one")
        value = ngram.cross_entropy(model, ["a", "b"])
        assert value == pytest.approx(0.7369655941662062, abs=1e-12)

    def test_unsmoothed_unseen_event_is_infinite(self):
        model = ngram.train_word_model([["a", "b", "a", "b"]], 2, "none")
        assert ngram.cross_entropy(model, ["b", "b"]) == math.inf

    def test_duplicating_evaluation_text_invariant(self, rfc_corpus):
        docs = list(rfc_corpus.document_ids())
        model = ngram.train_word_model(
            [rfc_corpus.word_tokens(d) for d in docs[:-1]], 3, "add_one"
        )
        held_out = rfc_corpus.word_tokens(docs[-1])
        single = ngram.cross_entropy(model, held_out)
        doubled = ngram.cross_entropy(model, [held_out, held_out])
        assert doubled == pytest.approx(single, abs=1e-9)

    def test_shuffled_text_is_less_predictable(self, rfc_corpus):
        held_out = "rfc2068.txt"
        train = [
            rfc_corpus.word_tokens(d) for d in rfc_corpus.document_ids() if d != held_out
        ]
        model = ngram.train_word_model(train, 3, "add_one")
        natural = ngram.cross_entropy(model, rfc_corpus.word_tokens(held_out))
        shuffled = list(rfc_corpus.word_tokens(held_out))
        random.Random(42).shuffle(shuffled)
        assert ngram.cross_entropy(model, shuffled) > natural

    def test_smoothed_distribution_sums_to_one(self):
        model = ngram.train_word_model([["a", "b", "a", "c", "a", "b"]], 2, "add_one")
        for context in list(model.counts) + [("zzz",)]:
            total = sum(
                model.probability(context, w) for w in sorted(model.vocabulary) + [ngram.UNKNOWN]
            )
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_too_short_evaluation(self):
        model = ngram.train_word_model([["a", "b", "a", "b"]], 2)
        with pytest.raises(TrainingError):
            ngram.cross_entropy(model, ["a"])


class TestCharProfiles:
    def test_uniform_text_top_unigram(self):
        profile = ngram.train_char_profile("a" * 500, "uniform")
        assert profile.grams[0] == "a"

    def test_english_sample_contains_padded_trigrams(self, rfc_corpus):
        text = rfc_corpus.get("rfc1945.txt").text
        profile = ngram.train_char_profile(text, "english")
        top = set(profile.grams[:60])
        assert {" th", "the", "he "} <= top

    def test_disjoint_alphabets_disjoint_profiles(self):
        a = ngram.train_char_profile("abab " * 120, "aaa")
        b = ngram.train_char_profile("cdcd " * 120, "bbb")
        assert not set(a.grams) & set(b.grams)

    def test_too_short_text(self):
        with pytest.raises(TrainingError):
            ngram.train_char_profile("short", "cat")

    def test_profile_roundtrip(self, tmp_path):
        profile = ngram.train_char_profile("example text " * 50, "demo")
        path = tmp_path / "demo.json"
        ngram.save_profile(profile, path)
        assert ngram.load_profile(path) == profile


class TestCategorize:
    def test_training_text_categorizes_to_itself(self):
        english = "the server sends the response to the client " * 20
        other = "der server schickt die antwort an den klienten " * 20
        profiles = [
            ngram.train_char_profile(english, "english"),
            ngram.train_char_profile(other, "german"),
        ]
        result = ngram.categorize(profiles, english)
        assert result.matches[0][0] == "english"
        assert not result.low_confidence

    def test_duplicating_text_does_not_change_ranking(self):
        english = "the server sends the response to the client " * 20
        other = "der server schickt die antwort an den klienten " * 20
        profiles = [
            ngram.train_char_profile(english, "english"),
            ngram.train_char_profile(other, "german"),
        ]
        sample = "the client receives a response from the origin server after the request"
        once = ngram.categorize(profiles, sample)
        twice = ngram.categorize(profiles, sample + " " + sample)
        assert [c for c, _ in once.matches] == [c for c, _ in twice.matches]

    def test_labeled_excerpts_accuracy(self, rfc_corpus, fixtures_dir):
        english_train = " ".join(
            rfc_corpus.get(d).text for d in ("rfc1945.txt", "rfc2616.txt")
        )
        german_train = (fixtures_dir / "lang" / "german_train.txt").read_text(encoding="utf-8")
        profiles = [
            ngram.train_char_profile(english_train, "english"),
            ngram.train_char_profile(german_train, "german"),
        ]
        excerpts = json.loads((fixtures_dir / "lang" / "excerpts.json").read_text())
        correct = sum(
            1
            for entry in excerpts
            if ngram.categorize(profiles, entry["text"]).matches[0][0] == entry["language"]
        )
        assert correct / len(excerpts) >= 0.95

    def test_out_of_place_distance_zero_iff_identical(self):
        profile = ngram.train_char_profile("some recurring text " * 40, "a")
        same = ngram.CategoryProfile("b", profile.grams)
        assert ngram.out_of_place_distance(profile, same) == 0
        shifted = ngram.CategoryProfile("c", profile.grams[1:] + profile.grams[:1])
        assert ngram.out_of_place_distance(profile, shifted) > 0

    def test_requires_profiles_and_minimum_length(self):
        with pytest.raises(ConfigurationError):
            ngram.categorize([], "x" * 100)
        profile = ngram.train_char_profile("words and words " * 40, "a")
        with pytest.raises(ConfigurationError):
            ngram.categorize([profile], "too short")

    def test_equidistant_profiles_flagged(self):
        profile = ngram.train_char_profile("abcd efgh " * 60, "a")
        twin = ngram.CategoryProfile("b", profile.grams)
        result = ngram.categorize([profile, twin], "abcd efgh " * 10)
        assert result.low_confidence
        assert result.matches[0][0] == "a"  # tie broken by name


class TestFrequencySeries:
    def make_corpus(self):
        from textproj import corpus as cp

        documents = [
            cp.Document("v1.txt", "v1.txt", cp.SourceClass.REQUIREMENTS_ANALYSIS,
                        "request sent request again", "1"),
            cp.Document("v2.txt", "v2.txt", cp.SourceClass.REQUIREMENTS_ANALYSIS,
                        "request handled response sent", "2"),
        ]
        return cp.Corpus(documents)

    def test_absent_query_all_zero(self):
        corpus = self.make_corpus()
        series = ngram.frequency_series(corpus, ["missing"])
        assert series == [("1", 0.0), ("2", 0.0)]

    def test_whole_document_query_is_one(self):
        from textproj import corpus as cp

        doc = cp.Document("d", "d", cp.SourceClass.REQUIREMENTS_ANALYSIS, "only phrase", "1")
        other = cp.Document("e", "e", cp.SourceClass.REQUIREMENTS_ANALYSIS, "only phrase", "2")
        corpus = cp.Corpus([doc, other])
        series = ngram.frequency_series(corpus, ["only", "phrase"])
        assert series == [("1", 1.0), ("2", 1.0)]

    def test_hand_counted_ratios_across_rfc_versions(self, http_trio_corpus):
        series = dict(ngram.frequency_series(http_trio_corpus, ["request"]))
        for version, doc_id in (("1996", "rfc1945.txt"), ("1997", "rfc2068.txt"), ("1999", "rfc2616.txt")):
            tokens = http_trio_corpus.word_tokens(doc_id)
            expected = tokens.count("request") / len(tokens)
            assert series[version] == pytest.approx(expected)

    def test_unordered_versions_error(self):
        corpus = corpus_from_tokens({"a": ["x", "y"]})
        with pytest.raises(ConfigurationError):
            ngram.frequency_series(corpus, ["x"])

    def test_empty_query_rejected(self):
        with pytest.raises(ConfigurationError):
            ngram.frequency_series(self.make_corpus(), [])
