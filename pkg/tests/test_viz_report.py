import json
import random

import pytest

from textproj import viz_report as viz
from textproj.errors import ConfigurationError, LayoutError

from .conftest import corpus_from_tokens
from .oracles import triple_counts


def boxes_disjoint(entries):
    for i, a in enumerate(entries):
        for b in entries[i + 1 :]:
            ax, ay, aw, ah = a.box
            bx, by, bw, bh = b.box
            overlap_w = min(ax + aw, bx + bw) - max(ax, bx)
            overlap_h = min(ay + ah, by + bh) - max(ay, by)
            if overlap_w > 0 and overlap_h > 0:
                return False
    return True


class TestWordCloud:
    def test_single_word_centered_max_font(self):
        layout = viz.word_cloud({"protocol": 10}, max_words=5, canvas=(400, 300), seed=1)
        (entry,) = layout.entries
        assert entry.font_size == 64.0
        assert entry.x == pytest.approx(200, abs=1)
        assert entry.y == pytest.approx(150, abs=1)

    def test_font_strictly_larger_for_more_frequent(self):
        layout = viz.word_cloud({"big": 100, "tiny": 10}, canvas=(500, 300), seed=2)
        by_word = {e.word: e for e in layout.entries}
        assert by_word["big"].font_size > by_word["tiny"].font_size

    def test_equal_frequencies_equal_fonts(self):
        layout = viz.word_cloud({"aaa": 5, "bbb": 5, "ccc": 9}, canvas=(500, 300), seed=0)
        by_word = {e.word: e for e in layout.entries}
        assert by_word["aaa"].font_size == by_word["bbb"].font_size

    def test_boxes_disjoint_on_random_sets(self):
        rng = random.Random(99)
        for trial in range(200):
            words = {
                f"word{w}{'x' * rng.randint(0, 5)}": rng.randint(1, 80)
                for w in range(rng.randint(1, 12))
            }
            layout = viz.word_cloud(words, canvas=(600, 400), seed=trial)
            assert boxes_disjoint(layout.entries), f"overlap in trial {trial}"

    def test_stopwords_filtered_without_reordering(self):
        freqs = {"the": 99, "request": 30, "response": 20, "of": 50}
        layout = viz.word_cloud(freqs, max_words=10, canvas=(600, 300), seed=4)
        words = [e.word for e in layout.entries]
        assert "the" not in words and "of" not in words
        assert words.index("request") < words.index("response")

    def test_canvas_too_small_for_top_word(self):
        with pytest.raises(LayoutError):
            viz.word_cloud({"enormous-word-here": 5}, canvas=(20, 10), seed=0)

    def test_deterministic_svg(self):
        freqs = {"alpha": 9, "beta": 5, "gamma": 3}
        a = viz.word_cloud_svg(viz.word_cloud(freqs, canvas=(400, 300), seed=7))
        b = viz.word_cloud_svg(viz.word_cloud(freqs, canvas=(400, 300), seed=7))
        assert a == b
        c = viz.word_cloud_svg(viz.word_cloud(freqs, canvas=(400, 300), seed=8))
        assert a != c  # different seed, different spiral starts

    def test_max_words_validated(self):
        with pytest.raises(ConfigurationError):
            viz.word_cloud({"x": 1}, max_words=0)


class TestPhraseNet:
    def test_minimal_edge(self):
        corpus = corpus_from_tokens({"d": ["alpha", "is", "beta"]})
        graph = viz.phrase_net(corpus, "is", min_weight=1)
        assert [(e.source, e.target, e.weight) for e in graph.edges] == [
            ("alpha", "beta", 1)
        ]

    def test_absent_connector_empty(self):
        corpus = corpus_from_tokens({"d": ["alpha", "beta", "gamma"]})
        graph = viz.phrase_net(corpus, "is")
        assert graph.edges == ()
        assert graph.nodes == {}

    def test_weights_match_bruteforce_counts(self):
        rng = random.Random(3)
        vocab = ["red", "green", "blue", "is", "the", "cyan"]
        docs = {
            f"d{i}": [rng.choice(vocab) for _ in range(400)] for i in range(4)
        }
        corpus = corpus_from_tokens(docs)
        graph = viz.phrase_net(corpus, "is", min_weight=1)
        from textproj.stopwords import ENGLISH_STOPWORDS

        expected = triple_counts(docs, "is", ENGLISH_STOPWORDS)
        got = {(e.source, e.target): e.weight for e in graph.edges}
        assert got == expected

    def test_min_weight_filters(self):
        corpus = corpus_from_tokens(
            {"d": ["alpha", "is", "beta", "alpha", "is", "beta", "gamma", "is", "delta"]}
        )
        graph = viz.phrase_net(corpus, "is", min_weight=2)
        assert [(e.source, e.target) for e in graph.edges] == [("alpha", "beta")]

    def test_rfc_response_is_cacheable(self, rfc_corpus):
        graph = viz.phrase_net(rfc_corpus, "is", min_weight=1)
        assert ("response", "cacheable") in {(e.source, e.target) for e in graph.edges}

    def test_empty_connector_rejected(self, rfc_corpus):
        with pytest.raises(ConfigurationError):
            viz.phrase_net(rfc_corpus, "")

    def test_svg_renders(self, rfc_corpus):
        graph = viz.phrase_net(rfc_corpus, "is", min_weight=1)
        svg = viz.phrase_net_svg(graph)
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


class TestTreemap:
    def test_single_item_fills_canvas(self):
        layout = viz.treemap({"only": 5}, {"only": 0.3}, canvas=(800, 500))
        (rect,) = layout.rectangles
        assert (rect.x, rect.y, rect.width, rect.height) == (0.0, 0.0, 800.0, 500.0)

    def test_two_equal_items_half_area_each(self):
        layout = viz.treemap({"a": 10, "b": 10}, {}, canvas=(400, 200))
        areas = {r.item_id: r.width * r.height for r in layout.rectangles}
        assert areas["a"] == pytest.approx(400 * 200 / 2)
        assert areas["b"] == pytest.approx(400 * 200 / 2)

    def test_clone_study_fixture_proportional_and_tiling(self, fixtures_dir):
        raw = json.loads((fixtures_dir / "clone_study_specs.json").read_text())
        sizes = {s["id"]: s["size"] for s in raw["specs"]}
        colors = {s["id"]: s["coverage"] for s in raw["specs"]}
        assert len(sizes) == 28
        layout = viz.treemap(sizes, colors, canvas=(800, 500))
        total_size = sum(sizes.values())
        canvas_area = 800 * 500
        for rect in layout.rectangles:
            share = (rect.width * rect.height) / canvas_area
            expected = sizes[rect.item_id] / total_size
            assert share == pytest.approx(expected, rel=0.01)
        assert sum(r.width * r.height for r in layout.rectangles) == pytest.approx(
            canvas_area, rel=1e-9
        )
        for i, a in enumerate(layout.rectangles):
            for b in layout.rectangles[i + 1 :]:
                overlap_w = min(a.x + a.width, b.x + b.width) - max(a.x, b.x)
                overlap_h = min(a.y + a.height, b.y + b.height) - max(a.y, b.y)
                assert overlap_w <= 1e-6 or overlap_h <= 1e-6

    def test_color_scale_endpoints(self):
        assert viz.interpolate_color(0.0) == "#008000"
        assert viz.interpolate_color(1.0) == "#ff0000"

    def test_coverage_anchors_color_ordering(self, fixtures_dir):
        raw = json.loads((fixtures_dir / "clone_study_specs.json").read_text())
        by_id = {s["id"]: s["coverage"] for s in raw["specs"]}
        assert by_id["H"] == 0.716
        assert by_id["F"] == 0.511
        layout = viz.treemap(
            {s: 100 for s in by_id}, by_id, canvas=(800, 500)
        )
        colors = {r.item_id: r.color_value for r in layout.rectangles}
        assert colors["H"] > colors["F"] > colors["T"]

    def test_errors(self):
        with pytest.raises(ConfigurationError):
            viz.treemap({}, {})
        with pytest.raises(ConfigurationError):
            viz.treemap({"x": 0}, {})


class TestTextFlow:
    def corpus(self):
        from textproj import corpus as cp

        docs = [
            cp.Document("v1", "v1", cp.SourceClass.REQUIREMENTS_ANALYSIS,
                        "request request request response filler words here", "1996"),
            cp.Document("v2", "v2", cp.SourceClass.REQUIREMENTS_ANALYSIS,
                        "request response response response filler words here", "1997"),
        ]
        return cp.Corpus(docs)

    def test_constant_term_constant_band(self):
        from textproj import corpus as cp

        docs = [
            cp.Document("v1", "v1", cp.SourceClass.REQUIREMENTS_ANALYSIS, "term other", "1"),
            cp.Document("v2", "v2", cp.SourceClass.REQUIREMENTS_ANALYSIS, "term other", "2"),
        ]
        layout = viz.text_flow(cp.Corpus(docs), ["term"])
        thicknesses = [t for _, t in layout.streams["term"]]
        assert thicknesses == [0.5, 0.5]

    def test_absent_term_zero_thickness(self):
        layout = viz.text_flow(self.corpus(), ["request", "missing"])
        assert [t for _, t in layout.streams["missing"]] == [0.0, 0.0]

    def test_relative_ordering_matches_hand_counts(self, http_trio_corpus):
        layout = viz.text_flow(http_trio_corpus, ["request", "response", "header"])
        request = dict(layout.streams["request"])
        response = dict(layout.streams["response"])
        header = dict(layout.streams["header"])
        assert request["1996"] > response["1996"]
        assert response["1997"] > request["1997"]
        assert response["1999"] > request["1999"]
        assert header["1996"] < header["1997"] < header["1999"]

    def test_streams_stack_symmetrically(self):
        layout = viz.text_flow(self.corpus(), ["request", "response"])
        for idx, version in enumerate(layout.versions):
            total = sum(layout.streams[t][idx][1] for t in layout.streams)
            first_term = "request"
            assert dict(layout.offsets[first_term])[version] == pytest.approx(-total / 2)

    def test_needs_two_versions(self):
        from textproj import corpus as cp

        doc = cp.Document("v1", "v1", cp.SourceClass.REQUIREMENTS_ANALYSIS, "x y", "1")
        with pytest.raises(ConfigurationError):
            viz.text_flow(cp.Corpus([doc]), ["x"])

    def test_needs_version_labels(self):
        corpus = corpus_from_tokens({"a": ["x", "y"], "b": ["x", "z"]})
        with pytest.raises(ConfigurationError):
            viz.text_flow(corpus, ["x"])

    def test_needs_terms(self):
        with pytest.raises(ConfigurationError):
            viz.text_flow(self.corpus(), [])


class TestRenderReport:
    def test_empty_inputs_say_so(self, tmp_path):
        bundle = viz.render_report(viz.ReportInputs(), tmp_path / "report")
        index = (tmp_path / "report" / "index.html").read_text()
        assert "no analyses" in index
        assert set(bundle.missing) == {"wordcloud", "phrasenet", "treemap", "textflow"}

    def test_partial_bundle_lists_missing(self, tmp_path):
        layout = viz.treemap({"a": 1}, {"a": 0.5})
        inputs = viz.ReportInputs(treemap_svg=viz.treemap_svg(layout))
        bundle = viz.render_report(inputs, tmp_path / "report")
        assert "treemap.svg" in bundle.files
        assert "wordcloud" in bundle.missing
        index = (tmp_path / "report" / "index.html").read_text()
        assert "Missing analyses" in index

    def test_full_bundle_is_self_contained(self, rfc_corpus, tmp_path):
        wc = viz.word_cloud_svg(
            viz.word_cloud({"request": 9, "response": 5}, canvas=(300, 200), seed=1)
        )
        pn = viz.phrase_net_svg(viz.phrase_net(rfc_corpus, "is"))
        tm = viz.treemap_svg(viz.treemap({"a": 1, "b": 2}, {"a": 0.1, "b": 0.9}))
        inputs = viz.ReportInputs(
            wordcloud_svg=wc, phrasenet_svg=pn, treemap_svg=tm,
            tables={"stats": {"total": 3}},
        )
        bundle = viz.render_report(inputs, tmp_path / "report")
        assert bundle.missing == ("textflow",)
        index = (tmp_path / "report" / "index.html").read_text()
        assert "http://" not in index.replace("http://www.w3.org", "")
        for name in ("wordcloud.svg", "phrasenet.svg", "treemap.svg", "stats.json", "index.html"):
            assert (tmp_path / "report" / name).exists()

    def test_deterministic_bytes(self, tmp_path):
        inputs = viz.ReportInputs(tables={"t": {"a": 1}})
        viz.render_report(inputs, tmp_path / "r1")
        viz.render_report(inputs, tmp_path / "r2")
        assert (tmp_path / "r1" / "index.html").read_bytes() == (
            tmp_path / "r2" / "index.html"
        ).read_bytes()
