"""Deterministic layout and report emitters.

Every layout is a pure function of its inputs plus an explicit seed, and the
SVG serializations are byte-stable: same inputs, same bytes. SVG is the only
graphic format; the report bundle is a static directory with no network
resources.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Corpus
from .errors import ConfigurationError, LayoutError
from .stopwords import ENGLISH_STOPWORDS

# Rectangle text estimate for the monospace font used in the SVGs.
_CHAR_WIDTH = 0.62
_LINE_HEIGHT = 1.12


def _fmt(value: float) -> str:
    """Fixed two-decimal formatting keeps SVG output byte-stable."""
    return f"{value:.2f}"


# ---------------------------------------------------------------------------
# word cloud


@dataclass(frozen=True)
class WordEntry:
    word: str
    frequency: int
    font_size: float
    x: float  # anchor (text middle)
    y: float
    box: tuple[float, float, float, float]  # x0, y0, width, height


@dataclass
class WordCloudLayout:
    width: int
    height: int
    entries: tuple[WordEntry, ...]
    skipped: tuple[str, ...]  # words that found no free spot


def word_cloud(
    frequencies: Mapping[str, int],
    stopwords: frozenset[str] = ENGLISH_STOPWORDS,
    max_words: int = 80,
    canvas: tuple[int, int] = (800, 500),
    seed: int = 0,
    min_font: float = 11.0,
    max_font: float = 64.0,
) -> WordCloudLayout:
    """Greedy spiral placement of the most frequent non-stop words.

    Font size interpolates between ``max_font`` and ``min_font`` over the rank
    of distinct frequency values, so equal frequencies always get equal sizes
    and size is monotone in frequency. Placement walks an outward spiral from
    the canvas center with a seeded start angle per word; a word that finds no
    free spot is skipped, but failure to place the very first word is a
    layout error.
    """
    if max_words < 1:
        raise ConfigurationError(f"max_words must be >= 1, got {max_words}")
    width, height = canvas
    chosen = sorted(
        ((w, f) for w, f in frequencies.items() if w.lower() not in stopwords),
        key=lambda item: (-item[1], item[0]),
    )[:max_words]
    if not chosen:
        return WordCloudLayout(width, height, (), ())
    distinct = sorted({f for _, f in chosen}, reverse=True)
    rank_of = {f: r for r, f in enumerate(distinct)}
    span = max(len(distinct) - 1, 1)
    rng = random.Random(seed)
    placed: list[WordEntry] = []
    skipped: list[str] = []
    for index, (word, freq) in enumerate(chosen):
        if len(distinct) == 1:
            size = max_font
        else:
            size = max_font - (max_font - min_font) * (rank_of[freq] / span)
        box_w = _CHAR_WIDTH * size * len(word)
        box_h = _LINE_HEIGHT * size
        start_angle = rng.random() * 6.283185307179586
        spot = _spiral_place(width, height, box_w, box_h, placed, start_angle)
        if spot is None:
            if index == 0:
                raise LayoutError(
                    f"canvas {width}x{height} too small to place the top word {word!r}"
                )
            skipped.append(word)
            continue
        x0, y0 = spot
        placed.append(
            WordEntry(word, freq, size, x0 + box_w / 2, y0 + box_h / 2, (x0, y0, box_w, box_h))
        )
    return WordCloudLayout(width, height, tuple(placed), tuple(skipped))


def _spiral_place(width, height, box_w, box_h, placed, start_angle):
    """First collision-free box position on an outward Archimedean spiral."""
    import math

    if box_w > width or box_h > height:
        return None
    cx, cy = width / 2, height / 2
    max_radius = math.hypot(width, height) / 2
    arc = 5.0  # sample spacing along the spiral, in pixels
    turn_gain = 9.0  # radius gained per full turn
    angle = start_angle
    radius = 0.0
    while radius <= max_radius:
        x0 = cx + radius * math.cos(angle) - box_w / 2
        y0 = cy + radius * math.sin(angle) - box_h / 2
        if 0 <= x0 and x0 + box_w <= width and 0 <= y0 and y0 + box_h <= height:
            candidate = (x0, y0, box_w, box_h)
            if all(not _intersects(candidate, e.box) for e in placed):
                return (x0, y0)
        step = arc / max(radius, arc)
        angle += step
        radius += turn_gain * step / (2 * math.pi)
    return None


def _intersects(a, b) -> bool:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def word_cloud_svg(layout: WordCloudLayout) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{layout.width}" '
        f'height="{layout.height}" viewBox="0 0 {layout.width} {layout.height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for e in layout.entries:
        baseline = e.y + e.font_size * 0.35
        parts.append(
            f'<text x="{_fmt(e.x)}" y="{_fmt(baseline)}" font-family="monospace" '
            f'font-size="{_fmt(e.font_size)}" text-anchor="middle">{_escape(e.word)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------------------
# phrase net


@dataclass(frozen=True)
class PhraseEdge:
    source: str
    target: str
    connector: str
    weight: int


@dataclass
class PhraseNetGraph:
    nodes: dict[str, int]  # word -> corpus frequency
    edges: tuple[PhraseEdge, ...]
    connector: str


def phrase_net(
    corpus: Corpus,
    connector: str,
    min_weight: int = 1,
    stopwords: frozenset[str] = ENGLISH_STOPWORDS,
) -> PhraseNetGraph:
    """Directed word pairs joined by a connector word.

    Scans consecutive word-token triples (w1, connector, w2) per document;
    triples whose outer words are stop words are ignored. Edges below
    ``min_weight`` are dropped; node size is the word's corpus frequency.
    """
    if not connector:
        raise ConfigurationError("connector word must be non-empty")
    connector = connector.lower()
    pair_counts: dict[tuple[str, str], int] = {}
    word_freq: dict[str, int] = {}
    for doc_id in corpus.document_ids():
        words = corpus.word_tokens(doc_id)
        for w in words:
            word_freq[w] = word_freq.get(w, 0) + 1
        for i in range(len(words) - 2):
            if words[i + 1] != connector:
                continue
            w1, w2 = words[i], words[i + 2]
            if w1 in stopwords or w2 in stopwords:
                continue
            pair_counts[(w1, w2)] = pair_counts.get((w1, w2), 0) + 1
    edges = tuple(
        PhraseEdge(w1, w2, connector, count)
        for (w1, w2), count in sorted(pair_counts.items())
        if count >= min_weight
    )
    nodes = {}
    for edge in edges:
        nodes[edge.source] = word_freq[edge.source]
        nodes[edge.target] = word_freq[edge.target]
    return PhraseNetGraph(dict(sorted(nodes.items())), edges, connector)


def phrase_net_svg(graph: PhraseNetGraph, canvas: tuple[int, int] = (800, 600)) -> str:
    import math

    width, height = canvas
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    ordered = sorted(graph.nodes.items(), key=lambda n: (-n[1], n[0]))
    if ordered:
        cx, cy = width / 2, height / 2
        radius = min(width, height) * 0.38
        positions = {}
        for idx, (word, _) in enumerate(ordered):
            angle = 2 * math.pi * idx / len(ordered)
            positions[word] = (cx + radius * math.cos(angle), cy + radius * math.sin(angle))
        max_freq = max(f for _, f in ordered)
        for edge in graph.edges:
            x1, y1 = positions[edge.source]
            x2, y2 = positions[edge.target]
            parts.append(
                f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                f'stroke="steelblue" stroke-width="{_fmt(0.8 + 1.2 * edge.weight)}"/>'
            )
        for word, freq in ordered:
            x, y = positions[word]
            size = 10 + 14 * (freq / max_freq)
            parts.append(
                f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="monospace" '
                f'font-size="{_fmt(size)}" text-anchor="middle">{_escape(word)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# treemap


@dataclass(frozen=True)
class TreemapRect:
    item_id: str
    x: float
    y: float
    width: float
    height: float
    color_value: float


@dataclass
class TreemapLayout:
    width: int
    height: int
    rectangles: tuple[TreemapRect, ...]


DEFAULT_PALETTE = ((0, 128, 0), (255, 0, 0))  # 0 -> green, 1 -> red


def treemap(
    sizes: Mapping[str, float],
    colors: Mapping[str, float],
    canvas: tuple[int, int] = (800, 500),
    palette: Sequence[tuple[int, int, int]] = DEFAULT_PALETTE,
) -> TreemapLayout:
    """Squarified layout: rectangles tile the canvas exactly, areas
    proportional to the given sizes, color value in 0..1 per item."""
    if not sizes:
        raise ConfigurationError("treemap needs at least one item")
    for item_id, size in sizes.items():
        if size <= 0:
            raise ConfigurationError(f"item {item_id!r} has non-positive size {size}")
    width, height = canvas
    items = sorted(sizes.items(), key=lambda kv: (-kv[1], kv[0]))
    total = sum(size for _, size in items)
    scale = width * height / total
    scaled = [(item_id, size * scale) for item_id, size in items]
    rects: list[TreemapRect] = []
    _squarify(scaled, 0.0, 0.0, float(width), float(height), colors, rects)
    return TreemapLayout(width, height, tuple(rects))


def _squarify(items, x, y, w, h, colors, out):
    """Recursive squarified treemap on pre-scaled areas."""
    if not items:
        return
    if len(items) == 1:
        item_id, _ = items[0]
        out.append(TreemapRect(item_id, x, y, w, h, float(colors.get(item_id, 0.0))))
        return
    short = min(w, h)
    row = [items[0]]
    rest = items[1:]
    worst = _worst_ratio(row, short)
    while rest:
        candidate = row + [rest[0]]
        candidate_worst = _worst_ratio(candidate, short)
        if candidate_worst <= worst:
            row = candidate
            rest = rest[1:]
            worst = candidate_worst
        else:
            break
    row_area = sum(area for _, area in row)
    if w >= h:
        row_w = row_area / h
        cy = y
        for item_id, area in row:
            rect_h = area / row_w
            out.append(
                TreemapRect(item_id, x, cy, row_w, rect_h, float(colors.get(item_id, 0.0)))
            )
            cy += rect_h
        _squarify(rest, x + row_w, y, w - row_w, h, colors, out)
    else:
        row_h = row_area / w
        cx = x
        for item_id, area in row:
            rect_w = area / row_h
            out.append(
                TreemapRect(item_id, cx, y, rect_w, row_h, float(colors.get(item_id, 0.0)))
            )
            cx += rect_w
        _squarify(rest, x, y + row_h, w, h - row_h, colors, out)


def _worst_ratio(row, short) -> float:
    areas = [area for _, area in row]
    total = sum(areas)
    side = total / short
    worst = 1.0
    for area in areas:
        other = area / side
        ratio = max(side / other, other / side) if other > 0 else float("inf")
        worst = max(worst, ratio)
    return worst


def interpolate_color(value: float, palette: Sequence[tuple[int, int, int]] = DEFAULT_PALETTE) -> str:
    value = min(max(value, 0.0), 1.0)
    if len(palette) == 1:
        r, g, b = palette[0]
        return f"#{r:02x}{g:02x}{b:02x}"
    segment = value * (len(palette) - 1)
    idx = min(int(segment), len(palette) - 2)
    frac = segment - idx
    r0, g0, b0 = palette[idx]
    r1, g1, b1 = palette[idx + 1]
    r = round(r0 + (r1 - r0) * frac)
    g = round(g0 + (g1 - g0) * frac)
    b = round(b0 + (b1 - b0) * frac)
    return f"#{r:02x}{g:02x}{b:02x}"


def treemap_svg(layout: TreemapLayout, palette=DEFAULT_PALETTE) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{layout.width}" '
        f'height="{layout.height}" viewBox="0 0 {layout.width} {layout.height}">',
    ]
    for rect in layout.rectangles:
        fill = interpolate_color(rect.color_value, palette)
        parts.append(
            f'<rect x="{_fmt(rect.x)}" y="{_fmt(rect.y)}" width="{_fmt(rect.width)}" '
            f'height="{_fmt(rect.height)}" fill="{fill}" stroke="white" stroke-width="1">'
            f"<title>{_escape(rect.item_id)}</title></rect>"
        )
        if rect.width > 40 and rect.height > 14:
            parts.append(
                f'<text x="{_fmt(rect.x + 4)}" y="{_fmt(rect.y + 13)}" font-family="monospace" '
                f'font-size="11" fill="white">{_escape(rect.item_id)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# text flow


@dataclass
class TextFlowLayout:
    versions: tuple[str, ...]
    # term -> [(version, thickness)] where thickness is the relative frequency
    streams: dict[str, list[tuple[str, float]]]
    # term -> [(version, lower offset)] for stacked rendering around 0
    offsets: dict[str, list[tuple[str, float]]]


def text_flow(corpus: Corpus, terms: Sequence[str]) -> TextFlowLayout:
    """Stacked frequency streams of the given terms across corpus versions.

    Thickness is the term's relative frequency in each version; streams are
    stacked symmetrically around a horizontal center line.
    """
    if not terms:
        raise ConfigurationError("text flow needs at least one term")
    labels = corpus.ordered_version_labels()
    if len(labels) < 2:
        raise ConfigurationError("text flow needs at least two orderable versions")
    terms = [t.lower() for t in terms]
    totals = {label: 0 for label in labels}
    counts = {label: {t: 0 for t in terms} for label in labels}
    for doc in corpus.documents:
        words = corpus.word_tokens(doc.id)
        label = doc.version_label
        totals[label] += len(words)
        for w in words:
            if w in counts[label]:
                counts[label][w] += 1
    streams = {
        term: [
            (label, counts[label][term] / totals[label] if totals[label] else 0.0)
            for label in labels
        ]
        for term in terms
    }
    offsets: dict[str, list[tuple[str, float]]] = {term: [] for term in terms}
    for idx, label in enumerate(labels):
        height = sum(streams[term][idx][1] for term in terms)
        cursor = -height / 2
        for term in terms:
            offsets[term].append((label, cursor))
            cursor += streams[term][idx][1]
    return TextFlowLayout(tuple(labels), streams, offsets)


def text_flow_svg(layout: TextFlowLayout, canvas: tuple[int, int] = (800, 400)) -> str:
    width, height = canvas
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    n = len(layout.versions)
    xs = [60 + (width - 120) * i / max(n - 1, 1) for i in range(n)]
    peak = max(
        (sum(layout.streams[t][i][1] for t in layout.streams) for i in range(n)),
        default=0.0,
    )
    scale = (height * 0.7) / peak if peak > 0 else 1.0
    mid = height / 2
    fills = ("#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756", "#72b7b2")
    for t_idx, (term, stream) in enumerate(sorted(layout.streams.items())):
        offsets = dict(layout.offsets[term])
        top_pts = []
        bottom_pts = []
        for i, (label, thickness) in enumerate(stream):
            y0 = mid + offsets[label] * scale
            top_pts.append((xs[i], y0))
            bottom_pts.append((xs[i], y0 + thickness * scale))
        points = top_pts + bottom_pts[::-1]
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        fill = fills[t_idx % len(fills)]
        parts.append(f'<polygon points="{path}" fill="{fill}" fill-opacity="0.8"/>')
        parts.append(
            f'<text x="{_fmt(xs[-1] + 6)}" y="{_fmt(bottom_pts[-1][1])}" '
            f'font-family="monospace" font-size="12">{_escape(term)}</text>'
        )
    for i, label in enumerate(layout.versions):
        parts.append(
            f'<text x="{_fmt(xs[i])}" y="{_fmt(height - 8)}" font-family="monospace" '
            f'font-size="12" text-anchor="middle">{_escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# report bundle


@dataclass
class ReportInputs:
    wordcloud_svg: str | None = None
    phrasenet_svg: str | None = None
    treemap_svg: str | None = None
    textflow_svg: str | None = None
    tables: dict[str, object] = field(default_factory=dict)


@dataclass
class ReportBundle:
    directory: Path
    files: tuple[str, ...]
    missing: tuple[str, ...]


_SECTIONS = (
    ("wordcloud", "Word cloud", "wordcloud_svg"),
    ("phrasenet", "Phrase net", "phrasenet_svg"),
    ("treemap", "Clone treemap", "treemap_svg"),
    ("textflow", "Term flow", "textflow_svg"),
)


def render_report(inputs: ReportInputs, out_dir: str | Path) -> ReportBundle:
    """Write a self-contained static HTML bundle.

    Missing analyses are listed on the index page; whatever is present is
    still emitted, so a partial pipeline yields a partial but valid bundle.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    missing: list[str] = []
    body: list[str] = []
    for key, title, attr in _SECTIONS:
        svg = getattr(inputs, attr)
        if svg is None:
            missing.append(key)
            continue
        name = f"{key}.svg"
        (out / name).write_text(svg, encoding="utf-8")
        files.append(name)
        body.append(f"<section><h2>{title}</h2>\n{svg}</section>")
    for name in sorted(inputs.tables):
        fname = f"{name}.json"
        (out / fname).write_text(
            json.dumps(inputs.tables[name], indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        files.append(fname)
        body.append(
            f"<section><h2>{_escape(name)}</h2><pre>"
            + _escape(json.dumps(inputs.tables[name], indent=2, sort_keys=True))
            + "</pre></section>"
        )
    if not body:
        body.append("<p>no analyses</p>")
    if missing:
        items = "".join(f"<li>{_escape(m)}</li>" for m in missing)
        body.append(f"<section><h2>Missing analyses</h2><ul>{items}</ul></section>")
    html = (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        "<title>Text analysis report</title></head>\n<body>\n<h1>Text analysis report</h1>\n"
        + "\n".join(body)
        + "\n</body></html>\n"
    )
    (out / "index.html").write_text(html, encoding="utf-8")
    files.append("index.html")
    return ReportBundle(out, tuple(sorted(files)), tuple(missing))
