"""Synthetic label pages with known line structure.

Pages are made of filled ellipse/rectangle "letters" laid out in horizontal
bands. Optional extras: interlinear glosses (comment class) in the gaps,
lettrine-like decorations in the left margin, and ascenders, descenders or
detached dots attached to letters. Ground truth polygons are tight outlines
of each band's letters.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .ingest import BACKGROUND, COMMENT, DECORATION, MAIN_TEXT, LabelImage, encode_label_image
from .raster import connected_components, trace_outer_contour


class InfeasibleSpec(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n: int = 1400
    m: int = 1000
    line_count: int = 5
    line_height: int = 40
    gap: int = 40
    words_per_line: tuple = (6, 12)
    word_length: tuple = (2, 8)
    blob_size: int = 16
    gloss_prob: float = 0.0
    decoration_prob: float = 0.0
    spur_prob: float = 0.1
    skew: int = 0

    def validate(self):
        if self.line_count < 1:
            raise InfeasibleSpec("line_count must be >= 1")
        if self.line_count * (self.line_height + self.gap) > self.n:
            raise InfeasibleSpec(
                f"{self.line_count} lines of {self.line_height}+{self.gap} px do not fit in {self.n} rows"
            )
        for name in ("gloss_prob", "decoration_prob", "spur_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InfeasibleSpec(f"{name} must lie in [0, 1]")
        if 2 * self.skew >= 0.3 * self.gap:
            raise InfeasibleSpec("skew too large for the inter-line gap")
        if self.line_height < 6 or self.blob_size < 3:
            raise InfeasibleSpec("lines and blobs are too small to draw")


@dataclass
class SynthPage:
    spec: SynthSpec
    labels: LabelImage
    line_ids: np.ndarray  # -1 off text, else line index of each main-text pixel
    gt_polygons: list  # per line: [(row, col), ...]
    component_lines: np.ndarray  # line index per 8-connected text component
    bands: list  # per line: (top, bottom) core rows at the page centre, half-open

    @property
    def text(self) -> np.ndarray:
        return self.labels.classes[MAIN_TEXT]

    def encode(self) -> np.ndarray:
        return encode_label_image(self.labels)


def _ellipse(h, w):
    rr, cc = np.mgrid[0:h, 0:w]
    ry, rx = (h - 1) / 2, (w - 1) / 2
    return ((rr - ry) / max(ry, 0.5)) ** 2 + ((cc - rx) / max(rx, 0.5)) ** 2 <= 1.0


def _stamp(layer, shape_mask, r0, c0, value=True):
    h, w = shape_mask.shape
    n, m = layer.shape
    rs, cs = max(r0, 0), max(c0, 0)
    re, ce = min(r0 + h, n), min(c0 + w, m)
    if rs >= re or cs >= ce:
        return
    sub = shape_mask[rs - r0:re - r0, cs - c0:ce - c0]
    layer[rs:re, cs:ce][sub] = value


def generate_page(spec: SynthSpec) -> SynthPage:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n, spec.m
    h, gap = spec.line_height, spec.gap
    pitch = h + gap
    top0 = (n - spec.line_count * pitch) // 2 + gap // 2
    spur_max = max(2, int(0.35 * gap) - spec.skew)

    line_ids = np.full((n, m), -1, dtype=np.int32)
    comment = np.zeros((n, m), dtype=bool)
    decoration = np.zeros((n, m), dtype=bool)
    connectors = []  # per line: list of ((r0, c0), (r1, c1)) GT connector segments
    bands = []
    left, right = int(0.07 * m), m - int(0.05 * m)
    centre_col = (m - 1) / 2

    for j in range(spec.line_count):
        top = top0 + j * pitch
        bands.append((top, top + h))
        drift = rng.uniform(-spec.skew, spec.skew) if spec.skew else 0.0

        def centre_row(c, top=top, drift=drift):
            return top + (h - 1) / 2 + drift * (c - centre_col) / centre_col

        segs = []
        col = left + int(rng.integers(0, max(1, spec.blob_size)))
        is_last = j == spec.line_count - 1
        stop = right if not is_last else int(left + (right - left) * rng.uniform(0.4, 1.0))
        first_col = last_col = None
        for _ in range(int(rng.integers(spec.words_per_line[0], spec.words_per_line[1] + 1))):
            for _ in range(int(rng.integers(spec.word_length[0], spec.word_length[1] + 1))):
                lw = max(3, int(round(spec.blob_size * rng.uniform(0.6, 1.2))))
                lh = max(3, int(round(h * rng.uniform(0.55, 0.9))))
                if col + lw > stop:
                    break
                cr = centre_row(col + lw / 2)
                r0 = int(round(cr - (lh - 1) / 2))
                shape = _ellipse(lh, lw) if rng.random() < 0.5 else np.ones((lh, lw), dtype=bool)
                _stamp(line_ids, shape, r0, col, j)
                first_col = col if first_col is None else first_col
                last_col = col + lw - 1
                if rng.random() < spec.spur_prob:
                    kind = rng.choice(["ascender", "descender", "dot"])
                    sw = int(rng.integers(2, 4))
                    sc = col + int(rng.integers(0, max(1, lw - sw)))
                    length = int(rng.integers(max(2, spur_max // 3), spur_max + 1))
                    band_top = int(round(cr - (h - 1) / 2))
                    band_bot = band_top + h
                    if kind == "ascender":
                        # reaches from inside the letter up past the band edge
                        _stamp(line_ids, np.ones((r0 + lh // 2 - (band_top - length), sw), bool), band_top - length, sc, j)
                    elif kind == "descender":
                        r1 = r0 + lh // 2
                        _stamp(line_ids, np.ones((band_bot + length - r1, sw), bool), r1, sc, j)
                    else:
                        ds = 5
                        dr = r0 - 3 - ds
                        if dr > band_top - spur_max:
                            _stamp(line_ids, np.ones((ds, ds), bool), dr, sc, j)
                            segs.append(((dr + ds // 2, sc + ds // 2), (int(round(cr)), sc + ds // 2)))
                col += lw + int(rng.integers(2, 5))
            else:
                col += int(round(spec.blob_size * rng.uniform(0.8, 1.6)))
                continue
            break

        if first_col is None:
            raise InfeasibleSpec(f"line {j} has no room for a single letter")
        # core connector through the band, following the drift
        for c in range(first_col, last_col):
            segs.append(((int(round(centre_row(c))), c), (int(round(centre_row(c + 1))), c + 1)))
        connectors.append(segs)

        if rng.random() < spec.decoration_prob:
            dw = max(4, int(0.6 * left))
            dh = min(h + gap // 3, int(1.2 * h))
            _stamp(decoration, _ellipse(dh, dw), top + (h - dh) // 2, max(1, (left - dw) // 2))

    text = line_ids >= 0
    for j in range(spec.line_count - 1):
        if rng.random() < spec.gloss_prob:
            g_top = bands[j][1] + int(0.38 * gap)
            g_h = max(2, int(0.24 * gap))
            col = left + int(rng.integers(0, max(1, (right - left) // 3)))
            for _ in range(int(rng.integers(4, 12))):
                gw = max(2, int(round(spec.blob_size * rng.uniform(0.3, 0.7))))
                if col + gw > right:
                    break
                gh = max(2, int(round(g_h * rng.uniform(0.6, 1.0))))
                _stamp(comment, _ellipse(gh, gw), g_top + (g_h - gh) // 2, col)
                col += gw + int(rng.integers(2, 6))
    comment &= ~text
    decoration &= ~text & ~comment

    background = ~(text | comment | decoration)
    boundary = text & ~ndimage.binary_erosion(text, structure=np.ones((3, 3), bool), border_value=0)
    labels = LabelImage({BACKGROUND: background, COMMENT: comment, DECORATION: decoration, MAIN_TEXT: text}, boundary)

    gt = [_gt_polygon(line_ids == j, connectors[j]) for j in range(spec.line_count)]

    cs = connected_components(text, 8)
    component_lines = np.full(cs.count, -1, dtype=np.int64)
    objects = ndimage.find_objects(cs.labels)
    for i, sl in enumerate(objects):
        ids = line_ids[sl][cs.labels[sl] == i + 1]
        component_lines[i] = ids[0]
    return SynthPage(spec, labels, line_ids, gt, component_lines, bands)


def _gt_polygon(line_mask, segments):
    rows, cols = np.nonzero(line_mask)
    r0, r1 = rows.min() - 3, rows.max() + 4
    c0, c1 = cols.min() - 3, cols.max() + 4
    n, m = line_mask.shape
    r0, c0, r1, c1 = max(r0, 0), max(c0, 0), min(r1, n), min(c1, m)
    canvas = line_mask[r0:r1, c0:c1].copy()
    for (a_r, a_c), (b_r, b_c) in segments:
        steps = max(abs(b_r - a_r), abs(b_c - a_c), 1)
        t = np.linspace(0, 1, steps + 1)
        rr = np.round(a_r + t * (b_r - a_r)).astype(int) - r0
        cc = np.round(a_c + t * (b_c - a_c)).astype(int) - c0
        canvas[rr, cc] = True
    canvas = ndimage.binary_dilation(canvas, structure=np.ones((3, 3), bool))
    return [(r + r0, c + c0) for r, c in trace_outer_contour(canvas)]


def corpus_specs(count: int = 50, seed: int = 0, n: int = 1400, m: int = 1000,
                 lines: tuple = (3, 12), gloss_prob: float = 0.5, decoration_prob: float = 0.3,
                 spur_prob: float = 0.1, skew: int = 2, margin: int = 60) -> list[SynthSpec]:
    """Page specs for a seeded corpus.

    Lines fill the page: the pitch is the usable height divided by the line
    count, and the gap is at least 0.6 times the line height.
    """
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(count):
        L = int(rng.integers(lines[0], lines[1] + 1))
        pitch = (n - 2 * margin) // L
        ratio = rng.uniform(0.6, 1.4)
        h = int(min(60, pitch / (1 + ratio)))
        gap = pitch - h
        specs.append(SynthSpec(
            seed=int(rng.integers(0, 2**31)), n=n, m=m, line_count=L, line_height=h, gap=gap,
            blob_size=max(6, int(h * rng.uniform(0.35, 0.5))), gloss_prob=gloss_prob,
            decoration_prob=decoration_prob, spur_prob=spur_prob,
            skew=min(skew, max(0, int(0.14 * gap) - 1)),
        ))
    return specs


def spec_to_dict(spec: SynthSpec) -> dict:
    d = asdict(spec)
    d["words_per_line"] = list(spec.words_per_line)
    d["word_length"] = list(spec.word_length)
    return d
