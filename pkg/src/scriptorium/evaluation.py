"""Line IU and Pixel IU between predicted and ground-truth line polygons.

Each polygon is reduced to the main-text pixels strictly inside it. Lines
are paired one-to-one, greedily by descending IU; a pair whose IU reaches
the match threshold is a true positive.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .raster import polygon_mask

DEFAULT_THETA = 0.75


def _key(x):
    return tuple(x) if isinstance(x, (list, tuple, np.ndarray)) else x


def iu(a, b) -> float:
    """|a & b| / |a | b| for two pixel sets (iterables or boolean arrays)."""
    if isinstance(a, np.ndarray) and a.dtype == bool:
        inter = int(np.logical_and(a, b).sum())
        union = int(np.logical_or(a, b).sum())
    else:
        sa = a if isinstance(a, (set, frozenset)) else {_key(x) for x in a}
        sb = b if isinstance(b, (set, frozenset)) else {_key(x) for x in b}
        inter, union = len(sa & sb), len(sa | sb)
    return 1.0 if union == 0 else inter / union


@dataclass
class PageReport:
    name: str
    tp: int
    fp: int
    fn: int
    line_iu: float
    pixel_iu: float
    matches: list = field(default_factory=list)  # (pred index, gt index, iu)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class CorpusReport:
    pages: list

    @property
    def line_iu(self) -> float:
        return float(np.mean([p.line_iu for p in self.pages])) if self.pages else 0.0

    @property
    def pixel_iu(self) -> float:
        return float(np.mean([p.pixel_iu for p in self.pages])) if self.pages else 0.0

    def as_dict(self) -> dict:
        return {
            "pages": [p.as_dict() for p in self.pages],
            "corpus": {"line_iu": self.line_iu, "pixel_iu": self.pixel_iu, "pages": len(self.pages)},
        }

    def table(self) -> str:
        rows = [f"{'page':<32} {'TP':>4} {'FP':>4} {'FN':>4} {'line IU':>8} {'pixel IU':>9}"]
        for p in self.pages:
            rows.append(f"{p.name:<32} {p.tp:>4} {p.fp:>4} {p.fn:>4} {p.line_iu:>8.4f} {p.pixel_iu:>9.4f}")
        rows.append(f"{'corpus mean':<32} {'':>4} {'':>4} {'':>4} {self.line_iu:>8.4f} {self.pixel_iu:>9.4f}")
        return "\n".join(rows)


def line_pixels(polygons, text, shape=None) -> list[np.ndarray]:
    """Sorted flat indices of the text pixels strictly inside each polygon."""
    text = np.asarray(text).astype(bool)
    shape = text.shape if shape is None else shape
    out = []
    for verts in polygons:
        verts = getattr(verts, "vertices", verts)
        inside = polygon_mask(verts, shape) & text
        out.append(np.flatnonzero(inside))
    return out


def evaluate_page(pred, gt, text, theta: float = DEFAULT_THETA, name: str = "page", shape=None) -> PageReport:
    """Score predicted against ground-truth polygons on one page.

    ``pred`` and ``gt`` are lists of (row, col) vertex lists (or objects with
    a ``vertices`` attribute); ``text`` is the main-text mask.
    """
    if not 0 < theta <= 1:
        raise ValueError("match threshold must lie in (0, 1]")
    text = np.asarray(text).astype(bool)
    if shape is not None and tuple(shape) != text.shape:
        raise ValueError(f"page shape {tuple(shape)} differs from mask shape {text.shape}")
    P = line_pixels(pred, text)
    G = line_pixels(gt, text)

    pairs = []
    for i, p in enumerate(P):
        for j, g in enumerate(G):
            inter = len(np.intersect1d(p, g, assume_unique=True))
            if inter == 0:
                continue
            union = len(p) + len(g) - inter
            pairs.append((inter / union, i, j, inter, union))
    # descending IU; index order on ties keeps the result deterministic
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    used_p, used_g = set(), set()
    matches = []
    inter_sum = union_sum = 0
    for score, i, j, inter, union in pairs:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        matches.append((i, j, score))
        inter_sum += inter
        union_sum += union

    tp = sum(1 for _, _, s in matches if s >= theta)
    fp = len(P) - tp
    fn = len(G) - tp
    denom = tp + fp + fn
    line = 1.0 if denom == 0 else tp / denom
    if union_sum:
        pixel = inter_sum / union_sum
    else:
        pixel = 1.0 if not P and not G else 0.0
    return PageReport(name, tp, fp, fn, line, pixel, matches)
