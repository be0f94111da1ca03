"""Grid primitives shared by the pipeline.

Rasters are plain 2-D numpy arrays indexed ``[row, col]``. Points are
``(row, col)`` pairs; centroids are real-valued.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

__all__ = [
    "ComponentSet",
    "EmptyPageError",
    "ContourError",
    "connected_components",
    "distance_to_nearest",
    "box_filter",
    "plus_filter",
    "trace_outer_contour",
    "polygon_mask",
    "polygon_boundary_mask",
]

_STRUCT = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


class EmptyPageError(ValueError):
    """Raised when a page carries no text components."""

    def __init__(self, msg="no components on page"):
        super().__init__(msg)


class ContourError(ValueError):
    pass


@dataclass(frozen=True)
class ComponentSet:
    """Labelled connected components of a binary mask.

    ``labels`` holds 0 for background and ``i + 1`` for component ``i``.
    """

    labels: np.ndarray
    centroids: np.ndarray  # (count, 2) float, (row, col)
    areas: np.ndarray  # (count,) int

    @property
    def count(self) -> int:
        return len(self.areas)

    @property
    def shape(self):
        return self.labels.shape

    def pixels(self, i: int) -> np.ndarray:
        """(k, 2) array of the (row, col) pixels of component ``i``."""
        return np.argwhere(self.labels == i + 1)

    def subset(self, keep: np.ndarray) -> "ComponentSet":
        """Components selected by boolean ``keep``, relabelled in order."""
        keep = np.asarray(keep, dtype=bool)
        remap = np.zeros(self.count + 1, dtype=self.labels.dtype)
        remap[1:][keep] = np.arange(1, keep.sum() + 1, dtype=self.labels.dtype)
        return ComponentSet(remap[self.labels], self.centroids[keep], self.areas[keep])


def connected_components(mask, connectivity: int = 8) -> ComponentSet:
    """Label the foreground of ``mask``.

    Components are numbered in raster order of their first pixel.
    """
    mask = np.asarray(mask).astype(bool)
    if connectivity not in _STRUCT:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, count = ndimage.label(mask, structure=_STRUCT[connectivity])
    if count == 0:
        return ComponentSet(labels, np.zeros((0, 2)), np.zeros(0, dtype=np.int64))
    flat = labels.ravel()
    rows, cols = np.indices(labels.shape)
    areas = np.bincount(flat, minlength=count + 1)[1:]
    rsum = np.bincount(flat, weights=rows.ravel(), minlength=count + 1)[1:]
    csum = np.bincount(flat, weights=cols.ravel(), minlength=count + 1)[1:]
    centroids = np.column_stack([rsum / areas, csum / areas])
    return ComponentSet(labels, centroids, areas.astype(np.int64))


@numba.njit(cache=True)
def _envelope_sq(sr, sc, n, m):
    # per row, lower envelope of the parabolas (c - sc)^2 + (r - sr)^2;
    # seeds arrive sorted by column
    k = sr.shape[0]
    out = np.empty((n, m))
    v = np.empty(k)
    hgt = np.empty(k)
    z = np.empty(k + 1)
    for r in range(n):
        q = 0
        for i in range(k):
            hi = (r - sr[i]) ** 2
            ci = sc[i]
            if q > 0 and v[q - 1] == ci:
                if hi >= hgt[q - 1]:
                    continue
                q -= 1
            while q > 0:
                x = ((hi + ci * ci) - (hgt[q - 1] + v[q - 1] * v[q - 1])) / (2.0 * (ci - v[q - 1]))
                if x <= z[q - 1]:
                    q -= 1
                else:
                    break
            v[q] = ci
            hgt[q] = hi
            if q == 0:
                z[q] = -np.inf
            else:
                z[q] = ((hi + ci * ci) - (hgt[q - 1] + v[q - 1] * v[q - 1])) / (2.0 * (ci - v[q - 1]))
            q += 1
        z[q] = np.inf
        j = 0
        for c in range(m):
            while z[j + 1] < c:
                j += 1
            d = c - v[j]
            out[r, c] = d * d + hgt[j]
    return out


def distance_to_nearest(seeds, n: int, m: int) -> np.ndarray:
    """Exact Euclidean distance from every pixel of an n x m grid to the
    closest of ``seeds`` (real-valued (row, col) points).

    Row by row, the squared distance is the lower envelope of one parabola
    per seed, so the cost is O(n * (seeds + m)).
    """
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)
    if len(seeds) == 0:
        raise EmptyPageError()
    order = np.lexsort((seeds[:, 0], seeds[:, 1]))
    sq = _envelope_sq(np.ascontiguousarray(seeds[order, 0]), np.ascontiguousarray(seeds[order, 1]), n, m)
    return np.sqrt(sq)


def _window(k: int) -> tuple[int, int]:
    # offsets [-lo, hi]; even k reaches one further up/left than down/right
    lo = k // 2
    return lo, k - 1 - lo


def _clipped_sum_1d(csum: np.ndarray, size: int, k: int, axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Window sums along ``axis`` from a zero-padded cumulative sum."""
    lo, hi = _window(k)
    idx = np.arange(size)
    start = np.clip(idx - lo, 0, size)
    stop = np.clip(idx + hi + 1, 0, size)
    sums = np.take(csum, stop, axis=axis) - np.take(csum, start, axis=axis)
    return sums, (stop - start)


def box_filter(r, k: int) -> np.ndarray:
    """k x k mean filter, renormalized over in-bounds cells at the border.

    Uses a 2-D summed-area table so the cost per pixel does not depend on k.
    """
    if k < 1:
        raise ValueError("kernel side must be >= 1")
    r = np.asarray(r, dtype=float)
    n, m = r.shape
    sat = np.zeros((n + 1, m + 1))
    sat[1:, 1:] = r.cumsum(0).cumsum(1)
    lo, hi = _window(k)
    r0 = np.clip(np.arange(n) - lo, 0, n)
    r1 = np.clip(np.arange(n) + hi + 1, 0, n)
    c0 = np.clip(np.arange(m) - lo, 0, m)
    c1 = np.clip(np.arange(m) + hi + 1, 0, m)
    total = (
        sat[np.ix_(r1, c1)] - sat[np.ix_(r0, c1)] - sat[np.ix_(r1, c0)] + sat[np.ix_(r0, c0)]
    )
    count = np.outer(r1 - r0, c1 - c0)
    return total / count


def plus_filter(r, g: int) -> np.ndarray:
    """Mean over a centred '+' of arm length g (row segment union column
    segment, centre counted once), renormalized over in-bounds cells."""
    if g < 1:
        raise ValueError("kernel side must be >= 1")
    r = np.asarray(r, dtype=float)
    n, m = r.shape
    rowc = np.zeros((n, m + 1))
    rowc[:, 1:] = r.cumsum(1)
    colc = np.zeros((n + 1, m))
    colc[1:, :] = r.cumsum(0)
    hsum, hcnt = _clipped_sum_1d(rowc, m, g, axis=1)
    vsum, vcnt = _clipped_sum_1d(colc, n, g, axis=0)
    count = hcnt[None, :] + vcnt[:, None] - 1
    return (hsum + vsum - r) / count


# Moore neighbourhood, clockwise in image coordinates starting west.
_MOORE = [(0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1)]


def trace_outer_contour(mask) -> list[tuple[int, int]]:
    """Ordered outer boundary of the single 8-connected component in ``mask``.

    Moore-neighbour tracing, stopped by Jacob's criterion: the start pixel is
    re-entered from the same direction it was first left.
    """
    mask = np.asarray(mask).astype(bool)
    cs = connected_components(mask, 8)
    if cs.count == 0:
        raise ContourError("empty line")
    if cs.count > 1:
        raise ContourError("disconnected line")

    n, m = mask.shape
    padded = np.zeros((n + 2, m + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    fg = np.argwhere(padded)
    start = (int(fg[0, 0]), int(fg[0, 1]))  # topmost-leftmost; west is background
    # backtrack direction: we arrived at start from its west neighbour
    contour = [start]
    cur = start
    back = 0
    first_move = None
    while True:
        found = None
        for step in range(1, 9):
            d = (back + step) % 8
            nr, nc = cur[0] + _MOORE[d][0], cur[1] + _MOORE[d][1]
            if padded[nr, nc]:
                found = (d, (nr, nc))
                break
        if found is None:  # isolated pixel
            break
        d, nxt = found
        if cur == start and first_move is not None and d == first_move:
            break
        if first_move is None:
            first_move = d
        # the cell examined just before nxt is background; resume from it
        prev_bg = (d + 7) % 8
        br, bc = cur[0] + _MOORE[prev_bg][0], cur[1] + _MOORE[prev_bg][1]
        back = _MOORE.index((br - nxt[0], bc - nxt[1]))
        cur = nxt
        contour.append(cur)
    if len(contour) > 1 and contour[-1] == start:
        contour.pop()
    return [(r - 1, c - 1) for r, c in contour]


def _edges(vertices):
    v = np.asarray(vertices, dtype=np.int64).reshape(-1, 2)
    return v, np.roll(v, -1, axis=0)


def _boundary_points(a, b) -> np.ndarray:
    """All lattice points on the segments a[i] -> b[i]."""
    d = b - a
    steps = np.gcd(np.abs(d[:, 0]), np.abs(d[:, 1]))
    unit = d // np.maximum(steps, 1)[:, None]
    reps = steps + 1
    edge = np.repeat(np.arange(len(a)), reps)
    t = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
    return a[edge] + t[:, None] * unit[edge]


def polygon_boundary_mask(vertices, shape) -> np.ndarray:
    """Lattice points lying exactly on the polygon's edges (integer vertices)."""
    n, m = shape
    out = np.zeros(shape, dtype=bool)
    a, b = _edges(vertices)
    if len(a) == 0:
        return out
    pts = _boundary_points(a, b)
    ok = (pts[:, 0] >= 0) & (pts[:, 0] < n) & (pts[:, 1] >= 0) & (pts[:, 1] < m)
    out[pts[ok, 0], pts[ok, 1]] = True
    return out


def polygon_mask(vertices, shape, include_boundary: bool = False) -> np.ndarray:
    """Pixels (by centre) inside a closed polygon of integer (row, col) vertices.

    Even-odd rule. Pixels exactly on an edge are excluded unless
    ``include_boundary``.
    """
    n, m = shape
    out = np.zeros(shape, dtype=bool)
    a, b = _edges(vertices)
    if len(a) == 0:
        return out
    # work inside the clipped bounding box
    lo_r, lo_c = np.maximum(a.min(axis=0), 0)
    hi_r, hi_c = np.minimum(a.max(axis=0) + 1, (n, m))
    if lo_r >= hi_r or lo_c >= hi_c:
        return out
    h, w = hi_r - lo_r, hi_c - lo_c
    a = a - (lo_r, lo_c)
    b = b - (lo_r, lo_c)

    pts = _boundary_points(a, b)
    ok = (pts[:, 0] >= 0) & (pts[:, 0] < h) & (pts[:, 1] >= 0) & (pts[:, 1] < w)
    boundary = np.zeros((h, w), dtype=bool)
    boundary[pts[ok, 0], pts[ok, 1]] = True

    inside = np.zeros((h, w), dtype=bool)
    if len(a) >= 3:
        r0, c0 = a[:, 0].astype(float), a[:, 1].astype(float)
        r1, c1 = b[:, 0].astype(float), b[:, 1].astype(float)
        keep = r0 != r1
        r0, c0, r1, c1 = r0[keep], c0[keep], r1[keep], c1[keep]
        # each edge crosses the rows of the half-open span [min, max)
        row_start = np.clip(np.minimum(r0, r1), 0, h).astype(np.int64)
        row_stop = np.clip(np.maximum(r0, r1), 0, h).astype(np.int64)
        counts = np.maximum(row_stop - row_start, 0)
        if counts.sum():
            toggles = np.zeros((h, w + 1), dtype=np.int8)
            edge_id = np.repeat(np.arange(len(counts)), counts)
            offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
            rows = row_start[edge_id] + offs
            t = (rows - r0[edge_id]) / (r1[edge_id] - r0[edge_id])
            x = c0[edge_id] + t * (c1[edge_id] - c0[edge_id])
            # a crossing at x flips parity for every column c > x
            first = np.clip(np.floor(x).astype(np.int64) + 1, 0, w)
            np.add.at(toggles, (rows, first), 1)
            inside = (np.cumsum(toggles[:, :w], axis=1, dtype=np.int32) % 2).astype(bool)
    region = inside | boundary if include_boundary else inside & ~boundary
    out[lo_r:hi_r, lo_c:hi_c] = region
    return out
