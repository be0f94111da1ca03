"""Turn a bin of components into one enclosing polygon.

The bin's components and the minimum spanning tree over their centroids are
drawn onto a blank canvas, the canvas is blurred with a 5 x 5 mean filter,
and the outline of the single resulting blob is traced.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import box_filter, connected_components, trace_outer_contour

BLUR = 5
PAD = BLUR  # crop margin around a line so blurring never hits the crop edge


class FragmentationError(ValueError):
    pass


@dataclass
class LinePolygon:
    index: int
    vertices: list  # [(row, col), ...] closed, first vertex not repeated
    members: list


def minimum_spanning_tree(centroids) -> list[tuple[int, int, float]]:
    """Prim's algorithm on the complete Euclidean graph.

    Returns edges ``(a, b, weight)`` with ``a < b``. Equal-weight choices go
    to the lexicographically smallest ``(a, b)``.
    """
    pts = np.asarray(centroids, dtype=float).reshape(-1, 2)
    v = len(pts)
    if v <= 1:
        return []
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    in_tree = np.zeros(v, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    parent = np.zeros(v, dtype=np.int64)
    edges = []
    for _ in range(v - 1):
        cand = np.flatnonzero(~in_tree)
        w = best[cand]
        ties = cand[w == w.min()]
        pairs = sorted((min(parent[j], j), max(parent[j], j), j) for j in ties.tolist())
        a, b, j = pairs[0]
        edges.append((int(a), int(b), float(dist[a, b])))
        in_tree[j] = True
        closer = (dist[j] < best) | ((dist[j] == best) & (j < parent))
        closer &= ~in_tree
        best = np.where(closer, dist[j], best)
        parent = np.where(closer, j, parent)
    return sorted(edges)


def bresenham(p0, p1) -> np.ndarray:
    """Integer (row, col) cells of the segment between two points."""
    r0, c0 = (int(round(x)) for x in p0)
    r1, c1 = (int(round(x)) for x in p1)
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    err = dc - dr
    out = []
    r, c = r0, c0
    while True:
        out.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
    return np.asarray(out, dtype=np.int64)


def render_line_canvas(members, labels, centroids, edges, shape=None, stroke: int = 3, window=None):
    """Binary canvas of the member components plus the MST edges.

    ``labels`` is the page labelling (component ``i`` has label ``i + 1``);
    ``centroids`` are the centroids of ``members`` in the same order, and
    edge endpoints index into that order. When ``window`` ``(r0, c0, r1, c1)``
    is given the canvas covers only that part of the page.
    """
    if shape is None:
        shape = labels.shape
    if window is None:
        window = (0, 0, shape[0], shape[1])
    r0, c0, r1, c1 = window
    sub = labels[r0:r1, c0:c1]
    canvas = np.isin(sub, np.asarray(members, dtype=np.int64) + 1)
    if edges:
        line = np.zeros_like(canvas)
        for a, b, _ in edges:
            cells = bresenham(centroids[a], centroids[b]) - (r0, c0)
            ok = (cells[:, 0] >= 0) & (cells[:, 0] < r1 - r0) & (cells[:, 1] >= 0) & (cells[:, 1] < c1 - c0)
            line[cells[ok, 0], cells[ok, 1]] = True
        if stroke > 1:
            line = ndimage.binary_dilation(line, structure=np.ones((stroke, stroke), dtype=bool))
        canvas |= line
    return canvas.astype(np.uint8)


def extract_polygon(canvas, offset=(0, 0)) -> list[tuple[int, int]]:
    """Blur, threshold at > 0 and trace the one remaining component."""
    blurred = box_filter(canvas, BLUR) > 0
    cs = connected_components(blurred, 8)
    if cs.count == 0:
        raise FragmentationError("empty line")
    if cs.count > 1:
        raise FragmentationError(f"canvas splits into {cs.count} components")
    r0, c0 = offset
    return [(r + r0, c + c0) for r, c in trace_outer_contour(blurred)]


def line_window(members, cs, shape, pad: int = PAD, objects=None):
    """Bounding window of the members' pixels, padded."""
    if objects is None:
        objects = ndimage.find_objects(cs.labels)
    r0 = min(objects[i][0].start for i in members)
    r1 = max(objects[i][0].stop for i in members)
    c0 = min(objects[i][1].start for i in members)
    c1 = max(objects[i][1].stop for i in members)
    n, m = shape
    return max(0, r0 - pad), max(0, c0 - pad), min(n, r1 + pad), min(m, c1 + pad)


def bin_polygon(index, members, cs, stroke: int = 3, objects=None) -> LinePolygon:
    """Polygon for one line; doubles the MST stroke once if the canvas breaks up."""
    cents = cs.centroids[members]
    edges = minimum_spanning_tree(cents)
    window = line_window(members, cs, cs.shape, pad=PAD + 2 * stroke, objects=objects)
    for width in (stroke, 2 * stroke):
        canvas = render_line_canvas(members, cs.labels, cents, edges, stroke=width, window=window)
        try:
            verts = extract_polygon(canvas, offset=window[:2])
            return LinePolygon(index, verts, list(members))
        except FragmentationError:
            continue
    raise FragmentationError(f"line fragmentation in bin {index}")


def simplify(vertices, tolerance: float = 1.5) -> list[tuple[int, int]]:
    """Douglas-Peucker decimation of a closed polygon."""
    pts = np.asarray(vertices, dtype=float)
    if len(pts) <= 4:
        return [tuple(map(int, p)) for p in pts]
    # split the ring at the vertex farthest from the first one
    far = int(np.argmax(np.linalg.norm(pts - pts[0], axis=1)))

    def dp(seg):
        if len(seg) <= 2:
            return [0, len(seg) - 1]
        a, b = seg[0], seg[-1]
        ab = b - a
        norm = np.hypot(*ab)
        if norm == 0:
            d = np.linalg.norm(seg - a, axis=1)
        else:
            d = np.abs(ab[0] * (seg[:, 1] - a[1]) - ab[1] * (seg[:, 0] - a[0])) / norm
        i = int(np.argmax(d))
        if d[i] <= tolerance:
            return [0, len(seg) - 1]
        left = dp(seg[: i + 1])
        right = dp(seg[i:])
        return left[:-1] + [i + k for k in right]

    first = dp(pts[: far + 1])
    ring = np.vstack([pts[far:], pts[:1]])
    second = dp(ring)
    keep = first[:-1] + [far + k for k in second[:-1]]
    return [tuple(map(int, pts[i])) for i in keep]
