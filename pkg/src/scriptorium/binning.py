"""Group component centroids into text lines by the seams below them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LineBin:
    key: int  # number of seams below every member
    members: list  # component indices, ascending
    centroids: np.ndarray  # (len(members), 2)


def _seam_matrix(seams) -> np.ndarray:
    return np.vstack([np.asarray(s.rows) for s in seams])


def seams_below_all(points, seams) -> np.ndarray:
    """Per point, the number of seams whose row at the point's (rounded)
    column is strictly greater (lower on the page) than the point's row."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if not seams or len(points) == 0:
        return np.zeros(len(points), dtype=np.int64)
    rows = _seam_matrix(seams)
    cols = np.clip(np.floor(points[:, 1] + 0.5).astype(np.int64), 0, rows.shape[1] - 1)
    return (rows[:, cols] > points[None, :, 0]).sum(axis=0)


def seams_below(p, seams) -> int:
    return int(seams_below_all([p], seams)[0])


def bin_centroids(centroids, seams, small_bin_threshold: int = 2) -> list[LineBin]:
    """Bin centroids by seams-below count and dissolve undersized bins.

    A bin with at most ``small_bin_threshold`` members is dissolved (smallest
    first, lower key first on ties); each member joins the bin holding its
    nearest centroid outside the dissolved bin. Bins come back top line first.
    """
    centroids = np.asarray(centroids, dtype=float).reshape(-1, 2)
    if len(centroids) == 0:
        return []
    keys = seams_below_all(centroids, seams)
    assign = keys.copy()

    while True:
        labels, sizes = np.unique(assign, return_counts=True)
        if len(labels) <= 1:
            break
        small = [(size, key) for key, size in zip(labels.tolist(), sizes.tolist()) if size <= small_bin_threshold]
        if not small:
            break
        _, key = min(small)
        inside = np.flatnonzero(assign == key)
        outside = np.flatnonzero(assign != key)
        d = np.linalg.norm(centroids[inside, None, :] - centroids[None, outside, :], axis=2)
        for row, member in enumerate(inside):
            # ties resolved by coordinates so the result ignores input order
            cand = outside[d[row] == d[row].min()]
            pick = min(cand.tolist(), key=lambda j: (centroids[j, 0], centroids[j, 1]))
            assign[member] = assign[pick]

    bins = []
    for key in sorted(np.unique(assign).tolist(), reverse=True):
        members = np.flatnonzero(assign == key)
        bins.append(LineBin(int(key), members.tolist(), centroids[members]))
    return bins
