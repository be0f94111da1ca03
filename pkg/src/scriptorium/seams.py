"""Horizontal seams through a normalized energy map.

A seam holds one row per column and moves at most one row between
neighbouring columns. Its cost is the energy of every pixel entered after the
start pixel plus ``beta`` for each one-row deviation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numba
import numpy as np

LTR = "left-to-right"
RTL = "right-to-left"

MAX_MERGE_PASSES = 10


@dataclass(frozen=True)
class SeamParams:
    alpha: int = 120
    beta: float = 3.0

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


@dataclass(frozen=True)
class Seam:
    rows: np.ndarray
    direction: str
    start_row: int
    cost: float

    @property
    def fitness(self) -> float:
        return 1.0 / self.cost if self.cost > 0 else float("inf")

    @property
    def deviation(self) -> int:
        return int(np.abs(np.diff(self.rows)).sum())


@numba.njit(cache=True)
def _cast(E, starts, beta):
    n, m = E.shape
    k = starts.shape[0]
    out = np.empty((k, m), dtype=np.int64)
    costs = np.empty(k)
    moves = np.zeros((m, n), dtype=np.int8)
    prev = np.empty(n)
    cur = np.empty(n)
    inf = np.inf
    for s in range(k):
        start = starts[s]
        prev[:] = inf
        prev[start] = 0.0
        for c in range(1, m):
            lo = max(0, start - c)
            hi = min(n - 1, start + c)
            for r in range(n):
                cur[r] = inf
            for r in range(lo, hi + 1):
                # preference on ties: stay, then up (-1), then down (+1)
                best = prev[r]
                mv = 0
                if r + 1 < n:
                    cand = prev[r + 1] + beta
                    if cand < best:
                        best = cand
                        mv = -1
                if r - 1 >= 0:
                    cand = prev[r - 1] + beta
                    if cand < best:
                        best = cand
                        mv = 1
                cur[r] = best + E[r, c]
                moves[c, r] = mv
            for r in range(n):
                prev[r] = cur[r]
        end = start
        best = prev[start]
        for r in range(n):
            v = prev[r]
            if v < best or (v == best and (abs(r - start) < abs(end - start)
                                           or (abs(r - start) == abs(end - start) and r < end))):
                best = v
                end = r
        out[s, m - 1] = end
        for c in range(m - 1, 0, -1):
            out[s, c - 1] = out[s, c] - moves[c, out[s, c]]
        costs[s] = best
    return out, costs


def path_cost(E, rows, beta) -> float:
    """Cost of a left-to-right path, summed in column order."""
    total = 0.0
    for c in range(1, len(rows)):
        total = (total + beta * abs(int(rows[c]) - int(rows[c - 1]))) + E[rows[c], c]
    return total


def _cast_many(E, starts, direction, beta):
    E = np.ascontiguousarray(E, dtype=np.float64)
    if direction == RTL:
        E = np.ascontiguousarray(E[:, ::-1])
    elif direction != LTR:
        raise ValueError(f"unknown direction {direction!r}")
    starts = np.asarray(starts, dtype=np.int64)
    if len(starts) and (starts.min() < 0 or starts.max() >= E.shape[0]):
        raise ValueError("start row outside the page")
    rows, costs = _cast(E, starts, float(beta))
    seams = []
    for start, r, cost in zip(starts.tolist(), rows, costs.tolist()):
        if direction == RTL:
            r = r[::-1].copy()
        seams.append(Seam(r, direction, start, cost))
    return seams


def cast_seam(E, start_row: int, direction: str = LTR, beta: float = 3.0) -> Seam:
    """Minimum-cost seam pinned at ``start_row`` on the first column of travel."""
    return _cast_many(E, [start_row], direction, beta)[0]


def start_rows(n: int, alpha: int) -> list[int]:
    return list(range(0, n, alpha))


def cast_all(E, params: SeamParams = SeamParams()) -> list[Seam]:
    """Seams from every ``alpha``-th row, in both directions."""
    starts = start_rows(E.shape[0], params.alpha)
    return _cast_many(E, starts, LTR, params.beta) + _cast_many(E, starts, RTL, params.beta)


def crossings(a, b) -> np.ndarray:
    """Columns where two row paths meet or swap sides.

    A column counts when the rows are equal there, or when the sign of
    ``a - b`` differs from its last nonzero value.
    """
    d = np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)
    if d.min() > 0 or d.max() < 0:
        return np.zeros(0, dtype=np.int64)
    sgn = np.sign(d)
    nz = sgn != 0
    idx = np.arange(len(sgn))
    last = np.maximum.accumulate(np.where(nz, idx, -1))
    prev = np.concatenate([[-1], last[:-1]])
    prev_sign = np.where(prev >= 0, sgn[np.maximum(prev, 0)], 0)
    hit = ~nz | ((prev_sign != 0) & (sgn != prev_sign))
    return idx[hit]


def _merge_onto(strong, weak):
    """Copy ``strong`` into ``weak`` inside every loop the two paths enclose."""
    cross = crossings(strong, weak)
    if len(cross) < 2:
        return weak
    out = weak.copy()
    for c0, c1 in zip(cross[:-1], cross[1:]):
        # a sign swap without a shared pixel puts c0 itself inside the loop
        lo = c0 + 1 if strong[c0] == weak[c0] else c0
        out[lo:c1] = strong[lo:c1]
    return out


def merge_seams(seams: list[Seam]) -> list[Seam]:
    """Resolve seams that cross each other at least twice.

    The fitter seam of each such pair is kept and the other takes its rows
    between consecutive crossings. Passes repeat until nothing changes or
    ``MAX_MERGE_PASSES`` is reached. Output order follows the input.
    """
    if not seams:
        return []
    m = len(seams[0].rows)
    if any(len(s.rows) != m for s in seams):
        raise ValueError("seams span different widths")
    order = sorted(range(len(seams)), key=lambda i: (-seams[i].fitness, seams[i].start_row, seams[i].direction))
    rows = [np.asarray(s.rows, dtype=np.int64).copy() for s in seams]
    for _ in range(MAX_MERGE_PASSES):
        changed = False
        for a_pos, i in enumerate(order):
            for j in order[a_pos + 1:]:
                merged = _merge_onto(rows[i], rows[j])
                if merged is not rows[j] and not np.array_equal(merged, rows[j]):
                    rows[j] = merged
                    changed = True
        if not changed:
            break
    for r in rows:
        if np.abs(np.diff(r)).max(initial=0) > 1:
            raise AssertionError("seam merging produced a non-monotone path")
    return [replace(s, rows=r) for s, r in zip(seams, rows)]
