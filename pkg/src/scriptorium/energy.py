"""Energy map built from the main-text mask.

The total energy is background energy (inverse distance to the nearest
component centroid), plus text energy (background energy kept on text pixels
only), plus a smoothed copy of their sum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import EmptyPageError, box_filter, connected_components, distance_to_nearest, plus_filter

MAX_GLOBAL_KERNEL = 4096


@dataclass(frozen=True)
class SmoothingConfig:
    g: int | None = None  # '+' kernel side; None means the page's row count
    k: int = 32

    def resolve(self, n: int) -> tuple[int, int]:
        g = n if self.g is None else self.g
        g = min(g, MAX_GLOBAL_KERNEL)
        if g < 1 or self.k < 1:
            raise ValueError("kernel sides must be >= 1")
        return g, self.k


@dataclass(frozen=True)
class EnergyMap:
    B: np.ndarray
    T: np.ndarray
    S: np.ndarray
    E: np.ndarray

    def normalized(self) -> np.ndarray:
        """E min-max scaled to [0, 1]; a flat map becomes all zeros."""
        lo, hi = self.E.min(), self.E.max()
        if hi <= lo:
            return np.zeros_like(self.E)
        return (self.E - lo) / (hi - lo)


def background_energy(centroids, n: int, m: int, d_min: float = 1.0) -> np.ndarray:
    if d_min <= 0:
        raise ValueError("d_min must be positive")
    dist = distance_to_nearest(centroids, n, m)
    return 1.0 / np.maximum(dist, d_min)


def text_energy(B, mask) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    mask = np.asarray(mask).astype(bool)
    if B.shape != mask.shape:
        raise ValueError("energy and mask shapes differ")
    return np.where(mask, B, 0.0)


def smoothed_energy(B, T, cfg: SmoothingConfig = SmoothingConfig()) -> np.ndarray:
    B = np.asarray(B, dtype=float)
    g, k = cfg.resolve(B.shape[0])
    return box_filter(plus_filter(B + T, g), k)


def total_energy(mask, cfg: SmoothingConfig = SmoothingConfig(), d_min: float = 1.0, components=None) -> EnergyMap:
    """All four energy rasters for a (denoised) text mask.

    ``components`` may be passed to reuse an existing labelling of ``mask``.
    """
    mask = np.asarray(mask).astype(bool)
    cs = components if components is not None else connected_components(mask)
    if cs.count == 0:
        raise EmptyPageError()
    n, m = mask.shape
    B = background_energy(cs.centroids, n, m, d_min)
    T = text_energy(B, mask)
    S = smoothed_energy(B, T, cfg)
    return EnergyMap(B, T, S, B + T + S)
