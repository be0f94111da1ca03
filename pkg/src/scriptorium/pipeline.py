"""Label image in, one polygon per text line out."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .binning import bin_centroids
from .energy import EnergyMap, SmoothingConfig, total_energy
from .ingest import LabelImage, denoise, text_mask
from .polygons import LinePolygon, bin_polygon, simplify
from .raster import ComponentSet, connected_components
from .seams import SeamParams, cast_all, merge_seams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    seams: SeamParams = field(default_factory=SeamParams)
    smoothing: SmoothingConfig = field(default_factory=SmoothingConfig)
    min_area: int | None = None  # None: relative default, see ingest.default_min_area
    small_bin_threshold: int = 2
    d_min: float = 1.0
    stroke: int = 3
    connectivity: int = 8
    simplify_tolerance: float | None = None

    def with_seams(self, alpha=None, beta=None) -> "PipelineConfig":
        s = self.seams
        return replace(self, seams=SeamParams(alpha if alpha is not None else s.alpha,
                                              beta if beta is not None else s.beta))


@dataclass
class PageResult:
    polygons: list
    mask: np.ndarray
    components: ComponentSet | None = None
    energy: EnergyMap | None = None
    seams: list = field(default_factory=list)
    bins: list = field(default_factory=list)


class PageAnalysis:
    """Seam-independent stages of one page, computed once.

    Denoising, labelling and the energy map do not depend on the seam
    parameters, so a parameter sweep reuses them across cells.
    """

    def __init__(self, page, config: PipelineConfig = PipelineConfig()):
        raw = text_mask(page) if isinstance(page, LabelImage) else np.asarray(page)
        self.config = config
        self.mask = denoise(raw, config.min_area, config.connectivity).astype(bool)
        self.components = connected_components(self.mask, config.connectivity)
        self.energy = None
        self._normalized = None
        if self.components.count:
            self.energy = total_energy(self.mask, config.smoothing, config.d_min, components=self.components)
            self._normalized = self.energy.normalized()
        self._objects = ndimage.find_objects(self.components.labels)

    def segment(self, seams: SeamParams | None = None, stroke=None, small_bin_threshold=None) -> PageResult:
        cfg = self.config
        if self.components.count == 0:
            log.warning("page has no text components; no lines produced")
            return PageResult([], self.mask, self.components)
        seams = seams or cfg.seams
        cast = merge_seams(cast_all(self._normalized, seams))
        thr = cfg.small_bin_threshold if small_bin_threshold is None else small_bin_threshold
        bins = bin_centroids(self.components.centroids, cast, thr)
        polys = []
        for i, b in enumerate(bins):
            poly = bin_polygon(i, b.members, self.components, stroke or cfg.stroke, objects=self._objects)
            if cfg.simplify_tolerance:
                poly = LinePolygon(poly.index, simplify(poly.vertices, cfg.simplify_tolerance), poly.members)
            polys.append(poly)
        return PageResult(polys, self.mask, self.components, self.energy, cast, bins)


def segment_page(page, config: PipelineConfig = PipelineConfig()) -> PageResult:
    """Run ingest -> energy -> seams -> binning -> polygons on one page.

    ``page`` is a :class:`LabelImage` or a binary main-text mask.
    """
    return PageAnalysis(page, config).segment()
