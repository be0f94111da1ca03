"""Debug images: energy rasters, seams, polygons and evaluation overlays."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .raster import polygon_mask

LTR_COLOUR = (0, 0, 0)
RTL_COLOUR = (255, 255, 255)
MATCH = (0, 170, 0)
MISS = (220, 0, 0)


def raster_png(raster, path):
    """Write a raster as 16-bit grayscale, min-max scaled."""
    r = np.asarray(raster, dtype=float)
    lo, hi = r.min(), r.max()
    scaled = np.zeros_like(r) if hi <= lo else (r - lo) / (hi - lo)
    Image.fromarray(np.round(scaled * 65535).astype(np.uint16)).save(path)


def dump_energy(energy, outdir, stem):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in ("B", "T", "S", "E"):
        p = outdir / f"{stem}.{name}.png"
        raster_png(getattr(energy, name), p)
        paths.append(p)
    return paths


def _base(mask, background=None):
    if background is not None:
        return np.asarray(background, dtype=np.uint8).copy()
    mask = np.asarray(mask).astype(bool)
    img = np.full(mask.shape + (3,), 235, dtype=np.uint8)
    img[mask] = (60, 60, 60)
    return img


def seam_overlay(mask, seams, background=None) -> Image.Image:
    """Page with left-to-right seams in black and right-to-left seams in white."""
    if background is None:
        # mid-grey page so both seam colours stay visible
        img = np.where(np.asarray(mask).astype(bool)[..., None], 60, 150).astype(np.uint8).repeat(3, axis=2)
    else:
        img = _base(mask, background)
    cols = np.arange(img.shape[1])
    for s in seams:
        colour = LTR_COLOUR if s.direction == "left-to-right" else RTL_COLOUR
        img[np.asarray(s.rows), cols] = colour
    return Image.fromarray(img)


def polygon_overlay(mask, polygons, background=None) -> Image.Image:
    """Line polygons outlined in alternating colours over the page."""
    im = Image.fromarray(_base(mask, background))
    draw = ImageDraw.Draw(im)
    palette = [(200, 40, 40), (40, 90, 200), (30, 150, 60), (180, 120, 0)]
    for i, poly in enumerate(polygons):
        verts = getattr(poly, "vertices", poly)
        xy = [(c, r) for r, c in verts]
        if len(xy) >= 2:
            draw.line(xy + xy[:1], fill=palette[i % len(palette)], width=2)
    return im


def eval_overlay(text, pred, gt, report) -> Image.Image:
    """Main-text pixels in green when they are inside a matched prediction
    that agrees with ground truth, red otherwise."""
    text = np.asarray(text).astype(bool)
    good = np.zeros_like(text)
    for i, j, _ in report.matches:
        pv = getattr(pred[i], "vertices", pred[i])
        good |= polygon_mask(pv, text.shape) & polygon_mask(gt[j], text.shape)
    img = np.full(text.shape + (3,), 255, dtype=np.uint8)
    img[text & good] = MATCH
    img[text & ~good] = MISS
    return Image.fromarray(img)


def save(image: Image.Image, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    image.save(path)
