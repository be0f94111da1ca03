"""Decode pixel-label images and prepare the main-text mask."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .raster import connected_components

BACKGROUND = "background"
COMMENT = "comment"
DECORATION = "decoration"
MAIN_TEXT = "main-text"
CLASSES = (BACKGROUND, COMMENT, DECORATION, MAIN_TEXT)

# DIVA-HisDB: class bits in the blue channel, boundary flag in the red high bit
DIVA_BITS = {BACKGROUND: 0x01, COMMENT: 0x02, DECORATION: 0x04, MAIN_TEXT: 0x08}


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class LabelEncoding:
    """How pixel classes are stored in a label image.

    Either ``bits`` (class -> bit mask within ``channel``) or ``palette``
    (class -> RGB triple, one class per colour) must be given.
    """

    bits: dict = field(default_factory=lambda: dict(DIVA_BITS))
    channel: int = 2
    palette: dict | None = None
    boundary_channel: int | None = 0
    boundary_bit: int = 0x80

    @classmethod
    def read(cls, path) -> "LabelEncoding":
        """Load an encoding descriptor.

        One ``key = value`` pair per line, ``#`` starts a comment::

            mode = bits            # or: palette
            channel = blue         # red | green | blue | 0..2
            main-text = 0x08       # bits mode: class = bit mask
            comment = 255,0,0      # palette mode: class = r,g,b
            boundary = red:0x80    # optional; 'none' disables
        """
        text = Path(path).read_text()
        return cls.parse(text)

    @classmethod
    def parse(cls, text: str) -> "LabelEncoding":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"encoding line {lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            entries[key.lower()] = value
        mode = entries.pop("mode", "bits").lower()
        channel = _channel(entries.pop("channel", "blue"))
        boundary = entries.pop("boundary", "red:0x80")
        if boundary.lower() == "none":
            bch, bbit = None, 0x80
        else:
            ch, _, bit = boundary.partition(":")
            bch, bbit = _channel(ch), int(bit or "0x80", 0)
        unknown = set(entries) - set(CLASSES)
        if unknown:
            raise ValueError(f"unknown classes in encoding: {sorted(unknown)}")
        if mode == "bits":
            bits = {k: int(v, 0) for k, v in entries.items()}
            return cls(bits=bits, channel=channel, boundary_channel=bch, boundary_bit=bbit)
        if mode == "palette":
            palette = {k: tuple(int(x, 0) for x in v.split(",")) for k, v in entries.items()}
            return cls(bits={}, palette=palette, boundary_channel=None)
        raise ValueError(f"unknown encoding mode {mode!r}")


def _channel(name: str) -> int:
    names = {"red": 0, "green": 1, "blue": 2}
    name = name.strip().lower()
    return names[name] if name in names else int(name)


@dataclass(frozen=True)
class LabelImage:
    """Per-pixel multi-label class map.

    ``classes`` maps class name to a boolean (n, m) layer; layers may overlap.
    """

    classes: dict
    boundary: np.ndarray | None = None

    @property
    def shape(self):
        return next(iter(self.classes.values())).shape

    def layer(self, name: str) -> np.ndarray:
        return self.classes[name]

    def class_set(self, r: int, c: int) -> set:
        return {k for k, v in self.classes.items() if v[r, c]}


def decode_label_image(data, encoding: LabelEncoding | None = None) -> LabelImage:
    """Decode an encoded label image (bytes, path or RGB array)."""
    enc = encoding or LabelEncoding()
    if isinstance(data, np.ndarray):
        rgb = data
    else:
        try:
            src = io.BytesIO(data) if isinstance(data, (bytes, bytearray)) else data
            with Image.open(src) as im:
                rgb = np.asarray(im.convert("RGB"))
        except Exception as exc:  # PIL raises several unrelated types
            raise DecodeError(f"cannot decode label image: {exc}") from exc
    if rgb.ndim != 3 or rgb.shape[2] < 3:
        raise DecodeError("label image must have three colour channels")

    if enc.palette is not None:
        layers = {
            name: np.all(rgb[..., :3] == np.asarray(col, dtype=rgb.dtype), axis=-1)
            for name, col in enc.palette.items()
        }
    else:
        plane = rgb[..., enc.channel].astype(np.int64)
        layers = {name: (plane & bit) != 0 for name, bit in enc.bits.items()}
    for name in CLASSES:
        layers.setdefault(name, np.zeros(rgb.shape[:2], dtype=bool))

    unlabelled = ~np.logical_or.reduce(list(layers.values()))
    if unlabelled.any():
        r, c = np.argwhere(unlabelled)[0]
        raise DecodeError(f"pixel (row {r}, col {c}) carries no recognized class bits")

    boundary = None
    if enc.palette is None and enc.boundary_channel is not None:
        boundary = (rgb[..., enc.boundary_channel].astype(np.int64) & enc.boundary_bit) != 0
    return LabelImage(layers, boundary)


def encode_label_image(li: LabelImage, encoding: LabelEncoding | None = None) -> np.ndarray:
    """Inverse of :func:`decode_label_image` for bit encodings; returns RGB uint8."""
    enc = encoding or LabelEncoding()
    if enc.palette is not None:
        raise ValueError("palette encodings cannot represent overlapping classes")
    n, m = li.shape
    rgb = np.zeros((n, m, 3), dtype=np.uint8)
    plane = np.zeros((n, m), dtype=np.int64)
    for name, bit in enc.bits.items():
        plane |= np.where(li.classes.get(name, False), bit, 0)
    rgb[..., enc.channel] = plane
    if li.boundary is not None and enc.boundary_channel is not None:
        rgb[..., enc.boundary_channel] |= np.where(li.boundary, enc.boundary_bit, 0).astype(np.uint8)
    return rgb


def text_mask(li: LabelImage) -> np.ndarray:
    return li.classes[MAIN_TEXT].astype(np.uint8)


def default_min_area(mask) -> int:
    """5 % of the median component area, never below 8 pixels."""
    cs = connected_components(mask)
    if cs.count == 0:
        return 8
    return max(8, int(np.ceil(0.05 * np.median(cs.areas))))


def denoise(mask, min_area: int | None = None, connectivity: int = 8) -> np.ndarray:
    """Drop connected components smaller than ``min_area`` pixels."""
    mask = np.asarray(mask).astype(bool)
    if min_area is None:
        min_area = default_min_area(mask)
    if min_area <= 0:
        return mask.astype(np.uint8)
    cs = connected_components(mask, connectivity)
    keep = np.zeros(cs.count + 1, dtype=bool)
    keep[1:] = cs.areas >= min_area
    return keep[cs.labels].astype(np.uint8)
