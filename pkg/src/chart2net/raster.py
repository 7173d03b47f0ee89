"""
Raster stage: loading, binarization and morphological cleanup.

Gray images are ``uint8`` arrays of shape ``(height, width)``; binary images
are ``bool`` arrays of the same shape where ``True`` marks ink.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from scipy import ndimage

__all__ = [
    "read_image",
    "write_pgm",
    "write_png",
    "binarize",
    "mask_textboxes",
    "close_gaps",
    "strip_header",
    "strip_footer",
]


def _to_gray(arr: np.ndarray) -> np.ndarray:
    """Collapse an RGB(A)/LA array into 8-bit luminance."""
    if arr.ndim == 2:
        return arr.astype(np.uint8)
    arr = arr.astype(np.int64)
    channels = arr.shape[2]
    if channels in (2, 4):
        # composite onto white so transparent regions read as blank page
        alpha = arr[..., -1]
        color = arr[..., :-1]
        color = (color * alpha[..., None] + 255 * (255 - alpha[..., None]) + 127) // 255
    else:
        color = arr
    if color.shape[2] == 1:
        return color[..., 0].astype(np.uint8)
    r, g, b = color[..., 0], color[..., 1], color[..., 2]
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    # header: magic, width, height, maxval separated by whitespace/comments
    tokens = []
    pos = 0
    token_re = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")
    while len(tokens) < 4:
        m = token_re.match(data, pos)
        if m is None:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != b"P5":
        raise ValueError(f"{path}: only binary PGM (P5) is supported, got {magic!r}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    count = width * height
    pixels = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    img = pixels.reshape(height, width)
    if maxval != 255:
        img = (img.astype(np.int64) * 255 + maxval // 2) // maxval
    return img.astype(np.uint8)


def read_image(path) -> np.ndarray:
    """Read a PNG or binary PGM file as an 8-bit grayscale array."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "P":
            im = im.convert("RGBA")
        elif im.mode in ("I;16", "I"):
            arr = np.asarray(im, dtype=np.int64)
            return np.clip(arr // 257, 0, 255).astype(np.uint8)
        arr = np.asarray(im)
    return _to_gray(arr)


def write_pgm(path, img: np.ndarray) -> None:
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(img.tobytes())


def write_png(path, img: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(np.asarray(img, dtype=np.uint8)).save(path)


def binarize(img: np.ndarray, threshold: int = 128) -> np.ndarray:
    """Foreground iff intensity is strictly below ``threshold``."""
    return np.asarray(img) < threshold


def mask_textboxes(img: np.ndarray, boxes) -> np.ndarray:
    """Clear every pixel covered by a textbox.

    Box extents are the pixel index ranges ``[x, x + w - 1]`` by
    ``[y, y + h - 1]``; boxes hanging over the border are clipped.
    """
    out = np.array(img, dtype=bool, copy=True)
    height, width = out.shape
    for tb in boxes:
        x0 = max(int(tb.x), 0)
        y0 = max(int(tb.y), 0)
        x1 = min(int(tb.x + tb.w - 1), width - 1)
        y1 = min(int(tb.y + tb.h - 1), height - 1)
        if x0 <= x1 and y0 <= y1:
            out[y0 : y1 + 1, x0 : x1 + 1] = False
    return out


def close_gaps(img: np.ndarray, radius: int = 2) -> np.ndarray:
    """Morphological closing with a ``(2r+1)``-square structuring element.

    The image is treated as lying on an unbounded white background, so the
    closing is extensive everywhere and gaps of at most ``2r`` pixels are
    bridged even next to the border.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    img = np.asarray(img, dtype=bool)
    if radius == 0:
        return img.copy()
    size = 2 * radius + 1
    padded = np.pad(img.astype(np.uint8), radius)
    dilated = ndimage.maximum_filter(padded, size=size, mode="constant", cval=0)
    # every erosion window of an original pixel stays inside the padding
    closed = ndimage.minimum_filter(dilated, size=size, mode="nearest")
    return closed[radius:-radius, radius:-radius].astype(bool)


def strip_header(img: np.ndarray, header_px: int) -> np.ndarray:
    out = np.array(img, dtype=bool, copy=True)
    if not 0 <= header_px <= out.shape[0]:
        raise ValueError(f"header_px {header_px} outside [0, {out.shape[0]}]")
    out[:header_px] = False
    return out


def strip_footer(img: np.ndarray, min_gap_rows: int = 20):
    """Erase everything below the lowest tall blank band.

    A band qualifies when it is a maximal run of all-background rows at
    least ``min_gap_rows`` tall with ink both above and below it. Returns
    ``(image, cut_row)``; ``cut_row`` is ``None`` when no band qualifies.
    """
    if min_gap_rows < 1:
        raise ValueError("min_gap_rows must be >= 1")
    img = np.asarray(img, dtype=bool)
    inked = np.flatnonzero(img.any(axis=1))
    if inked.size < 2:
        return img.copy(), None
    gaps = np.diff(inked) - 1
    qualifying = np.flatnonzero(gaps >= min_gap_rows)
    if qualifying.size == 0:
        return img.copy(), None
    cut_row = int(inked[qualifying[-1]] + 1)
    out = img.copy()
    out[cut_row:] = False
    return out, cut_row
