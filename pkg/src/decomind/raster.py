"""Deterministic raster primitives shared by the layout renderer and stubs.

PNG encoding is done by hand (fixed chunk layout, filter 0, zlib level 6) so
identical pixel buffers always serialize to identical bytes regardless of the
installed imaging library. Decoding goes through Pillow, which accepts any
well-formed PNG.
"""
from __future__ import annotations

import io
import struct
import zlib

import numpy as np
from PIL import Image

_PNG_SIG = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6


def px(value: float) -> int:
    """Meters-to-pixels rounding: half-up, platform independent."""
    return int(np.floor(value + 0.5))


def new_canvas(width: int, height: int, color=(255, 255, 255)) -> np.ndarray:
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:, :] = np.asarray(color, dtype=np.uint8)
    return img


def fill_rect(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color) -> None:
    """Fill the half-open pixel rectangle [x0,x1) x [y0,y1), clipped to the image."""
    h, w = img.shape[:2]
    x0, x1 = max(0, x0), min(w, x1)
    y0, y1 = max(0, y0), min(h, y1)
    if x0 < x1 and y0 < y1:
        img[y0:y1, x0:x1] = np.asarray(color, dtype=np.uint8)


def stroke_rect(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color) -> None:
    """1-px frame along the inside edge of [x0,x1) x [y0,y1), clipped."""
    fill_rect(img, x0, y0, x1, y0 + 1, color)
    fill_rect(img, x0, y1 - 1, x1, y1, color)
    fill_rect(img, x0, y0, x0 + 1, y1, color)
    fill_rect(img, x1 - 1, y0, x1, y1, color)


def encode_png(img: np.ndarray) -> bytes:
    """Serialize an (H, W, 3) or (H, W, 4) uint8 array to canonical PNG bytes."""
    if img.ndim != 3 or img.shape[2] not in (3, 4) or img.dtype != np.uint8:
        raise ValueError(f"expected uint8 HxWx3|4 array, got shape {img.shape} dtype {img.dtype}")
    height, width = img.shape[:2]
    color_type = 2 if img.shape[2] == 3 else 6

    def chunk(tag: bytes, payload: bytes) -> bytes:
        crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
        return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, color_type, 0, 0, 0)
    raw = np.empty((height, 1 + width * img.shape[2]), dtype=np.uint8)
    raw[:, 0] = 0  # filter type 0 on every scanline
    raw[:, 1:] = img.reshape(height, -1)
    idat = zlib.compress(raw.tobytes(), _ZLIB_LEVEL)
    return _PNG_SIG + chunk(b"IHDR", ihdr) + chunk(b"IDAT", idat) + chunk(b"IEND", b"")


def decode_png(data: bytes) -> np.ndarray:
    """PNG bytes to a uint8 array; palette/gray images come back as RGB."""
    with Image.open(io.BytesIO(data)) as im:
        if im.mode not in ("RGB", "RGBA"):
            im = im.convert("RGB")
        return np.asarray(im, dtype=np.uint8).copy()


def nearest_resize(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Nearest-neighbor resample with explicit index math (no library variance)."""
    in_h, in_w = img.shape[:2]
    xs = np.minimum((np.arange(out_w) + 0.5) * in_w / out_w, in_w - 1).astype(np.int64)
    ys = np.minimum((np.arange(out_h) + 0.5) * in_h / out_h, in_h - 1).astype(np.int64)
    return img[ys][:, xs].copy()


# 5x7 pixel font, uppercase plus digits; enough for category labels on plans.
_GLYPHS = {
    "A": (".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "B": ("####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."),
    "C": (".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."),
    "D": ("####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."),
    "E": ("#####", "#....", "#....", "####.", "#....", "#....", "#####"),
    "F": ("#####", "#....", "#....", "####.", "#....", "#....", "#...."),
    "G": (".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"),
    "H": ("#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"),
    "I": (".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "J": ("..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "K": ("#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"),
    "L": ("#....", "#....", "#....", "#....", "#....", "#....", "#####"),
    "M": ("#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"),
    "N": ("#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"),
    "O": (".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "P": ("####.", "#...#", "#...#", "####.", "#....", "#....", "#...."),
    "Q": (".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"),
    "R": ("####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"),
    "S": (".####", "#....", "#....", ".###.", "....#", "....#", "####."),
    "T": ("#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."),
    "U": ("#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."),
    "V": ("#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "W": ("#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"),
    "X": ("#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"),
    "Y": ("#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."),
    "Z": ("#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"),
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "2": (".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"),
    "3": ("#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    "-": (".....", ".....", ".....", "#####", ".....", ".....", "....."),
    "_": (".....", ".....", ".....", ".....", ".....", ".....", "#####"),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
}

GLYPH_W = 5
GLYPH_H = 7
GLYPH_ADVANCE = 6  # 5 px glyph + 1 px spacing


def draw_text(img: np.ndarray, x: int, y: int, text: str, color, clip=None) -> None:
    """Render ``text`` with the embedded font, top-left at (x, y).

    Unknown characters fall back to space. ``clip`` is an optional
    (x0, y0, x1, y1) half-open rectangle; pixels outside it are dropped.
    """
    h, w = img.shape[:2]
    cx0, cy0, cx1, cy1 = clip if clip is not None else (0, 0, w, h)
    cx0, cy0 = max(0, cx0), max(0, cy0)
    cx1, cy1 = min(w, cx1), min(h, cy1)
    color = np.asarray(color, dtype=np.uint8)
    for idx, ch in enumerate(text.upper()):
        glyph = _GLYPHS.get(ch, _GLYPHS[" "])
        gx = x + idx * GLYPH_ADVANCE
        for row, bits in enumerate(glyph):
            gy = y + row
            if gy < cy0 or gy >= cy1:
                continue
            for col, bit in enumerate(bits):
                if bit != "#":
                    continue
                xx = gx + col
                if cx0 <= xx < cx1:
                    img[gy, xx] = color


def text_width(text: str) -> int:
    return max(0, len(text) * GLYPH_ADVANCE - 1)
