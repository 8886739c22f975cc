"""Binary PGM (P5) and PPM (P6) encoding for raster export.

Only the 8-bit maxval-255 variant is supported; that is what the service
emits and the console parses.
"""

from __future__ import annotations

import numpy as np


class ImageFormatError(ValueError):
    pass


def luminance_bytes(lum: np.ndarray) -> np.ndarray:
    """Quantize [0,1] luminance to uint8 gray levels."""
    return np.rint(np.clip(lum, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_pgm(gray: np.ndarray) -> bytes:
    if gray.ndim != 2:
        raise ImageFormatError("grayscale image must be 2-D")
    data = np.ascontiguousarray(gray, dtype=np.uint8)
    h, w = data.shape
    return b"P5\n%d %d\n255\n" % (w, h) + data.tobytes()


def write_ppm(rgb: np.ndarray) -> bytes:
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ImageFormatError("color image must have shape (h, w, 3)")
    data = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = data.shape
    return b"P6\n%d %d\n255\n" % (w, h) + data.tobytes()


def _parse_header(blob: bytes, magic: bytes) -> tuple[int, int, int]:
    """Returns (width, height, pixel data offset)."""
    if not blob.startswith(magic):
        raise ImageFormatError(f"expected {magic.decode()} image")
    pos = len(magic)
    fields: list[int] = []
    while len(fields) < 3:
        if pos >= len(blob):
            raise ImageFormatError("truncated image header")
        c = blob[pos:pos + 1]
        if c == b"#":
            nl = blob.find(b"\n", pos)
            if nl == -1:
                raise ImageFormatError("truncated image header")
            pos = nl + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(blob) and not blob[end:end + 1].isspace():
                end += 1
            token = blob[pos:end]
            if not token.isdigit():
                raise ImageFormatError(f"bad header token {token!r}")
            fields.append(int(token))
            pos = end
    if pos >= len(blob) or not blob[pos:pos + 1].isspace():
        raise ImageFormatError("missing separator after maxval")
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise ImageFormatError("only maxval 255 is supported")
    if width < 1 or height < 1:
        raise ImageFormatError("image dimensions must be positive")
    return width, height, pos


def read_pgm(blob: bytes) -> np.ndarray:
    width, height, offset = _parse_header(blob, b"P5")
    expected = width * height
    body = blob[offset:offset + expected]
    if len(body) != expected:
        raise ImageFormatError("truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def read_ppm(blob: bytes) -> np.ndarray:
    width, height, offset = _parse_header(blob, b"P6")
    expected = width * height * 3
    body = blob[offset:offset + expected]
    if len(body) != expected:
        raise ImageFormatError("truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy()
