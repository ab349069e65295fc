"""8-bit greyscale PGM (netpbm P2 / P5) reading and writing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PgmError(ValueError):
    pass


class PgmMagicError(PgmError):
    pass


class PgmTruncatedError(PgmError):
    pass


class PgmMaxvalError(PgmError):
    pass


@dataclass(frozen=True)
class PgmImage:
    width: int
    height: int
    maxval: int
    pixels: np.ndarray  # (height, width) uint8, row-major

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width):
            raise PgmError(f"pixel array {self.pixels.shape} does not match {self.width}x{self.height}")
        if not 0 < self.maxval <= 255:
            raise PgmMaxvalError(f"maxval {self.maxval} outside 1..255")
        if self.pixels.size and int(self.pixels.max()) > self.maxval:
            raise PgmError("pixel value exceeds maxval")

    def __eq__(self, other):
        return (isinstance(other, PgmImage) and self.maxval == other.maxval
                and np.array_equal(self.pixels, other.pixels))

    @classmethod
    def from_array(cls, pixels, maxval=255):
        pixels = np.asarray(pixels)
        if pixels.ndim != 2:
            raise PgmError("expected a 2-D array")
        if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
            raise PgmError("pixel values must fit in 8 bits")
        h, w = pixels.shape
        return cls(w, h, int(maxval), pixels.astype(np.uint8))


def _header_tokens(data, start, count):
    """Read ``count`` whitespace separated tokens, skipping '#' comments."""
    tokens, pos, n = [], start, len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PgmTruncatedError("header ends early")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        end = pos
        while end < n and not data[end:end + 1].isspace() and data[end:end + 1] != b"#":
            end += 1
        tokens.append(data[pos:end])
        pos = end
    return tokens, pos


def parse_pgm(data: bytes) -> PgmImage:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmMagicError(f"unsupported magic {magic!r}; expected P2 or P5")
    try:
        (w, h, maxval), pos = _header_tokens(data, 2, 3)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        if isinstance(exc, PgmError):
            raise
        raise PgmError(f"bad header: {exc}") from None
    if w < 1 or h < 1:
        raise PgmError("image dimensions must be positive")
    if not 0 < maxval <= 255:
        raise PgmMaxvalError(f"maxval {maxval} outside 1..255")
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        payload = data[pos:pos + w * h]
        if len(payload) < w * h:
            raise PgmTruncatedError(f"expected {w * h} pixel bytes, found {len(payload)}")
        pixels = np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()
    else:
        values = data[pos:].split()
        if len(values) < w * h:
            raise PgmTruncatedError(f"expected {w * h} pixel values, found {len(values)}")
        try:
            pixels = np.array([int(v) for v in values[:w * h]], dtype=np.int64)
        except ValueError:
            raise PgmError("non-numeric pixel value") from None
        if pixels.min() < 0 or pixels.max() > maxval:
            raise PgmError("pixel value outside 0..maxval")
        pixels = pixels.astype(np.uint8).reshape(h, w)
    if pixels.max() > maxval:
        raise PgmError("pixel value exceeds maxval")
    return PgmImage(w, h, maxval, pixels)


def read_pgm(path) -> PgmImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def encode_pgm(image: PgmImage, ascii=False) -> bytes:
    header = f"{'P2' if ascii else 'P5'}\n{image.width} {image.height}\n{image.maxval}\n".encode()
    if ascii:
        rows = (" ".join(str(int(v)) for v in row) for row in image.pixels)
        return header + "\n".join(rows).encode() + b"\n"
    return header + image.pixels.astype(np.uint8).tobytes()


def write_pgm(path, image: PgmImage, ascii=False):
    """Write ``image`` as binary P5 (or P2 with ``ascii=True``)."""
    with open(path, "wb") as fh:
        fh.write(encode_pgm(image, ascii=ascii))
