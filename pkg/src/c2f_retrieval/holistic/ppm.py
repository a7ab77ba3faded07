"""Binary PPM (P6) codec and the optional decode layer for other formats."""

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np


_WHITESPACE = b" \t\n\r\x0b\x0c"


class PpmDecodeError(ValueError):
    """Raised when an image cannot be decoded; names the failing byte offset."""

    def __init__(self, offset: int, message: str, path: str = ""):
        self.offset = offset
        self.message = message
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}byte {offset}: {message}")


@dataclass(frozen=True)
class PixelImage:
    """
    Decoded RGB image.

    ``pixels`` has shape ``(height, width, 3)`` and dtype uint8, row-major,
    and is read-only once constructed.
    """

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"image dimensions must be >= 1, got {self.width}x{self.height}"
            )
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer holds {pixels.size} values, expected "
                f"{self.width * self.height * 3}"
            )
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ValueError("pixel channels must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        pixels = pixels.reshape(self.height, self.width, 3).copy()
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    def triples(self) -> list:
        """Row-major list of (r, g, b) tuples."""
        return [tuple(int(c) for c in px) for px in self.pixels.reshape(-1, 3)]


def _skip_whitespace_and_comments(data: bytes, pos: int) -> int:
    while pos < len(data):
        if data[pos] == ord("#"):
            newline = data.find(b"\n", pos)
            pos = len(data) if newline < 0 else newline + 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _read_header_int(data: bytes, pos: int, field: str):
    pos = _skip_whitespace_and_comments(data, pos)
    start = pos
    while pos < len(data) and data[pos:pos + 1].isdigit():
        pos += 1
    if start == pos:
        raise PpmDecodeError(start, f"expected decimal {field}")
    return int(data[start:pos]), pos


def decode_ppm(payload: bytes) -> PixelImage:
    """
    Decode a binary P6 PPM with maxval 255.

    Pixel values are returned exactly; no colour transform is applied.

    Raises
    ------
    PpmDecodeError
        On a malformed header, maxval other than 255 or truncated pixel data.
    """
    if len(payload) < 2:
        raise PpmDecodeError(0, "file too short for a PPM magic number")
    magic = payload[:2]
    if magic != b"P6":
        raise PpmDecodeError(
            0, f"unsupported magic {magic!r}: only binary P6 PPM is accepted"
        )

    width, pos = _read_header_int(payload, 2, "width")
    height, pos = _read_header_int(payload, pos, "height")
    maxval, pos = _read_header_int(payload, pos, "maxval")

    if width < 1 or height < 1:
        raise PpmDecodeError(pos, f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PpmDecodeError(pos, f"maxval {maxval} unsupported, expected 255")
    if pos >= len(payload) or payload[pos] not in _WHITESPACE:
        raise PpmDecodeError(pos, "missing whitespace after maxval")
    pos += 1

    expected = width * height * 3
    available = len(payload) - pos
    if available < expected:
        raise PpmDecodeError(
            len(payload),
            f"truncated pixel data: {available} of {expected} bytes present",
        )
    pixels = np.frombuffer(payload, dtype=np.uint8, count=expected, offset=pos)
    return PixelImage(width=width, height=height, pixels=pixels)


def encode_ppm(image: PixelImage) -> bytes:
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.tobytes()


def load_image(path: Union[str, Path]) -> PixelImage:
    """
    Decode an image file into a ``PixelImage``.

    PPM files are decoded natively; any other format goes through Pillow
    (``images`` extra) and is converted to RGB.
    """
    path = Path(path)
    payload = path.read_bytes()
    if payload[:2] in (b"P6", b"P3") or path.suffix.lower() == ".ppm":
        try:
            return decode_ppm(payload)
        except PpmDecodeError as exc:
            raise PpmDecodeError(exc.offset, exc.message, path=str(path)) from exc

    try:
        from PIL import Image
    except ImportError as exc:
        raise PpmDecodeError(
            0,
            "non-PPM image requires Pillow (install the 'images' extra)",
            path=str(path),
        ) from exc

    try:
        with Image.open(path) as handle:
            rgb = np.asarray(handle.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise PpmDecodeError(0, f"cannot decode image: {exc}", path=str(path)) from exc
    height, width = rgb.shape[:2]
    return PixelImage(width=width, height=height, pixels=rgb)
