"""Reading and writing feature files and 8-bit RGB images.

Feature file layout (all little-endian)::

    4 bytes   magic "EDMF"
    uint32    version (1)
    uint32    C, H, W
    float32   C*H*W values, channel-major then row-major
"""

from __future__ import annotations

import os
import struct
import tempfile
import warnings
from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image
from skimage import color as skcolor

from .core import FeatureMap

__all__ = [
    "FormatError",
    "MAGIC",
    "VERSION",
    "FEATURE_SUFFIXES",
    "IMAGE_SUFFIXES",
    "encode_features",
    "decode_features",
    "read_features",
    "write_features",
    "read_image",
    "write_image",
    "rgb_to_lab",
    "lab_to_rgb",
    "input_kind",
    "to_uint8",
]

MAGIC = b"EDMF"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")
FEATURE_SUFFIXES = (".edmf",)
IMAGE_SUFFIXES = (".png",)


class FormatError(ValueError):
    """Malformed input file.  ``field`` names the offending header/payload field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def input_kind(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in IMAGE_SUFFIXES:
        return "image"
    if suffix in FEATURE_SUFFIXES:
        return "features"
    raise FormatError(
        "extension",
        f"unsupported file type {suffix or '(none)'!r} for {path}; "
        f"expected one of {IMAGE_SUFFIXES + FEATURE_SUFFIXES}",
    )


def encode_features(f: FeatureMap) -> bytes:
    c, h, w = f.shape
    return _HEADER.pack(MAGIC, VERSION, c, h, w) + f.data.astype("<f4").tobytes(order="C")


def decode_features(buf: bytes) -> FeatureMap:
    if len(buf) < _HEADER.size:
        raise FormatError("header", f"file is {len(buf)} bytes, header needs {_HEADER.size}")
    magic, version, c, h, w = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError("magic", f"expected {MAGIC!r}, got {magic!r}")
    if version != VERSION:
        raise FormatError("version", f"unsupported version {version}, expected {VERSION}")
    for name, v in (("c", c), ("h", h), ("w", w)):
        if v == 0:
            raise FormatError(name, "dimension must be positive")
    expected = c * h * w * 4
    got = len(buf) - _HEADER.size
    if got != expected:
        raise FormatError(
            "payload length", f"{got} bytes, expected {expected} for {c}x{h}x{w} float32"
        )
    data = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).reshape(c, h, w)
    if not np.all(np.isfinite(data)):
        raise FormatError("payload", "contains NaN or Inf")
    return FeatureMap(data)


def _atomic_write(path, payload: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_features(path) -> FeatureMap:
    return decode_features(Path(path).read_bytes())


def write_features(path, f: FeatureMap) -> None:
    _atomic_write(path, encode_features(f))


def read_image(path) -> FeatureMap:
    """8-bit image as a 3-channel map with values in [0, 255]."""
    try:
        with Image.open(path) as im:
            im.load()
            rgb = np.asarray(im.convert("RGB"), dtype=np.float32)
    except OSError as exc:
        raise FormatError("image", f"cannot decode {path}: {exc}") from None
    return FeatureMap(np.transpose(rgb, (2, 0, 1)))


def to_uint8(f: FeatureMap) -> np.ndarray:
    """Round and clamp a 3-channel map to an ``(H, W, 3)`` uint8 array."""
    if f.channels != 3:
        raise ValueError(f"an RGB image needs 3 channels, got {f.channels}")
    x = np.clip(np.rint(f.data), 0, 255).astype(np.uint8)
    return np.ascontiguousarray(np.transpose(x, (1, 2, 0)))


def write_image(path, f: FeatureMap) -> None:
    buf = BytesIO()
    Image.fromarray(to_uint8(f)).save(buf, format="PNG")
    _atomic_write(path, buf.getvalue())


def rgb_to_lab(f: FeatureMap) -> FeatureMap:
    """sRGB in [0, 255] to CIE Lab (D65)."""
    rgb = np.transpose(f.data, (1, 2, 0)).astype(np.float64) / 255.0
    lab = skcolor.rgb2lab(rgb, illuminant="D65")
    return FeatureMap(np.transpose(lab, (2, 0, 1)))


def lab_to_rgb(f: FeatureMap) -> FeatureMap:
    """CIE Lab (D65) to sRGB in [0, 255], clipped to the gamut."""
    lab = np.transpose(f.data, (1, 2, 0)).astype(np.float64)
    with warnings.catch_warnings():
        # out-of-gamut values are clipped, which is what we want
        warnings.simplefilter("ignore")
        rgb = skcolor.lab2rgb(lab, illuminant="D65")
    return FeatureMap(np.transpose(rgb * 255.0, (2, 0, 1)))
