"""Grayscale image, mask and map file I/O.

Images travel as 2-D uint8 arrays (row-major, y down).  PNG, BMP and binary
PGM are supported through Pillow.  Angle maps export either as PGM with
[-pi, pi] mapped linearly onto 0..255, or as raw float32 little-endian with
an 8-byte width/height header.
"""

import struct

import numpy as np
from PIL import Image

_MAP_HEADER = struct.Struct("<II")


def load_gray(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_gray(img: np.ndarray, path) -> None:
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim != 2:
        raise ValueError("expected a 2-D uint8 image")
    Image.fromarray(img, mode="L").save(path)


def save_mask(mask: np.ndarray, path) -> None:
    save_gray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8), path)


def load_mask(path) -> np.ndarray:
    return load_gray(path) > 127


def save_map_pgm(map2d: np.ndarray, path) -> None:
    """Angle map to 8-bit PGM: -pi -> 0, +pi -> 255."""
    arr = np.asarray(map2d, dtype=np.float64)
    scaled = np.rint((arr + np.pi) * (255.0 / (2.0 * np.pi)))
    save_gray(np.clip(scaled, 0, 255).astype(np.uint8), path)


def save_map_binary(map2d: np.ndarray, path) -> None:
    """Raw float32 LE dump with a (width u32, height u32) header."""
    arr = np.ascontiguousarray(map2d, dtype="<f4")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(_MAP_HEADER.pack(w, h))
        fh.write(arr.tobytes())


def load_map_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _MAP_HEADER.size:
        raise ValueError("map file too short for its header")
    w, h = _MAP_HEADER.unpack_from(data, 0)
    expected = _MAP_HEADER.size + 4 * w * h
    if len(data) != expected:
        raise ValueError(f"map file size {len(data)} does not match header ({expected})")
    return np.frombuffer(data, dtype="<f4", offset=_MAP_HEADER.size).reshape(h, w).copy()
