"""Cylinder and template containers plus the binary template format.

Layout (all little-endian):

    magic 'MTCC' | version u8 | kind u8 | n_s u8 | n_d u8 | r f32
    | width u16 | height u16 | count u16
    | per cylinder: x f32, y f32, theta f32, quality f32,
                    validity bitmask ceil(n_c/8) bytes (LSB first),
                    n_c cell values f32
    | crc32 u32 of every preceding byte

Scalar fields that travel as f32 are quantized to f32 at construction time
so a serialize/deserialize round trip reproduces the template bit for bit.
"""

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"MTCC"
VERSION = 1

KIND_CODES = {"o": 0, "f": 1, "e": 2, "co": 3, "cf": 4, "ce": 5}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}

_HEADER = struct.Struct("<4sBBBBfHHH")


class TemplateIOError(ValueError):
    """Base class for template stream errors."""


class BadMagicError(TemplateIOError):
    pass


class UnsupportedVersionError(TemplateIOError):
    pass


class TruncatedTemplateError(TemplateIOError):
    pass


class ChecksumError(TemplateIOError):
    pass


def _f32(v) -> float:
    return float(np.float32(v))


@dataclass(frozen=True, eq=False)
class Cylinder:
    """One minutia descriptor: linearized cell values plus validity bits.

    Cells are linearized as (k-1)*n_s^2 + (j-1)*n_s + (i-1) for 1-based
    (i, j, k), i.e. a C-order ravel of a (n_d, n_s, n_s) array.
    """

    x: float
    y: float
    theta: float
    quality: float
    values: np.ndarray  # float32, shape (n_c,)
    cell_valid: np.ndarray  # bool, shape (n_c,)
    valid: bool = True

    def __post_init__(self):
        object.__setattr__(self, "x", _f32(self.x))
        object.__setattr__(self, "y", _f32(self.y))
        object.__setattr__(self, "theta", _f32(self.theta))
        object.__setattr__(self, "quality", _f32(self.quality))
        values = np.ascontiguousarray(self.values, dtype=np.float32)
        cell_valid = np.ascontiguousarray(self.cell_valid, dtype=bool)
        if values.ndim != 1 or cell_valid.shape != values.shape:
            raise ValueError("values and cell_valid must be 1-D arrays of equal length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cell_valid", cell_valid)

    def __eq__(self, other):
        if not isinstance(other, Cylinder):
            return NotImplemented
        return (
            self.x == other.x
            and self.y == other.y
            and self.theta == other.theta
            and self.quality == other.quality
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.cell_valid, other.cell_valid)
        )


@dataclass(frozen=True, eq=False)
class Template:
    """An ordered set of valid cylinders for one image and feature kind."""

    kind: str
    n_s: int
    n_d: int
    r: float
    width: int
    height: int
    cylinders: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "r", _f32(self.r))
        object.__setattr__(self, "cylinders", tuple(self.cylinders))
        n_c = self.n_c
        for c in self.cylinders:
            if c.values.shape[0] != n_c:
                raise ValueError("cylinder cell count does not match template geometry")

    @property
    def n_c(self) -> int:
        return self.n_s * self.n_s * self.n_d

    def __len__(self):
        return len(self.cylinders)

    def __eq__(self, other):
        if not isinstance(other, Template):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.n_s == other.n_s
            and self.n_d == other.n_d
            and self.r == other.r
            and self.width == other.width
            and self.height == other.height
            and len(self.cylinders) == len(other.cylinders)
            and all(a == b for a, b in zip(self.cylinders, other.cylinders))
        )


def serialize_template(template: Template) -> bytes:
    if len(template.cylinders) > 0xFFFF:
        raise ValueError("too many cylinders for the u16 count field")
    n_c = template.n_c
    parts = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            KIND_CODES[template.kind],
            template.n_s,
            template.n_d,
            template.r,
            template.width,
            template.height,
            len(template.cylinders),
        )
    ]
    for c in template.cylinders:
        parts.append(struct.pack("<ffff", c.x, c.y, c.theta, c.quality))
        parts.append(np.packbits(c.cell_valid, bitorder="little").tobytes())
        parts.append(c.values.astype("<f4").tobytes())
    body = b"".join(parts)
    crc = zlib.crc32(body) & 0xFFFFFFFF
    return body + struct.pack("<I", crc)


def deserialize_template(data: bytes) -> Template:
    if len(data) < _HEADER.size:
        raise TruncatedTemplateError(
            f"stream too short for header: {len(data)} < {_HEADER.size} bytes"
        )
    magic, version, kind_code, n_s, n_d, r, width, height, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}, expected {VERSION}")
    if n_s == 0 or n_d == 0:
        raise TemplateIOError(f"invalid geometry n_s={n_s} n_d={n_d}")
    n_c = n_s * n_s * n_d
    mask_bytes = (n_c + 7) // 8
    cyl_size = 16 + mask_bytes + 4 * n_c
    expected = _HEADER.size + count * cyl_size + 4
    if len(data) < expected:
        raise TruncatedTemplateError(f"stream truncated: {len(data)} < {expected} bytes")
    if len(data) > expected:
        raise TemplateIOError(f"trailing data: {len(data)} > {expected} bytes")
    (stored_crc,) = struct.unpack_from("<I", data, expected - 4)
    actual_crc = zlib.crc32(data[: expected - 4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(f"crc mismatch: stored {stored_crc:#010x}, actual {actual_crc:#010x}")
    if kind_code not in KIND_NAMES:
        raise TemplateIOError(f"invalid kind id {kind_code}")

    cylinders = []
    off = _HEADER.size
    for _ in range(count):
        x, y, theta, quality = struct.unpack_from("<ffff", data, off)
        off += 16
        bits = np.frombuffer(data, dtype=np.uint8, count=mask_bytes, offset=off)
        cell_valid = np.unpackbits(bits, bitorder="little")[:n_c].astype(bool)
        off += mask_bytes
        values = np.frombuffer(data, dtype="<f4", count=n_c, offset=off).copy()
        off += 4 * n_c
        cylinders.append(
            Cylinder(x=x, y=y, theta=theta, quality=quality, values=values, cell_valid=cell_valid)
        )
    return Template(
        kind=KIND_NAMES[kind_code],
        n_s=n_s,
        n_d=n_d,
        r=r,
        width=width,
        height=height,
        cylinders=tuple(cylinders),
    )


def save_template(template: Template, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_template(template))


def load_template(path) -> Template:
    with open(path, "rb") as fh:
        return deserialize_template(fh.read())
