"""Minutia record and the plain-text minutiae file format.

One minutia per line, ``x y theta quality``, whitespace separated, ``#``
starts a comment.  Angles are radians and get normalized into [0, 2pi);
coordinates are pixels with x growing rightwards and y downwards.
"""

import math
from dataclasses import dataclass

from .angles import TWO_PI


class MinutiaeParseError(ValueError):
    """Raised for malformed minutiae text, with the offending line number."""


@dataclass(frozen=True)
class Minutia:
    x: float
    y: float
    theta: float  # direction in [0, 2pi)
    quality: float = 1.0


def normalize_theta(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0.0:
        t += TWO_PI
    return t if t < TWO_PI else 0.0


def parse_minutiae(text: str):
    """Parse minutiae text into a list sorted by descending quality.

    The sort is stable, so equal-quality minutiae keep file order.  Raises
    MinutiaeParseError naming the first bad line.
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise MinutiaeParseError(
                f"line {lineno}: expected 4 fields (x y theta quality), got {len(parts)}"
            )
        try:
            x, y, theta, quality = (float(p) for p in parts)
        except ValueError:
            raise MinutiaeParseError(f"line {lineno}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in (x, y, theta, quality)):
            raise MinutiaeParseError(f"line {lineno}: non-finite value in {line!r}")
        out.append(Minutia(x, y, normalize_theta(theta), quality))
    out.sort(key=lambda m: -m.quality)
    return out


def load_minutiae(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_minutiae(fh.read())
