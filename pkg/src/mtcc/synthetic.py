"""Synthetic fingerprints, minutiae and texture maps.

Used by the demos and by the verification tests: none of this touches real
sensor data, but the generated geometry exercises the same code paths
(rigid motion, jitter, dropout, smooth per-finger texture fields).
"""

import numpy as np

from .angles import wrap_pi, wrap_two_pi
from .minutiae import Minutia
from .stft import TextureMaps, normalize_to_angle


def ridge_image(shape, freq: float = 0.125, orientation: float = 0.0,
                phase: float = 0.0, contrast: float = 100.0, mean: float = 127.5,
                noise: float = 0.0, rng=None) -> np.ndarray:
    """Plain sinusoidal ridge pattern as uint8; orientation is the wave
    vector angle (normal to the ridges), measured like minutia directions
    (counterclockwise with the y axis pointing up)."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    phase_map = 2.0 * np.pi * freq * (xx * np.cos(orientation) - yy * np.sin(orientation))
    img = mean + contrast * np.sin(phase_map + phase)
    if noise > 0.0:
        rng = rng if rng is not None else np.random.default_rng(0)
        img = img + rng.normal(0.0, noise, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def smooth_field(rng, shape, lo: float, hi: float, n_waves: int = 6,
                 min_period: float = 80.0, max_period: float = 250.0) -> np.ndarray:
    """Smooth random scalar field rescaled into [lo, hi]."""
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    field = np.zeros(shape, dtype=np.float64)
    for _ in range(n_waves):
        period = rng.uniform(min_period, max_period)
        ang = rng.uniform(0.0, np.pi)
        ph = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(0.5, 1.0)
        field += amp * np.cos(2.0 * np.pi / period * (xx * np.cos(ang) + yy * np.sin(ang)) + ph)
    f_lo, f_hi = field.min(), field.max()
    if f_hi - f_lo < 1e-12:
        return np.full(shape, (lo + hi) / 2.0)
    return lo + (field - f_lo) * ((hi - lo) / (f_hi - f_lo))


def synthetic_maps(rng, shape, freq_lo: float = 1.0 / 25.0, freq_hi: float = 1.0 / 3.0,
                   mask: np.ndarray = None) -> TextureMaps:
    """Smooth per-finger texture maps with the same conventions as the
    analysis pass (doubled orientation, band-normalized frequency,
    min/max-normalized energy)."""
    mask = mask if mask is not None else np.ones(shape, dtype=bool)
    ori2 = wrap_pi(smooth_field(rng, shape, -np.pi, np.pi * 0.999))
    raw_freq = smooth_field(rng, shape, 0.06, 0.18)
    raw_energy = smooth_field(rng, shape, 1.0, 9.0)
    freq_angle = wrap_pi(normalize_to_angle(raw_freq, freq_lo, freq_hi))
    e = raw_energy[mask]
    energy_angle = wrap_pi(normalize_to_angle(raw_energy, float(e.min()), float(e.max())))
    return TextureMaps(
        orientation=ori2, frequency=freq_angle, energy=energy_angle,
        mask=mask.copy(), raw_frequency=raw_freq, raw_energy=raw_energy,
        freq_lo=freq_lo, freq_hi=freq_hi,
    )


def random_minutiae(rng, n: int, shape, margin: float = 30.0):
    """Uniformly placed minutiae with random directions and qualities."""
    h, w = shape
    out = []
    for _ in range(n):
        out.append(
            Minutia(
                x=float(rng.uniform(margin, w - margin)),
                y=float(rng.uniform(margin, h - margin)),
                theta=float(rng.uniform(0.0, 2.0 * np.pi)),
                quality=float(rng.uniform(0.3, 1.0)),
            )
        )
    return out


def rigid_transform_minutiae(minutiae, angle: float, tx: float, ty: float, center):
    """Rotate about ``center`` then translate; directions shift by angle.

    Positive angles turn counterclockwise in the y-up sense minutia
    directions are measured in, so on pixel coordinates the rotation matrix
    is [[cos, sin], [-sin, cos]].
    """
    cx, cy = center
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    out = []
    for m in minutiae:
        dx, dy = m.x - cx, m.y - cy
        out.append(
            Minutia(
                x=float(cx + cos_a * dx + sin_a * dy + tx),
                y=float(cy - sin_a * dx + cos_a * dy + ty),
                theta=float(wrap_two_pi(m.theta + angle)),
                quality=m.quality,
            )
        )
    return out


def transform_maps(maps: TextureMaps, angle: float, tx: float, ty: float, center) -> TextureMaps:
    """Resample all maps under the same rigid motion (nearest neighbor).

    The doubled orientation values additionally shift by 2*angle, because
    rotating an image rotates its orientations.
    """
    h, w = maps.orientation.shape
    cx, cy = center
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    # inverse motion: undo translation, rotate back by -angle (y-up sense)
    dx, dy = xx - cx - tx, yy - cy - ty
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    sx = cx + cos_a * dx - sin_a * dy
    sy = cy + sin_a * dx + cos_a * dy
    ix = np.rint(sx).astype(int)
    iy = np.rint(sy).astype(int)
    inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    ix = np.clip(ix, 0, w - 1)
    iy = np.clip(iy, 0, h - 1)

    def pull(field):
        return field[iy, ix]

    return TextureMaps(
        orientation=wrap_pi(pull(maps.orientation) + 2.0 * angle),
        frequency=pull(maps.frequency),
        energy=pull(maps.energy),
        mask=pull(maps.mask) & inside,
        raw_frequency=pull(maps.raw_frequency),
        raw_energy=pull(maps.raw_energy),
        freq_lo=maps.freq_lo,
        freq_hi=maps.freq_hi,
    )


def jitter_minutiae(rng, minutiae, sigma_pos: float = 1.5, sigma_theta: float = 0.03,
                    dropout: float = 0.1, min_keep: int = 8):
    """Positional/angular noise plus random dropout."""
    keep = [m for m in minutiae if rng.uniform() >= dropout]
    if len(keep) < min_keep:
        keep = list(minutiae[:min_keep])
    out = []
    for m in keep:
        out.append(
            Minutia(
                x=float(m.x + rng.normal(0.0, sigma_pos)),
                y=float(m.y + rng.normal(0.0, sigma_pos)),
                theta=float(wrap_two_pi(m.theta + rng.normal(0.0, sigma_theta))),
                quality=m.quality,
            )
        )
    return out


def synthetic_dataset(rng, n_subjects: int = 20, n_impressions: int = 4,
                      shape=(320, 320), n_minutiae=(38, 55),
                      max_rotation: float = np.deg2rad(25.0), max_shift: float = 15.0):
    """Per-finger minutiae and texture maps plus rigid-moved impressions.

    Returns {subject: {impression: (minutiae, maps)}} with string keys, the
    first impression being the untransformed base.
    """
    center = (shape[1] / 2.0, shape[0] / 2.0)
    data = {}
    for s in range(n_subjects):
        n = int(rng.integers(n_minutiae[0], n_minutiae[1] + 1))
        base_min = random_minutiae(rng, n, shape)
        base_maps = synthetic_maps(rng, shape)
        subject = {}
        for i in range(n_impressions):
            if i == 0:
                subject["1"] = (base_min, base_maps)
                continue
            ang = float(rng.uniform(-max_rotation, max_rotation))
            tx = float(rng.uniform(-max_shift, max_shift))
            ty = float(rng.uniform(-max_shift, max_shift))
            moved = rigid_transform_minutiae(base_min, ang, tx, ty, center)
            moved = jitter_minutiae(rng, moved)
            maps = transform_maps(base_maps, ang, tx, ty, center)
            subject[str(i + 1)] = (moved, maps)
        data[f"{s + 1:03d}"] = subject
    return data
