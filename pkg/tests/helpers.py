"""Shared test fixtures: constant texture maps, template factories."""

import numpy as np

from mtcc.angles import wrap_pi
from mtcc.config import CylinderParams
from mtcc.minutiae import Minutia
from mtcc.stft import TextureMaps
from mtcc.synthetic import random_minutiae
from mtcc.templates import Cylinder, Template


def constant_maps(shape, ori2=0.3, freq_angle=-0.4, energy_angle=0.9,
                  freq_lo=1.0 / 25.0, freq_hi=1.0 / 3.0, mask=None) -> TextureMaps:
    """Texture maps with spatially constant values."""
    mask = mask if mask is not None else np.ones(shape, dtype=bool)
    raw_freq = freq_lo + (freq_angle + np.pi) / (2.0 * np.pi) * (freq_hi - freq_lo)
    return TextureMaps(
        orientation=np.full(shape, float(wrap_pi(ori2))),
        frequency=np.full(shape, float(wrap_pi(freq_angle))),
        energy=np.full(shape, float(wrap_pi(energy_angle))),
        mask=mask,
        raw_frequency=np.full(shape, raw_freq),
        raw_energy=np.full(shape, 5.0),
        freq_lo=freq_lo,
        freq_hi=freq_hi,
    )


def bare_cylinder(theta=0.0, values=(1.0, 0.0), valid=None, x=0.0, y=0.0):
    """Cylinder with hand-picked cell values for similarity tests."""
    values = np.asarray(values, dtype=np.float32)
    cell_valid = np.ones(values.shape, dtype=bool) if valid is None else np.asarray(valid, bool)
    return Cylinder(x=x, y=y, theta=theta, quality=1.0,
                    values=values, cell_valid=cell_valid, valid=True)


def geometry_cylinder(x, y, theta, n_c=10):
    """Cylinder whose only meaningful content is its pose (for relaxation)."""
    return Cylinder(x=x, y=y, theta=theta, quality=1.0,
                    values=np.ones(n_c, dtype=np.float32),
                    cell_valid=np.ones(n_c, dtype=bool), valid=True)


def pose_template(poses, kind="o", n_s=18, n_d=5, r=65.0, width=400, height=400):
    """Template of geometry_cylinders at the given (x, y, theta) poses."""
    n_c = n_s * n_s * n_d
    cyls = tuple(geometry_cylinder(x, y, th, n_c=n_c) for x, y, th in poses)
    return Template(kind=kind, n_s=n_s, n_d=n_d, r=r,
                    width=width, height=height, cylinders=cyls)


def random_template(rng, n=8, kind="o", shape=(160, 160), params=None):
    """Small template of random cylinders with random values/validity."""
    params = params if params is not None else CylinderParams()
    n_c = params.n_c
    cyls = []
    for m in random_minutiae(rng, n, shape):
        values = rng.uniform(0.0, 1.0, n_c).astype(np.float32)
        cell_valid = rng.uniform(size=n_c) < 0.8
        values = np.where(cell_valid, values, 0.0).astype(np.float32)
        cyls.append(Cylinder(x=m.x, y=m.y, theta=m.theta, quality=m.quality,
                             values=values, cell_valid=cell_valid, valid=True))
    return Template(kind=kind, n_s=params.n_s, n_d=params.n_d, r=params.r,
                    width=shape[1], height=shape[0], cylinders=tuple(cyls))


def write_minutiae_file(path, minutiae):
    with open(path, "w", encoding="utf-8") as fh:
        for m in minutiae:
            fh.write(f"{m.x!r} {m.y!r} {m.theta!r} {m.quality!r}\n")


def grid_minutiae(x0, y0, nx, ny, step, theta=0.0, quality=1.0):
    """Regular grid of minutiae, row-major order."""
    out = []
    for j in range(ny):
        for i in range(nx):
            out.append(Minutia(x=x0 + i * step, y=y0 + j * step,
                               theta=theta, quality=quality))
    return out
