"""Cylinder descriptor construction.

A cylinder discretizes the r-neighborhood of a minutia into n_s x n_s x n_d
cells.  Every cell accumulates spatial Gaussian contributions of nearby
minutiae times a directional factor, squashed by a sigmoid.  The directional
factor is what distinguishes the six feature kinds:

    o   minutia direction differences (the classic descriptor)
    f   frequency-map values at minutia locations
    e   energy-map values at minutia locations
    co  minutia direction against the orientation map at the cell center
    cf  frequency map at the minutia against the cell center
    ce  energy map at the minutia against the cell center

Kinds f/e/co/cf/ce need the texture maps produced by the analysis pass.
"""

import numpy as np
from scipy.special import erf

from .angles import angle_diff, wrap_pi
from .config import CylinderParams
from .minutiae import Minutia
from .templates import Cylinder, Template

SET1_KINDS = ("o", "f", "e")
SET2_KINDS = ("co", "cf", "ce")


class EmptyTemplateError(ValueError):
    """Raised when no minutia yields a valid cylinder."""


def sigmoid(v, mu: float, tau: float):
    """Logistic squashing 1 / (1 + exp(-tau * (v - mu))), array friendly."""
    arr = np.asarray(v, dtype=float)
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(-tau * (arr - mu)))
    return out if arr.ndim else float(out)


def cell_angle(k, params: CylinderParams):
    """Directional center of 1-based section k: -pi + (k - 1/2) * delta_d."""
    return -np.pi + (np.asarray(k, dtype=float) - 0.5) * params.delta_d


def cell_center(minutia: Minutia, i, j, params: CylinderParams):
    """Spatial center of 1-based cell (i, j), rotated by the minutia angle.

    The offset grid spins with the minutia direction, which is what buys the
    descriptor its rotation invariance.
    """
    c = (params.n_s + 1) / 2.0
    di = (np.asarray(i, dtype=float) - c) * params.delta_s
    dj = (np.asarray(j, dtype=float) - c) * params.delta_s
    cos_t = np.cos(minutia.theta)
    sin_t = np.sin(minutia.theta)
    px = minutia.x + cos_t * di + sin_t * dj
    py = minutia.y - sin_t * di + cos_t * dj
    return px, py


def spatial_contribution(d, params: CylinderParams):
    """Normalized Gaussian of the distance between a minutia and a cell."""
    d = np.asarray(d, dtype=float)
    g = np.exp(-(d * d) / (2.0 * params.sigma_s**2)) / (params.sigma_s * np.sqrt(2.0 * np.pi))
    return g if d.ndim else float(g)


def directional_contribution(x, params: CylinderParams):
    """Gaussian mass over one angular section centered on offset x.

    Integrates the sigma_d Gaussian over [x - delta_d/2, x + delta_d/2]
    via the error function.
    """
    x = np.asarray(x, dtype=float)
    denom = params.sigma_d * np.sqrt(2.0)
    half = params.delta_d / 2.0
    g = 0.5 * (erf((x + half) / denom) - erf((x - half) / denom))
    return g if x.ndim else float(g)


def cell_neighborhood(point_xy, minutiae, exclude: Minutia, params: CylinderParams):
    """Indices of minutiae within 3*sigma_s of a point, central one excluded.

    Exclusion is by object identity so coincident minutiae stay distinct.
    """
    px, py = point_xy
    limit = 3.0 * params.sigma_s
    out = []
    for idx, mt in enumerate(minutiae):
        if mt is exclude:
            continue
        if np.hypot(mt.x - px, mt.y - py) <= limit:
            out.append(idx)
    return out


def sample_map(map2d: np.ndarray, x, y):
    """Nearest-pixel map lookup with edge clamping."""
    h, w = map2d.shape
    ix = np.clip(np.rint(x).astype(int), 0, w - 1)
    iy = np.clip(np.rint(y).astype(int), 0, h - 1)
    return map2d[iy, ix]


def angular_value(kind: str, minutia: Minutia, neighbor: Minutia = None, maps=None, cell_xy=None):
    """The angle alpha the directional factor is centered on, per kind.

    Set 1 kinds compare a per-minutia value of the central and the
    neighboring minutia; set 2 kinds compare the central value against the
    map sampled at the cell center.
    """
    if kind not in SET1_KINDS + SET2_KINDS:
        raise ValueError(f"unknown feature kind {kind!r}")
    if kind == "o":
        return angle_diff(minutia.theta, neighbor.theta)
    if kind == "f":
        a = sample_map(maps.frequency, minutia.x, minutia.y)
        b = sample_map(maps.frequency, neighbor.x, neighbor.y)
        return angle_diff(a, b)
    if kind == "e":
        a = sample_map(maps.energy, minutia.x, minutia.y)
        b = sample_map(maps.energy, neighbor.x, neighbor.y)
        return angle_diff(a, b)
    cx, cy = cell_xy
    if kind == "co":
        central = wrap_pi(2.0 * minutia.theta)
        return angle_diff(central, sample_map(maps.orientation, cx, cy))
    if kind == "cf":
        central = sample_map(maps.frequency, minutia.x, minutia.y)
        return angle_diff(central, sample_map(maps.frequency, cx, cy))
    central = sample_map(maps.energy, minutia.x, minutia.y)
    return angle_diff(central, sample_map(maps.energy, cx, cy))


def cell_value(minutia, minutiae, i, j, k, kind, params, mask=None, maps=None):
    """Scalar cell computation, mirroring one entry of build_cylinder.

    Mainly a readable reference for tests; the builder vectorizes the same
    arithmetic.
    """
    px, py = cell_center(minutia, i, j, params)
    dphi_k = cell_angle(k, params)
    total = 0.0
    terms = []
    for idx in cell_neighborhood((px, py), minutiae, minutia, params):
        mt = minutiae[idx]
        cs = spatial_contribution(np.hypot(mt.x - px, mt.y - py), params)
        if kind in SET1_KINDS:
            alpha = angular_value(kind, minutia, neighbor=mt, maps=maps)
            cd = directional_contribution(angle_diff(dphi_k, alpha), params)
        else:
            alpha = angular_value(kind, minutia, maps=maps, cell_xy=(px, py))
            cd = directional_contribution(angle_diff(dphi_k, alpha), params)
        terms.append(cs * cd)
    total = np.sum(np.asarray(terms, dtype=float)) if terms else 0.0
    if total == 0.0 and not params.empty_cell_psi:
        return 0.0
    return sigmoid(float(total), params.mu_psi, params.tau_psi)


def _cell_grid(params: CylinderParams):
    """Unrotated cell offsets, flattened so index = (j-1)*n_s + (i-1)."""
    c = (params.n_s + 1) / 2.0
    d = (np.arange(1, params.n_s + 1, dtype=float) - c) * params.delta_s
    dj, di = np.meshgrid(d, d, indexing="ij")  # rows j, cols i
    return di.ravel(), dj.ravel()


def cell_validity(minutia: Minutia, mask: np.ndarray, params: CylinderParams) -> np.ndarray:
    """Per-cell validity over the full linearized cylinder.

    A spatial cell is valid when its center rounds to a pixel inside the
    image and the segmentation mask is true there; the pattern repeats over
    the n_d directional layers.
    """
    h, w = mask.shape
    di, dj = _cell_grid(params)
    cos_t, sin_t = np.cos(minutia.theta), np.sin(minutia.theta)
    px = minutia.x + cos_t * di + sin_t * dj
    py = minutia.y - sin_t * di + cos_t * dj
    ix = np.rint(px).astype(int)
    iy = np.rint(py).astype(int)
    inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
    spatial = np.zeros(params.n_s * params.n_s, dtype=bool)
    spatial[inside] = mask[iy[inside], ix[inside]]
    return np.tile(spatial, params.n_d)


def build_cylinder(minutia, minutiae, kind, params, mask, maps=None) -> Cylinder:
    """Build one cylinder; its ``valid`` flag reflects the validity rules."""
    if kind not in SET1_KINDS + SET2_KINDS:
        raise ValueError(f"unknown feature kind {kind!r}")
    if kind != "o" and maps is None:
        raise ValueError(f"kind {kind!r} requires texture maps")

    h, w = mask.shape
    n_s, n_d = params.n_s, params.n_d
    n_cells = n_s * n_s

    di, dj = _cell_grid(params)
    cos_t, sin_t = np.cos(minutia.theta), np.sin(minutia.theta)
    px = minutia.x + cos_t * di + sin_t * dj
    py = minutia.y - sin_t * di + cos_t * dj

    others = [mt for mt in minutiae if mt is not minutia]
    dphi_k = cell_angle(np.arange(1, n_d + 1), params)

    if others:
        ox = np.array([mt.x for mt in others])
        oy = np.array([mt.y for mt in others])
        dists = np.hypot(ox[None, :] - px[:, None], oy[None, :] - py[:, None])
        spatial = np.where(
            dists <= 3.0 * params.sigma_s, spatial_contribution(dists, params), 0.0
        )
        if kind in SET1_KINDS:
            if kind == "o":
                alpha = angle_diff(minutia.theta, np.array([mt.theta for mt in others]))
            else:
                m2d = maps.frequency if kind == "f" else maps.energy
                central = sample_map(m2d, minutia.x, minutia.y)
                alpha = angle_diff(central, sample_map(m2d, ox, oy))
            # directional factor per (k, neighbor)
            d_factor = directional_contribution(
                angle_diff(dphi_k[:, None], alpha[None, :]), params
            )
            sums = (spatial[:, None, :] * d_factor[None, :, :]).sum(axis=2)
        else:
            sums = spatial.sum(axis=1)  # per cell, shared across k
    else:
        sums = np.zeros((n_cells, n_d)) if kind in SET1_KINDS else np.zeros(n_cells)

    if kind in SET2_KINDS:
        if kind == "co":
            central = wrap_pi(2.0 * minutia.theta)
            alpha_cell = angle_diff(central, sample_map(maps.orientation, px, py))
        else:
            m2d = maps.frequency if kind == "cf" else maps.energy
            central = sample_map(m2d, minutia.x, minutia.y)
            alpha_cell = angle_diff(central, sample_map(m2d, px, py))
        d_cell = directional_contribution(
            angle_diff(dphi_k[None, :], alpha_cell[:, None]), params
        )
        raw = np.asarray(sums)[:, None] * d_cell  # (cells, k)
    else:
        raw = sums  # (cells, k)

    values = sigmoid(raw, params.mu_psi, params.tau_psi)
    if not params.empty_cell_psi:
        values = np.where(raw == 0.0, 0.0, values)

    # linearization: index = (k-1)*n_s^2 + (j-1)*n_s + (i-1)
    values = values.T.reshape(n_d * n_cells)
    valid = cell_validity(minutia, mask, params)
    values = np.where(valid, values, 0.0)

    frac_valid = valid[:n_cells].sum() / n_cells
    if others:
        center_d = np.hypot(ox - minutia.x, oy - minutia.y)
        n_near = int((center_d <= params.r + 3.0 * params.sigma_s).sum())
    else:
        n_near = 0
    is_valid = frac_valid >= params.min_vc and n_near >= params.min_m

    return Cylinder(
        x=minutia.x,
        y=minutia.y,
        theta=minutia.theta,
        quality=minutia.quality,
        values=values.astype(np.float32),
        cell_valid=valid,
        valid=is_valid,
    )


def build_template(minutiae, kind, params, mask, maps=None) -> Template:
    """Build cylinders for every minutia and keep the valid ones in order."""
    h, w = mask.shape
    cylinders = [
        c
        for m in minutiae
        if (c := build_cylinder(m, minutiae, kind, params, mask, maps)).valid
    ]
    if not cylinders:
        raise EmptyTemplateError(
            f"no valid cylinder among {len(minutiae)} minutiae for kind {kind!r}"
        )
    return Template(
        kind=kind,
        n_s=params.n_s,
        n_d=params.n_d,
        r=params.r,
        width=w,
        height=h,
        cylinders=tuple(cylinders),
    )
