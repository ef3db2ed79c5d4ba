"""Cylinder-pair similarities and the relaxation-based global match score.

Local similarities form an n_a x n_b matrix, a greedy one-per-row/column
pass picks candidate pairs, and a few relaxation iterations rescale each
pair by how geometrically compatible it is with the others.  Pairs whose
relaxed value collapses relative to its start (low efficiency) are dropped,
the survivors' similarities are averaged into the final score.
"""

import math
from dataclasses import dataclass

import numpy as np

from .angles import angle_diff
from .config import CylinderParams, RelaxParams
from .descriptor import sigmoid
from .templates import Cylinder, Template

# treat double-angle component denominators below this as zero
_DENOM_EPS = 1e-12


class KindMismatchError(ValueError):
    """Raised when two templates of different feature kinds are matched."""


def matchable(a: Cylinder, b: Cylinder, params: CylinderParams) -> bool:
    """Directions within delta_theta and enough jointly valid cells."""
    if abs(angle_diff(a.theta, b.theta)) > params.delta_theta:
        return False
    joint = a.cell_valid & b.cell_valid
    return joint.sum() / joint.size >= params.min_me


def similarity_euclidean(a: Cylinder, b: Cylinder, params: CylinderParams) -> float:
    """1 - |ca - cb| / (|ca| + |cb|) over jointly valid cells, else 0."""
    if not matchable(a, b, params):
        return 0.0
    joint = a.cell_valid & b.cell_valid
    va = a.values[joint].astype(np.float64)
    vb = b.values[joint].astype(np.float64)
    diff = va - vb
    den = np.sqrt(np.sum(va * va)) + np.sqrt(np.sum(vb * vb))
    if den == 0.0:
        return 0.0
    return float(1.0 - np.sqrt(np.sum(diff * diff)) / den)


def double_angle_score(va: np.ndarray, vb: np.ndarray) -> float:
    """Cos/sin distance of doubled cell values, sqrt(cos^2 + sin^2) / 2.

    Each component is the euclidean similarity of the cos(2v) (resp.
    sin(2v)) vectors; a component with a (near-)zero denominator counts
    as zero.
    """
    va = np.asarray(va, dtype=np.float64)
    vb = np.asarray(vb, dtype=np.float64)

    def component(fa, fb):
        den = np.sqrt(np.sum(fa * fa)) + np.sqrt(np.sum(fb * fb))
        if den < _DENOM_EPS:
            return 0.0
        d = fa - fb
        return 1.0 - np.sqrt(np.sum(d * d)) / den

    cos_d = component(np.cos(2.0 * va), np.cos(2.0 * vb))
    sin_d = component(np.sin(2.0 * va), np.sin(2.0 * vb))
    return float(np.sqrt(cos_d * cos_d + sin_d * sin_d) / 2.0)


def similarity_double_angle(a: Cylinder, b: Cylinder, params: CylinderParams) -> float:
    if not matchable(a, b, params):
        return 0.0
    joint = a.cell_valid & b.cell_valid
    return double_angle_score(a.values[joint], b.values[joint])


def cylinder_similarity(a: Cylinder, b: Cylinder, kind: str, params: CylinderParams) -> float:
    """Kind o keeps the euclidean metric, texture kinds the double-angle one."""
    if kind == "o":
        return similarity_euclidean(a, b, params)
    return similarity_double_angle(a, b, params)


def local_similarity_matrix(ta: Template, tb: Template, params: CylinderParams) -> np.ndarray:
    """Entry (r, c): similarity of ta.cylinders[r] and tb.cylinders[c]."""
    if ta.kind != tb.kind:
        raise KindMismatchError(f"cannot match kind {ta.kind!r} against {tb.kind!r}")
    if (ta.n_s, ta.n_d) != (tb.n_s, tb.n_d) or ta.r != tb.r:
        raise ValueError("templates were built with different cylinder geometry")
    lsm = np.zeros((len(ta), len(tb)))
    for r, ca in enumerate(ta.cylinders):
        for c, cb in enumerate(tb.cylinders):
            lsm[r, c] = cylinder_similarity(ca, cb, ta.kind, params)
    return lsm


def compute_np(n_a: int, n_b: int, params: RelaxParams) -> int:
    """Sigmoid-interpolated pair count, clamped to what is available."""
    z = sigmoid(min(n_a, n_b), params.mu_p, params.tau_p)
    n_p = params.min_np + int(math.floor(z * (params.max_np - params.min_np) + 0.5))
    n_p = max(n_p, params.min_np)
    return min(n_p, params.max_np, n_a, n_b)


def lss_select(lsm: np.ndarray, n: int):
    """Greedy top-n assignment: best remaining entry whose row and column
    are both unused, ties broken by ascending (row, col)."""
    rows, cols = lsm.shape
    if rows == 0 or cols == 0 or n <= 0:
        return []
    order = sorted(
        ((r, c) for r in range(rows) for c in range(cols)),
        key=lambda rc: (-lsm[rc], rc[0], rc[1]),
    )
    used_r, used_c, out = set(), set(), []
    for r, c in order:
        if r in used_r or c in used_c:
            continue
        used_r.add(r)
        used_c.add(c)
        out.append((r, c, float(lsm[r, c])))
        if len(out) == n:
            break
    return out


def pair_compatibilities(ta: Template, tb: Template, pairs, params: RelaxParams) -> np.ndarray:
    """rho(t, k): product of three sigmoids on distance, direction-difference
    and radial-angle discrepancies between pair t and pair k."""
    ax = np.array([ta.cylinders[r].x for r, _, _ in pairs])
    ay = np.array([ta.cylinders[r].y for r, _, _ in pairs])
    at = np.array([ta.cylinders[r].theta for r, _, _ in pairs])
    bx = np.array([tb.cylinders[c].x for _, c, _ in pairs])
    by = np.array([tb.cylinders[c].y for _, c, _ in pairs])
    bt = np.array([tb.cylinders[c].theta for _, c, _ in pairs])

    def geometry(x, y, th):
        ds = np.hypot(x[:, None] - x[None, :], y[:, None] - y[None, :])
        dth = angle_diff(th[:, None], th[None, :])
        # angle of the displacement measured like minutia directions (y up),
        # so rigid motions shift it exactly as they shift theta
        rad = angle_diff(th[:, None], np.arctan2(y[None, :] - y[:, None], x[:, None] - x[None, :]))
        return ds, dth, rad

    ds_a, dth_a, rad_a = geometry(ax, ay, at)
    ds_b, dth_b, rad_b = geometry(bx, by, bt)
    d1 = np.abs(ds_a - ds_b)
    d2 = np.abs(angle_diff(dth_a, dth_b))
    d3 = np.abs(angle_diff(rad_a, rad_b))
    rho = (
        sigmoid(d1, params.mu1, params.tau1)
        * sigmoid(d2, params.mu2, params.tau2)
        * sigmoid(d3, params.mu3, params.tau3)
    )
    np.fill_diagonal(rho, 0.0)
    return rho


def relax_iterations(lam0: np.ndarray, rho: np.ndarray, w_r: float, n_rel: int) -> np.ndarray:
    """Run the averaging iteration; rho must have a zero diagonal."""
    lam = np.asarray(lam0, dtype=np.float64).copy()
    n = lam.size
    if n < 2 or n_rel <= 0:
        return lam
    for _ in range(n_rel):
        neighbor = (rho * lam[None, :]).sum(axis=1) / (n - 1)
        lam = w_r * lam + (1.0 - w_r) * neighbor
    return lam


def relax(ta: Template, tb: Template, pairs, params: RelaxParams):
    """Relax candidate pairs; returns (lam_final, efficiencies).

    Fewer than two pairs pass through untouched with efficiency 1.
    """
    lam0 = np.array([s for _, _, s in pairs], dtype=np.float64)
    if len(pairs) < 2 or params.n_rel <= 0:
        return lam0.copy(), np.ones_like(lam0)
    rho = pair_compatibilities(ta, tb, pairs, params)
    lam = relax_iterations(lam0, rho, params.w_r, params.n_rel)
    eff = np.where(lam0 > 0.0, lam / np.where(lam0 > 0.0, lam0, 1.0), 0.0)
    return lam, eff


@dataclass(frozen=True)
class MatchResult:
    score: float
    # (ref cylinder index, query cylinder index, lsm similarity, relaxed value)
    pairs: tuple


def global_score(
    ta: Template,
    tb: Template,
    cyl_params: CylinderParams = None,
    relax_params: RelaxParams = None,
) -> MatchResult:
    """Full LSS-R pipeline score in [0, 1]; 0 for empty templates."""
    cyl_params = cyl_params if cyl_params is not None else CylinderParams()
    relax_params = relax_params if relax_params is not None else RelaxParams()
    n_a, n_b = len(ta), len(tb)
    if ta.kind != tb.kind:
        raise KindMismatchError(f"cannot match kind {ta.kind!r} against {tb.kind!r}")
    if n_a == 0 or n_b == 0:
        return MatchResult(score=0.0, pairs=())

    lsm = local_similarity_matrix(ta, tb, cyl_params)
    n_p = compute_np(n_a, n_b, relax_params)
    n_r = min(relax_params.n_r_factor * n_p, n_a, n_b)
    cand = lss_select(lsm, n_r)
    if not cand:
        return MatchResult(score=0.0, pairs=())

    lam, eff = relax(ta, tb, cand, relax_params)
    order = sorted(
        range(len(cand)),
        key=lambda t: (-eff[t], -cand[t][2], cand[t][0], cand[t][1]),
    )
    chosen = order[:n_p]
    if relax_params.score_source == "relaxed":
        score = float(np.mean([lam[t] for t in chosen]))
    else:
        score = float(np.mean([cand[t][2] for t in chosen]))
    pairs = tuple((cand[t][0], cand[t][1], cand[t][2], float(lam[t])) for t in chosen)
    return MatchResult(score=score, pairs=pairs)
