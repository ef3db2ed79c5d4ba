"""Verification protocol and error-rate metrics.

Genuine scores come from every unordered pair of impressions of the same
subject, impostor scores from every unordered pair of distinct subjects at
the first impression.  For 100 subjects x 8 impressions that is 2800
genuine and 4950 impostor comparisons.

FMR(t) is the fraction of impostor scores >= t, FNMR(t) the fraction of
genuine scores < t.  The EER interpolates the convex hull of the observed
(FMR, FNMR) operating points where it crosses FMR = FNMR, which keeps the
value stable for tiny score sets and invariant under monotone rescoring.
FMR1000 is the FNMR at the lowest threshold whose FMR is at most 0.001.
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import matcher
from .config import CylinderParams, RelaxParams
from .templates import TemplateIOError, load_template


def genuine_impostor_counts(n_subjects: int, n_impressions: int):
    """Closed-form comparison counts for the protocol."""
    genuine = n_subjects * (n_impressions * (n_impressions - 1)) // 2
    impostor = n_subjects * (n_subjects - 1) // 2
    return genuine, impostor


@dataclass(frozen=True)
class DatasetLayout:
    """Where to find pre-built templates.

    Template files are named by ``pattern`` with {subject}, {impression}
    and {kind} placeholders, all under ``template_dir``.
    """

    template_dir: str
    subjects: tuple
    impressions: tuple
    pattern: str = "{subject}_{impression}.{kind}.tpl"

    def template_path(self, subject, impression, kind: str) -> str:
        name = self.pattern.format(subject=subject, impression=impression, kind=kind)
        return os.path.join(self.template_dir, name)


def genuine_pairs(layout: DatasetLayout):
    imps = layout.impressions
    for subject in layout.subjects:
        for i in range(len(imps)):
            for j in range(i + 1, len(imps)):
                yield (subject, imps[i]), (subject, imps[j])


def impostor_pairs(layout: DatasetLayout):
    first = layout.impressions[0]
    subs = layout.subjects
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            yield (subs[i], first), (subs[j], first)


@dataclass(frozen=True)
class ProtocolResult:
    genuine: np.ndarray
    impostor: np.ndarray
    # ((subject_a, impression_a), (subject_b, impression_b), reason)
    skipped: tuple


def run_protocol(
    layout: DatasetLayout,
    kind: str,
    cyl_params: CylinderParams = None,
    relax_params: RelaxParams = None,
) -> ProtocolResult:
    """Score every protocol pair; unreadable templates score 0 and are
    reported in ``skipped`` instead of being dropped."""
    cyl_params = cyl_params if cyl_params is not None else CylinderParams()
    relax_params = relax_params if relax_params is not None else RelaxParams()

    cache = {}

    def load(key):
        if key not in cache:
            path = layout.template_path(key[0], key[1], kind)
            try:
                cache[key] = load_template(path)
            except FileNotFoundError:
                cache[key] = "missing template file"
            except TemplateIOError as exc:
                cache[key] = f"unreadable template: {exc}"
        return cache[key]

    skipped = []

    def score_pairs(pairs):
        scores = []
        for ka, kb in pairs:
            ta, tb = load(ka), load(kb)
            bad = []
            if isinstance(ta, str):
                bad.append((ka, ta))
            if isinstance(tb, str):
                bad.append((kb, tb))
            if bad:
                skipped.append((ka, kb, "; ".join(f"{k}: {r}" for k, r in bad)))
                scores.append(0.0)
                continue
            scores.append(matcher.global_score(ta, tb, cyl_params, relax_params).score)
        return np.array(scores, dtype=np.float64)

    genuine = score_pairs(genuine_pairs(layout))
    impostor = score_pairs(impostor_pairs(layout))
    return ProtocolResult(genuine=genuine, impostor=impostor, skipped=tuple(skipped))


def det_points(genuine, impostor):
    """(threshold, FMR, FNMR) at every distinct observed score plus one
    sentinel above the maximum (FMR 0, FNMR 1): N+1 rows for N scores."""
    g = np.asarray(genuine, dtype=np.float64)
    i = np.asarray(impostor, dtype=np.float64)
    if g.size == 0 or i.size == 0:
        raise ValueError("need at least one genuine and one impostor score")
    thresholds = np.unique(np.concatenate([g, i]))
    rows = []
    for t in thresholds:
        rows.append((float(t), float(np.mean(i >= t)), float(np.mean(g < t))))
    rows.append((float("inf"), 0.0, 1.0))
    return rows


def _roc_hull(points):
    """Lower-left convex hull of (FMR, FNMR) points, FMR descending."""
    pts = sorted(set(points), key=lambda p: (-p[0], p[1]))
    hull = []
    for p in pts:
        hull.append(p)
        while len(hull) >= 3:
            (x1, y1), (x2, y2), (x3, y3) = hull[-3:]
            cross = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
            if cross >= 0:  # middle point on or above the chord
                hull.pop(-2)
            else:
                break
    return hull


def compute_eer(genuine, impostor) -> float:
    """Equal error rate from the hull of the DET staircase."""
    pts = [(fmr, fnmr) for _, fmr, fnmr in det_points(genuine, impostor)]
    pts.extend([(1.0, 0.0), (0.0, 1.0)])
    hull = _roc_hull(pts)
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        d1, d2 = x1 - y1, x2 - y2
        if d1 == 0.0:
            return float(x1)
        if d1 > 0.0 >= d2:
            s = d1 / (d1 - d2)
            return float(x1 + s * (x2 - x1))
    return float(hull[-1][0])


def fmr1000_operating_point(genuine, impostor):
    """(threshold, fmr, fnmr, exact) at the lowest threshold with
    FMR <= 0.001; ``exact`` is False when fewer than 1000 impostor scores
    make that operating point unreachable exactly."""
    rows = det_points(genuine, impostor)
    exact = np.asarray(impostor).size >= 1000
    for t, fmr, fnmr in rows:  # thresholds ascend; first hit is the lowest
        if fmr <= 0.001:
            return t, fmr, fnmr, exact
    t, fmr, fnmr = rows[-1]
    return t, fmr, fnmr, exact


def compute_fmr1000(genuine, impostor) -> float:
    return fmr1000_operating_point(genuine, impostor)[2]


def emit_curves(genuine, impostor, det_path, roc_path) -> None:
    """Write det.csv (threshold,fmr,fnmr) and roc.csv (fmr,tpr).

    Floats are written with repr so a re-parse reproduces them exactly.
    """
    rows = det_points(genuine, impostor)
    with open(det_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["threshold", "fmr", "fnmr"])
        for t, fmr, fnmr in rows:
            w.writerow([repr(t), repr(fmr), repr(fnmr)])
    with open(roc_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["fmr", "tpr"])
        for _, fmr, fnmr in rows:
            w.writerow([repr(fmr), repr(1.0 - fnmr)])


def read_curve(path):
    """Parse a curve csv back into a list of float tuples."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        return [tuple(float(x) for x in row) for row in reader]


def emit_summary(rows, path) -> None:
    """summary.csv: one row per evaluated kind."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "eer", "fmr1000", "genuine", "impostor", "skipped"])
        for r in rows:
            w.writerow(
                [r["kind"], repr(r["eer"]), repr(r["fmr1000"]), r["genuine"], r["impostor"], r["skipped"]]
            )
