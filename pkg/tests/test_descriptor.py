"""Cylinder descriptor: geometry, contributions, validity, invariances."""

import math

import numpy as np
import pytest
from scipy.special import erf

from mtcc.angles import angle_diff, wrap_pi
from mtcc.config import CylinderParams
from mtcc.descriptor import (
    EmptyTemplateError,
    angular_value,
    build_cylinder,
    build_template,
    cell_angle,
    cell_center,
    cell_neighborhood,
    cell_validity,
    cell_value,
    directional_contribution,
    sigmoid,
    spatial_contribution,
)
from mtcc.minutiae import Minutia
from mtcc.synthetic import (
    random_minutiae,
    rigid_transform_minutiae,
    synthetic_maps,
    transform_maps,
)

from helpers import constant_maps, grid_minutiae

P = CylinderParams()


# ------------------------------------------------------------------ angles


def test_angle_diff_zero():
    assert angle_diff(1.234, 1.234) == 0.0


def test_angle_diff_wraps_high():
    # difference of +pi lands on the -pi edge of [-pi, pi)
    assert angle_diff(np.pi / 2, -np.pi / 2) == pytest.approx(-np.pi, abs=1e-12)


def test_angle_diff_wraps_low():
    assert angle_diff(-3 * np.pi / 4, 3 * np.pi / 4) == pytest.approx(np.pi / 2, abs=1e-12)


def test_angle_diff_in_range_passthrough():
    assert angle_diff(0.3, -0.2) == pytest.approx(0.5, abs=1e-12)


def test_angle_diff_array():
    d = angle_diff(np.array([0.0, np.pi / 2]), np.array([0.1, -np.pi / 2]))
    assert d == pytest.approx([-0.1, -np.pi], abs=1e-12)


# ------------------------------------------------------------- cell angles


def test_cell_angle_midpoint_zero():
    assert cell_angle(3, P) == pytest.approx(0.0, abs=1e-12)


def test_cell_angle_first_section():
    assert cell_angle(1, P) == pytest.approx(-4 * np.pi / 5, abs=1e-12)


def test_cell_angles_cover_circle():
    ks = cell_angle(np.arange(1, 6), P)
    assert np.all(np.diff(ks) == pytest.approx(2 * np.pi / 5, abs=1e-12))
    assert ks[0] == pytest.approx(-np.pi + np.pi / 5, abs=1e-12)


# ------------------------------------------------------------ cell centers


def test_cell_center_unrotated():
    m = Minutia(100.0, 100.0, 0.0)
    px, py = cell_center(m, 10, 10, P)
    expected = 100.0 + 0.5 * (2 * 65.0 / 18)
    assert px == pytest.approx(expected, abs=1e-9)
    assert py == pytest.approx(expected, abs=1e-9)


def test_cell_center_rotated_quarter_turn():
    m = Minutia(100.0, 100.0, np.pi / 2)
    px, py = cell_center(m, 10, 10, P)
    off = 0.5 * (2 * 65.0 / 18)
    assert px == pytest.approx(100.0 + off, abs=1e-9)
    assert py == pytest.approx(100.0 - off, abs=1e-9)


def test_cell_center_covers_radius():
    m = Minutia(0.0, 0.0, 0.0)
    px, py = cell_center(m, 18, 18, P)
    # farthest cell center sits at (n_s/2 - 1/2) * delta_s per axis
    lim = (18 / 2 - 0.5) * (130.0 / 18)
    assert px == pytest.approx(lim, abs=1e-9)
    assert py == pytest.approx(lim, abs=1e-9)


# ----------------------------------------------------------- contributions


def test_sigmoid_reference_value():
    # 1 / (1 + e^-2)
    assert sigmoid(0.01, 0.005, 400.0) == pytest.approx(1 / (1 + math.exp(-2)), abs=1e-15)
    assert sigmoid(0.01, 0.005, 400.0) == pytest.approx(0.8807970779778823, abs=1e-12)


def test_sigmoid_array_and_limits():
    v = sigmoid(np.array([-1e9, 0.005, 1e9]), 0.005, 400.0)
    assert v[0] == 0.0
    assert v[1] == 0.5
    assert v[2] == 1.0


def test_spatial_contribution_peak():
    expected = 1.0 / (6.0 * math.sqrt(2 * math.pi))
    assert spatial_contribution(0.0, P) == pytest.approx(expected, abs=1e-15)
    assert spatial_contribution(0.0, P) == pytest.approx(0.06649038006690546, abs=1e-12)


def test_spatial_contribution_three_sigma():
    expected = math.exp(-4.5) / (6.0 * math.sqrt(2 * math.pi))
    assert spatial_contribution(18.0, P) == pytest.approx(expected, abs=1e-15)
    assert spatial_contribution(18.0, P) == pytest.approx(0.000738641401989668, abs=1e-12)


def test_spatial_contribution_monotone():
    d = np.linspace(0, 30, 300)
    g = spatial_contribution(d, P)
    assert np.all(np.diff(g) < 0)


def _gd_oracle(x: float) -> float:
    denom = P.sigma_d * math.sqrt(2.0)
    half = math.pi / 5.0
    return 0.5 * (erf((x + half) / denom) - erf((x - half) / denom))


def test_directional_contribution_center():
    v = directional_contribution(0.0, P)
    assert v == pytest.approx(_gd_oracle(0.0), abs=1e-15)
    assert v == pytest.approx(0.8501326009313459, abs=1e-12)


def test_directional_contribution_symmetry():
    x = np.linspace(0, np.pi, 50)
    assert directional_contribution(x, P) == pytest.approx(
        directional_contribution(-x, P), abs=1e-15
    )


def test_directional_contribution_tail():
    assert directional_contribution(np.pi, P) < 1e-6


# ------------------------------------------------------------ angular values


def test_angular_value_kind_o():
    m = Minutia(0, 0, 0.3)
    n = Minutia(5, 5, 6.0)
    assert angular_value("o", m, neighbor=n) == pytest.approx(
        float(wrap_pi(0.3 - 6.0)), abs=1e-12
    )


def test_angular_value_cell_centered_energy():
    # central energy 0.3 against cell energy -0.2 gives 0.5
    maps = constant_maps((64, 64), energy_angle=-0.2)
    maps.energy[20, 20] = 0.3
    m = Minutia(20.0, 20.0, 0.0)
    v = angular_value("ce", m, maps=maps, cell_xy=(40.0, 40.0))
    assert v == pytest.approx(0.5, abs=1e-12)


def test_angular_value_cell_centered_orientation_doubles_theta():
    maps = constant_maps((64, 64), ori2=0.4)
    m = Minutia(20.0, 20.0, 3.5)
    v = angular_value("co", m, maps=maps, cell_xy=(30.0, 30.0))
    assert v == pytest.approx(float(angle_diff(wrap_pi(2 * 3.5), 0.4)), abs=1e-12)


def test_angular_value_unknown_kind():
    with pytest.raises(ValueError, match="kind"):
        angular_value("zz", Minutia(0, 0, 0), neighbor=Minutia(1, 1, 0))


# ------------------------------------------------------------- neighborhoods


def test_neighborhood_empty_set():
    m = Minutia(50, 50, 0)
    assert cell_neighborhood((50.0, 50.0), [m], m, P) == []


def test_neighborhood_radius_boundary():
    m = Minutia(0, 0, 0)
    at_limit = Minutia(18.0, 0.0, 0)  # exactly 3 sigma_s
    beyond = Minutia(18.0 + 1e-6, 0.0, 0)
    found = cell_neighborhood((0.0, 0.0), [m, at_limit, beyond], m, P)
    assert found == [1]


def test_neighborhood_identity_exclusion_keeps_twins():
    m1 = Minutia(10, 10, 0)
    m2 = Minutia(10, 10, 0)  # same coordinates, distinct object
    found = cell_neighborhood((10.0, 10.0), [m1, m2], m1, P)
    assert found == [1]


def test_neighborhood_matches_bruteforce():
    rng = np.random.default_rng(9)
    mins = random_minutiae(rng, 50, (300, 300))
    center = mins[7]
    pt = (150.0, 140.0)
    got = cell_neighborhood(pt, mins, center, P)
    expected = [
        i for i, mt in enumerate(mins)
        if mt is not center and np.hypot(mt.x - pt[0], mt.y - pt[1]) <= 18.0
    ]
    assert got == expected


# -------------------------------------------------------------- cell values


def test_cell_value_no_neighbors():
    m = Minutia(200, 200, 0)
    v = cell_value(m, [m], 9, 9, 3, "o", P)
    assert v == pytest.approx(1 / (1 + math.exp(400 * 0.005)), abs=1e-15)
    assert v == pytest.approx(0.11920292202211755, abs=1e-12)


def test_cell_value_no_neighbors_zero_flag():
    params = CylinderParams(empty_cell_psi=False)
    m = Minutia(200, 200, 0)
    assert cell_value(m, [m], 9, 9, 3, "o", params) == 0.0


def test_cell_value_single_perfect_neighbor():
    # one neighbor exactly at the cell center whose angle offset is zero:
    # the value composes the two peak contributions through the sigmoid
    m = Minutia(200.0, 200.0, 0.0)
    px, py = cell_center(m, 10, 10, P)
    neighbor = Minutia(float(px), float(py), 0.0)  # alpha = 0 = section 3 angle
    v = cell_value(m, [m, neighbor], 10, 10, 3, "o", P)
    expected = sigmoid(spatial_contribution(0.0, P) * directional_contribution(0.0, P),
                       P.mu_psi, P.tau_psi)
    assert v == pytest.approx(expected, abs=1e-15)
    assert 1.0 - v < 2e-9  # saturates to within a couple of ulps of full evidence


def test_cell_value_scalar_matches_builder():
    rng = np.random.default_rng(21)
    mins = random_minutiae(rng, 12, (280, 280))
    mask = np.ones((280, 280), dtype=bool)
    maps = constant_maps((280, 280), ori2=0.7, freq_angle=0.2, energy_angle=-1.1)
    for kind in ("o", "f", "co", "ce"):
        cyl = build_cylinder(mins[0], mins, kind, P, mask, maps)
        for (i, j, k) in ((1, 1, 1), (9, 9, 3), (14, 3, 5), (18, 18, 2)):
            lin = (k - 1) * 324 + (j - 1) * 18 + (i - 1)
            ref = cell_value(mins[0], mins, i, j, k, kind, P, mask=mask, maps=maps)
            assert cyl.values[lin] == pytest.approx(ref, abs=1e-6), (kind, i, j, k)


# ---------------------------------------------------------------- validity


def test_validity_full_mask_interior():
    mask = np.ones((400, 400), dtype=bool)
    m = Minutia(200, 200, 0.9)
    valid = cell_validity(m, mask, P)
    assert valid.shape == (1620,)
    assert valid.all()


def test_validity_outside_image_cells_invalid():
    mask = np.ones((120, 120), dtype=bool)
    m = Minutia(5, 60, 0.0)  # cylinder sticks out on the left
    valid = cell_validity(m, mask, P)
    assert not valid.all()
    assert valid.sum() % 5 == 0  # pattern repeats over the angular layers


def test_validity_matches_bruteforce_lookup():
    rng = np.random.default_rng(17)
    mask = rng.uniform(size=(200, 200)) < 0.6
    m = Minutia(100.0, 90.0, 2.1)
    got = cell_validity(m, mask, P)
    c = (P.n_s + 1) / 2.0
    for j in range(1, P.n_s + 1):
        for i in range(1, P.n_s + 1):
            px, py = cell_center(m, i, j, P)
            ix, iy = int(np.rint(px)), int(np.rint(py))
            inside = 0 <= ix < 200 and 0 <= iy < 200
            expected = bool(mask[iy, ix]) if inside else False
            lin = (j - 1) * P.n_s + (i - 1)
            for k in range(P.n_d):
                assert got[k * 324 + lin] == expected, (i, j, k)


# ---------------------------------------------------------------- cylinders


def test_cylinder_valid_with_neighbor_full_mask():
    mask = np.ones((400, 400), dtype=bool)
    m = Minutia(200, 200, 0.0)
    n = Minutia(230, 210, 1.0)
    cyl = build_cylinder(m, [m, n], "o", P, mask)
    assert cyl.valid
    assert cyl.cell_valid.all()
    assert cyl.values.dtype == np.float32
    assert cyl.values.shape == (1620,)


def test_cylinder_invalid_cells_store_zero():
    mask = np.zeros((400, 400), dtype=bool)
    mask[:, :200] = True
    m = Minutia(195, 200, 0.0)
    n = Minutia(205, 210, 1.0)
    cyl = build_cylinder(m, [m, n], "o", P, mask)
    assert not cyl.cell_valid.all()
    assert np.all(cyl.values[~cyl.cell_valid] == 0.0)


def test_cylinder_without_nearby_minutia_invalid():
    mask = np.ones((600, 600), dtype=bool)
    m = Minutia(150, 150, 0.0)
    far = Minutia(500, 500, 0.0)  # beyond r + 3 sigma_s
    cyl = build_cylinder(m, [m, far], "o", P, mask)
    assert not cyl.valid


def test_build_template_far_minutiae_empty():
    mask = np.ones((600, 600), dtype=bool)
    mins = [Minutia(100, 100, 0.0), Minutia(500, 500, 0.0)]
    with pytest.raises(EmptyTemplateError):
        build_template(mins, "o", P, mask)


def test_build_template_dense_full_mask_keeps_all():
    mask = np.ones((360, 360), dtype=bool)
    mins = grid_minutiae(120, 120, 4, 4, 30, theta=0.5)
    t = build_template(mins, "o", P, mask)
    assert len(t) == len(mins)
    assert t.width == 360 and t.height == 360


def test_build_template_never_exceeds_input_count():
    rng = np.random.default_rng(4)
    mask = np.ones((300, 300), dtype=bool)
    mins = random_minutiae(rng, 25, (300, 300))
    t = build_template(mins, "o", P, mask)
    assert len(t) <= 25


def test_texture_kinds_require_maps():
    mask = np.ones((200, 200), dtype=bool)
    m = Minutia(100, 100, 0)
    with pytest.raises(ValueError, match="maps"):
        build_cylinder(m, [m], "cf", P, mask)


def test_unknown_kind_rejected():
    mask = np.ones((200, 200), dtype=bool)
    m = Minutia(100, 100, 0)
    with pytest.raises(ValueError, match="kind"):
        build_cylinder(m, [m], "qq", P, mask)


def test_builder_deterministic():
    rng = np.random.default_rng(31)
    mask = np.ones((300, 300), dtype=bool)
    maps = constant_maps((300, 300))
    mins = random_minutiae(rng, 20, (300, 300))
    for kind in ("o", "co"):
        t1 = build_template(mins, kind, P, mask, maps)
        t2 = build_template(mins, kind, P, mask, maps)
        assert t1 == t2


def test_kind_o_rigid_motion_invariance_single_cylinder():
    rng = np.random.default_rng(12)
    shape = (900, 900)
    mask = np.ones(shape, dtype=bool)
    base = [Minutia(m.x + 300, m.y + 300, m.theta, m.quality)
            for m in random_minutiae(rng, 15, (300, 300))]
    angle, tx, ty = 0.6, 40.0, -25.0
    moved = rigid_transform_minutiae(base, angle, tx, ty, (450.0, 450.0))
    c0 = build_cylinder(base[0], base, "o", P, mask)
    c1 = build_cylinder(moved[0], moved, "o", P, mask)
    assert c1.values == pytest.approx(c0.values, abs=1e-6)


def test_kind_co_rigid_motion_near_invariance():
    # minutiae and maps moved together: map pixels snap to the nearest
    # source pixel so the invariance is approximate, not exact
    rng = np.random.default_rng(13)
    shape = (900, 900)
    mask = np.ones(shape, dtype=bool)
    maps0 = synthetic_maps(rng, shape)
    base = [Minutia(m.x + 300, m.y + 300, m.theta, m.quality)
            for m in random_minutiae(rng, 15, (300, 300))]
    angle, tx, ty = 0.5, 30.0, -20.0
    moved = rigid_transform_minutiae(base, angle, tx, ty, (450.0, 450.0))
    maps1 = transform_maps(maps0, angle, tx, ty, (450.0, 450.0))
    c0 = build_cylinder(base[0], base, "co", P, mask, maps=maps0)
    c1 = build_cylinder(moved[0], moved, "co", P, mask, maps=maps1)
    assert np.mean(np.abs(c1.values - c0.values)) < 0.02


def test_empty_cell_default_holds_floor_value():
    # a lone pair: cells far from the neighbor stay at the sigmoid floor
    mask = np.ones((500, 500), dtype=bool)
    m = Minutia(250, 250, 0.0)
    n = Minutia(260, 250, 0.0)
    cyl = build_cylinder(m, [m, n], "o", P, mask)
    floor = 1 / (1 + math.exp(400 * 0.005))
    corner = cyl.values[(3 - 1) * 324 + (1 - 1) * 18 + (1 - 1)]  # i=j=1, k=3
    assert corner == pytest.approx(floor, abs=1e-6)

    params0 = CylinderParams(empty_cell_psi=False)
    cyl0 = build_cylinder(m, [m, n], "o", params0, mask)
    assert cyl0.values[(3 - 1) * 324] == 0.0
