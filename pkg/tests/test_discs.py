"""Good radii, Holder constants, clearing-out threshold and the covering."""

import math

import numpy as np
import pytest

from vacmin.discs import (BadDiscReport, ClearingOutViolated,
                          clearing_out_threshold, clearing_out_violations,
                          find_bad_discs, geodesic_distances, greedy_bad_discs,
                          holder_constant, select_good_radius,
                          sphere_holder_constant)
from vacmin.field import Grid, ScalarField, sphere_area, sphere_points


# ---------------------------------------------------------------------------
# threshold formula


def test_threshold_formula_value():
    # n=2, eps=0.5, C4=1, alpha=1: (0.5/4) * 2pi * 0.25 = 0.0625 pi
    mu = clearing_out_threshold(0.5, 1.0, 1.0, 2)
    assert mu == pytest.approx(0.0625 * math.pi)
    assert mu == pytest.approx(0.19635, abs=1e-5)


def test_threshold_monotone_in_eps():
    mus = [clearing_out_threshold(e, 1.0, 1.0, 2)
           for e in np.linspace(0.05, 3.0, 40)]
    assert all(b > a for a, b in zip(mus, mus[1:]))


def test_threshold_saturation():
    # eps >= 2 C4 saturates the min at 1
    c4, n = 0.3, 3
    eps = 0.7
    assert eps >= 2 * c4
    mu = clearing_out_threshold(eps, c4, 1.0, n)
    assert mu == pytest.approx(eps / 2 ** n * sphere_area(n, 1.0))


def test_threshold_validation():
    with pytest.raises(ValueError):
        clearing_out_threshold(-1.0, 1.0, 1.0, 2)
    with pytest.raises(ValueError):
        clearing_out_threshold(0.5, 1.0, 1.5, 2)


# ---------------------------------------------------------------------------
# Holder constants


def test_holder_constant_examples(small_grid):
    assert holder_constant(ScalarField.constant(small_grid, 3.0)) == 0.0
    lin = ScalarField.from_function(small_grid, lambda x: x[0])
    c = holder_constant(lin, 1.0)
    assert c == pytest.approx(1.0, abs=1e-8)
    doubled = ScalarField(small_grid, 2.0 * lin.values)
    assert holder_constant(doubled, 1.0) == pytest.approx(2 * c)


def test_sphere_holder_constant_linear_profile():
    K = 512
    R = 3.0
    pts = sphere_points(2, R, K)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    vals = np.cos(theta)
    c = sphere_holder_constant(pts, vals, R, 1.0)
    # d cos(theta) / d(arc) = sin(theta)/R, sup 1/R
    assert c == pytest.approx(1.0 / R, rel=5e-2)


# ---------------------------------------------------------------------------
# good radius selection


def _field_from_radial(grid, fn):
    return ScalarField(grid, fn(grid.radius))


def test_good_radius_constant_density():
    g = Grid(2, 0.1, 5.0)
    e = ScalarField.constant(g, 1.0)
    s_r, val = select_good_radius(e, 2.0, samples=16)
    radii = 2.0 + (np.arange(16) + 0.5) / 16 * 2.0
    # slice energy 2 pi S grows with S: the smallest sampled radius wins
    assert s_r == pytest.approx(radii[0])
    assert val == pytest.approx(2 * math.pi * s_r, rel=1e-6)


def test_good_radius_zero_field():
    g = Grid(2, 0.1, 5.0)
    e = ScalarField.constant(g, 0.0)
    s_r, val = select_good_radius(e, 2.0, samples=8)
    assert val == 0.0
    assert 2.0 < s_r < 4.0


def test_good_radius_avoids_hot_shell():
    # density concentrated in a thin shell at 1.5 R: the argmin stays away;
    # oracle = brute-force evaluation of every sampled radius
    g = Grid(2, 0.05, 5.0)
    R = 2.0
    e = _field_from_radial(g, lambda r: np.exp(-((r - 3.0) / 0.2) ** 2))
    samples = 32
    s_r, val = select_good_radius(e, R, samples=samples)
    radii = R + (np.arange(samples) + 0.5) / samples * R
    from vacmin.field import sphere_integral
    brute = [sphere_integral(e, float(r), 512) for r in radii]
    assert s_r == pytest.approx(radii[int(np.argmin(brute))])
    assert abs(s_r - 3.0) > 0.5


def test_good_radius_mean_value_bound():
    # min over sampled slices <= shell average (1/R) int_{B_2R - B_R} e
    g = Grid(2, 0.05, 5.0)
    R = 2.0
    e = _field_from_radial(g, lambda r: 1.0 + 0.5 * np.sin(3 * r))
    from vacmin.field import integrate_ball
    s_r, val = select_good_radius(e, R, samples=32)
    shell = integrate_ball(e, 2 * R) - integrate_ball(e, R)
    assert val <= shell / R + 0.05 * shell / R


def test_good_radius_range_check():
    g = Grid(2, 0.1, 2.0)
    with pytest.raises(ValueError):
        select_good_radius(ScalarField.constant(g, 1.0), 1.5)


# ---------------------------------------------------------------------------
# greedy covering


def _circle_samples(K, R):
    pts = sphere_points(2, R, K)
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    return pts, theta


def _bump(theta, center, width, height):
    # compactly supported smooth bump of given angular half-width
    d = np.angle(np.exp(1j * (theta - center)))
    t = d / width
    out = np.zeros_like(theta)
    sel = np.abs(t) < 1.0
    out[sel] = height * np.cos(0.5 * np.pi * t[sel]) ** 2
    return out


def brute_force_greedy(points, values, radius, eps, mu):
    """Independent reimplementation of the covering with plain loops."""
    K = len(values)
    w = sphere_area(points.shape[1], radius) / K
    unit = points / radius
    covered = [False] * K
    centers = []
    while True:
        open_idx = [i for i in range(K) if values[i] > eps and not covered[i]]
        if not open_idx:
            break
        energies = {}
        for i in open_idx:
            ball2 = 0.0
            for jj in range(K):
                ang = math.acos(max(-1.0, min(1.0, float(unit[i] @ unit[jj]))))
                if radius * ang <= 2.0:
                    ball2 += values[jj] * w
            energies[i] = ball2
        bmax = max(energies.values())
        if bmax < mu:
            raise ClearingOutViolated("brute force")
        near = [i for i in open_idx
                if energies[i] >= bmax - 1e-12 * max(1.0, abs(bmax))]
        best = max(near, key=lambda i: (values[i], -i))
        centers.append(best)
        for jj in range(K):
            ang = math.acos(max(-1.0, min(1.0, float(unit[best] @ unit[jj]))))
            if radius * ang <= 1.0:
                covered[jj] = True
    return centers, covered


def test_covering_zero_field():
    K, R = 256, 3.0
    pts, _ = _circle_samples(K, R)
    centers, covered = greedy_bad_discs(pts, np.zeros(K), R, 0.1, 0.05)
    assert len(centers) == 0
    assert not covered.any()


def test_covering_single_bump_matches_brute_force():
    K, R = 512, 3.0
    pts, theta = _circle_samples(K, R)
    eps = 0.25
    vals = _bump(theta, 1.0, 0.5 / R, 2 * eps)  # angular half-width 0.5/R
    c4 = sphere_holder_constant(pts, vals, R, 1.0)
    mu = clearing_out_threshold(eps, c4, 1.0, 2)
    centers, covered = greedy_bad_discs(pts, vals, R, eps, mu)
    assert len(centers) == 1
    # center lands on the bump peak
    peak = pts[int(np.argmax(vals))]
    assert np.allclose(pts[centers[0]], peak)
    ref_centers, ref_covered = brute_force_greedy(pts, vals, R, eps, mu)
    assert list(centers) == ref_centers
    assert list(covered) == ref_covered


def test_covering_antipodal_bumps():
    K, R = 512, 4.0
    pts, theta = _circle_samples(K, R)
    eps = 0.2
    vals = (_bump(theta, 0.0, 0.5 / R, 2 * eps)
            + _bump(theta, math.pi, 0.5 / R, 2 * eps))
    c4 = sphere_holder_constant(pts, vals, R, 1.0)
    mu = clearing_out_threshold(eps, c4, 1.0, 2)
    centers, covered = greedy_bad_discs(pts, vals, R, eps, mu)
    assert len(centers) == 2
    d = geodesic_distances(pts[centers], R)
    assert d[0, 1] > 2.0  # disjoint unit discs
    ref_centers, _ = brute_force_greedy(pts, vals, R, eps, mu)
    assert sorted(centers) == sorted(ref_centers)


def test_covering_violation_error():
    # an isolated spike above eps whose 2-ball energy stays below mu
    K, R = 512, 3.0
    pts, theta = _circle_samples(K, R)
    vals = np.zeros(K)
    vals[10] = 1.0
    with pytest.raises(ClearingOutViolated):
        greedy_bad_discs(pts, vals, R, eps=0.5, mu=1.0)


def test_find_bad_discs_field_pipeline():
    g = Grid(2, 0.05, 5.0)
    hot = ScalarField.from_function(
        g, lambda x: np.exp(-((x[0] - 3.0) ** 2 + x[1] ** 2) / 0.1))
    eps = 0.05
    c4 = holder_constant(hot, 1.0)
    mu = clearing_out_threshold(eps, c4, 1.0, 2)
    rep = find_bad_discs(hot, 3.0, eps, mu, K=1024, c4=c4, alpha=1.0, R=2.0)
    assert isinstance(rep, BadDiscReport)
    assert rep.count >= 1
    assert rep.offdisc_sup <= eps
    # every uncovered sample with e > eps would be a bug
    assert (rep.values[~rep.covered] <= eps).all()
    d = rep.to_dict()
    assert d["count"] == rep.count


# ---------------------------------------------------------------------------
# clearing-out soundness (threshold vs exhaustive check)


def _random_profile(rng, K, R):
    pts, theta = _circle_samples(K, R)
    modes = rng.integers(1, 6)
    vals = np.zeros(K)
    for _ in range(modes):
        k = rng.integers(1, 8)
        a = rng.uniform(0.2, 1.0)
        ph = rng.uniform(0, 2 * math.pi)
        vals += a * (1.0 + np.cos(k * theta + ph))
    vals += rng.uniform(0.0, 0.2)
    return pts, vals


def test_clearing_out_soundness_50_profiles():
    rng = np.random.default_rng(42)
    K = 1024
    total_low_balls = 0
    for trial in range(50):
        R = float(rng.uniform(2.0, 8.0))
        pts, vals = _random_profile(rng, K, R)
        eps = 0.3 * float(vals.max())
        c4 = sphere_holder_constant(pts, vals, R, 1.0)
        mu = clearing_out_threshold(eps, c4, 1.0, 2)
        violations = clearing_out_violations(pts, vals, R, eps, mu)
        assert violations == [], f"trial {trial}: {violations[:3]}"
        w = sphere_area(2, R) / K
        dist = geodesic_distances(pts, R)
        total_low_balls += int(((dist <= 2.0) @ (vals * w) < mu).sum())
    # the check must not be vacuous across the batch
    assert total_low_balls > 0


def test_clearing_out_soundness_3d():
    rng = np.random.default_rng(7)
    K = 2048
    R = 4.0
    pts = sphere_points(3, R, K)
    for trial in range(5):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        vals = (1.0 + (pts / R) @ d) ** 2 + 0.1
        eps = 0.3 * float(vals.max())
        c4 = sphere_holder_constant(pts, vals, R, 1.0)
        mu = clearing_out_threshold(eps, c4, 1.0, 3)
        assert clearing_out_violations(pts, vals, R, eps, mu) == []


def test_disc_count_bounded_across_doublings():
    # field family with two fixed bumps per circle: N stays 2 across three
    # doublings of the slice radius
    counts = []
    for R in (3.0, 6.0, 12.0, 24.0):
        K = 1024
        pts, theta = _circle_samples(K, R)
        eps = 0.2
        vals = (_bump(theta, 0.3, 0.5 / R, 2 * eps)
                + _bump(theta, 0.3 + math.pi, 0.5 / R, 2 * eps))
        c4 = sphere_holder_constant(pts, vals, R, 1.0)
        mu = clearing_out_threshold(eps, c4, 1.0, 2)
        centers, _ = greedy_bad_discs(pts, vals, R, eps, mu)
        counts.append(len(centers))
    assert counts == [2, 2, 2, 2]
