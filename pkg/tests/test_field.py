"""Grid construction, stencils, quadrature, sampling and serialization."""

import math

import numpy as np
import pytest

from vacmin.field import (BOUNDARY, INTERIOR, Grid, GridError,
                          ScalarField, VectorField, energy_density,
                          export_sphere_csv, integrate_ball, interpolate,
                          laplacian, load_field, sample_sphere, save_field,
                          sphere_integral, sphere_points)
from vacmin.potentials import quadratic


def test_grid_mask_structure(small_grid):
    g = small_grid
    inter = g.mask == INTERIOR
    bound = g.mask == BOUNDARY
    assert inter.any() and bound.any()
    # boundary nodes are exterior to the ball but adjacent to interior
    assert (g.radius[bound] > g.r_max).all()
    near = np.zeros(g.shape, bool)
    for ax in range(g.n):
        near |= np.roll(inter, 1, axis=ax) | np.roll(inter, -1, axis=ax)
    assert (near[bound]).all()
    # axis coverage: h * nodes per axis >= 2 r_max
    assert g.h * g.axis.size >= 2 * g.r_max


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(4, 0.1, 1.0)
    with pytest.raises(GridError):
        Grid(2, -0.1, 1.0)
    with pytest.raises(GridError):
        Grid(2, 0.5, 1.0)  # r_max < 4h


def test_laplacian_constant_and_quadratic(small_grid):
    g = small_grid
    inter = g.mask == INTERIOR
    const = VectorField.constant(g, [3.0, -1.0])
    assert np.abs(laplacian(const).values).max() == 0.0
    quad = VectorField.from_function(g, lambda x: x[0] ** 2, m=1)
    lap = laplacian(quad)
    assert np.abs(lap.values[0][inter] - 2.0).max() < 1e-10


def test_laplacian_second_order():
    errs = []
    hs = [0.2, 0.1, 0.05]
    for h in hs:
        g = Grid(2, h, 1.0)
        u = VectorField.from_function(g, lambda x: np.sin(x[0]), m=1)
        lap = laplacian(u)
        ref = -np.sin(g.coords[0])
        sel = g.mask == INTERIOR
        errs.append(np.abs(lap.values[0] - ref)[sel].max())
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order > 1.9


def test_energy_density_examples(small_grid):
    g = small_grid
    pot = quadratic([0.0])
    u = VectorField.constant(g, [0.0])
    e = energy_density(u, pot)
    assert np.abs(e.values).max() == 0.0
    # u = exp(x1): e = exp(2 x1) up to O(h^2)
    u2 = VectorField.from_function(g, lambda x: np.exp(x[0]), m=1)
    e2 = energy_density(u2, pot)
    ref = np.exp(2 * g.coords[0])
    sel = g.mask == INTERIOR
    rel = (np.abs(e2.values - ref) / ref)[sel].max()
    assert rel < 3 * g.h ** 2
    assert (e2.values >= 0).all()


def test_energy_density_linear_field(small_grid):
    g = small_grid
    pot = quadratic([0.0])
    slope = np.array([0.7, -0.3])
    u = VectorField.from_function(
        g, lambda x: slope[0] * x[0] + slope[1] * x[1], m=1)
    e = energy_density(u, pot)
    ref = 0.5 * (slope @ slope) + pot.value_field(u.values)
    sel = g.mask == INTERIOR
    assert np.abs(e.values - ref)[sel].max() < 1e-10


def test_integrate_ball_disc_area(small_grid):
    s = ScalarField.constant(small_grid, 1.0)
    assert abs(integrate_ball(s, 1.0) - math.pi) < 2 * small_grid.h
    assert integrate_ball(ScalarField.constant(small_grid, 0.0), 1.5) == 0.0
    with pytest.raises(ValueError):
        integrate_ball(s, 5.0)


def test_integrate_ball_refinement_oracle():
    # bump field: coarse-grid ball integral converges to a 4x refined one
    def bump(x):
        r2 = x[0] ** 2 + x[1] ** 2
        return np.exp(-4.0 * r2) * (1.0 + 0.5 * x[0])

    vals = {}
    for h in (0.2, 0.05):
        g = Grid(2, h, 1.5)
        vals[h] = integrate_ball(ScalarField.from_function(g, bump), 1.2)
    assert vals[0.2] == pytest.approx(vals[0.05], abs=5e-3)


def test_integrate_ball_monotone_in_R(small_grid, rng):
    vals = rng.uniform(0.0, 1.0, small_grid.shape)
    s = ScalarField(small_grid, vals)
    radii = np.linspace(0.2, small_grid.r_max, 12)
    seq = [integrate_ball(s, float(r)) for r in radii]
    assert all(b >= a - 1e-14 for a, b in zip(seq, seq[1:]))


def test_sample_sphere_constant(small_grid):
    s = ScalarField.constant(small_grid, 2.5)
    pts, vals = sample_sphere(s, 1.0, 64)
    assert np.abs(vals - 2.5).max() < 1e-12
    assert np.abs(np.linalg.norm(pts, axis=1) - 1.0).max() < 1e-12
    # slice integral of 1 over the circle of radius R is 2 pi R exactly
    one = ScalarField.constant(small_grid, 1.0)
    assert sphere_integral(one, 1.3, 64) == pytest.approx(2 * math.pi * 1.3)


def test_sample_sphere_radial_profile(small_grid):
    s = ScalarField.from_function(
        small_grid, lambda x: np.sqrt(x[0] ** 2 + x[1] ** 2) ** 2)
    for R in (0.7, 1.2, 1.8):
        _, vals = sample_sphere(s, R, 32)
        assert np.abs(vals - R ** 2).max() < 2 * small_grid.h ** 2


def test_sample_sphere_nonnegative_and_edge(small_grid, rng):
    nonneg = ScalarField(small_grid, rng.uniform(0.0, 2.0, small_grid.shape))
    _, vals = sample_sphere(nonneg, 1.2, 64)
    assert (vals >= 0).all()  # interpolation is a convex combination
    s = ScalarField.constant(small_grid, 1.0)
    with pytest.raises(ValueError):
        sample_sphere(s, small_grid.r_max, 32)
    with pytest.raises(ValueError):
        sphere_points(2, 1.0, 4)


def test_fibonacci_sphere_3d():
    g = Grid(3, 0.25, 1.5)
    s = ScalarField.from_function(g, lambda x: x[2] ** 2)
    pts, vals = sample_sphere(s, 1.0, 512)
    # mean of z^2 over the unit sphere is 1/3
    assert vals.mean() == pytest.approx(1.0 / 3.0, abs=2e-2)


def test_interpolation_exact_on_linear(small_grid):
    s = ScalarField.from_function(small_grid, lambda x: 2 * x[0] - x[1] + 0.5)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 1.5, (40, 2))
    out = interpolate(small_grid, s.values, pts)
    ref = 2 * pts[:, 0] - pts[:, 1] + 0.5
    assert np.abs(out - ref).max() < 1e-12


def test_field_io_roundtrip(tmp_path, small_grid, rng):
    u = VectorField(small_grid, rng.standard_normal((3,) + small_grid.shape))
    path = str(tmp_path / "f.bin")
    save_field(path, u)
    v = load_field(path)
    assert v.grid == small_grid
    assert np.array_equal(v.values, u.values)


def test_sphere_csv(tmp_path, small_grid):
    s = ScalarField.constant(small_grid, 1.0)
    pts, vals = sample_sphere(s, 1.0, 16)
    p = tmp_path / "s.csv"
    export_sphere_csv(str(p), pts, vals, covered=vals > 2)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "theta,e,covered"
    assert len(lines) == 17
    # >= 15 significant digits on emitted numbers
    mantissa = lines[1].split(",")[1].split("e")[0].replace(".", "").lstrip("-")
    assert len(mantissa) >= 15


def test_vector_field_validation(small_grid):
    with pytest.raises(ValueError):
        VectorField(small_grid, np.full((1,) + small_grid.shape, np.nan))
