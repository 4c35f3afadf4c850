"""Masked Cartesian grids over balls, discrete fields, quadrature and sampling.

A Grid covers the cube [-L, L]^n with spacing h, L >= r_max + 2h, and
classifies nodes by the ball |x| <= r_max: INTERIOR inside, BOUNDARY on the
first exterior layer (where Dirichlet data lives), EXTERIOR beyond. Field
values are stored on the whole cube so that interpolation and one-sided
stencils near the ball edge stay well defined; solvers only ever update
interior nodes.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct

import numpy as np

from . import _kernels
from .potentials import Potential

EXTERIOR, INTERIOR, BOUNDARY = 0, 1, 2

_MAGIC = b"VACF"
_VERSION = 1


class GridError(ValueError):
    pass


class Grid:
    """Cartesian node lattice with a ball mask; immutable after construction."""

    def __init__(self, n: int, h: float, r_max: float):
        if n not in (2, 3):
            raise GridError("spatial dimension must be 2 or 3")
        if h <= 0 or r_max <= 0:
            raise GridError("h and r_max must be positive")
        if r_max < 4 * h:
            raise GridError("r_max must be at least 4h")
        self.n = int(n)
        self.h = float(h)
        self.r_max = float(r_max)
        half = int(math.ceil(r_max / h)) + 2
        self.axis = h * np.arange(-half, half + 1)
        self.shape = (self.axis.size,) * n
        coords = np.meshgrid(*([self.axis] * n), indexing="ij")
        self.coords = np.stack(coords)  # (n, *shape)
        self.radius = np.sqrt(np.sum(self.coords ** 2, axis=0))
        inside = self.radius <= self.r_max * (1 + 1e-12)
        mask = np.zeros(self.shape, dtype=np.int8)
        mask[inside] = INTERIOR
        near = np.zeros(self.shape, dtype=bool)
        for ax in range(n):
            near |= np.roll(inside, 1, axis=ax) | np.roll(inside, -1, axis=ax)
        mask[near & ~inside] = BOUNDARY
        self.mask = mask
        self._check()

    def _check(self) -> None:
        interior = self.mask == INTERIOR
        for ax in range(self.n):
            face = [slice(None)] * self.n
            for end in (0, -1):
                face[ax] = end
                if interior[tuple(face)].any():
                    raise GridError("interior node on the cube face; "
                                    "mask construction failed")
        # every interior node must have all axis neighbors inside the mask
        ok = np.ones(self.shape, dtype=bool)
        nonext = self.mask != EXTERIOR
        for ax in range(self.n):
            ok &= np.roll(nonext, 1, axis=ax) & np.roll(nonext, -1, axis=ax)
        if not ok[interior].all():
            raise GridError("interior node lacking a neighbor in the mask")

    @property
    def cell(self) -> float:
        return self.h ** self.n

    @property
    def interior_count(self) -> int:
        return int(np.count_nonzero(self.mask == INTERIOR))

    def ball_volume(self) -> float:
        if self.n == 2:
            return math.pi * self.r_max ** 2
        return 4.0 / 3.0 * math.pi * self.r_max ** 3

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.n == other.n
                and self.h == other.h and self.r_max == other.r_max)

    def __repr__(self):
        return f"Grid(n={self.n}, h={self.h}, r_max={self.r_max})"


class ScalarField:
    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("values shape does not match grid")
        self.grid = grid
        self.values = values

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ScalarField":
        return cls(grid, np.asarray(fn(grid.coords), dtype=float))


class VectorField:
    """m-component field on a grid; values pinned outside the interior."""

    def __init__(self, grid: Grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != grid.n + 1 or values.shape[1:] != grid.shape:
            raise ValueError("values must have shape (m, *grid.shape)")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, grid: Grid, vec) -> "VectorField":
        vec = np.atleast_1d(np.asarray(vec, dtype=float))
        vals = np.broadcast_to(vec.reshape((-1,) + (1,) * grid.n),
                               (vec.size,) + grid.shape).copy()
        return cls(grid, vals)

    @classmethod
    def from_function(cls, grid: Grid, fn, m: int | None = None) -> "VectorField":
        vals = np.asarray(fn(grid.coords), dtype=float)
        if vals.ndim == grid.n:
            vals = vals[None]
        if m is not None and vals.shape[0] != m:
            raise ValueError(f"function returned {vals.shape[0]} components, "
                             f"expected {m}")
        return cls(grid, vals)

    def copy(self) -> "VectorField":
        return VectorField(self.grid, self.values.copy())

    def with_values(self, values: np.ndarray) -> "VectorField":
        return VectorField(self.grid, values)

    def distance_from(self, point) -> ScalarField:
        """|u - point| per node."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        d = self.values - p.reshape((-1,) + (1,) * self.grid.n)
        return ScalarField(self.grid, np.sqrt(np.sum(d * d, axis=0)))


# ---------------------------------------------------------------------------
# stencils and quadrature


def laplacian(u: VectorField) -> VectorField:
    """Second-order centered Laplacian per component, interior nodes only."""
    return u.with_values(_kernels.laplacian(u.values, u.grid.mask, u.grid.h))


def energy_density(u: VectorField, pot: Potential) -> ScalarField:
    """Pointwise 1/2 |grad u|^2 + W(u); nonnegative for valid potentials."""
    return ScalarField(u.grid, _kernels.energy_density(u.values, u.grid.h, pot))


def gradient_sq(u: VectorField) -> ScalarField:
    """|grad u|^2 by centered differences (one-sided at cube faces)."""
    gsq = np.zeros(u.grid.shape)
    for c in range(u.m):
        for ax in range(u.grid.n):
            g = np.gradient(u.values[c], u.grid.h, axis=ax)
            gsq += g * g
    return ScalarField(u.grid, gsq)


def partial_derivatives(u: VectorField) -> np.ndarray:
    """All first derivatives, shape (n, m, *grid.shape)."""
    n, m = u.grid.n, u.m
    out = np.empty((n, m) + u.grid.shape)
    for ax in range(n):
        for c in range(m):
            out[ax, c] = np.gradient(u.values[c], u.grid.h, axis=ax)
    return out


def ball_weights(grid: Grid, R: float) -> np.ndarray:
    """Midpoint quadrature weights for the ball |x| <= R: full cells inside,
    boundary cells by the clipped linear cell fraction."""
    if not 0 < R <= grid.r_max:
        raise ValueError(f"R={R} outside (0, r_max={grid.r_max}]")
    return np.clip((R - grid.radius) / grid.h + 0.5, 0.0, 1.0)


def integrate_ball(s: ScalarField, R: float) -> float:
    w = ball_weights(s.grid, R)
    return float(np.sum(s.values * w) * s.grid.cell)


def sphere_area(n: int, R: float) -> float:
    return 2.0 * math.pi * R if n == 2 else 4.0 * math.pi * R * R


def sphere_points(n: int, R: float, K: int) -> np.ndarray:
    """K points on the sphere of radius R: equi-angular for n=2, a Fibonacci
    lattice for n=3. Shape (K, n)."""
    if K < 8:
        raise ValueError("need at least 8 sphere points")
    if n == 2:
        t = 2.0 * math.pi * np.arange(K) / K
        return R * np.stack([np.cos(t), np.sin(t)], axis=1)
    i = np.arange(K)
    z = 1.0 - (2.0 * i + 1.0) / K
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return R * np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def interpolate(grid: Grid, stack: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a (..., *grid.shape) stack at pts (K, n);
    returns (..., K)."""
    pts = np.asarray(pts, dtype=float)
    n = grid.n
    t = (pts - grid.axis[0]) / grid.h
    i0 = np.floor(t).astype(np.int64)
    i0 = np.clip(i0, 0, grid.axis.size - 2)
    frac = t - i0
    lead = stack.shape[:-n]
    out = np.zeros(lead + (pts.shape[0],))
    for corner in range(2 ** n):
        idx = []
        w = np.ones(pts.shape[0])
        for ax in range(n):
            bit = (corner >> ax) & 1
            idx.append(i0[:, ax] + bit)
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        out += stack[(Ellipsis,) + tuple(idx)] * w
    return out


def sample_sphere(s: ScalarField, R: float, K: int):
    """Values of s at K sphere points of radius R by multilinear interpolation.
    Returns (points (K, n), values (K,))."""
    g = s.grid
    if R + g.h > g.r_max:
        raise ValueError(f"R={R} too close to the grid edge (r_max={g.r_max})")
    pts = sphere_points(g.n, R, K)
    return pts, interpolate(g, s.values, pts)


def sphere_integral(s: ScalarField, R: float, K: int) -> float:
    """Slice integral over the sphere |x| = R from interpolated samples."""
    _, vals = sample_sphere(s, R, K)
    return float(vals.mean() * sphere_area(s.grid.n, R))


# ---------------------------------------------------------------------------
# serialization


def save_field(path: str, u: VectorField) -> None:
    """Flat binary layout: header (magic, version, n, m, axis size, h, r_max)
    then node-major component-minor float64 payload; JSON sidecar alongside."""
    g = u.grid
    payload = np.moveaxis(u.values, 0, -1).astype("<f8").tobytes(order="C")
    header = struct.pack("<4sIIIIdd", _MAGIC, _VERSION, g.n, u.m,
                         g.axis.size, g.h, g.r_max)
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
    sidecar = {
        "format": "vacmin-field",
        "version": _VERSION,
        "n": g.n,
        "m": u.m,
        "h": g.h,
        "r_max": g.r_max,
        "axis_size": g.axis.size,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    with open(path + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_field(path: str) -> VectorField:
    with open(path, "rb") as f:
        header = f.read(struct.calcsize("<4sIIIIdd"))
        magic, version, n, m, size, h, r_max = struct.unpack("<4sIIIIdd", header)
        if magic != _MAGIC or version != _VERSION:
            raise ValueError("not a vacmin field file")
        payload = np.frombuffer(f.read(), dtype="<f8")
    grid = Grid(n, h, r_max)
    if grid.axis.size != size:
        raise ValueError("grid size mismatch in field file")
    vals = payload.reshape(grid.shape + (m,))
    return VectorField(grid, np.moveaxis(vals, -1, 0).copy())


def export_sphere_csv(path: str, points: np.ndarray, values: np.ndarray,
                      covered: np.ndarray | None = None) -> None:
    """Sphere samples as CSV with angles, value and covered flag."""
    n = points.shape[1]
    R = float(np.linalg.norm(points[0]))
    if covered is None:
        covered = np.zeros(len(values), dtype=bool)
    with open(path, "w") as f:
        if n == 2:
            f.write("theta,e,covered\n")
            for p, v, c in zip(points, values, covered):
                th = math.atan2(p[1], p[0])
                f.write(f"{th:.17e},{v:.17e},{int(c)}\n")
        else:
            f.write("theta,phi,e,covered\n")
            for p, v, c in zip(points, values, covered):
                th = math.atan2(p[1], p[0])
                ph = math.acos(max(-1.0, min(1.0, p[2] / R)))
                f.write(f"{th:.17e},{ph:.17e},{v:.17e},{int(c)}\n")
