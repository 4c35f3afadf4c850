"""Boundary data generators.

Each generator returns a vectorized function x -> g(x) defined on the whole
cube; the solver pins it on the boundary layer and uses a radially ramped
version as the initial iterate. Tags:

* constant:        g = zero everywhere
* angular:         direction rotates with the azimuthal angle, modulus fixed
                   (for m = 1 the signed amplitude varies with the angle)
* radial-profile:  a 1-d minimizing boundary-layer profile wrapped radially
                   along a fixed direction
* random:          seeded band-limited random smooth data, rescaled to the
                   requested modulus
"""

from __future__ import annotations

import numpy as np

from .field import Grid, VectorField
from .potentials import Potential


def constant(pot: Potential):
    zero = pot.zero

    def fn(x):
        shape = (zero.size,) + x.shape[1:]
        return np.broadcast_to(zero.reshape((-1,) + (1,) * (x.ndim - 1)),
                               shape).copy()
    return fn


def angular(pot: Potential, magnitude: float, windings: int = 1,
            phase: float = 0.0):
    zero = pot.zero
    m = zero.size

    def fn(x):
        theta = np.arctan2(x[1], x[0])
        arg = windings * theta + phase
        out = np.broadcast_to(zero.reshape((-1,) + (1,) * (x.ndim - 1)),
                              (m,) + x.shape[1:]).copy()
        if m == 1:
            out[0] += magnitude * np.cos(arg)
        else:
            out[0] += magnitude * np.cos(arg)
            out[1] += magnitude * np.sin(arg)
        return out
    return fn


def layer_profile(pot: Potential, direction: np.ndarray, magnitude: float,
                  length: float, npts: int = 400, iters: int = 4000):
    """1-d energy-minimizing ramp P(s): P(0) = magnitude, P(length) = 0,
    minimizing sum h (1/2 P'^2 + W(zero + P * direction)). Returns (s, P)."""
    s = np.linspace(0.0, length, npts)
    h1 = s[1] - s[0]
    ramp = np.clip(1.0 - s / min(2.0, length), 0.0, 1.0)
    P = magnitude * ramp
    direction = direction / np.linalg.norm(direction)

    def grad(p):
        u = pot.zero[:, None] + p[None, :] * direction[:, None]
        gw = (pot.grad_field(u) * direction[:, None]).sum(axis=0)
        lap = np.zeros_like(p)
        lap[1:-1] = (p[2:] - 2 * p[1:-1] + p[:-2]) / (h1 * h1)
        g = (-lap + gw) * h1
        g[0] = 0.0
        g[-1] = 0.0
        return g

    t = h1 * h1 / 4.0
    p_prev = None
    g_prev = None
    for _ in range(iters):
        g = grad(P)
        if np.abs(g).max() / h1 < 1e-10:
            break
        if p_prev is not None:
            sp = P - p_prev
            y = g - g_prev
            sy = float(sp @ y)
            if sy > 0:
                t = float(sp @ sp) / sy
        p_prev, g_prev = P.copy(), g
        P = P - t * g
    return s, P


def radial_profile(pot: Potential, grid: Grid, magnitude: float,
                   direction=None):
    """Boundary-layer profile wrapped radially: g(x) = zero + P(r_max - |x|) d."""
    m = pot.m
    d = np.zeros(m)
    d[0] = 1.0
    if direction is not None:
        d = np.asarray(direction, dtype=float)
        d /= np.linalg.norm(d)
    length = min(grid.r_max, 8.0)
    s, P = layer_profile(pot, d, magnitude, length)

    def fn(x):
        r = np.sqrt(np.sum(x ** 2, axis=0))
        depth = np.clip(grid.r_max - r, s[0], s[-1])
        amp = np.interp(depth, s, P)
        return (pot.zero.reshape((-1,) + (1,) * (x.ndim - 1))
                + amp * d.reshape((-1,) + (1,) * (x.ndim - 1)))
    return fn


def random_smooth(pot: Potential, magnitude: float, seed: int,
                  bandlimit: float = 3.0, terms: int = 6):
    """Band-limited random Fourier features of the direction x/|x|, rescaled
    so the modulus |g - zero| is guaranteed <= magnitude everywhere."""
    zero = pot.zero
    m = zero.size
    rng = np.random.default_rng(seed)
    amps = rng.standard_normal((m, terms))
    freqs = rng.uniform(-bandlimit, bandlimit, size=(terms, 3))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=terms)
    # |sum_l A_cl cos(...)| <= sum_l |A_cl| gives a rigorous modulus bound
    sup_bound = float(np.sqrt(np.sum(np.abs(amps).sum(axis=1) ** 2)))
    scale = magnitude / sup_bound if sup_bound > 0 else 0.0

    def raw(nu):  # nu: (n, K)
        n = nu.shape[0]
        w = freqs[:, :n]
        arg = np.tensordot(w, nu, axes=(1, 0)) + phases[:, None]  # (terms, K)
        return amps @ np.cos(arg)  # (m, K)

    def fn(x):
        r = np.sqrt(np.sum(x ** 2, axis=0))
        flat_r = r.reshape(-1)
        nu = np.where(flat_r > 1e-12, x.reshape(x.shape[0], -1) / np.where(
            flat_r > 0, flat_r, 1.0), 0.0)
        nu[0] = np.where(flat_r > 1e-12, nu[0], 1.0)
        g = scale * raw(nu)
        out = zero.reshape((-1, 1)) + g
        return out.reshape((m,) + x.shape[1:])
    return fn


def make_boundary(tag: str, pot: Potential, grid: Grid, params: dict):
    if tag in ("constant", "constant-a"):
        return constant(pot)
    if tag == "angular":
        return angular(pot, float(params.get("magnitude", 0.5)),
                       int(params.get("windings", 1)),
                       float(params.get("phase", 0.0)))
    if tag == "radial-profile":
        return radial_profile(pot, grid, float(params.get("magnitude", 0.5)),
                              params.get("direction"))
    if tag in ("random", "random-seeded"):
        return random_smooth(pot, float(params.get("magnitude", 0.5)),
                             int(params.get("seed", 0)),
                             float(params.get("bandlimit", 3.0)),
                             int(params.get("terms", 6)))
    raise ValueError(f"unknown boundary tag {tag!r}")


def initial_field(grid: Grid, pot: Potential, boundary_fn,
                  ramp_width: float = 1.0) -> VectorField:
    """Initial iterate carrying the boundary data: g on and beyond the ball
    edge, ramped to the potential zero over ``ramp_width`` inward."""
    g = VectorField.from_function(grid, boundary_fn, m=pot.m)
    lam = np.clip((grid.radius - (grid.r_max - ramp_width)) / ramp_width,
                  0.0, 1.0)
    a = pot.zero.reshape((-1,) + (1,) * grid.n)
    vals = a + lam * (g.values - a)
    return VectorField(grid, vals)
