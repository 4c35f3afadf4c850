"""Stress-energy tensor analysis: algebraic identities, divergence residual,
the radial flux balance, and the monotone normalized ball energies.

The tensor is T_ij = sum_c d_i(u_c) d_j(u_c) - delta_ij (1/2 |grad u|^2 + W(u)).
For solutions it is divergence free; two exact pointwise identities hold for
any field: its trace equals -((n-2)/2 |grad u|^2 + n W), and T + e*I is the
gradient Gram matrix, hence positive semidefinite. Monotonicity of the
normalized quantities is verified as discrete nondecrease over sampled radii,
never via the derivative form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dfield

import numpy as np

from .field import (Grid, ScalarField, VectorField, gradient_sq, integrate_ball,
                    interpolate, partial_derivatives, sphere_area, sphere_points)
from .minimizer import el_residual, modica_check
from .potentials import Potential


class NotASolution(ValueError):
    """The field's Euler-Lagrange residual is too large for solution-only
    analysis."""


class StressTensorField:
    """Symmetric n x n tensor per node, stored as (n, n, *grid.shape)."""

    def __init__(self, grid: Grid, values: np.ndarray):
        if values.shape != (grid.n, grid.n) + grid.shape:
            raise ValueError("tensor values must have shape (n, n, *grid.shape)")
        self.grid = grid
        self.values = values


def stress_tensor(u: VectorField, pot: Potential) -> StressTensorField:
    g = u.grid
    n = g.n
    P = partial_derivatives(u)  # (n, m, *shape)
    e = 0.5 * np.einsum("ac...,ac...->...", P, P) + pot.value_field(u.values)
    T = np.einsum("ic...,jc...->ij...", P, P)
    for i in range(n):
        T[i, i] -= e
    return StressTensorField(g, T)


def stress_divergence(T: StressTensorField) -> VectorField:
    """Row-wise divergence (div T)_i = sum_j d_j T_ij, centered differences."""
    g = T.grid
    out = np.zeros((g.n,) + g.shape)
    for i in range(g.n):
        for j in range(g.n):
            out[i] += np.gradient(T.values[i, j], g.h, axis=j)
    return VectorField(g, out)


def interior_sup(f: VectorField, margin: float = 0.0) -> float:
    """Sup of |f| (Euclidean over components) on interior nodes with
    |x| <= r_max - margin."""
    g = f.grid
    sel = (g.mask == 1) & (g.radius <= g.r_max - margin)
    mag = np.sqrt(np.sum(f.values ** 2, axis=0))
    return float(mag[sel].max())


def positivity_check(T: StressTensorField, u: VectorField, pot: Potential) -> float:
    """min over interior nodes of the smallest eigenvalue of T + e*I, where
    e is the energy density. Equals the Gram matrix of the gradient, so the
    result is >= 0 up to roundoff for every field."""
    g = T.grid
    gsq = gradient_sq(u).values
    e = 0.5 * gsq + pot.value_field(u.values)
    M = T.values + np.einsum("ij,...->ij...", np.eye(g.n), e)
    sel = g.mask == 1
    stack = np.moveaxis(M[..., sel], (0, 1), (-2, -1))  # (N, n, n)
    eigs = np.linalg.eigvalsh(stack)
    return float(eigs.min())


def pohozaev_balance(u: VectorField, pot: Potential, R: float, K: int = 1024):
    """Radial flux balance over B_R.

    Returns (volume_side, boundary_side, gap) where volume_side is the ball
    integral of tr T (by radial slice quadrature, which shares the boundary
    side's interpolation accuracy), boundary_side is R times the sphere
    integral of the normal-normal tensor component, and
    gap = boundary_side + R * sphere integral of the energy density
    (nonnegative up to discretization since the normal-normal component
    dominates -e).
    """
    g = u.grid
    if R + g.h > g.r_max:
        raise ValueError("R too close to the grid edge")
    T = stress_tensor(u, pot)
    trace = np.einsum("ii...->...", T.values)
    nq = min(256, max(48, int(16 * R)))
    nodes, weights = np.polynomial.legendre.leggauss(nq)
    volume_side = 0.0
    for t, w in zip(nodes, weights):
        r_i = 0.5 * R * (t + 1.0)
        pts_i = sphere_points(g.n, r_i, K)
        vals_i = interpolate(g, trace, pts_i)
        volume_side += 0.5 * R * w * float(vals_i.mean()) * sphere_area(g.n, r_i)

    pts = sphere_points(g.n, R, K)
    nu = pts / R
    tvals = interpolate(g, T.values, pts)  # (n, n, K)
    nn = np.einsum("ki,ijk,kj->k", nu, tvals, nu)
    area = sphere_area(g.n, R)
    boundary_side = R * float(nn.mean()) * area

    e = 0.5 * gradient_sq(u).values + pot.value_field(u.values)
    evals = interpolate(g, e, pts)
    gap = boundary_side + R * float(evals.mean()) * area
    return volume_side, boundary_side, gap


@dataclass
class MonotonicityReport:
    radii: list
    f_values: list                  # int_{B_R} ((n-2)/2 |grad u|^2 + n W)
    energies: list                  # int_{B_R} e
    weak: list                      # R^{2-n} f(R)
    strong_f: list                  # R^{1-n} f(R)
    strong_e: list                  # R^{1-n} E(R)
    weak_violations: list           # (index, drop magnitude) beyond tolerance
    strong_f_violations: list
    strong_e_violations: list
    modica: float
    residual: float
    tolerance: float
    strong_applicable: bool
    units: dict = dfield(default_factory=lambda: {
        "radii": "length", "f_values": "energy", "energies": "energy"})

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def _violations(seq, tol):
    out = []
    for i in range(len(seq) - 1):
        drop = seq[i] - seq[i + 1]
        if drop > tol:
            out.append((i, float(drop)))
    return out


def monotone_quantities(u: VectorField, pot: Potential, radii,
                        resid_tol: float = 1e-3, c_m: float = 1.0,
                        modica_tol: float | None = None) -> MonotonicityReport:
    """The three normalized ball-energy sequences and their per-step
    nondecrease checks, tolerance delta_m = c_m * h per step.

    Requires the field to solve the system to resid_tol; the strong
    (R^{1-n}-normalized) checks are only marked applicable when the Modica
    gradient bound holds within tolerance.
    """
    g = u.grid
    radii = [float(r) for r in radii]
    resid = el_residual(u, pot)
    if resid > resid_tol:
        raise NotASolution(
            f"residual {resid:.3g} exceeds {resid_tol:.3g}; monotone "
            "quantities are only meaningful for solutions")
    n = g.n
    gsq = gradient_sq(u).values
    w = pot.value_field(u.values)
    fdens = ScalarField(g, 0.5 * (n - 2) * gsq + n * w)
    edens = ScalarField(g, 0.5 * gsq + w)
    f_vals = [integrate_ball(fdens, r) for r in radii]
    e_vals = [integrate_ball(edens, r) for r in radii]
    r = np.asarray(radii)
    weak = list(np.asarray(f_vals) * r ** (2 - n))
    strong_f = list(np.asarray(f_vals) * r ** (1 - n))
    strong_e = list(np.asarray(e_vals) * r ** (1 - n))
    tol = c_m * g.h
    mod = modica_check(u, pot)
    mtol = tol if modica_tol is None else modica_tol
    return MonotonicityReport(
        radii=radii,
        f_values=[float(x) for x in f_vals],
        energies=[float(x) for x in e_vals],
        weak=[float(x) for x in weak],
        strong_f=[float(x) for x in strong_f],
        strong_e=[float(x) for x in strong_e],
        weak_violations=_violations(weak, tol),
        strong_f_violations=_violations(strong_f, tol),
        strong_e_violations=_violations(strong_e, tol),
        modica=mod,
        residual=resid,
        tolerance=tol,
        strong_applicable=bool(mod <= mtol),
    )
