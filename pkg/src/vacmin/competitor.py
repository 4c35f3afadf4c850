"""Competitor constructions and the energy comparisons they force.

Four kinds, each agreeing with the minimizer on the pinned boundary data
in its intended usage:

* annulus:        the potential zero inside, radially linear ramp to the
                  field's own sphere trace over a unit annulus;
* truncation:     modulus capped at r with a piecewise-linear taper that
                  kills the field past modulus 2r;
* min-truncation: pointwise min with a scalar level (m = 1 only);
* shell:          fixed modulus r, direction copied from the field.

Since a converged discrete minimizer cannot be beaten by any field sharing
its boundary values, each admissible competitor's energy must come out at
least E(u) - delta_q; the reports record exactly that comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .field import BOUNDARY, INTERIOR, VectorField
from .growth import annulus_field
from .minimizer import discrete_energy, minimize
from .potentials import Potential, verify_assumptions


def quadrature_slack(grid, scale: float = 1e-3) -> float:
    """Default energy-comparison slack: 1e-8 + scale * h^2 * |ball|."""
    return 1e-8 + scale * grid.h ** 2 * grid.ball_volume()


@dataclass
class CompetitorReport:
    tag: str
    energy_u: float
    energy_competitor: float
    difference: float              # E(competitor) - E(u)
    boundary_deviation: float      # max |competitor - u| over boundary nodes
    admissible: bool               # boundary deviation == 0
    params: dict
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _boundary_deviation(u: VectorField, v: VectorField) -> float:
    sel = u.grid.mask == BOUNDARY
    d = np.sqrt(np.sum((u.values - v.values) ** 2, axis=0))
    return float(d[sel].max())


def compare(u: VectorField, v: VectorField, pot: Potential, tag: str,
            params: dict | None = None, note: str = "") -> CompetitorReport:
    eu = discrete_energy(u, pot)
    ev = discrete_energy(v, pot)
    dev = _boundary_deviation(u, v)
    # the shell construction renormalizes the direction, so allow roundoff
    return CompetitorReport(
        tag=tag,
        energy_u=eu,
        energy_competitor=ev,
        difference=ev - eu,
        boundary_deviation=dev,
        admissible=bool(dev <= 1e-12),
        params=params or {},
        note=note,
    )


# ---------------------------------------------------------------------------
# constructions


def build_annulus_competitor(u: VectorField, pot: Potential,
                             s_r: float) -> VectorField:
    """Zero-potential core with a unit linear ramp to u's trace at |x| = s_r;
    equals u outside B_{s_r}."""
    if s_r < 1.0 + 2 * u.grid.h:
        raise ValueError("annulus radius too small: need s_r >= 1 + 2h")
    return annulus_field(u, pot, s_r, width=1.0)


def taper(tau, r: float):
    """Piecewise-linear cutoff: 1 below r, (2r - tau)/r on [r, 2r], 0 past 2r."""
    if r <= 0:
        raise ValueError("r must be positive")
    tau = np.asarray(tau, dtype=float)
    out = np.clip((2.0 * r - tau) / r, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def build_truncation(u: VectorField, zero, r: float,
                     r0: float | None = None) -> VectorField:
    """Cap the modulus rho = |u - zero| at r and taper to the zero past 2r:
    u~ = zero + min(rho, r) * taper(rho) * direction. Idempotent; nodes with
    rho = 0 map to the zero."""
    if r0 is not None and not 0 < r < r0 / 2:
        raise ValueError("need r in (0, r0/2)")
    if r <= 0:
        raise ValueError("r must be positive")
    zero = np.atleast_1d(np.asarray(zero, dtype=float))
    a = zero.reshape((-1,) + (1,) * u.grid.n)
    d = u.values - a
    rho = np.sqrt(np.sum(d * d, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(rho > 0.0,
                         np.minimum(rho, r) * taper(rho, r) / np.where(rho > 0, rho, 1.0),
                         0.0)
    return u.with_values(a + scale * d)


def build_min_truncation(u: VectorField, level: float) -> VectorField:
    """Pointwise min with a scalar level; scalar fields only."""
    if u.m != 1:
        raise ValueError("min-truncation is defined for m = 1 only")
    return u.with_values(np.minimum(u.values, level))


def select_truncation_level(u: VectorField, zero: float, d: float,
                            pot: Potential, scan: int = 10_000) -> float:
    """Leftmost minimizer of W over [zero + d, max u], on a uniform scan."""
    if u.m != 1:
        raise ValueError("truncation level selection is for m = 1 only")
    zero = float(np.atleast_1d(zero)[0])
    umax = float(u.values.max())
    lo = zero + d
    if umax <= lo:
        raise ValueError(f"max u = {umax:.6g} does not exceed zero + d = {lo:.6g}")
    levels = np.linspace(lo, umax, scan)
    w = pot.value_field(levels[None, :])
    return float(levels[int(np.argmin(w))])


def modulus_gradient_ratio(u: VectorField, trunc: VectorField, zero) -> float:
    """max over edges of |D rho~| / |D rho|: the truncation composes the
    modulus with a 1-Lipschitz map, so this stays <= 1 up to roundoff.
    Reported alongside the energy comparison, never asserted."""
    zero = np.atleast_1d(np.asarray(zero, dtype=float))
    a = zero.reshape((-1,) + (1,) * u.grid.n)
    rho = np.sqrt(np.sum((u.values - a) ** 2, axis=0))
    rho_t = np.sqrt(np.sum((trunc.values - a) ** 2, axis=0))
    worst = 0.0
    for ax in range(u.grid.n):
        lo = [slice(None)] * u.grid.n
        hi = [slice(None)] * u.grid.n
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        d = np.abs(rho[hi] - rho[lo])
        dt = np.abs(rho_t[hi] - rho_t[lo])
        sel = d > 1e-14
        if np.any(sel):
            worst = max(worst, float((dt[sel] / d[sel]).max()))
    return worst


def build_shell(u: VectorField, zero, r: float) -> VectorField:
    """Fixed modulus r, direction from u; nodes at the zero get the first
    coordinate direction."""
    if r <= 0:
        raise ValueError("r must be positive")
    zero = np.atleast_1d(np.asarray(zero, dtype=float))
    a = zero.reshape((-1,) + (1,) * u.grid.n)
    d = u.values - a
    rho = np.sqrt(np.sum(d * d, axis=0))
    nu = np.where(rho > 0.0, d / np.where(rho > 0, rho, 1.0), 0.0)
    fallback = np.zeros_like(nu)
    fallback[0] = 1.0
    nu = np.where(rho > 0.0, nu, fallback)
    return u.with_values(a + r * nu)


# ---------------------------------------------------------------------------
# energy decomposition (modulus / direction / potential split)


def energy_decomposition(u: VectorField, zero, pot: Potential):
    """Split the discrete energy into the modulus-gradient, direction-gradient
    and potential terms:

        E = 1/2 sum_edges (D rho)^2 + 1/2 sum_edges rho_a rho_b |D nu|^2
            + sum_interior W

    (volume-scaled). With the geometric-mean modulus weight the split is an
    exact identity per edge; edges touching a rho = 0 node contribute
    entirely to the modulus term.
    """
    g = u.grid
    zero = np.atleast_1d(np.asarray(zero, dtype=float))
    a = zero.reshape((-1,) + (1,) * g.n)
    d = u.values - a
    rho = np.sqrt(np.sum(d * d, axis=0))
    with np.errstate(divide="ignore", invalid="ignore"):
        nu = np.where(rho > 0.0, d / np.where(rho > 0, rho, 1.0), 0.0)
    h, n = g.h, g.n
    cell = h ** n
    t_rho = 0.0
    t_nu = 0.0
    interior = g.mask == INTERIOR
    for ax in range(n):
        lo = [slice(None)] * n
        hi = [slice(None)] * n
        lo[ax] = slice(None, -1)
        hi[ax] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        inc = (g.mask[lo] == INTERIOR) | (g.mask[hi] == INTERIOR)
        drho = (rho[hi] - rho[lo]) * inc
        t_rho += 0.5 * float(np.sum(drho * drho)) / (h * h)
        dnu = (nu[(slice(None),) + hi] - nu[(slice(None),) + lo])
        dnu2 = np.sum(dnu * dnu, axis=0)
        t_nu += 0.5 * float(np.sum(rho[hi] * rho[lo] * dnu2 * inc)) / (h * h)
    t_w = float(np.sum(pot.value_field(u.values)[interior]))
    return t_rho * cell, t_nu * cell, t_w * cell


# ---------------------------------------------------------------------------
# variational maximum principle check


@dataclass
class MaxPrincipleReport:
    r: float
    boundary_sup: float
    interior_sup: float
    holds: bool
    slack: float
    energy_u: float
    energy_truncation: float
    truncation_difference: float    # E(u~) - E(u), expected <= delta_q
    solver_converged: bool
    residual: float
    assumptions_ok: bool
    positivity_redundancy_ok: bool  # W > 0 on |u - zero| < 2 r0 re-checked
    note: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def max_principle_check(u0: VectorField, pot: Potential, r: float,
                        tol: float = 1e-6, max_iter: int = 50_000,
                        slack: float | None = None,
                        assumption_samples: int = 128,
                        seed: int = 0) -> MaxPrincipleReport:
    """Minimize from boundary data with |g - zero| <= r < r0/2, build the
    truncation competitor, and compare interior excursion against r.

    Preconditions: the potential's radial sections must be nondecreasing up
    to its monot_radius (verified by sampling), and the boundary data must
    actually stay within r of the zero.
    """
    rep = verify_assumptions(pot, samples=assumption_samples, seed=seed)
    if not rep.radial_monotone_ok:
        raise ValueError("potential lacks nondecreasing radial sections; "
                         "the variational maximum principle does not apply")
    r0 = pot.monot_radius
    if not 0 < r < r0 / 2:
        raise ValueError(f"need r in (0, r0/2) = (0, {r0 / 2:.6g})")
    grid = u0.grid
    dist0 = u0.distance_from(pot.zero).values
    boundary_sup = float(dist0[grid.mask == BOUNDARY].max())
    if boundary_sup > r * (1 + 1e-12):
        raise ValueError(f"boundary data exceeds r: sup |g - zero| = "
                         f"{boundary_sup:.6g} > {r:.6g}")
    u, solve = minimize(u0, pot, tol=tol, max_iter=max_iter)
    trunc = build_truncation(u, pot.zero, r, r0=r0)
    eu = discrete_energy(u, pot)
    et = discrete_energy(trunc, pot)
    dq = quadrature_slack(grid) if slack is None else slack
    interior_sup = float(u.distance_from(pot.zero).values[grid.mask == INTERIOR].max())
    holds = interior_sup <= r + 2 * grid.h
    note = ("interior excursion within r + 2h" if holds
            else "interior excursion exceeded r + 2h")
    if et > eu + dq:
        note += "; WARNING: truncation lowered below expected energy bracket"
    return MaxPrincipleReport(
        r=r,
        boundary_sup=boundary_sup,
        interior_sup=interior_sup,
        holds=bool(holds),
        slack=2 * grid.h,
        energy_u=eu,
        energy_truncation=et,
        truncation_difference=et - eu,
        solver_converged=solve.converged,
        residual=solve.residual,
        assumptions_ok=rep.radial_monotone_ok,
        positivity_redundancy_ok=rep.positive_near_zero_ok,
        note=note,
    )


def standard_suite(u: VectorField, pot: Potential, boundary_magnitude: float,
                   s_r: float | None = None) -> list:
    """All applicable competitor comparisons for one converged minimizer.

    ``boundary_magnitude`` is the (constant) modulus of the boundary data;
    truncation and shell use it as their cap so they agree with u on the
    boundary. Min-truncation (m = 1) uses the boundary max as the level
    floor, which keeps it admissible; on true minimizers the interior never
    exceeds the boundary so that comparison is typically trivial.
    """
    g = u.grid
    if s_r is None:
        s_r = g.r_max - 2 * g.h
    reports = [compare(u, build_annulus_competitor(u, pot, s_r), pot,
                       "annulus", {"s_r": s_r})]
    mag = float(boundary_magnitude)
    trunc = build_truncation(u, pot.zero, mag)
    reports.append(compare(u, trunc, pot, "truncation", {
        "r": mag,
        "grad_ratio": modulus_gradient_ratio(u, trunc, pot.zero)}))
    shell = compare(u, build_shell(u, pot.zero, mag), pot,
                    "constant-r-shell", {"r": mag})
    if not shell.admissible:
        shell.note = ("boundary modulus is not constant; shell competitor "
                      "not admissible, energy comparison skipped")
    reports.append(shell)
    if u.m == 1:
        zero = float(pot.zero[0])
        bsup = float(u.values[0][g.mask == BOUNDARY].max())
        umax = float(u.values[0].max())
        level = umax if umax <= bsup else select_truncation_level(
            u, zero, bsup - zero, pot)
        rep = compare(u, build_min_truncation(u, level), pot,
                      "min-truncation", {"level": level})
        if level >= umax:
            rep.note = "interior never exceeds boundary; comparison is trivial"
        reports.append(rep)
    return reports
