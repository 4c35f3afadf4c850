"""Energy-growth analytics: radial profiles, the annulus comparison bound,
and the exponent-improvement (bootstrap) arithmetic with its fixed point.

Asymptotic statements are never asserted at desk scale; the diagnostics
report normalized-energy trends and fitted exponents instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .field import ScalarField, VectorField, energy_density, integrate_ball, interpolate
from .potentials import Potential


@dataclass
class EnergyProfile:
    radii: list
    energies: list

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if np.any(np.diff(r) <= 0):
            raise ValueError("radii must be strictly increasing")

    def normalized(self, p: float) -> np.ndarray:
        return np.asarray(self.energies) / np.asarray(self.radii) ** p

    def loglog_slopes(self) -> np.ndarray:
        r = np.asarray(self.radii)
        e = np.asarray(self.energies)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.diff(np.log(e)) / np.diff(np.log(r))

    def to_dict(self) -> dict:
        return {"radii": list(map(float, self.radii)),
                "energies": list(map(float, self.energies))}


def energy_profile(u: VectorField, pot: Potential, radii) -> EnergyProfile:
    e = energy_density(u, pot)
    vals = [integrate_ball(e, float(r)) for r in radii]
    return EnergyProfile(list(map(float, radii)), vals)


def annulus_field(u: VectorField, pot: Potential, R: float,
                  width: float = 1.0) -> VectorField:
    """The comparison field: equal to u outside B_R, identically the
    potential zero inside B_{R-width}, radially linear in between using
    u's trace on the sphere |x| = R."""
    g = u.grid
    # R = r_max is fine: the cube carries two padding layers past the ball,
    # so interpolation at radius R <= r_max never leaves the value array
    if R < width + g.h or R > g.r_max:
        raise ValueError("need width + h <= R <= r_max")
    a = pot.zero.reshape((-1,) + (1,) * g.n)
    rad = g.radius
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(rad > 1e-12, g.coords / rad, 0.0)
    pts = np.moveaxis(unit * R, 0, -1).reshape(-1, g.n)
    trace = interpolate(g, u.values, pts).reshape((u.m,) + g.shape)
    lam = np.clip((rad - (R - width)) / width, 0.0, 1.0)
    vals = a + lam * (trace - a)
    outside = rad > R
    vals[:, outside] = u.values[:, outside]
    return u.with_values(vals)


def comparison_bound(u: VectorField, pot: Potential, R: float,
                     width: float = 1.0) -> float:
    """Energy in B_R of the annulus comparison field; any minimizer with the
    same trace on |x| = R must have E(u; B_R) at or below this."""
    v = annulus_field(u, pot, R, width)
    return integrate_ball(energy_density(v, pot), R)


# ---------------------------------------------------------------------------
# exponent bootstrap


def bootstrap_map(k: float, n: int, q: float) -> float:
    """Improved growth exponent: a ball-energy bound R^k upgrades itself to
    R^{gamma(k)} with gamma(k) = n - 1 - 2(n - k)/(qn + 2)."""
    if q < 2 or n < 2 or not 0 < k <= n - 1:
        raise ValueError("need q >= 2, n >= 2, k in (0, n-1]")
    return n - 1 - 2.0 * (n - k) / (q * n + 2.0)


def balance_exponent(k: float, n: int, q: float) -> float:
    """The slice-threshold decay rate beta = q(n - k)/(qn + 2) that equates
    the two competitor energy contributions n - 1 - 2*beta/q and
    k - 1 + beta*n."""
    if q < 2 or n < 2 or not 0 < k <= n:
        raise ValueError("need q >= 2, n >= 2, k in (0, n]")
    return q * (n - k) / (q * n + 2.0)


def bootstrap_fixed_point(n: int, q: float, tol: float = 1e-14):
    """Iterate k -> gamma(k) from k0 = n - 1 down to its fixed point
    n - 1 - 2/(qn). The map is a contraction with factor 2/(qn + 2).
    Returns (k_star, iterations)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = float(n - 1)
    iterations = 0
    while True:
        k_next = bootstrap_map(k, n, q)
        iterations += 1
        if abs(k_next - k) <= tol:
            return k_next, iterations
        k = k_next


@dataclass
class GrowthReport:
    radii: list
    energies: list
    normalized: list               # E(R) / R^{n-1}
    violations: list               # indices where the normalized value rose
    fitted_exponent: float
    reference_exponent: float      # n - 1 - 2/(qn)
    rescaled_l2: list = dfield(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "radii": self.radii,
            "energies": self.energies,
            "normalized": self.normalized,
            "violations": self.violations,
            "fitted_exponent": self.fitted_exponent,
            "reference_exponent": self.reference_exponent,
            "rescaled_l2": self.rescaled_l2,
            "units": {"radii": "length", "energies": "energy",
                      "normalized": "energy / length^(n-1)"},
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def growth_diagnostic(radii, energies, n: int, q: float,
                      rescaled_l2=None) -> GrowthReport:
    """Trend diagnostic across doubling radii: the normalized sequence
    E(R)/R^{n-1}, its monotone-decrease violations, and the log-log fitted
    exponent against the reference n - 1 - 2/(qn)."""
    radii = list(map(float, radii))
    energies = list(map(float, energies))
    if len(radii) < 3:
        raise ValueError("need at least 3 radii")
    r = np.asarray(radii)
    e = np.asarray(energies)
    norm = e / r ** (n - 1)
    violations = [int(i) for i in range(len(r) - 1) if norm[i + 1] > norm[i]]
    if np.all(e > 0):
        slope = float(np.polyfit(np.log(r), np.log(e), 1)[0])
    else:
        slope = math.nan  # identically-zero profiles are trivially consistent
    return GrowthReport(
        radii=radii,
        energies=energies,
        normalized=[float(x) for x in norm],
        violations=violations,
        fitted_exponent=slope,
        reference_exponent=n - 1 - 2.0 / (q * n),
        rescaled_l2=list(map(float, rescaled_l2)) if rescaled_l2 else [],
    )


def rescaled_l2_smallness(u: VectorField, pot: Potential, R: float) -> float:
    """Blow-down bookkeeping: with eps = 1/R and u_eps(y) = u(y/eps), this is
    (1/eps) * int_{B_2} |u_eps - zero|^2 dy = eps^{n-1} int_{B_{2R}} |u - zero|^2."""
    g = u.grid
    r2 = min(2.0 * R, g.r_max)
    dist2 = ScalarField(g, u.distance_from(pot.zero).values ** 2)
    return (1.0 / R) ** (g.n - 1) * integrate_ball(dist2, r2)
