"""Sphere-slice machinery: good radii, Holder constants, the clearing-out
threshold and the constructive good/bad disc covering.

The covering replaces an existence-style Vitali argument with a
deterministic greedy sweep over interpolated sphere samples: repeatedly
take the uncovered high-density sample whose geodesic 2-ball carries the
most slice energy, declare a bad disc there when that energy reaches the
clearing-out threshold, and cover its geodesic 1-ball. If a sample with
density above eps sits in a 2-ball with energy below the threshold, the
measured Holder constant was too small and the run fails loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .field import ScalarField, sample_sphere, sphere_area


class ClearingOutViolated(RuntimeError):
    """A high-density sample sits in a low-energy 2-ball: the (C4, alpha)
    estimate fed to the threshold does not actually bound this field."""


def clearing_out_threshold(eps: float, c4: float, alpha: float, n: int) -> float:
    """Slice-energy level below which a geodesic 2-ball forces density <= eps
    on its concentric 1-ball:

        mu = eps / 2^n * |S^{n-1}| * min(1, (eps / (2 c4))**(1/alpha))**(n-1)
    """
    if eps <= 0 or c4 <= 0 or not 0 < alpha <= 1 or n < 2:
        raise ValueError("need eps, c4 > 0, alpha in (0, 1], n >= 2")
    d = min(1.0, (eps / (2.0 * c4)) ** (1.0 / alpha))
    return eps / 2.0 ** n * sphere_area(n, 1.0) * d ** (n - 1)


# ---------------------------------------------------------------------------
# Holder / Lipschitz constants


def holder_constant(e: ScalarField, alpha: float = 1.0) -> float:
    """max over sampled node pairs within distance 1 of
    |e(x) - e(y)| / |x - y|^alpha.

    Pairs are taken from a fixed offset stencil: all unit-cell neighbors
    plus axis and diagonal offsets at distances about 1/2 and 1.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    g = e.grid
    h = g.h
    offsets = set()
    for far in (1, max(1, round(0.5 / h)), max(1, round(1.0 / h))):
        for ax in range(g.n):
            off = [0] * g.n
            off[ax] = far
            offsets.add(tuple(off))
        diag = max(1, round(far / math.sqrt(g.n)))
        offsets.add((diag,) * g.n)
        mixed = [diag] * g.n
        mixed[0] = -diag
        offsets.add(tuple(mixed))
    best = 0.0
    for off in offsets:
        dist = h * math.sqrt(sum(o * o for o in off))
        if dist > 1.0 + 1e-12:
            continue
        src = [slice(None)] * g.n
        dst = [slice(None)] * g.n
        for ax, o in enumerate(off):
            if o > 0:
                src[ax] = slice(o, None)
                dst[ax] = slice(None, -o)
            elif o < 0:
                src[ax] = slice(None, o)
                dst[ax] = slice(-o, None)
        diff = np.abs(e.values[tuple(src)] - e.values[tuple(dst)])
        best = max(best, float(diff.max()) / dist ** alpha)
    return best


def geodesic_distances(points: np.ndarray, radius: float) -> np.ndarray:
    """Pairwise great-circle distances of points on the sphere |x| = radius."""
    unit = points / radius
    dots = np.clip(unit @ unit.T, -1.0, 1.0)
    return radius * np.arccos(dots)


def sphere_holder_constant(points: np.ndarray, values: np.ndarray,
                           radius: float, alpha: float = 1.0,
                           max_dist: float = 1.0) -> float:
    """Holder ratio over all sample pairs within geodesic distance max_dist."""
    dist = geodesic_distances(points, radius)
    diff = np.abs(values[:, None] - values[None, :])
    sel = (dist > 1e-12) & (dist <= max_dist)
    if not np.any(sel):
        return 0.0
    return float((diff[sel] / dist[sel] ** alpha).max())


# ---------------------------------------------------------------------------
# good radius selection


def select_good_radius(e: ScalarField, R: float, samples: int = 32,
                       K: int = 512):
    """Scan radii in (R, 2R) and return (S_R, slice energy) minimizing the
    sphere-slice integral of e. By the mean-value property the minimum is
    bounded by the shell average (1/R) * int_{B_2R - B_R} e."""
    g = e.grid
    if 2.0 * R + g.h > g.r_max:
        raise ValueError(f"R={R} out of range: need 2R + h <= r_max")
    radii = R + (np.arange(samples) + 0.5) / samples * R
    best_r, best_val = radii[0], math.inf
    for r in radii:
        _, vals = sample_sphere(e, float(r), K)
        v = float(vals.mean() * sphere_area(g.n, float(r)))
        if v < best_val:
            best_r, best_val = float(r), v
    return best_r, best_val


# ---------------------------------------------------------------------------
# greedy covering


@dataclass
class BadDiscReport:
    R: float
    good_radius: float
    eps: float
    c4: float
    alpha: float
    mu: float
    centers: np.ndarray        # (N, n) points on the sphere
    count: int
    offdisc_sup: float
    slice_energy: float
    points: np.ndarray         # sphere samples kept for CSV export
    values: np.ndarray
    covered: np.ndarray

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "good_radius": self.good_radius,
            "eps": self.eps,
            "c4": self.c4,
            "alpha": self.alpha,
            "mu": self.mu,
            "count": self.count,
            "centers": [list(map(float, c)) for c in self.centers],
            "offdisc_sup": self.offdisc_sup,
            "slice_energy": self.slice_energy,
            "sample_count": int(len(self.values)),
            "units": {"R": "length", "good_radius": "length",
                      "eps": "energy density", "mu": "slice energy",
                      "slice_energy": "slice energy"},
        }

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def greedy_bad_discs(points: np.ndarray, values: np.ndarray, radius: float,
                     eps: float, mu: float):
    """Run the greedy covering on explicit sphere samples.

    Returns (center indices, covered mask). Raises ClearingOutViolated when
    an uncovered sample with value > eps has 2-ball energy below mu.
    """
    K = len(values)
    w = sphere_area(points.shape[1], radius) / K
    dist = geodesic_distances(points, radius)
    in2 = dist <= 2.0
    in1 = dist <= 1.0
    covered = np.zeros(K, dtype=bool)
    hot = values > eps
    centers = []
    while True:
        open_idx = np.flatnonzero(hot & ~covered)
        if open_idx.size == 0:
            break
        ball2 = in2[open_idx] @ (values * w)
        bmax = float(ball2.max())
        if bmax < mu:
            worst = open_idx[int(np.argmax(ball2))]
            raise ClearingOutViolated(
                f"sample with density {values[worst]:.6g} > eps={eps:.6g} has "
                f"2-ball energy {bmax:.6g} < mu={mu:.6g}")
        # near-ties on the 2-ball energy (summation dust) resolve by sample
        # value, then by index, so plateau selections stay deterministic
        near = open_idx[ball2 >= bmax - 1e-12 * max(1.0, abs(bmax))]
        pick = int(near[np.lexsort((near, -values[near]))[0]])
        centers.append(pick)
        covered |= in1[pick]
    return np.array(centers, dtype=int), covered


def find_bad_discs(e: ScalarField, good_radius: float, eps: float, mu: float,
                   K: int = 1024, c4: float = 0.0, alpha: float = 1.0,
                   R: float = 0.0) -> BadDiscReport:
    """Sample e on the sphere |x| = good_radius and cover the region where
    e > eps by geodesic unit discs of slice energy >= mu."""
    points, values = sample_sphere(e, good_radius, K)
    centers_idx, covered = greedy_bad_discs(points, values, good_radius, eps, mu)
    off = values[~covered]
    offdisc_sup = float(off.max()) if off.size else 0.0
    if offdisc_sup > eps:
        raise ClearingOutViolated("uncovered sample above eps after covering")
    slice_energy = float(values.mean() * sphere_area(e.grid.n, good_radius))
    return BadDiscReport(
        R=R if R else good_radius / 1.5,
        good_radius=good_radius,
        eps=eps,
        c4=c4,
        alpha=alpha,
        mu=mu,
        centers=points[centers_idx] if centers_idx.size else np.empty((0, e.grid.n)),
        count=int(centers_idx.size),
        offdisc_sup=offdisc_sup,
        slice_energy=slice_energy,
        points=points,
        values=values,
        covered=covered,
    )


def clearing_out_violations(points: np.ndarray, values: np.ndarray,
                            radius: float, eps: float, mu: float) -> list:
    """Exhaustive soundness check of the threshold on explicit samples:
    every geodesic 2-ball with slice energy < mu must have values <= eps
    throughout its concentric 1-ball. Returns the list of violations."""
    K = len(values)
    w = sphere_area(points.shape[1], radius) / K
    dist = geodesic_distances(points, radius)
    ball2 = (dist <= 2.0) @ (values * w)
    out = []
    for i in np.flatnonzero(ball2 < mu):
        inner = values[dist[i] <= 1.0]
        if inner.size and inner.max() > eps:
            out.append((int(i), float(ball2[i]), float(inner.max())))
    return out


def bad_disc_pipeline(e: ScalarField, R: float, eps: float, alpha: float = 1.0,
                      samples: int = 32, K: int = 1024) -> BadDiscReport:
    """Full slice analysis at base radius R: pick the good radius in (R, 2R),
    measure the Lipschitz/Holder constant, form the clearing-out threshold
    and run the covering."""
    s_r, _ = select_good_radius(e, R, samples=samples, K=K)
    c4_grid = holder_constant(e, alpha)
    pts, vals = sample_sphere(e, s_r, K)
    c4 = max(c4_grid, sphere_holder_constant(pts, vals, s_r, alpha))
    c4 = max(c4, 1e-12)
    mu = clearing_out_threshold(eps, c4, alpha, e.grid.n)
    return find_bad_discs(e, s_r, eps, mu, K=K, c4=c4, alpha=alpha, R=R)
