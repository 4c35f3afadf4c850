"""Experiment orchestration CLI.

    vacmin <subcommand> --config experiment.yaml [--out DIR] [--seed N]
                        [--threads N]

Subcommands: minimize, energy-profile, bad-discs, monotonicity,
max-principle, competitor, bootstrap, verify-potential.

Outputs are deterministic given the config: identical runs produce
byte-identical JSON/CSV/binary artifacts (wall-clock timings are kept out
of the artifacts for that reason). Exit codes: 0 ok, 2 config error,
3 solver divergence/non-convergence, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import boundary as bdata
from .competitor import max_principle_check, standard_suite
from .config import ConfigError, ExperimentConfig
from .discs import ClearingOutViolated, bad_disc_pipeline
from .field import energy_density, export_sphere_csv, save_field
from .growth import (bootstrap_fixed_point, bootstrap_map, energy_profile,
                     growth_diagnostic, rescaled_l2_smallness)
from .minimizer import SolverDivergence, minimize
from .monotonicity import NotASolution, monotone_quantities
from .potentials import verify_assumptions

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _report(cfg: ExperimentConfig, body: dict) -> dict:
    return {"config_sha256": cfg.sha256(), **body}


def _solve(cfg: ExperimentConfig):
    grid = cfg.make_grid()
    pot = cfg.make_potential()
    params = dict(cfg.boundary)
    tag = params.pop("tag")
    params.setdefault("seed", cfg.seed)
    fn = bdata.make_boundary(tag, pot, grid, params)
    u0 = bdata.initial_field(grid, pot, fn)
    u, rep = minimize(u0, pot, tol=cfg.solver["tol"],
                      max_iter=int(cfg.solver["max_iter"]))
    return grid, pot, u, rep


def _default_radii(cfg: ExperimentConfig, margin: float = 0.0):
    radii = cfg.analysis["radii"]
    if radii:
        return [float(r) for r in radii]
    top = cfg.r_max - margin
    return [top * k / 8.0 for k in range(1, 9)]


def cmd_minimize(cfg: ExperimentConfig, out: str) -> int:
    grid, pot, u, rep = _solve(cfg)
    save_field(os.path.join(out, "field.bin"), u)
    _write_json(os.path.join(out, "solve.json"),
                _report(cfg, {"solve": rep.to_dict(),
                              "units": {"energy": "energy",
                                        "residual": "energy density slope"}}))
    print(f"minimize: converged={rep.converged} iterations={rep.iterations} "
          f"energy={rep.energy:.12g} residual={rep.residual:.3g}")
    return EXIT_OK if rep.converged else EXIT_SOLVER


def cmd_energy_profile(cfg: ExperimentConfig, out: str) -> int:
    grid, pot, u, rep = _solve(cfg)
    radii = _default_radii(cfg)
    prof = energy_profile(u, pot, radii)
    n = grid.n
    q = pot.exponent
    tau = cfg.analysis["tau"]
    if tau is None:
        tau = 2.0 / (q * n) * 0.9
    l2 = [rescaled_l2_smallness(u, pot, r) for r in radii]
    diag = (growth_diagnostic(radii, prof.energies, n, q, rescaled_l2=l2)
            if len(radii) >= 3 else None)
    csv_path = os.path.join(out, "energy_profile.csv")
    with open(csv_path, "w") as f:
        f.write("R,E,E_norm,E_norm_tau\n")
        for r, e in zip(prof.radii, prof.energies):
            f.write(f"{r:.17e},{e:.17e},{e / r ** (n - 1):.17e},"
                    f"{e / r ** (n - 1 - tau):.17e}\n")
    body = {"profile": prof.to_dict(), "tau": tau,
            "solve": rep.to_dict()}
    if diag is not None:
        body["diagnostic"] = diag.to_dict()
    _write_json(os.path.join(out, "energy_profile.json"), _report(cfg, body))
    print(f"energy-profile: {len(radii)} radii, E({radii[-1]:g})="
          f"{prof.energies[-1]:.12g}")
    return EXIT_OK if rep.converged else EXIT_SOLVER


def cmd_bad_discs(cfg: ExperimentConfig, out: str) -> int:
    grid, pot, u, rep = _solve(cfg)
    if not rep.converged:
        return EXIT_SOLVER
    e = energy_density(u, pot)
    eps = cfg.analysis["eps"]
    alpha = cfg.analysis["alpha"]
    K = int(cfg.analysis["sphere_points"])
    radii = cfg.analysis["radii"] or [grid.r_max / 4.0]
    reports = []
    for i, R in enumerate(radii):
        rep_i = bad_disc_pipeline(e, float(R), eps, alpha=alpha,
                                  samples=int(cfg.analysis["samples"]), K=K)
        reports.append(rep_i.to_dict())
        export_sphere_csv(os.path.join(out, f"sphere_samples_{i}.csv"),
                          rep_i.points, rep_i.values, rep_i.covered)
    _write_json(os.path.join(out, "bad_discs.json"),
                _report(cfg, {"reports": reports, "solve": rep.to_dict()}))
    counts = [r["count"] for r in reports]
    print(f"bad-discs: counts={counts}")
    return EXIT_OK


def cmd_monotonicity(cfg: ExperimentConfig, out: str) -> int:
    grid, pot, u, rep = _solve(cfg)
    if not rep.converged:
        return EXIT_SOLVER
    margin = 2 * grid.h
    radii = _default_radii(cfg, margin=margin)
    mono = monotone_quantities(u, pot, radii,
                               resid_tol=max(10 * cfg.solver["tol"], 1e-3),
                               c_m=cfg.analysis["c_m"])
    _write_json(os.path.join(out, "monotonicity.json"),
                _report(cfg, {"monotonicity": mono.to_dict(),
                              "solve": rep.to_dict()}))
    csv_path = os.path.join(out, "monotonicity.csv")
    with open(csv_path, "w") as f:
        f.write("R,f,f_weak_norm,f_strong_norm,E_strong_norm\n")
        for r, fv, wv, sf, se in zip(mono.radii, mono.f_values, mono.weak,
                                     mono.strong_f, mono.strong_e):
            f.write(f"{r:.17e},{fv:.17e},{wv:.17e},{sf:.17e},{se:.17e}\n")
    bad = len(mono.weak_violations)
    print(f"monotonicity: weak violations={bad} modica={mono.modica:.3g} "
          f"strong_applicable={mono.strong_applicable}")
    return EXIT_OK if bad == 0 else EXIT_INVARIANT


def cmd_max_principle(cfg: ExperimentConfig, out: str) -> int:
    grid = cfg.make_grid()
    pot = cfg.make_potential()
    r = cfg.analysis["r"]
    if r is None:
        r = pot.monot_radius / 4.0
    params = dict(cfg.boundary)
    tag = params.pop("tag")
    params.setdefault("seed", cfg.seed)
    params.setdefault("magnitude", r)
    fn = bdata.make_boundary(tag, pot, grid, params)
    u0 = bdata.initial_field(grid, pot, fn)
    verdict = max_principle_check(u0, pot, float(r), tol=cfg.solver["tol"],
                                  max_iter=int(cfg.solver["max_iter"]),
                                  seed=cfg.seed)
    _write_json(os.path.join(out, "max_principle.json"),
                _report(cfg, {"verdict": verdict.to_dict(),
                              "units": {"r": "field modulus",
                                        "interior_sup": "field modulus"}}))
    print(f"max-principle: holds={verdict.holds} interior_sup="
          f"{verdict.interior_sup:.6g} r={verdict.r:.6g}")
    return EXIT_OK if verdict.holds else EXIT_INVARIANT


def cmd_competitor(cfg: ExperimentConfig, out: str) -> int:
    grid, pot, u, rep = _solve(cfg)
    if not rep.converged:
        return EXIT_SOLVER
    mag = float(cfg.boundary.get("magnitude", 0.5))
    reports = standard_suite(u, pot, mag)
    dq = cfg.delta_q()
    ok = all(r.difference >= -dq for r in reports if r.admissible)
    _write_json(os.path.join(out, "competitors.json"),
                _report(cfg, {"delta_q": dq,
                              "reports": [r.to_dict() for r in reports],
                              "solve": rep.to_dict(),
                              "units": {"delta_q": "energy",
                                        "difference": "energy"}}))
    print("competitor: " + " ".join(
        f"{r.tag}:diff={r.difference:.6g}" for r in reports))
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_bootstrap(cfg: ExperimentConfig, out: str) -> int:
    pot = cfg.make_potential()
    n, q = cfg.n, pot.exponent
    k_star, iters = bootstrap_fixed_point(n, q, tol=1e-14)
    ks = np.linspace(0.25, n - 1, 7)
    _write_json(os.path.join(out, "bootstrap.json"), _report(cfg, {
        "n": n, "q": q,
        "fixed_point": k_star,
        "closed_form": n - 1 - 2.0 / (q * n),
        "iterations": iters,
        "contraction_factor": 2.0 / (q * n + 2.0),
        "map_samples": [[float(k), bootstrap_map(float(k), n, q)] for k in ks],
        "units": {"fixed_point": "dimensionless growth exponent"},
    }))
    print(f"bootstrap: fixed_point={k_star:.15g} iterations={iters}")
    return EXIT_OK


def cmd_verify_potential(cfg: ExperimentConfig, out: str) -> int:
    pot = cfg.make_potential()
    rep = verify_assumptions(pot, samples=int(cfg.analysis["samples"]) * 8,
                             seed=cfg.seed)
    _write_json(os.path.join(out, "potential_assumptions.json"),
                _report(cfg, rep.to_dict()))
    flags = (rep.positive_ok, rep.lower_bound_ok, rep.radial_monotone_ok)
    print(f"verify-potential: positive={rep.positive_ok} "
          f"lower_bound={rep.lower_bound_ok} monotone={rep.radial_monotone_ok} "
          f"hessian_pd={rep.hessian_pd_ok}")
    return EXIT_OK if all(flags) else EXIT_INVARIANT


_COMMANDS = {
    "minimize": cmd_minimize,
    "energy-profile": cmd_energy_profile,
    "bad-discs": cmd_bad_discs,
    "monotonicity": cmd_monotonicity,
    "max-principle": cmd_max_principle,
    "competitor": cmd_competitor,
    "bootstrap": cmd_bootstrap,
    "verify-potential": cmd_verify_potential,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vacmin", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="experiment YAML")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="numba thread budget (kernels are serial today; "
                             "reserved for batched runs)")
    args = parser.parse_args(argv)

    try:
        cfg = ExperimentConfig.from_yaml(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.out
        os.makedirs(out, exist_ok=True)
        if args.threads and args.threads > 1:
            try:
                import numba
                numba.set_num_threads(args.threads)
            except ImportError:
                pass
        return _COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDivergence as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ClearingOutViolated, NotASolution) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
