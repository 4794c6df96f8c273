"""Command-line surface.

Commands: constants, morse, spectrum, verify, solve-radial, continue,
nehari.  Configuration comes from an INI file (--config, [run] section)
overridden by flags; flags win.  Exit codes: 0 success, 1 numerical
failure, 2 validation error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .branches import (
    BranchSwitchError,
    TraceOptions,
    switch_and_correct,
    trace_branch,
)
from .certify import certification_passed, run_certification
from .closedforms import export_profile_csv, normalization_metadata
from .config import PROFILES, RunConfig
from .fields import grid_for
from .nehari import nehari_minimize
from .operators import radial_solve_1d, residual_norm, radial_field_discrete
from .params import (
    ProblemParams,
    SymmetryClass,
    derive_constants,
    gamma_j,
    morse_index,
    morse_index_symmetric,
)
from .reports import write_csv, write_report
from .spectral import singular_spectrum, suggested_j_max
from .solver import NewtonOptions

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_VALIDATION = 2


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="INI config file ([run] section)")
    sp.add_argument("--n", type=int, dest="N", help="dimension N >= 3")
    sp.add_argument("--s", type=float, help="weight exponent s in [0,2)")
    sp.add_argument("--gamma", type=float, help="Hardy parameter gamma")
    sp.add_argument("--j", type=int, help="harmonic degree")
    sp.add_argument("--j-max", type=int, dest="j_max", help="largest degree scanned")
    sp.add_argument("--profile", choices=sorted(PROFILES), help="grid profile")
    sp.add_argument("--out", help="output directory for reports")
    sp.add_argument("--tol", type=float, help="solver tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hsbif",
        description="Hardy-Sobolev radial/bifurcation toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="derived constants and degeneracy table")
    _add_common(sp)

    sp = sub.add_parser("morse", help="Morse index of the radial solution")
    _add_common(sp)
    sp.add_argument("--symmetry", choices=["full", "axial", "axial-even"],
                    dest="morse_symmetry", help="symmetry restriction")

    sp = sub.add_parser("spectrum", help="singular spectrum per harmonic degree")
    _add_common(sp)
    sp.add_argument("--dump-eigenvectors", action="store_true", default=None,
                    dest="dump_eigenvectors")

    sp = sub.add_parser("verify", help="closed-form certification suite")
    _add_common(sp)

    sp = sub.add_parser("solve-radial", help="discrete radial solution on the strip")
    _add_common(sp)

    sp = sub.add_parser("continue", help="switch at a degeneracy point and trace")
    _add_common(sp)
    sp.add_argument("--cone", choices=["k1+", "k1-", "k2+", "k2-"], help="target cone")
    sp.add_argument("--from", dest="from_point",
                    help="bifurcation point: gamma1, gamma2, or a float")
    sp.add_argument("--gamma-min", type=float, dest="gamma_min")
    sp.add_argument("--steps", type=int, help="maximum continuation points")

    sp = sub.add_parser("nehari", help="constrained energy minimization")
    _add_common(sp)
    sp.add_argument("--symmetry", choices=["axial", "axial-even"])
    return ap


def _config_from(args: argparse.Namespace) -> RunConfig:
    base = RunConfig.from_ini(args.config) if args.config else RunConfig()
    flags = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "config") and v is not None
    }
    return base.override(**flags)


def _params(cfg: RunConfig) -> ProblemParams:
    return ProblemParams(cfg.N, cfg.s, cfg.gamma)


def cmd_constants(cfg: RunConfig) -> int:
    p = _params(cfg)
    c = derive_constants(p)
    print(f"N={p.N} s={p.s} gamma={p.gamma}")
    print(f"  nu        = {c.nu:.12g}")
    print(f"  p_s       = {c.p_s:.12g}")
    print(f"  q_s       = {c.q_s:.12g}")
    print(f"  C_gamma   = {c.C_gamma:.12g}")
    print(f"  a_gamma   = {c.a_gamma:.12g}")
    print(f"  b_gamma_s = {c.b_gamma_s:.12g}")
    print("  degeneracy points:")
    table = []
    for j in range(cfg.j_max + 1):
        gj = gamma_j(p.N, p.s, j)
        print(f"    gamma_{j} = {gj:.12g}")
        table.append({"j": j, "gamma_j": gj})
    if cfg.out:
        write_report(cfg.out, "constants", cfg, {
            "constants": {
                "nu": c.nu, "p_s": c.p_s, "q_s": c.q_s,
                "C_gamma": c.C_gamma, "a_gamma": c.a_gamma,
                "b_gamma_s": c.b_gamma_s,
            },
            "gamma_table": table,
            "normalization": normalization_metadata(p),
        })
    return EXIT_OK


def cmd_morse(cfg: RunConfig) -> int:
    p = _params(cfg)
    m = morse_index(p)
    axial = morse_index_symmetric(p, SymmetryClass.AXIAL)
    even = morse_index_symmetric(p, SymmetryClass.AXIAL_EVEN)
    if cfg.morse_symmetry == "axial":
        print(axial)
    elif cfg.morse_symmetry == "axial-even":
        print(even)
    else:
        print(m)
    if cfg.out:
        write_report(cfg.out, "morse", cfg, {
            "morse_index": m, "morse_axial": axial, "morse_axial_even": even,
        })
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    p = _params(cfg)
    prof = cfg.grid_profile
    j_max = max(cfg.j_max, suggested_j_max(p))
    rep = singular_spectrum(p, j_max, M=prof.sl_M, T=prof.sl_T)
    print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    if cfg.out:
        write_report(cfg.out, "spectrum", cfg, rep.to_dict())
        if cfg.dump_eigenvectors:
            from .spectral import singular_eigenvalue_discrete

            for d in rep.degrees:
                _, res = singular_eigenvalue_discrete(
                    p, d.j, M=prof.sl_M, T=prof.sl_T, vectors=True
                )
                write_csv(cfg.out, f"eigenvector_j{d.j}", ["t", "phi"],
                          zip(res.t, res.eigenvectors[:, 0]))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    p = _params(cfg)
    results = run_certification(p, cfg.grid_profile)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: value={r.value:.3e} "
              f"tol={r.tolerance:.3e}  {r.detail}")
    if cfg.out:
        write_report(cfg.out, "verify", cfg, {
            "checks": [r.to_dict() for r in results],
            "passed": certification_passed(results),
        })
    return EXIT_OK if certification_passed(results) else EXIT_NUMERICAL


def cmd_solve_radial(cfg: RunConfig) -> int:
    p = _params(cfg)
    prof = cfg.grid_profile
    grid = grid_for(p, M_t=prof.M_t, M_theta=prof.M_theta)
    w = radial_field_discrete(grid, p)
    res = residual_norm(w)
    print(f"radial solve: residual={res:.3e}  sup={w.sup_norm():.6g}  T={grid.T:.4g}")
    if cfg.out:
        w1d = radial_solve_1d(grid, p)
        r = np.exp(grid.t)
        export_profile_csv(f"{cfg.out}/radial_profile.csv", r,
                           np.exp(-0.5 * (p.N - 2) * grid.t) * w1d)
        write_report(cfg.out, "solve_radial", cfg, {
            "residual": res,
            "sup_norm": w.sup_norm(),
            "grid": grid.describe(),
            "normalization": normalization_metadata(p),
        })
    return EXIT_OK if res < 1e-8 else EXIT_NUMERICAL


def _bif_gamma(cfg: RunConfig) -> float:
    tag = cfg.from_point.strip().lower()
    if tag in ("gamma1", "g1"):
        return gamma_j(cfg.N, cfg.s, 1)
    if tag in ("gamma2", "g2"):
        return gamma_j(cfg.N, cfg.s, 2)
    return float(tag)


def cmd_continue(cfg: RunConfig) -> int:
    p_bif = _bif_gamma(cfg)
    prof = cfg.grid_profile
    grid = grid_for(ProblemParams(cfg.N, cfg.s, p_bif), M_t=prof.M_t,
                    M_theta=prof.M_theta)
    sw = switch_and_correct(cfg.N, cfg.s, cfg.cone, grid=grid,
                            opts=NewtonOptions(tol=cfg.tol, deflate_radial=True,
                                               max_iter=60))
    print(f"switch at gamma={sw.gamma:.8g}: nonradial={sw.nonradial} "
          f"distance={sw.result.distance_to_radial:.3e}")
    if not sw.nonradial:
        print("correction collapsed to the radial solution; no branch to trace")
        if cfg.out:
            write_report(cfg.out, "continue", cfg, {
                "switch": {"gamma": sw.gamma, "nonradial": False,
                           "attempts": sw.attempts},
            })
        return EXIT_NUMERICAL
    opts = TraceOptions(gamma_min=cfg.gamma_min, max_points=cfg.steps,
                        gamma_samples=(cfg.gamma_min,),
                        store_dir=cfg.out or None)
    rec = trace_branch(sw.result.field, cfg.cone, opts)
    print(f"traced {len(rec.points)} points, termination={rec.termination}, "
          f"gamma extent [{rec.gammas().min():.6g}, {rec.gammas().max():.6g}]")
    if cfg.out:
        rec.save(cfg.out, f"branch_{cfg.cone.replace('+', 'p').replace('-', 'm')}")
        write_report(cfg.out, "continue", cfg, {
            "switch": {"gamma": sw.gamma, "nonradial": True,
                       "eps_used": sw.eps_used},
            "points": len(rec.points),
            "termination": rec.termination,
        })
    return EXIT_OK


def cmd_nehari(cfg: RunConfig) -> int:
    p = _params(cfg)
    prof = cfg.grid_profile
    grid = grid_for(p, M_t=prof.M_t, M_theta=prof.M_theta)
    res = nehari_minimize(p, cfg.symmetry, grid=grid)
    print(f"nehari ({cfg.symmetry}) at gamma={p.gamma}: F={res.d_energy:.8g} "
          f"radial F={res.radial_energy:.8g} residual={res.residual:.2e} "
          f"angular variation={res.angular_variation:.3e}")
    if res.stalled:
        print("descent stalled; diagnostics:", res.diagnostics)
    if cfg.out:
        write_report(cfg.out, "nehari", cfg, {
            "F": res.d_energy,
            "radial_F": res.radial_energy,
            "non_radiality_sup": res.non_radiality_sup,
            "non_radiality_energy": res.non_radiality_energy,
            "angular_variation": res.angular_variation,
            "residual": res.residual,
            "iterations": res.iterations,
            "stalled": res.stalled,
            "peak_width_cells": res.peak_width_cells,
        })
        res.field.save(f"{cfg.out}/nehari_minimizer")
    return EXIT_NUMERICAL if res.stalled else EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "morse": cmd_morse,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "solve-radial": cmd_solve_radial,
    "continue": cmd_continue,
    "nehari": cmd_nehari,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from(args)
        p_check = ProblemParams(cfg.N, cfg.s, cfg.gamma)  # validation gate
        del p_check
        return COMMANDS[args.command](cfg)
    except (ValueError, ZeroDivisionError) as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, BranchSwitchError) as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
