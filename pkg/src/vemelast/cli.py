"""Command-line entry points: solve, study, diagnose, meshgen.

Exit codes: 0 on success, 2 when `study --check` misses a rate window,
1 on any error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import study as study_mod
from .errors import VemError
from .linalg import write_matrix_market
from .manufactured import make_case
from .mesh import (generate_hex_mesh, generate_square_mesh,
                   generate_voronoi_mesh, load_mesh, save_mesh, validate_mesh)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; keep 2 reserved for the
    # study --check rate-window failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_mesh(spec: str, n, seed: int, lloyd: int):
    if spec.startswith("file:"):
        return load_mesh(spec[len("file:"):]), "file"
    if spec not in study_mod.FAMILIES:
        raise VemError(f"unknown mesh family {spec!r} (or use file:PATH)")
    if n is None:
        raise VemError("--n is required for generated meshes")
    return study_mod.build_family_mesh(spec, int(n), voronoi_seed=seed,
                                       lloyd_iters=lloyd), spec


def _cmd_solve(args) -> int:
    mesh, family = _resolve_mesh(args.mesh, args.n, args.seed, args.lloyd)
    case = make_case(args.lam, args.mu)
    solution = study_mod.solve_case(args.method, mesh, args.lam, mu=args.mu,
                                    gamma=args.gamma, tol=args.tol)
    e_energy, e_l2 = study_mod.compute_errors(solution, case.displacement)
    summary = {
        "method": args.method,
        "family": family,
        "n": args.n,
        "h": mesh.h,
        "lambda": args.lam,
        "mu": args.mu,
        "gamma": args.gamma if args.method == "nc" else None,
        "dofs": solution.n_free,
        "E_e": e_energy,
        "E_2": e_l2,
        "iters": solution.iterations,
    }
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    with open(f"{args.out}.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    np.savetxt(f"{args.out}.dofs.txt", solution.full_values)
    if args.dump_system:
        write_matrix_market(args.dump_system, solution.assembly.system)
    print(f"dofs={solution.n_free} E_e={e_energy:.6e} E_2={e_l2:.6e} "
          f"iters={solution.iterations}")
    return 0


def _cmd_study(args) -> int:
    config = study_mod.load_config(args.config)
    records = study_mod.run_convergence_study(config, out_dir=args.out)
    print(f"{len(records)} runs written to {args.out}/study.csv")
    if args.check:
        failures = study_mod.check_rate_windows(records)
        if failures:
            for line in failures:
                print(f"rate window missed: {line}", file=sys.stderr)
            return 2
        print("all rate windows satisfied")
    return 0


def _cmd_diagnose(args) -> int:
    report = study_mod.run_diagnostics(out_dir=args.out)
    n_fail = 0
    for section, entries in report.items():
        for e in entries:
            flag = "PASS" if e["passed"] else "FAIL"
            n_fail += not e["passed"]
            print(f"[{flag}] {section}: {e['name']}: {e['value']}")
    print(f"report written to {args.out}/diagnostics.txt"
          if args.out else "no output directory given")
    print(f"{n_fail} failing entries" if n_fail else "all diagnostics passed")
    return 0


def _cmd_meshgen(args) -> int:
    if args.family == "square":
        mesh = generate_square_mesh(args.n)
    elif args.family == "hex":
        mesh = generate_hex_mesh(args.n)
    elif args.family == "voronoi":
        mesh = generate_voronoi_mesh(args.n * args.n, lloyd_iters=args.lloyd,
                                     rng_seed=args.seed)
    else:
        raise VemError(f"unknown mesh family {args.family!r}")
    validate_mesh(mesh)
    save_mesh(mesh, args.out)
    print(f"{mesh.n_polygons} polygons, {mesh.n_vertices} vertices, "
          f"h={mesh.h:.4g} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vemelast",
                     description="Lowest-order virtual element solvers for "
                                 "nearly incompressible planar elasticity")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="solve one manufactured case")
    p.add_argument("--method", choices=study_mod.METHODS, required=True)
    p.add_argument("--mesh", required=True,
                   help="square|hex|voronoi or file:PATH")
    p.add_argument("--n", type=int, default=None,
                   help="refinement level (voronoi uses n^2 seeds)")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0,
                   help="jump penalty weight (nc only)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=2024, help="voronoi rng seed")
    p.add_argument("--lloyd", type=int, default=100, help="voronoi Lloyd steps")
    p.add_argument("--dump-system", default=None, metavar="PATH.mtx",
                   help="write the assembled matrix in MatrixMarket format")
    p.add_argument("--out", required=True, metavar="PREFIX",
                   help="writes PREFIX.json and PREFIX.dofs.txt")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("study", help="run a convergence study from a config")
    p.add_argument("--config", required=True, metavar="PATH.toml")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--check", action="store_true",
                   help="exit 2 when a final rate misses its window")
    p.set_defaults(func=_cmd_study)

    p = sub.add_parser("diagnose", help="run the diagnostic checks")
    p.add_argument("--out", default=None, metavar="DIR")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("meshgen", help="generate and save a mesh")
    p.add_argument("--family", choices=study_mod.FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True,
                   help="refinement level (voronoi uses n^2 seeds)")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--lloyd", type=int, default=100)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=_cmd_meshgen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
