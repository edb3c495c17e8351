"""Volumetric locking comparison at lambda = 1 versus lambda = 10^4.

Solves the manufactured problem with both methods on the nonconvex
hexagon family and prints the error measures side by side.  The
interesting read is the lambda = 1e4 column: a locking method would see
its errors blow up by orders of magnitude; here the scaled-l2 errors
barely move, and the shear-part energy error is lambda-uniform for
both methods.
"""
import numpy as np

from vemelast import generate_hex_mesh
from vemelast import kouhia_stenberg as ks
from vemelast import nonconforming as nc
from vemelast.manufactured import make_case
from vemelast.study import compute_errors


def shear_energy_error(solution, shear_system, interp):
    """Error in the mu-part of the discrete energy (no lambda weight)."""
    d = solution.free_values - interp[solution.assembly.dofmap.free_dofs]
    return float(np.sqrt(d @ shear_system.matvec(d)))


def main():
    print(f"{'method':>6} {'n':>3} {'lambda':>8} {'E_e':>10} {'E_2':>10} "
          f"{'shear-energy':>13}")
    for n in (4, 8):
        mesh = generate_hex_mesh(n)
        for method in ("nc", "ks"):
            if method == "nc":
                shear = nc.assemble_nc(mesh, mu=1.0, lam=0.0).system
            else:
                shear = ks.assemble_ks(mesh, mu=1.0, lam=0.0).system
            for lam in (1.0, 1.0e4):
                case = make_case(lam)
                if method == "nc":
                    sol = nc.solve_nc(mesh, 1.0, lam, case.forcing, tol=1e-11)
                    interp = nc.nc_interpolant(mesh, case.displacement)
                else:
                    sol = ks.solve_ks(mesh, 1.0, lam, case.forcing, tol=1e-11)
                    interp = ks.ks_interpolant(mesh, case.displacement)
                e_energy, e_l2 = compute_errors(sol, case.displacement)
                e_shear = shear_energy_error(sol, shear, interp)
                print(f"{method:>6} {n:>3} {lam:>8g} {e_energy:>10.4f} "
                      f"{e_l2:>10.5f} {e_shear:>13.4f}")
        print()

    print("Notes:")
    print(" - E_2 and the shear-energy error are insensitive to lambda for")
    print("   both methods: neither discretization locks.")
    print(" - the assembled-energy measure E_e of the mixed method grows")
    print("   with lambda because its conforming component's interpolant")
    print("   carries an O(h) mean-divergence defect that the lambda")
    print("   weight amplifies; the edge-mean interpolant of the fully")
    print("   nonconforming method matches exact mean divergences, so its")
    print("   E_e stays lambda-uniform.")


if __name__ == "__main__":
    main()
