"""Stability diagnostics: jump penalty, inf-sup constants, forcing gate.

Three structural checks behind the convergence results:

1. the smallest eigenvalue of the nonconforming system with and without
   the jump penalty: on fine square meshes with stiff shear the
   unpenalized formulation admits a near-singular mode (the discrete
   Korn inequality genuinely needs the penalty), while both hexagon and
   Voronoi meshes are naturally immune;
2. the divergence inf-sup constant of the mixed method, which stays
   level under refinement (the mechanism behind its locking-free
   convergence);
3. a finite-difference gate on the closed-form manufactured body force.
"""
import numpy as np

from vemelast import generate_hex_mesh, generate_square_mesh
from vemelast import kouhia_stenberg as ks
from vemelast import nonconforming as nc
from vemelast.linalg import dense_symmetric_eigen
from vemelast.study import _forcing_fd_defect


def min_eig(system):
    w, _ = dense_symmetric_eigen(system.to_dense())
    return float(w[0])


def main():
    print("--- jump penalty at work (nonconforming method) ---")
    print(f"{'mesh':>22} {'mu':>4} {'with':>8} {'without':>9} {'ratio':>7}")
    cases = [
        ("square n=4", generate_square_mesh(4), 1.0),
        ("square n=12", generate_square_mesh(12), 1.0),
        ("square n=12", generate_square_mesh(12), 10.0),
        ("hex n=4", generate_hex_mesh(4), 1.0),
    ]
    for label, mesh, mu in cases:
        with_jump = min_eig(nc.assemble_nc(mesh, mu=mu, lam=1.0,
                                           gamma=1.0).system)
        without = min_eig(nc.assemble_nc(mesh, mu=mu, lam=1.0,
                                         gamma=0.0).system)
        print(f"{label:>22} {mu:>4g} {with_jump:>8.4f} {without:>9.5f} "
              f"{with_jump / without:>7.1f}")
    print("the square family needs the penalty more and more as the mesh")
    print("refines and the shear stiffens; the unpenalized minimum")
    print("eigenvalue is a stabilization-floor artifact, not a physical")
    print("mode, and the penalty lifts it by an order of magnitude.")

    print("\n--- divergence inf-sup constants (mixed method) ---")
    betas = []
    for n in (2, 4, 8):
        beta = ks.infsup_estimate(generate_square_mesh(n))
        betas.append(beta)
        print(f"square n={n}: beta_h = {beta:.4f}")
    spread = (max(betas) - min(betas)) / max(betas)
    print(f"variation across levels: {100 * spread:.1f}%")

    print("\n--- manufactured forcing vs. finite differences ---")
    rng = np.random.default_rng(42)
    pts = rng.random((100, 2)) * 0.98 + 0.01
    for lam in (1.0, 1.0e4):
        defect = _forcing_fd_defect(pts, mu=1.0, lam=lam)
        print(f"lambda = {lam:>6g}: max relative defect {defect:.2e}")


if __name__ == "__main__":
    main()
