"""Small convergence study straight through the library API.

Runs the nonconforming method on squares and Voronoi meshes at three
levels for lambda in {1, 1e4}, prints the rate table, and writes the
CSV plus log-log SVG plots.  The full sweep used by the acceptance
tests is the same call with the default StudyConfig.
"""
import os

from vemelast.study import StudyConfig, check_rate_windows, run_convergence_study

OUT = os.path.join(os.path.dirname(__file__), "output", "study")


def main():
    config = StudyConfig(
        methods=("nc",),
        families=("square", "voronoi"),
        levels=(4, 8, 16),
        lambdas=(1.0, 1.0e4),
    )
    records = run_convergence_study(config, out_dir=OUT)

    print(f"{'family':>8} {'lambda':>8} {'n':>3} {'h':>8} {'dofs':>6} "
          f"{'E_e':>10} {'rate':>6} {'E_2':>10} {'rate':>6}")
    for r in records:
        fmt = lambda x: "  --" if x != x else f"{x:6.3f}"  # nan on level 0
        print(f"{r.family:>8} {r.lam:>8g} {r.n:>3} {r.h:>8.4f} {r.dofs:>6} "
              f"{r.energy_error:>10.5f} {fmt(r.rate_energy)} "
              f"{r.dof_l2_error:>10.6f} {fmt(r.rate_l2)}")

    failures = check_rate_windows(records)
    if failures:
        print("\nrate windows missed on the finest interval:")
        for line in failures:
            print(f"  {line}")
    else:
        print("\nall finest-interval rates inside their windows")
    print(f"CSV and SVG plots written to {OUT}/")


if __name__ == "__main__":
    main()
