"""Convergence studies, error norms, and diagnostic suites.

Errors follow the dof-based definitions used throughout: the energy
error is the assembled-form quadratic norm of the interpolation
difference (jump penalty included for the nonconforming method), and
the scaled l2 error weights every free dof difference by the global
mesh size h.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import kouhia_stenberg as ks
from . import nonconforming as nc
from .element import (build_local_stiffness, build_projector, edge_mean_dofs,
                      interpolate_dofs, local_consistency_check, mixed_dofs,
                      rigid_dof_vectors)
from .errors import ConfigError
from .linalg import dense_symmetric_eigen
from .manufactured import exact_forcing, exact_solution, make_case
from .mesh import (PolygonalMesh, generate_hex_mesh, generate_square_mesh,
                   generate_voronoi_mesh, validate_mesh)
from .svgplot import loglog_svg

METHODS = ("nc", "ks")
FAMILIES = ("square", "hex", "voronoi")
ENERGY_RATE_WINDOW = (0.8, 1.2)
L2_RATE_WINDOW = (1.7, 2.3)
CSV_COLUMNS = ("method", "family", "n", "h", "lambda", "dofs",
               "E_e", "E_2", "rate_Ee", "rate_E2", "iters", "seconds")


@dataclass(frozen=True)
class StudyConfig:
    """Settings for one convergence study."""

    methods: tuple = ("nc", "ks")
    families: tuple = ("square", "hex", "voronoi")
    levels: tuple = (4, 8, 16, 32)
    lambdas: tuple = (1.0, 1.0e4)
    mu: float = 1.0
    gamma: float = 1.0
    voronoi_seed: int = 2024
    lloyd_iters: int = 100
    tol: float = 1.0e-10

    def validate(self) -> "StudyConfig":
        if not self.levels:
            raise ConfigError("level list is empty")
        if list(self.levels) != sorted(set(int(n) for n in self.levels)):
            raise ConfigError("levels must be strictly increasing integers")
        if any(n < 1 for n in self.levels):
            raise ConfigError("levels must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        for fam in self.families:
            if fam not in FAMILIES:
                raise ConfigError(f"unknown mesh family {fam!r}")
        if not self.methods or not self.families or not self.lambdas:
            raise ConfigError("methods, families, and lambdas must be nonempty")
        if self.mu <= 0 or min(self.lambdas) <= 0:
            raise ConfigError("material parameters must be positive")
        return self


def load_config(path) -> StudyConfig:
    """Read a study configuration from a TOML file ([study] table)."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    table = data.get("study", data)
    known = StudyConfig.__dataclass_fields__
    unknown = set(table) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in table.items():
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    return StudyConfig(**kwargs).validate()


def build_family_mesh(family: str, n: int, voronoi_seed: int = 2024,
                      lloyd_iters: int = 100) -> PolygonalMesh:
    """Mesh of the given family at refinement level n (Voronoi meshes
    use n^2 seeds so their measured h tracks 1/n)."""
    if family == "square":
        return generate_square_mesh(n)
    if family == "hex":
        return generate_hex_mesh(n)
    if family == "voronoi":
        return generate_voronoi_mesh(n * n, lloyd_iters=lloyd_iters,
                                     rng_seed=voronoi_seed)
    raise ConfigError(f"unknown mesh family {family!r}")


def solve_case(method: str, mesh: PolygonalMesh, lam: float, mu: float = 1.0,
               gamma: float = 1.0, tol: float = 1e-10, solver: str = "cg"):
    """Solve the manufactured problem with one method on one mesh."""
    case = make_case(lam, mu)
    if method == "nc":
        return nc.solve_nc(mesh, mu, lam, case.forcing, gamma=gamma,
                           tol=tol, solver=solver)
    if method == "ks":
        return ks.solve_ks(mesh, mu, lam, case.forcing, tol=tol, solver=solver)
    raise ConfigError(f"unknown method {method!r}")


def compute_errors(solution, u):
    """Energy and scaled-l2 errors of a solution against a smooth
    displacement u, measured through the dofs.

    Returns (energy_error, dof_l2_error): the assembled-form norm of
    u_h - I_h u on the free dofs, and h times its euclidean norm.
    """
    asm = solution.assembly
    if isinstance(asm, nc.NcAssembly):
        interp = nc.nc_interpolant(asm.mesh, u)
    else:
        interp = ks.ks_interpolant(asm.mesh, u)
    delta = (solution.full_values - interp)[asm.dofmap.free_dofs]
    energy_sq = float(delta @ asm.system.matvec(delta))
    energy_error = float(np.sqrt(max(energy_sq, 0.0)))
    dof_l2_error = float(asm.mesh.h * np.linalg.norm(delta))
    return energy_error, dof_l2_error


@dataclass(frozen=True)
class ConvergenceRecord:
    method: str
    family: str
    n: int
    h: float
    lam: float
    dofs: int
    energy_error: float
    dof_l2_error: float
    rate_energy: float   # nan on the coarsest level of each sequence
    rate_l2: float
    iterations: int
    seconds: float

    def csv_row(self):
        fmt_rate = (lambda r: "" if np.isnan(r) else f"{r:.4f}")
        return (self.method, self.family, str(self.n), repr(self.h),
                repr(self.lam), str(self.dofs), repr(self.energy_error),
                repr(self.dof_l2_error), fmt_rate(self.rate_energy),
                fmt_rate(self.rate_l2), str(self.iterations),
                f"{self.seconds:.3f}")


def _write_csv_header(fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    return writer


def run_convergence_study(config: StudyConfig, out_dir=None,
                          solver: str = "cg"):
    """Run the configured sweep and return the ConvergenceRecords.

    When out_dir is given, a CSV table (flushed record by record, so a
    failed solve leaves the partial table behind) and one log-log SVG
    per (method, lambda) pair are written there.
    """
    config.validate()
    records = []
    csv_fh = writer = None
    if out_dir is not None:
        import os
        os.makedirs(out_dir, exist_ok=True)
        csv_fh = open(os.path.join(out_dir, "study.csv"), "w")
        writer = _write_csv_header(csv_fh)
    try:
        for method in config.methods:
            for family in config.families:
                for lam in config.lambdas:
                    prev = None
                    for n in config.levels:
                        mesh = build_family_mesh(
                            family, int(n), voronoi_seed=config.voronoi_seed,
                            lloyd_iters=config.lloyd_iters)
                        case = make_case(float(lam), config.mu)
                        started = time.perf_counter()
                        solution = solve_case(
                            method, mesh, float(lam), mu=config.mu,
                            gamma=config.gamma, tol=config.tol, solver=solver)
                        seconds = time.perf_counter() - started
                        e_energy, e_l2 = compute_errors(solution, case.displacement)
                        rate_e = rate_2 = float("nan")
                        if prev is not None:
                            ratio = np.log(prev.h / mesh.h)
                            rate_e = float(np.log(prev.energy_error / e_energy) / ratio)
                            rate_2 = float(np.log(prev.dof_l2_error / e_l2) / ratio)
                        rec = ConvergenceRecord(
                            method=method, family=family, n=int(n), h=mesh.h,
                            lam=float(lam), dofs=solution.n_free,
                            energy_error=e_energy, dof_l2_error=e_l2,
                            rate_energy=rate_e, rate_l2=rate_2,
                            iterations=solution.iterations, seconds=seconds)
                        records.append(rec)
                        prev = rec
                        if writer is not None:
                            writer.writerow(rec.csv_row())
                            csv_fh.flush()
    finally:
        if csv_fh is not None:
            csv_fh.close()
    if out_dir is not None:
        _write_study_plots(records, out_dir)
    return records


def _write_study_plots(records, out_dir) -> None:
    import os
    combos = []
    for rec in records:
        key = (rec.method, rec.lam)
        if key not in combos:
            combos.append(key)
    for method, lam in combos:
        series = []
        for family in dict.fromkeys(r.family for r in records):
            group = [r for r in records
                     if (r.method, r.lam, r.family) == (method, lam, family)]
            if not group:
                continue
            series.append((f"{family} energy",
                           [r.h for r in group],
                           [r.energy_error for r in group]))
            series.append((f"{family} scaled-l2",
                           [r.h for r in group],
                           [r.dof_l2_error for r in group]))
        if not series:
            continue
        name = f"convergence_{method}_lambda{lam:g}.svg"
        loglog_svg(os.path.join(out_dir, name), series,
                   title=f"method {method}, lambda {lam:g}",
                   xlabel="mesh size h", ylabel="error",
                   slope_guides=(1, 2))


def check_rate_windows(records) -> list:
    """Acceptance windows on the finest-interval rates of every
    (method, family, lambda) sequence; returns failure strings."""
    failures = []
    groups = {}
    for rec in records:
        groups.setdefault((rec.method, rec.family, rec.lam), []).append(rec)
    for (method, family, lam), group in groups.items():
        tag = f"{method}/{family}/lambda={lam:g}"
        if len(group) < 2:
            failures.append(f"{tag}: fewer than two levels, no rate")
            continue
        last = group[-1]
        lo, hi = ENERGY_RATE_WINDOW
        if not lo <= last.rate_energy <= hi:
            failures.append(
                f"{tag}: energy rate {last.rate_energy:.3f} outside [{lo}, {hi}]")
        lo, hi = L2_RATE_WINDOW
        if not lo <= last.rate_l2 <= hi:
            failures.append(
                f"{tag}: scaled-l2 rate {last.rate_l2:.3f} outside [{lo}, {hi}]")
    return failures


# ---------------------------------------------------------------------------
# diagnostics


def _entry(name, value, passed, detail=""):
    return {"name": name, "value": value, "passed": bool(passed),
            "detail": detail}


def _min_eig(system) -> float:
    w, _ = dense_symmetric_eigen(system.to_dense())
    return float(w[0])


def run_diagnostics(out_dir=None) -> dict:
    """Run the structural health checks on small meshes and return a
    report dict; failures are entries, not exceptions.

    Covers: mesh quality, linear-field reproduction, consistency,
    rotation identity, stiffness kernels, positive-definiteness with
    and without the jump penalty, patch tests, the inf-sup estimate,
    and the finite-difference gate on the manufactured forcing.
    """
    rng = np.random.default_rng(42)
    report = {}

    meshes = {
        "square": generate_square_mesh(4),
        "hex": generate_hex_mesh(4),
        "voronoi": generate_voronoi_mesh(16, lloyd_iters=100, rng_seed=2024),
    }

    quality = []
    for fam, mesh in meshes.items():
        q = validate_mesh(mesh)
        quality.append(_entry(
            f"{fam} mesh quality", {"min_rho": q.min_rho, "h": q.h,
                                    "polygons": q.n_polygons},
            q.min_rho > 0.01 and abs(q.area_total - 1.0) < 1e-9))
    report["mesh"] = quality

    elem = []
    for fam, mesh in meshes.items():
        geom = mesh.geometry(mesh.n_polygons // 2)
        for label, dofs in (("edge-mean", edge_mean_dofs(geom.n_edges)),
                            ("mixed", mixed_dofs(geom.n_edges))):
            proj = build_projector(geom, dofs)
            repro = float(np.abs(proj.p @ proj.d - np.eye(6)).max())
            elem.append(_entry(f"{fam} {label} linear reproduction", repro,
                               repro < 1e-12))
            resid = max(
                local_consistency_check(
                    geom, dofs, rng.standard_normal(6),
                    rng.standard_normal(dofs.n_dof), mu=1.0, lam=1.0)
                for _ in range(20))
            elem.append(_entry(f"{fam} {label} consistency residual", resid,
                               resid < 1e-11))
            # rotation identity: mean rotation of the projected field
            # must equal the boundary circulation of the dofs
            v = rng.standard_normal(dofs.n_dof)
            coeff = proj.p @ v
            rot_proj = (coeff[4] - coeff[2]) / geom.diameter * geom.area
            circ = float(np.einsum("e,ec,ecj,j->", geom.edge_lengths,
                                   geom.tangents, proj.mean_map, v))
            elem.append(_entry(f"{fam} {label} rotation identity",
                               abs(rot_proj - circ),
                               abs(rot_proj - circ) < 1e-12))
            stiff = build_local_stiffness(geom, dofs, mu=1.0, lam=1.0)
            w, _ = dense_symmetric_eigen(stiff.k)
            kdim = int(np.sum(w < 1e-10 * w[-1]))
            elem.append(_entry(f"{fam} {label} stiffness kernel dim", kdim,
                               kdim == 3))
    report["element"] = elem

    korn = []
    for fam, mesh in meshes.items():
        with_jump = _min_eig(nc.assemble_nc(mesh, mu=1.0, lam=1.0, gamma=1.0).system)
        without = _min_eig(nc.assemble_nc(mesh, mu=1.0, lam=1.0, gamma=0.0).system)
        korn.append(_entry(
            f"{fam} jump-penalty dichotomy",
            {"min_eig_gamma1": with_jump, "min_eig_gamma0": without,
             "drop": without / with_jump if with_jump > 0 else float("nan")},
            with_jump > 0))
        ks_eig = _min_eig(ks.assemble_ks(mesh, mu=1.0, lam=1.0).system)
        korn.append(_entry(f"{fam} mixed-conformity min eig", ks_eig, ks_eig > 0))
    # witness for "penalty does real work": on fine square meshes with a
    # stiff shear modulus the un-penalized minimum eigenvalue sits an
    # order of magnitude below the penalized one
    wit = generate_square_mesh(12)
    wit1 = _min_eig(nc.assemble_nc(wit, mu=10.0, lam=1.0, gamma=1.0).system)
    wit0 = _min_eig(nc.assemble_nc(wit, mu=10.0, lam=1.0, gamma=0.0).system)
    korn.append(_entry(
        "square n=12 dichotomy witness (mu=10)",
        {"min_eig_gamma1": wit1, "min_eig_gamma0": wit0,
         "ratio": wit1 / wit0},
        wit1 >= 10.0 * wit0))
    report["korn"] = korn

    patch = []
    linear = (lambda x, y: (np.asarray(x, float) + 2.0 * np.asarray(y, float) - 0.5,
                            3.0 * np.asarray(x, float) - np.asarray(y, float) + 0.25))
    for fam, mesh in meshes.items():
        for method, solve, interp in (
                ("nc", lambda m: nc.solve_nc(m, 1.0, 1.0, None, dirichlet=linear,
                                             solver="dense" if nc.nc_dof_map(m).n_free <= 64 else "cg",
                                             tol=1e-14),
                 nc.nc_interpolant),
                ("ks", lambda m: ks.solve_ks(m, 1.0, 1.0, None, dirichlet=linear,
                                             solver="dense" if ks.ks_dof_map(m).n_free <= 64 else "cg",
                                             tol=1e-14),
                 ks.ks_interpolant)):
            sol = solve(mesh)
            exact = interp(mesh, linear)[sol.assembly.dofmap.free_dofs]
            err = float(np.abs(sol.free_values - exact).max())
            patch.append(_entry(f"{fam} {method} linear patch test", err,
                                err < 1e-10))
    report["patch"] = patch

    infsup = []
    betas = []
    for n in (2, 4, 8):
        beta = ks.infsup_estimate(generate_square_mesh(n))
        betas.append(beta)
        infsup.append(_entry(f"square n={n} inf-sup estimate", beta, beta > 0))
    variation = (max(betas) - min(betas)) / max(betas)
    infsup.append(_entry("square inf-sup variation", variation, variation < 0.25))
    infsup.append(_entry("hex n=2 inf-sup estimate",
                         ks.infsup_estimate(meshes["hex"]),
                         ks.infsup_estimate(meshes["hex"]) > 0))
    report["infsup"] = infsup

    fd = []
    pts = rng.random((100, 2)) * 0.98 + 0.01
    for lam in (1.0, 1.0e4):
        worst = _forcing_fd_defect(pts, mu=1.0, lam=lam)
        fd.append(_entry(f"forcing finite-difference gate lambda={lam:g}",
                         worst, worst < 1e-5))
    report["forcing"] = fd

    if out_dir is not None:
        import os
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "diagnostics.txt"), "w") as fh:
            for section, entries in report.items():
                fh.write(f"# {section}\n")
                for e in entries:
                    flag = "PASS" if e["passed"] else "FAIL"
                    fh.write(f"[{flag}] {e['name']}: {e['value']}\n")
    return report


def _forcing_fd_defect(points, mu: float, lam: float,
                       step: float = 1e-5) -> float:
    """Max relative mismatch between the closed-form forcing and a
    central-difference evaluation of -div sigma(u).

    The stress field is built from complex-step displacement gradients
    (exact to machine precision, no subtractive cancellation), so the
    outer central difference of the stress is the only approximation.
    A nested real difference would lose the lam * div(u) contribution
    to cancellation once lam is large: the divergence is O(1/lam) by
    construction while the differencing noise is lam-independent.
    """

    def stress(x, y):
        d = 1e-20
        u_x = exact_solution(x + 1j * d, y, lam)
        u_y = exact_solution(x, y + 1j * d, lam)
        e11 = np.imag(u_x[0]) / d
        e22 = np.imag(u_y[1]) / d
        e12 = 0.5 * (np.imag(u_y[0]) + np.imag(u_x[1])) / d
        div = e11 + e22
        s11 = 2 * mu * e11 + lam * div
        s22 = 2 * mu * e22 + lam * div
        s12 = 2 * mu * e12
        return s11, s22, s12

    worst = 0.0
    d = step
    for x, y in points:
        s11_xp, _, s12_xp = stress(x + d, y)
        s11_xm, _, s12_xm = stress(x - d, y)
        _, s22_yp, s12_yp = stress(x, y + d)
        _, s22_ym, s12_ym = stress(x, y - d)
        f1 = -((s11_xp - s11_xm) / (2 * d) + (s12_yp - s12_ym) / (2 * d))
        f2 = -((s12_xp - s12_xm) / (2 * d) + (s22_yp - s22_ym) / (2 * d))
        g1, g2 = exact_forcing(x, y, mu, lam)
        scale = max(abs(g1), abs(g2), 1.0)
        worst = max(worst, abs(f1 - g1) / scale, abs(f2 - g2) / scale)
    return worst
