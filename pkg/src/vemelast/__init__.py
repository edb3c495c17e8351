"""Lowest-order virtual element solvers for nearly incompressible
planar elasticity on polygonal meshes.

Two locking-free discretizations of the pure-displacement problem on
the unit square: a nonconforming method stabilized by an interior-edge
jump penalty, and a mixed-conformity method pairing a nonconforming
first component with a conforming second component.
"""
from .element import (LocalDofSet, LocalProjector, LocalStiffness,
                      build_local_stiffness, build_projector,
                      build_stabilization, edge_mean_dofs, interpolate_dofs,
                      local_consistency_check, mixed_dofs)
from .errors import (ConfigError, ConvergenceError, DegenerateElementError,
                     IndefiniteSystemError, MeshError, SingularSystemError,
                     UnsupportedDegreeError, VemError)
from .geometry import (ElementGeometry, edge_integrate, element_geometry,
                       p1_edge_moments, polygon_integrate, triangle_rule)
from .kouhia_stenberg import (KsAssembly, KsSolution, assemble_ks,
                              assemble_load_ks, infsup_estimate,
                              ks_interpolant, solve_ks)
from .linalg import (CgResult, SparseSystem, assemble_symmetric, cg_solve,
                     dense_solve, dense_symmetric_eigen, system_from_csr,
                     write_matrix_market)
from .manufactured import (ManufacturedCase, exact_forcing, exact_solution,
                           make_case)
from .mesh import (MeshQualityReport, PolygonalMesh, build_mesh,
                   generate_hex_mesh, generate_square_mesh,
                   generate_voronoi_mesh, load_mesh, save_mesh, validate_mesh)
from .nonconforming import (NcAssembly, NcSolution, assemble_load_nc,
                            assemble_nc, jump_moment_rows, nc_interpolant,
                            solve_nc)
from .study import (ConvergenceRecord, StudyConfig, build_family_mesh,
                    check_rate_windows, compute_errors, load_config,
                    run_convergence_study, run_diagnostics, solve_case)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
