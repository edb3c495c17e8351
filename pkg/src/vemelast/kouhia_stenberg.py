"""Mixed-conformity (Kouhia-Stenberg type) virtual element method.

Component 1 of the displacement is nonconforming (one edge-mean dof per
edge); component 2 is conforming with one vertex dof per vertex.  No
jump penalty is needed: the assembled form already satisfies a discrete
Korn inequality, provided every element touches at least one interior
vertex (checked at assembly time).

Full dof numbering: component-1 dof of edge e at index e; component-2
dof of vertex v at index n_edges + v.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from . import linalg
from .element import build_local_stiffness, mixed_dofs
from .errors import MeshError
from .geometry import EDGE_SAMPLE_POINTS, p1_edge_moments, polygon_integrate
from .mesh import PolygonalMesh

MAX_INFSUP_DOFS = 600


@dataclass(frozen=True)
class KsDofMap:
    """Mapping between full dofs (edge means + vertex values) and free
    dofs (interior edges and interior vertices)."""

    n_edges: int
    n_vertices: int
    free_index: np.ndarray
    free_dofs: np.ndarray

    @property
    def n_total(self) -> int:
        return self.n_edges + self.n_vertices

    @property
    def n_free(self) -> int:
        return len(self.free_dofs)

    @property
    def boundary_dofs(self) -> np.ndarray:
        return np.nonzero(self.free_index < 0)[0]


def ks_dof_map(mesh: PolygonalMesh) -> KsDofMap:
    free = np.zeros(mesh.n_edges + mesh.n_vertices, dtype=bool)
    free[mesh.interior_edge_ids] = True
    free[mesh.n_edges + np.nonzero(~mesh.boundary_vertex_mask)[0]] = True
    free_index = np.full(len(free), -1, dtype=int)
    free_dofs = np.nonzero(free)[0]
    free_index[free_dofs] = np.arange(len(free_dofs))
    return KsDofMap(mesh.n_edges, mesh.n_vertices, free_index, free_dofs)


def _local_full_ids(mesh: PolygonalMesh, p: int) -> np.ndarray:
    return np.concatenate([mesh.polygon_edges[p],
                           mesh.n_edges + mesh.polygons[p]])


def _check_interior_vertices(mesh: PolygonalMesh) -> None:
    interior = ~mesh.boundary_vertex_mask
    for p, poly in enumerate(mesh.polygons):
        if not interior[poly].any():
            raise MeshError(
                f"polygon {p} has no interior vertex; the mixed-conformity "
                "method requires at least one per element"
            )


@dataclass
class KsAssembly:
    mesh: PolygonalMesh
    mu: float
    lam: float
    dofmap: KsDofMap
    system: linalg.SparseSystem
    full: sp.csr_matrix
    stiffnesses: list


def assemble_ks(mesh: PolygonalMesh, mu: float, lam: float) -> KsAssembly:
    """Assemble the mixed-conformity stiffness matrix."""
    if mu <= 0.0 or lam < 0.0:
        raise ValueError("material parameters require mu > 0 and lam >= 0")
    _check_interior_vertices(mesh)
    dofmap = ks_dof_map(mesh)
    rows, cols, vals = [], [], []
    stiffnesses = []
    for p in range(mesh.n_polygons):
        geom = mesh.geometry(p)
        stiff = build_local_stiffness(geom, mixed_dofs(geom.n_edges), mu, lam)
        stiffnesses.append(stiff)
        ids = _local_full_ids(mesh, p)
        R, C = np.meshgrid(ids, ids, indexing="ij")
        rows.append(R.ravel())
        cols.append(C.ravel())
        vals.append(stiff.k.ravel())
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    full = sp.csr_matrix((vals, (rows, cols)),
                         shape=(dofmap.n_total, dofmap.n_total))
    fr = dofmap.free_index[rows]
    fc = dofmap.free_index[cols]
    keep = (fr >= 0) & (fc >= 0)
    system = linalg.assemble_symmetric(dofmap.n_free, fr[keep], fc[keep], vals[keep])
    return KsAssembly(mesh=mesh, mu=mu, lam=lam, dofmap=dofmap,
                      system=system, full=full, stiffnesses=stiffnesses)


def assemble_load_ks(mesh: PolygonalMesh, f) -> np.ndarray:
    """Full-length load vector: element mean of f paid out equally to
    the component-1 edge dofs and the component-2 vertex dofs."""
    b = np.zeros(mesh.n_edges + mesh.n_vertices)
    for p in range(mesh.n_polygons):
        geom = mesh.geometry(p)
        fbar = np.array([
            polygon_integrate(geom, lambda x, y, c=c: f(x, y)[c], degree=7)
            for c in range(2)
        ]) / geom.area
        share = geom.area / geom.n_edges
        np.add.at(b, mesh.polygon_edges[p], fbar[0] * share)
        np.add.at(b, mesh.n_edges + mesh.polygons[p], fbar[1] * share)
    return b


def ks_interpolant(mesh: PolygonalMesh, u) -> np.ndarray:
    """Full dof vector of a smooth displacement."""
    out = np.zeros(mesh.n_edges + mesh.n_vertices)
    for e in range(mesh.n_edges):
        a, bb = mesh.edges[e]
        m0, _ = p1_edge_moments(mesh.vertices[a], mesh.vertices[bb],
                                lambda x, y: u(x, y)[0],
                                degree=2 * EDGE_SAMPLE_POINTS - 1)
        out[e] = m0
    out[mesh.n_edges:] = u(mesh.vertices[:, 0], mesh.vertices[:, 1])[1]
    return out


@dataclass
class KsSolution:
    assembly: KsAssembly
    full_values: np.ndarray
    free_values: np.ndarray
    iterations: int
    relative_residual: float

    @property
    def n_free(self) -> int:
        return self.assembly.dofmap.n_free


def solve_ks(mesh: PolygonalMesh, mu: float, lam: float, f,
             tol: float = 1e-10, dirichlet=None, solver: str = "cg") -> KsSolution:
    """Solve the mixed-conformity discretization with homogeneous
    Dirichlet data (or lifted boundary values via `dirichlet`)."""
    asm = assemble_ks(mesh, mu, lam)
    dofmap = asm.dofmap
    b_full = assemble_load_ks(mesh, f) if f is not None else np.zeros(dofmap.n_total)
    b_free = b_full[dofmap.free_dofs]

    g_full = np.zeros(dofmap.n_total)
    if dirichlet is not None:
        for d in dofmap.boundary_dofs:
            d = int(d)
            if d < mesh.n_edges:
                a, bb = mesh.edges[d]
                m0, _ = p1_edge_moments(mesh.vertices[a], mesh.vertices[bb],
                                        lambda x, y: dirichlet(x, y)[0],
                                        degree=2 * EDGE_SAMPLE_POINTS - 1)
                g_full[d] = m0
            else:
                v = d - mesh.n_edges
                g_full[d] = dirichlet(*mesh.vertices[v])[1]
        b_free = b_free - (asm.full @ g_full)[dofmap.free_dofs]

    if solver == "dense":
        x = linalg.dense_solve(asm.system.to_dense(), b_free)
        iters, relres = 0, 0.0
    else:
        result = linalg.cg_solve(asm.system, rhs=b_free, tol=tol)
        x, iters, relres = result.x, result.iterations, result.relative_residual

    full_values = g_full
    full_values[dofmap.free_dofs] = x
    return KsSolution(assembly=asm, full_values=full_values, free_values=x,
                      iterations=iters, relative_residual=relres)


def infsup_estimate(mesh: PolygonalMesh) -> float:
    """Discrete inf-sup constant of the divergence coupling between the
    mixed-conformity displacement space and mean-zero piecewise
    constant pressures.

    Uses the dense eigenvalue path, so the mesh must stay small
    (free dofs <= 600).  The pure-constant pressure mode is removed
    exactly; the estimate is the square root of the smallest remaining
    generalized eigenvalue of (B M^-1 B^T, N) with M the shear energy
    matrix at mu = 1/2 (a broken H1 surrogate) and N the mass matrix of
    piecewise constants.
    """
    asm = assemble_ks(mesh, mu=0.5, lam=0.0)
    dofmap = asm.dofmap
    if dofmap.n_free > MAX_INFSUP_DOFS:
        raise ValueError(
            f"inf-sup estimate limited to {MAX_INFSUP_DOFS} free dofs, "
            f"got {dofmap.n_free}"
        )
    M = asm.system.to_dense()

    areas = np.array([mesh.geometry(p).area for p in range(mesh.n_polygons)])
    B = np.zeros((mesh.n_polygons, dofmap.n_free))
    for p in range(mesh.n_polygons):
        stiff = asm.stiffnesses[p]
        ids = dofmap.free_index[_local_full_ids(mesh, p)]
        sel = ids >= 0
        B[p, ids[sel]] += areas[p] * stiff.projector.div0[sel]

    T = B @ scipy.linalg.solve(M, B.T, assume_a="pos")
    Z = scipy.linalg.null_space(areas[None, :])
    S_p = Z.T @ T @ Z
    N_p = (Z.T * areas) @ Z
    eigvals = scipy.linalg.eigh(S_p, N_p, eigvals_only=True)
    return float(np.sqrt(max(eigvals[0], 0.0)))
