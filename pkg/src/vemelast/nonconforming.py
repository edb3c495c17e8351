"""Stabilized nonconforming virtual element method.

Both displacement components carry one edge-mean dof per mesh edge.
The assembled bilinear form is the sum of element contributions plus a
weighted jump penalty over interior edges that restores a discrete
Korn inequality.  Homogeneous Dirichlet boundary dofs are eliminated.

Full dof numbering: dof (edge e, component c) sits at index 2 e + c.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import linalg
from .element import build_local_stiffness, edge_mean_dofs
from .geometry import EDGE_SAMPLE_POINTS, p1_edge_moments, polygon_integrate
from .mesh import PolygonalMesh

DEFAULT_GAMMA = 1.0


@dataclass(frozen=True)
class NcDofMap:
    """Mapping between full dofs (2 per edge) and free dofs (interior
    edges only, boundary means eliminated)."""

    n_edges: int
    free_index: np.ndarray  # (2 * n_edges,), free id or -1
    free_dofs: np.ndarray   # (n_free,), full ids of the free dofs

    @property
    def n_total(self) -> int:
        return 2 * self.n_edges

    @property
    def n_free(self) -> int:
        return len(self.free_dofs)

    @property
    def boundary_dofs(self) -> np.ndarray:
        return np.nonzero(self.free_index < 0)[0]


def nc_dof_map(mesh: PolygonalMesh) -> NcDofMap:
    free_index = np.full(2 * mesh.n_edges, -1, dtype=int)
    interior = mesh.interior_edge_ids
    slots = np.column_stack([2 * interior, 2 * interior + 1]).ravel()
    free_index[slots] = np.arange(len(slots))
    return NcDofMap(mesh.n_edges, free_index, slots)


def _local_full_ids(mesh: PolygonalMesh, p: int) -> np.ndarray:
    gids = mesh.polygon_edges[p]
    return np.concatenate([2 * gids, 2 * gids + 1])


def jump_moment_rows(mesh: PolygonalMesh, e: int, projectors):
    """Linear maps from the two neighbors' dofs to the linear moments
    of the displacement jump across interior edge e.

    Returns (cols, m0, m1): full dof columns (left block then right
    block) and (2, len(cols)) moment rows per component.  The zeroth
    moment rows cancel columnwise because the edge dof is shared; the
    first moments come from the projected traces of both neighbors,
    whose orientation factors against the fixed edge normal reduce to a
    plain sum of the two local first moments.
    """
    left = int(mesh.edge_left[e])
    right = int(mesh.edge_right[e])
    if left < 0 or right < 0:
        raise ValueError(f"edge {e} is a boundary edge")
    pl = projectors[left]
    pr = projectors[right]
    slot_l = int(np.nonzero(mesh.polygon_edges[left] == e)[0][0])
    slot_r = int(np.nonzero(mesh.polygon_edges[right] == e)[0][0])
    cols = np.concatenate([_local_full_ids(mesh, left),
                           _local_full_ids(mesh, right)])
    nl = pl.dofs.n_dof
    m0 = np.zeros((2, len(cols)))
    m1 = np.zeros((2, len(cols)))
    for c in range(2):
        m0[c, :nl] = pl.mean_map[slot_l, c]
        m0[c, nl:] = -pr.mean_map[slot_r, c]
        m1[c, :nl] = pl.trace_m1[slot_l, c]
        m1[c, nl:] = pr.trace_m1[slot_r, c]
    return cols, m0, m1


@dataclass
class NcAssembly:
    """Assembled nonconforming system (matrix part only)."""

    mesh: PolygonalMesh
    mu: float
    lam: float
    gamma: float
    dofmap: NcDofMap
    system: linalg.SparseSystem     # free dofs, jump included
    full: sp.csr_matrix             # all dofs, jump included
    stiffnesses: list


def assemble_nc(mesh: PolygonalMesh, mu: float, lam: float,
                gamma: float = DEFAULT_GAMMA) -> NcAssembly:
    """Assemble stiffness + jump penalty for the nonconforming method."""
    if mu <= 0.0 or lam < 0.0:
        raise ValueError("material parameters require mu > 0 and lam >= 0")
    if gamma < 0.0:
        raise ValueError("jump penalty weight gamma must be nonnegative")
    dofmap = nc_dof_map(mesh)
    rows, cols, vals = [], [], []
    stiffnesses = []
    for p in range(mesh.n_polygons):
        geom = mesh.geometry(p)
        stiff = build_local_stiffness(geom, edge_mean_dofs(geom.n_edges), mu, lam)
        stiffnesses.append(stiff)
        ids = _local_full_ids(mesh, p)
        R, C = np.meshgrid(ids, ids, indexing="ij")
        rows.append(R.ravel())
        cols.append(C.ravel())
        vals.append(stiff.k.ravel())

    projectors = [s.projector for s in stiffnesses]
    w = gamma / mesh.h
    for e in mesh.interior_edge_ids:
        ecols, m0, m1 = jump_moment_rows(mesh, int(e), projectors)
        length = mesh.edge_length(int(e))
        K_e = np.zeros((len(ecols), len(ecols)))
        for c in range(2):
            K_e += np.outer(m0[c], m0[c]) + 3.0 * np.outer(m1[c], m1[c])
        K_e *= w * length
        R, C = np.meshgrid(ecols, ecols, indexing="ij")
        rows.append(R.ravel())
        cols.append(C.ravel())
        vals.append(K_e.ravel())

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    full = sp.csr_matrix((vals, (rows, cols)),
                         shape=(dofmap.n_total, dofmap.n_total))
    fr = dofmap.free_index[rows]
    fc = dofmap.free_index[cols]
    keep = (fr >= 0) & (fc >= 0)
    system = linalg.assemble_symmetric(dofmap.n_free, fr[keep], fc[keep], vals[keep])
    return NcAssembly(mesh=mesh, mu=mu, lam=lam, gamma=gamma, dofmap=dofmap,
                      system=system, full=full, stiffnesses=stiffnesses)


def assemble_load_nc(mesh: PolygonalMesh, f) -> np.ndarray:
    """Full-length load vector: the element mean of f, paid out equally
    to the edge-mean dofs of each component."""
    b = np.zeros(2 * mesh.n_edges)
    for p in range(mesh.n_polygons):
        geom = mesh.geometry(p)
        fbar = np.array([
            polygon_integrate(geom, lambda x, y, c=c: f(x, y)[c], degree=7)
            for c in range(2)
        ]) / geom.area
        share = geom.area / geom.n_edges
        for c in range(2):
            np.add.at(b, 2 * mesh.polygon_edges[p] + c, fbar[c] * share)
    return b


def nc_interpolant(mesh: PolygonalMesh, u) -> np.ndarray:
    """Full dof vector of a smooth displacement (per-edge means via
    Gauss sampling)."""
    out = np.zeros(2 * mesh.n_edges)
    for e in range(mesh.n_edges):
        a, bb = mesh.edges[e]
        for c in range(2):
            m0, _ = p1_edge_moments(mesh.vertices[a], mesh.vertices[bb],
                                    lambda x, y, c=c: u(x, y)[c],
                                    degree=2 * EDGE_SAMPLE_POINTS - 1)
            out[2 * e + c] = m0
    return out


@dataclass
class NcSolution:
    assembly: NcAssembly
    full_values: np.ndarray   # all dofs, boundary values included
    free_values: np.ndarray
    iterations: int
    relative_residual: float

    @property
    def n_free(self) -> int:
        return self.assembly.dofmap.n_free


def solve_nc(mesh: PolygonalMesh, mu: float, lam: float, f,
             gamma: float = DEFAULT_GAMMA, tol: float = 1e-10,
             dirichlet=None, solver: str = "cg") -> NcSolution:
    """Solve the nonconforming discretization with homogeneous
    Dirichlet data (or lifted boundary values via `dirichlet`).

    solver="cg" uses Jacobi-preconditioned conjugate gradients;
    solver="dense" uses the direct small-system path.
    """
    asm = assemble_nc(mesh, mu, lam, gamma)
    dofmap = asm.dofmap
    b_full = assemble_load_nc(mesh, f) if f is not None else np.zeros(dofmap.n_total)
    b_free = b_full[dofmap.free_dofs]

    g_full = np.zeros(dofmap.n_total)
    if dirichlet is not None:
        bdofs = dofmap.boundary_dofs
        for d in bdofs:
            e, c = divmod(int(d), 2)
            a, bb = mesh.edges[e]
            m0, _ = p1_edge_moments(mesh.vertices[a], mesh.vertices[bb],
                                    lambda x, y, c=c: dirichlet(x, y)[c],
                                    degree=2 * EDGE_SAMPLE_POINTS - 1)
            g_full[d] = m0
        b_free = b_free - (asm.full @ g_full)[dofmap.free_dofs]

    if solver == "dense":
        x = linalg.dense_solve(asm.system.to_dense(), b_free)
        iters, relres = 0, 0.0
    else:
        result = linalg.cg_solve(asm.system, rhs=b_free, tol=tol)
        x, iters, relres = result.x, result.iterations, result.relative_residual

    full_values = g_full
    full_values[dofmap.free_dofs] = x
    return NcSolution(assembly=asm, full_values=full_values, free_values=x,
                      iterations=iters, relative_residual=relres)
