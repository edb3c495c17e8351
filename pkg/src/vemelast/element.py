"""Element-local machinery for lowest-order virtual elements.

Displacements on one polygon are handled entirely through their degrees
of freedom: per-edge means (nonconforming component) or vertex values
(conforming component).  Everything computable reduces to

* the energy projection of a virtual displacement onto linear vector
  fields (strain-orthogonality plus rotation and boundary-mean matching),
* the element-mean divergence,
* a dof-difference stabilization.

Linear fields are expressed in the scaled monomial basis
{1, (x - x_K)/h_K, (y - y_K)/h_K} per component, ordered with all three
component-1 fields first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EDGE_SAMPLE_POINTS, ElementGeometry, p1_edge_moments

EDGE_MEAN = "edge_mean"
VERTEX_VALUE = "vertex_value"


@dataclass(frozen=True)
class LocalDofSet:
    """Degree-of-freedom layout on an element with n_edges edges.

    Component c occupies the contiguous index block
    [c * n_edges, (c + 1) * n_edges); slot i within a block refers to
    edge i (edge means) or to vertex i (vertex values).
    """

    n_edges: int
    component_kinds: tuple

    @property
    def n_dof(self) -> int:
        return 2 * self.n_edges

    def block(self, comp: int) -> slice:
        return slice(comp * self.n_edges, (comp + 1) * self.n_edges)


def edge_mean_dofs(n_edges: int) -> LocalDofSet:
    """Both displacement components carry edge-mean dofs."""
    return LocalDofSet(n_edges, (EDGE_MEAN, EDGE_MEAN))


def mixed_dofs(n_edges: int) -> LocalDofSet:
    """Component 1 carries edge means, component 2 vertex values."""
    return LocalDofSet(n_edges, (EDGE_MEAN, VERTEX_VALUE))


# Strain (e11, e22, e12), divergence, and rotation of each scaled basis
# field, up to the common factor 1/h_K.
_EPS = np.array([
    [0.0, 0.0, 0.0],   # (1, 0)
    [1.0, 0.0, 0.0],   # (m2, 0)
    [0.0, 0.0, 0.5],   # (m3, 0)
    [0.0, 0.0, 0.0],   # (0, 1)
    [0.0, 0.0, 0.5],   # (0, m2)
    [0.0, 1.0, 0.0],   # (0, m3)
])
_DIV = np.array([0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
_ROT = np.array([0.0, 0.0, -1.0, 0.0, 1.0, 0.0])


def _contract(e, f):
    return e[0] * f[0] + e[1] * f[1] + 2.0 * e[2] * f[2]


def strain_inner_matrix(geom: ElementGeometry) -> np.ndarray:
    """6x6 matrix of integrated strain contractions
    int_K eps(phi_i) : eps(phi_j) for the scaled basis fields."""
    h2 = geom.diameter ** 2
    G = np.zeros((6, 6))
    for i in range(6):
        for j in range(6):
            G[i, j] = geom.area * _contract(_EPS[i], _EPS[j]) / h2
    return G


def monomial_vertex_values(geom: ElementGeometry) -> np.ndarray:
    """(n_vertices, 3) values of the scaled monomials at the vertices."""
    d = (geom.vertices - geom.star_center) / geom.diameter
    return np.column_stack([np.ones(len(d)), d[:, 0], d[:, 1]])


def edge_mean_map(geom: ElementGeometry, dofs: LocalDofSet) -> np.ndarray:
    """(n_edges, 2, n_dof) linear maps taking a local dof vector to the
    per-edge mean of each displacement component of the virtual field."""
    n = dofs.n_edges
    M = np.zeros((n, 2, dofs.n_dof))
    for c, kind in enumerate(dofs.component_kinds):
        base = c * n
        for e in range(n):
            if kind == EDGE_MEAN:
                M[e, c, base + e] = 1.0
            else:
                # conforming trace is linear along the edge
                M[e, c, base + e] += 0.5
                M[e, c, base + (e + 1) % n] += 0.5
    return M


@dataclass(frozen=True)
class LocalProjector:
    """Computable projections on one element.

    p maps dofs to the six coefficients of the projected linear field;
    d maps linear-field coefficients to dofs (so p @ d = identity);
    div0 maps dofs to the element-mean divergence; trace_m0/trace_m1
    give the normalized linear moments of the projected field on each
    edge, in the element's local ccw edge direction.
    """

    geom: ElementGeometry
    dofs: LocalDofSet
    p: np.ndarray          # (6, n_dof)
    d: np.ndarray          # (n_dof, 6)
    g: np.ndarray          # (6, 6) strain inner products
    div0: np.ndarray       # (n_dof,)
    mean_map: np.ndarray   # (n_edges, 2, n_dof)
    trace_m0: np.ndarray   # (n_edges, 2, n_dof)
    trace_m1: np.ndarray   # (n_edges, 2, n_dof)


def dof_matrix(geom: ElementGeometry, dofs: LocalDofSet) -> np.ndarray:
    """(n_dof, 6) dofs of the six scaled basis fields."""
    n = dofs.n_edges
    mv = monomial_vertex_values(geom)
    edge_means = 0.5 * (mv + np.roll(mv, -1, axis=0))
    D = np.zeros((dofs.n_dof, 6))
    for c, kind in enumerate(dofs.component_kinds):
        vals = edge_means if kind == EDGE_MEAN else mv
        D[dofs.block(c), 3 * c:3 * c + 3] = vals
    return D


def build_projector(geom: ElementGeometry, dofs: LocalDofSet) -> LocalProjector:
    """Solve the 6x6 projection system on one element.

    Rows: three strain-orthogonality conditions (tested against the
    unit strains), one rotation-mean match, two boundary-mean matches.
    All right-hand sides are dof-computable boundary integrals.
    """
    if dofs.n_edges != geom.n_edges:
        raise ValueError("dof set does not match element edge count")
    n = dofs.n_edges
    h = geom.diameter
    area = geom.area
    L = geom.edge_lengths
    nrm = geom.normals
    tng = geom.tangents
    M = edge_mean_map(geom, dofs)
    mv = monomial_vertex_values(geom)
    edge_means = 0.5 * (mv + np.roll(mv, -1, axis=0))

    G = strain_inner_matrix(geom)
    B = np.zeros((6, 6))
    R = np.zeros((6, dofs.n_dof))
    # strain rows, tested against basis fields (m2,0), (m3,0), (0,m3)
    for row, q in enumerate((1, 2, 5)):
        for j in range(6):
            B[row, j] = area * _contract(_EPS[j], _EPS[q]) / h ** 2
        sn = np.array([
            [_EPS[q][0], _EPS[q][2]],
            [_EPS[q][2], _EPS[q][1]],
        ]) @ nrm.T / h   # (2, n_edges): eps(q) n_e on each edge
        R[row] = np.einsum("e,ce,ecj->j", L, sn, M)
    # rotation row: int_K rot = boundary circulation
    B[3] = area * _ROT / h
    R[3] = np.einsum("e,ec,ecj->j", L, tng, M)
    # boundary-mean rows per component
    for c in range(2):
        B[4 + c, 3 * c:3 * c + 3] = L @ edge_means
        R[4 + c] = np.einsum("e,ej->j", L, M[:, c, :])

    P = np.linalg.solve(B, R)
    D = dof_matrix(geom, dofs)
    div0 = np.einsum("e,ec,ecj->j", L, nrm, M) / area

    # linear moments of the projected field on each edge (local
    # direction vertex i -> i+1): values at the endpoints determine them
    # values of projected field at vertices: (n_vertices, 2, n_dof)
    val = np.einsum("vm,cmj->vcj", mv, P.reshape(2, 3, -1))
    nxt = np.roll(val, -1, axis=0)
    trace_m0 = 0.5 * (val + nxt)
    trace_m1 = (nxt - val) / 6.0

    return LocalProjector(
        geom=geom, dofs=dofs, p=P, d=D, g=G, div0=div0,
        mean_map=M, trace_m0=trace_m0, trace_m1=trace_m1,
    )


def build_stabilization(dofs: LocalDofSet, proj: LocalProjector) -> np.ndarray:
    """Dof-difference stabilization (I - D P)^T (I - D P); vanishes on
    linear displacement fields by construction."""
    E = np.eye(dofs.n_dof) - proj.d @ proj.p
    return E.T @ E


@dataclass(frozen=True)
class LocalStiffness:
    """Element stiffness split into shear and volumetric parts."""

    k_mu: np.ndarray
    k_lam: np.ndarray
    projector: LocalProjector

    @property
    def k(self) -> np.ndarray:
        return self.k_mu + self.k_lam


def build_local_stiffness(geom: ElementGeometry, dofs: LocalDofSet,
                          mu: float, lam: float) -> LocalStiffness:
    """Element stiffness 2 mu (P^T G P + stabilization on the
    complement) + lam |K| div0 div0^T."""
    proj = build_projector(geom, dofs)
    S = build_stabilization(dofs, proj)
    k_mu = 2.0 * mu * (proj.p.T @ proj.g @ proj.p) + S
    k_lam = lam * geom.area * np.outer(proj.div0, proj.div0)
    return LocalStiffness(k_mu=k_mu, k_lam=k_lam, projector=proj)


def linear_field_strain(coeffs, h: float):
    """Strain (e11, e22, e12), divergence and rotation of the linear
    field with the given scaled-basis coefficients."""
    c = np.asarray(coeffs, dtype=float)
    e11 = c[1] / h
    e22 = c[5] / h
    e12 = 0.5 * (c[2] + c[4]) / h
    div = (c[1] + c[5]) / h
    rot = (c[4] - c[2]) / h
    return (e11, e22, e12), div, rot


def local_consistency_check(geom: ElementGeometry, dofs: LocalDofSet,
                            q_coeffs, v_dofs, mu: float, lam: float) -> float:
    """|a_h(I q, v) - a(q, v)| for a linear field q and a virtual
    displacement v given by dofs.

    The exact side only needs the constant strain of q and boundary
    means of v (integration by parts), so it is computed independently
    of the projection system.
    """
    v = np.asarray(v_dofs, dtype=float)
    stiff = build_local_stiffness(geom, dofs, mu, lam)
    q_dofs = stiff.projector.d @ np.asarray(q_coeffs, dtype=float)
    a_h = q_dofs @ stiff.k @ v

    (e11, e22, e12), divq, _ = linear_field_strain(q_coeffs, geom.diameter)
    M = stiff.projector.mean_map
    L = geom.edge_lengths
    nrm = geom.normals
    # int_K eps(v) via the divergence theorem, one entry at a time
    i11 = np.einsum("e,e,ej->j", L, nrm[:, 0], M[:, 0, :]) @ v
    i22 = np.einsum("e,e,ej->j", L, nrm[:, 1], M[:, 1, :]) @ v
    i12 = 0.5 * (np.einsum("e,e,ej->j", L, nrm[:, 1], M[:, 0, :])
                 + np.einsum("e,e,ej->j", L, nrm[:, 0], M[:, 1, :])) @ v
    divv = i11 + i22
    a_exact = 2.0 * mu * (e11 * i11 + e22 * i22 + 2.0 * e12 * i12) + lam * divq * divv
    return float(abs(a_h - a_exact))


def interpolate_dofs(geom: ElementGeometry, dofs: LocalDofSet, u) -> np.ndarray:
    """Local dofs of a smooth displacement u(x, y) -> (u1, u2)."""
    n = dofs.n_edges
    out = np.zeros(dofs.n_dof)
    verts = geom.vertices
    nxt = np.roll(verts, -1, axis=0)
    for c, kind in enumerate(dofs.component_kinds):
        comp = (lambda x, y, c=c: u(x, y)[c])
        if kind == EDGE_MEAN:
            for e in range(n):
                m0, _ = p1_edge_moments(verts[e], nxt[e], comp,
                                        degree=2 * EDGE_SAMPLE_POINTS - 1)
                out[c * n + e] = m0
        else:
            out[dofs.block(c)] = comp(verts[:, 0], verts[:, 1])
    return out


def rigid_dof_vectors(geom: ElementGeometry, dofs: LocalDofSet) -> np.ndarray:
    """(n_dof, 3) dofs of the rigid displacements: the two translations
    and the rotation (-(y - y_K), x - x_K)."""
    n = dofs.n_edges
    verts = geom.vertices
    mids = 0.5 * (verts + np.roll(verts, -1, axis=0))
    out = np.zeros((dofs.n_dof, 3))
    for c, kind in enumerate(dofs.component_kinds):
        pts = mids if kind == EDGE_MEAN else verts
        rel = pts - geom.star_center
        out[dofs.block(c), c] = 1.0
        out[dofs.block(c), 2] = -rel[:, 1] if c == 0 else rel[:, 0]
    return out
