"""Polygon and edge geometry: element data, quadrature, moment extraction.

Every element is integrated through a fan of triangles around a star
center, so all rules assume star-shaped polygons.  Scalar fields passed
to the integrators must accept numpy arrays (x, y) and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DegenerateElementError, UnsupportedDegreeError

MAX_POLYGON_DEGREE = 7
# Gauss point count used when sampling non-polynomial traces on edges
# (degree-15 accuracy, plenty for the smooth fields handled here).
EDGE_SAMPLE_POINTS = 8

_STAR_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureRule:
    """Points (m, 2) and weights (m,) on the reference triangle
    with vertices (0,0), (1,0), (0,1); weights sum to 1/2."""

    points: np.ndarray
    weights: np.ndarray
    degree: int


def _gauss01(k):
    """k-point Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = leggauss(k)
    return 0.5 * (x + 1.0), 0.5 * w


def triangle_rule(degree: int) -> QuadratureRule:
    """Quadrature on the reference triangle, exact for polynomials of
    total degree <= `degree` (supported up to 7).

    Degree <= 2 uses the classical three edge-midpoint rule; higher
    degrees use a Duffy-collapsed tensor Gauss-Legendre rule.
    """
    if not 0 <= degree <= MAX_POLYGON_DEGREE:
        raise UnsupportedDegreeError(
            f"triangle rule supports degrees 0..{MAX_POLYGON_DEGREE}, got {degree}"
        )
    if degree <= 2:
        pts = np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
        wts = np.full(3, 1.0 / 6.0)
        return QuadratureRule(pts, wts, 2)
    # Duffy map (u, v) -> (u, v(1 - u)) sends the unit square to the
    # triangle with Jacobian (1 - u); x^a y^b pulls back to degree
    # a+b+1 in u and b in v.
    ku = (degree + 2 + 1) // 2
    kv = (degree + 1 + 1) // 2
    xu, wu = _gauss01(ku)
    xv, wv = _gauss01(kv)
    U, V = np.meshgrid(xu, xv, indexing="ij")
    WU, WV = np.meshgrid(wu, wv, indexing="ij")
    x = U.ravel()
    y = (V * (1.0 - U)).ravel()
    w = (WU * WV * (1.0 - U)).ravel()
    return QuadratureRule(np.column_stack([x, y]), w, degree)


def edge_rule(degree: int):
    """Gauss-Legendre nodes/weights on [-1, 1] exact to `degree`."""
    if degree < 0:
        raise UnsupportedDegreeError(f"edge rule degree must be >= 0, got {degree}")
    k = max(1, (degree + 2) // 2)
    return leggauss(k)


@dataclass(frozen=True)
class ElementGeometry:
    """Geometric data for one polygonal element.

    Vertices are ccw; edge i runs from vertex i to vertex i+1 (mod n).
    `star_center` is the point the fan triangulation is built around:
    the vertex mean when the polygon is strictly star-shaped around it,
    otherwise the area centroid.
    """

    index: int
    vertices: np.ndarray      # (n, 2), ccw
    area: float
    centroid: np.ndarray      # (2,), area centroid
    star_center: np.ndarray   # (2,), scaled-monomial origin
    diameter: float
    edge_lengths: np.ndarray  # (n,)
    normals: np.ndarray       # (n, 2), outward unit normals
    tangents: np.ndarray      # (n, 2), unit tangents along ccw traversal

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    def fan_triangles(self):
        """(n, 3, 2) array of fan triangles (star_center, v_i, v_i+1)."""
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        c = np.broadcast_to(self.star_center, v.shape)
        return np.stack([c, v, nxt], axis=1)


def _signed_area_centroid(vertices):
    v = np.asarray(vertices, dtype=float)
    nxt = np.roll(v, -1, axis=0)
    cross = v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]
    area = 0.5 * cross.sum()
    if area == 0.0:
        raise DegenerateElementError("polygon has zero signed area")
    centroid = ((v + nxt) * cross[:, None]).sum(axis=0) / (6.0 * area)
    return area, centroid


def _fan_areas(vertices, center):
    v = np.asarray(vertices, dtype=float)
    nxt = np.roll(v, -1, axis=0)
    d1 = v - center
    d2 = nxt - center
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def element_geometry(vertices, index: int = -1) -> ElementGeometry:
    """Build ElementGeometry from a ccw vertex loop.

    Raises DegenerateElementError if the polygon is not strictly
    star-shaped around either the vertex mean or the centroid.
    """
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise DegenerateElementError("polygon needs at least 3 planar vertices")
    area, centroid = _signed_area_centroid(v)
    if area < 0:
        raise DegenerateElementError("polygon vertices are clockwise")
    diam = 0.0
    for i in range(len(v) - 1):
        diam = max(diam, float(np.max(np.hypot(*(v[i + 1:] - v[i]).T))))
    star = v.mean(axis=0)
    if np.any(_fan_areas(v, star) <= _STAR_TOL * area):
        star = centroid
        if np.any(_fan_areas(v, star) <= _STAR_TOL * area):
            raise DegenerateElementError(
                f"polygon {index} is not star-shaped around vertex mean or centroid"
            )
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths <= 0.0):
        raise DegenerateElementError(f"polygon {index} has a zero-length edge")
    tangents = edges / lengths[:, None]
    # outward normal of a ccw polygon: tangent rotated by -90 degrees
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    for arr in (v, tangents, normals, lengths):
        arr.setflags(write=False)
    return ElementGeometry(
        index=index,
        vertices=v,
        area=float(area),
        centroid=centroid,
        star_center=star,
        diameter=float(diam),
        edge_lengths=lengths,
        normals=normals,
        tangents=tangents,
    )


def _eval_field(f, x, y):
    out = np.asarray(f(x, y), dtype=float)
    if out.shape != x.shape:
        out = np.broadcast_to(out, x.shape)
    return out


def polygon_integrate(geom: ElementGeometry, f, degree: int) -> float:
    """Integrate f(x, y) over the element, exact for polynomials of
    total degree <= `degree` (max 7)."""
    rule = triangle_rule(degree)
    tri = geom.fan_triangles()
    p0 = tri[:, 0]
    e1 = tri[:, 1] - p0
    e2 = tri[:, 2] - p0
    jac = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]  # 2 * triangle area
    u = rule.points[:, 0]
    v = rule.points[:, 1]
    x = p0[:, None, 0] + np.outer(e1[:, 0], u) + np.outer(e2[:, 0], v)
    y = p0[:, None, 1] + np.outer(e1[:, 1], u) + np.outer(e2[:, 1], v)
    vals = _eval_field(f, x, y)
    return float(np.einsum("t,q,tq->", jac, 2.0 * rule.weights, vals) * 0.5)


def edge_integrate(p0, p1, g, degree: int) -> float:
    """Integrate g(x, y) along the segment p0 -> p1 with a
    Gauss-Legendre rule exact for polynomial traces of degree <= degree."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    xi, w = edge_rule(degree)
    mid = 0.5 * (p0 + p1)
    half = 0.5 * (p1 - p0)
    x = mid[0] + half[0] * xi
    y = mid[1] + half[1] * xi
    length = float(np.hypot(*(p1 - p0)))
    vals = _eval_field(g, x, y)
    return float(0.5 * length * (w * vals).sum())


def p1_edge_moments(p0, p1, g, degree: int = 2 * EDGE_SAMPLE_POINTS - 1):
    """Normalized linear moments of g along p0 -> p1.

    Returns (m0, m1) with m0 = (1/|e|) int g ds and
    m1 = (1/|e|) int g xi ds, where xi is the signed coordinate running
    linearly from -1 at p0 to +1 at p1.
    """
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    xi, w = edge_rule(degree)
    mid = 0.5 * (p0 + p1)
    half = 0.5 * (p1 - p0)
    x = mid[0] + half[0] * xi
    y = mid[1] + half[1] * xi
    vals = _eval_field(g, x, y)
    m0 = 0.5 * (w * vals).sum()
    m1 = 0.5 * (w * xi * vals).sum()
    return float(m0), float(m1)
