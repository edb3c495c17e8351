"""Quadrature exactness, element geometry, and edge moment extraction."""
import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from vemelast import (
    DegenerateElementError,
    UnsupportedDegreeError,
    edge_integrate,
    element_geometry,
    p1_edge_moments,
    polygon_integrate,
    triangle_rule,
)
from vemelast.geometry import EDGE_SAMPLE_POINTS, MAX_POLYGON_DEGREE, edge_rule


def reference_triangle_exact(a: int, b: int) -> float:
    # int_T x^a y^b over the triangle (0,0), (1,0), (0,1)
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def test_triangle_rule_weights_sum_to_reference_area():
    for degree in range(MAX_POLYGON_DEGREE + 1):
        rule = triangle_rule(degree)
        assert rule.weights.sum() == pytest.approx(0.5, abs=1e-14)
        assert np.all(rule.weights > 0)
        inside = (rule.points >= 0).all() and (rule.points.sum(axis=1) <= 1).all()
        assert inside


def test_triangle_rule_exactness_all_supported_degrees():
    for degree in range(MAX_POLYGON_DEGREE + 1):
        rule = triangle_rule(degree)
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                approx = (rule.weights
                          * rule.points[:, 0] ** a
                          * rule.points[:, 1] ** b).sum()
                assert approx == pytest.approx(
                    reference_triangle_exact(a, b), rel=1e-13
                ), f"degree {degree}, monomial x^{a} y^{b}"


def test_triangle_rule_low_degrees_share_midpoint_rule():
    rule = triangle_rule(0)
    assert len(rule.weights) == 3
    assert rule.degree == 2
    mids = np.array([[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]])
    assert np.allclose(np.sort(rule.points, axis=0), np.sort(mids, axis=0))


def test_triangle_rule_rejects_unsupported_degrees():
    with pytest.raises(UnsupportedDegreeError):
        triangle_rule(MAX_POLYGON_DEGREE + 1)
    with pytest.raises(UnsupportedDegreeError):
        triangle_rule(-1)


def test_edge_rule_exactness_and_validation():
    for degree in range(0, 12):
        xi, w = edge_rule(degree)
        for p in range(degree + 1):
            exact = 0.0 if p % 2 else 2.0 / (p + 1)
            assert (w * xi**p).sum() == pytest.approx(exact, abs=1e-14)
    with pytest.raises(UnsupportedDegreeError):
        edge_rule(-1)


def test_unit_square_geometry():
    geom = element_geometry([(0, 0), (1, 0), (1, 1), (0, 1)], index=7)
    assert geom.index == 7
    assert geom.area == pytest.approx(1.0)
    assert geom.centroid == pytest.approx([0.5, 0.5])
    assert geom.star_center == pytest.approx([0.5, 0.5])
    assert geom.diameter == pytest.approx(math.sqrt(2.0))
    assert geom.edge_lengths == pytest.approx([1, 1, 1, 1])
    assert np.allclose(geom.normals, [[0, -1], [1, 0], [0, 1], [-1, 0]])
    assert np.allclose(geom.tangents, [[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert geom.n_edges == 4
    # outward normals are the ccw tangents rotated by -90 degrees
    rot = np.column_stack([geom.tangents[:, 1], -geom.tangents[:, 0]])
    assert np.allclose(rot, geom.normals)


def test_fan_triangles_cover_the_polygon():
    geom = element_geometry([(0, 0), (2, 0), (2, 1), (1, 2), (0, 1)])
    tri = geom.fan_triangles()
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    assert np.all(areas > 0)
    assert areas.sum() == pytest.approx(geom.area, rel=1e-14)


def test_reflex_polygon_uses_valid_star_center():
    # one reflex vertex; still star-shaped around the vertex mean
    verts = [(0, 0), (4, 0), (4, 2), (2, 0.8), (0, 2)]
    geom = element_geometry(verts)
    tri = geom.fan_triangles()
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    assert np.all(areas > 0)


def test_degenerate_polygons_are_rejected():
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0), (1, 0)])
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0), (1, 1), (2, 2)])  # collinear
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0), (0, 1), (1, 1), (1, 0)])  # clockwise
    with pytest.raises(DegenerateElementError):
        element_geometry([(0, 0), (1, 0), (1, 0), (0, 1)])  # repeated vertex
    # U-shape: not star-shaped around any interior point
    ushape = [(0, 0), (3, 0), (3, 3), (2.5, 3), (2.5, 0.5),
              (0.5, 0.5), (0.5, 3), (0, 3)]
    with pytest.raises(DegenerateElementError):
        element_geometry(ushape)


def test_polygon_integrate_unit_square_monomials():
    geom = element_geometry([(0, 0), (1, 0), (1, 1), (0, 1)])
    for a in range(MAX_POLYGON_DEGREE + 1):
        for b in range(MAX_POLYGON_DEGREE + 1 - a):
            val = polygon_integrate(geom, lambda x, y: x**a * y**b, a + b)
            assert val == pytest.approx(1.0 / ((a + 1) * (b + 1)), rel=1e-13)


def test_polygon_integrate_matches_boundary_oracle_on_random_polygons():
    # oracle: int_K x^a y^b dx = oint x^(a+1) y^b / (a+1) * n_x ds,
    # evaluated with an independent high-order edge rule
    rng = np.random.default_rng(7)
    for trial in range(5):
        n = rng.integers(4, 9)
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = rng.uniform(0.5, 1.2, n)
        verts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        verts += rng.uniform(-0.2, 0.2, 2)
        geom = element_geometry(verts)
        for a, b in ((0, 0), (3, 2), (1, 6), (4, 3), (7, 0)):
            inner = polygon_integrate(geom, lambda x, y: x**a * y**b, a + b)
            oracle = 0.0
            for i in range(geom.n_edges):
                p0 = geom.vertices[i]
                p1 = geom.vertices[(i + 1) % geom.n_edges]
                nx = geom.normals[i, 0]
                oracle += nx * edge_integrate(
                    p0, p1, lambda x, y: x ** (a + 1) * y**b / (a + 1),
                    a + b + 1)
            assert inner == pytest.approx(oracle, rel=1e-12, abs=1e-13)


def test_edge_integrate_polynomial_and_length():
    val = edge_integrate((0, 0), (1, 0), lambda x, y: x**2, 2)
    assert val == pytest.approx(1.0 / 3.0, rel=1e-14)
    length = edge_integrate((1, 2), (4, 6), lambda x, y: 1.0, 0)
    assert length == pytest.approx(5.0, rel=1e-14)
    # diagonal segment, mixed polynomial
    val = edge_integrate((0, 0), (1, 1), lambda x, y: x * y, 2)
    assert val == pytest.approx(math.sqrt(2.0) / 3.0, rel=1e-14)


def test_p1_edge_moments_linear_field():
    m0, m1 = p1_edge_moments((0, 0), (1, 0), lambda x, y: x)
    assert m0 == pytest.approx(0.5, abs=1e-15)
    assert m1 == pytest.approx(1.0 / 6.0, abs=1e-15)
    # direction flip negates the first moment only
    m0r, m1r = p1_edge_moments((1, 0), (0, 0), lambda x, y: x)
    assert m0r == pytest.approx(0.5, abs=1e-15)
    assert m1r == pytest.approx(-1.0 / 6.0, abs=1e-15)


def test_p1_edge_moments_smooth_field_against_dense_gauss():
    p0 = np.array([0.2, -0.3])
    p1 = np.array([1.1, 0.7])

    def g(x, y):
        return np.exp(x + y) * np.sin(3 * x - y)

    xi, w = leggauss(40)
    mid, half = 0.5 * (p0 + p1), 0.5 * (p1 - p0)
    vals = g(mid[0] + half[0] * xi, mid[1] + half[1] * xi)
    oracle0 = 0.5 * (w * vals).sum()
    oracle1 = 0.5 * (w * xi * vals).sum()

    m0, m1 = p1_edge_moments(p0, p1, g)
    # default sampling is an 8-point rule; smooth fields are captured
    # to near machine precision
    assert EDGE_SAMPLE_POINTS == 8
    assert m0 == pytest.approx(oracle0, rel=1e-12)
    assert m1 == pytest.approx(oracle1, rel=1e-12)


def test_polygon_integrate_smooth_field_converges():
    geom = element_geometry([(0, 0), (1, 0), (1, 1), (0, 1)])

    def f(x, y):
        return np.cos(x) * np.exp(y)

    exact = math.sin(1.0) * (math.e - 1.0)
    approx = polygon_integrate(geom, f, 7)
    assert approx == pytest.approx(exact, rel=1e-8)
