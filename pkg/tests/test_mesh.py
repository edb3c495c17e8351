"""Mesh construction, generators, validation, and the mesh file format."""
import math

import numpy as np
import pytest

from vemelast import (
    MeshError,
    build_mesh,
    generate_hex_mesh,
    generate_square_mesh,
    generate_voronoi_mesh,
    load_mesh,
    save_mesh,
    validate_mesh,
)
from vemelast.mesh import HEX_S, HEX_T


def test_build_mesh_single_square():
    mesh = build_mesh([(0, 0), (1, 0), (1, 1), (0, 1)], [[0, 1, 2, 3]])
    assert mesh.n_polygons == 1
    assert mesh.n_vertices == 4
    assert mesh.n_edges == 4
    assert mesh.interior_edge_ids.size == 0
    assert mesh.boundary_edge_mask.all()
    assert mesh.h == pytest.approx(math.sqrt(2.0))


def test_build_mesh_shared_edge_bookkeeping():
    # two triangles sharing the diagonal
    mesh = build_mesh([(0, 0), (1, 0), (1, 1), (0, 1)],
                      [[0, 1, 2], [0, 2, 3]])
    assert mesh.n_edges == 5
    assert mesh.interior_edge_ids.size == 1
    e = int(mesh.interior_edge_ids[0])
    va, vb = mesh.edges[e]
    assert va < vb
    assert {va, vb} == {0, 2}
    left, right = mesh.edge_left[e], mesh.edge_right[e]
    assert {left, right} == {0, 1}
    # every edge is stored with ascending vertex ids
    assert np.all(mesh.edges[:, 0] < mesh.edges[:, 1])


def test_build_mesh_rejects_duplicate_vertices():
    with pytest.raises(MeshError):
        build_mesh([(0, 0), (1, 0), (1e-13, 0), (0, 1)], [[0, 1, 3]])


def test_build_mesh_rejects_nonmanifold_edge():
    verts = [(0, 0), (1, 0), (0.5, 1), (0.5, -1), (1.5, 1)]
    polys = [[0, 1, 2], [0, 3, 1], [0, 1, 4]]  # edge (0,1) used three times
    with pytest.raises(MeshError):
        build_mesh(verts, polys)


def test_build_mesh_rejects_same_direction_reuse():
    # both ccw triangles traverse 0 -> 1 (overlapping cells)
    verts = [(0, 0), (1, 0), (0.5, 1), (0.5, 2)]
    polys = [[0, 1, 2], [0, 1, 3]]
    with pytest.raises(MeshError):
        build_mesh(verts, polys)


def test_build_mesh_reorients_clockwise_polygons():
    with pytest.warns(UserWarning):
        mesh = build_mesh([(0, 0), (1, 0), (1, 1), (0, 1)],
                          [[0, 3, 2, 1]])
    assert mesh.geometry(0).area == pytest.approx(1.0)


def test_square_mesh_counts():
    mesh = generate_square_mesh(4)
    assert mesh.n_polygons == 16
    assert mesh.n_vertices == 25
    assert mesh.n_edges == 40
    assert mesh.interior_edge_ids.size == 24
    assert mesh.h == pytest.approx(math.sqrt(2.0) / 4.0)
    report = validate_mesh(mesh)
    assert report.area_total == pytest.approx(1.0, abs=1e-12)
    assert report.min_edge_ratio == pytest.approx(1.0 / math.sqrt(2.0))
    # square cell: star center to edge distance 1/8, diameter sqrt(2)/4
    assert report.min_rho == pytest.approx(0.5 / math.sqrt(2.0), rel=1e-12)


def test_square_mesh_interior_edge_count_scales():
    mesh = generate_square_mesh(64)
    assert mesh.interior_edge_ids.size == 2 * 64 * 63
    assert mesh.n_polygons == 64 * 64


def test_square_mesh_rejects_bad_n():
    with pytest.raises(MeshError):
        generate_square_mesh(0)


def test_hex_mesh_postconditions():
    mesh = generate_hex_mesh(2)
    assert mesh.n_polygons == 8
    report = validate_mesh(mesh)
    assert report.area_total == pytest.approx(1.0, abs=1e-12)
    assert report.max_edges_per_polygon == 6
    for p in range(mesh.n_polygons):
        geom = mesh.geometry(p)
        assert geom.n_edges == 6
        # every cell has the same area by construction
        assert geom.area == pytest.approx(1.0 / 8.0, abs=1e-15)
        # exactly one reflex vertex per cell
        v = geom.vertices
        prv = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        d1 = v - prv
        d2 = nxt - v
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        assert int((cross < 0).sum()) == 1


def test_hex_mesh_cut_offsets_are_dyadic():
    assert HEX_S == 3.0 / 16.0
    assert HEX_T == 1.0 / 16.0
    mesh = generate_hex_mesh(4)
    assert mesh.n_polygons == 32
    assert validate_mesh(mesh).area_total == pytest.approx(1.0, abs=1e-12)
    for p in range(mesh.n_polygons):
        assert mesh.geometry(p).area == pytest.approx(1.0 / 32.0, abs=1e-15)


def test_voronoi_mesh_is_deterministic_and_unit_area(tmp_path):
    mesh1 = generate_voronoi_mesh(16, lloyd_iters=100, rng_seed=2024)
    mesh2 = generate_voronoi_mesh(16, lloyd_iters=100, rng_seed=2024)
    report = validate_mesh(mesh1)
    assert report.n_polygons == 16
    assert report.area_total == pytest.approx(1.0, abs=1e-9)
    assert report.min_rho > 0.05
    # byte-identical serialization across runs of the same seed
    f1, f2 = tmp_path / "a.mesh", tmp_path / "b.mesh"
    save_mesh(mesh1, f1)
    save_mesh(mesh2, f2)
    assert f1.read_bytes() == f2.read_bytes()


def test_voronoi_mesh_seed_changes_mesh():
    m1 = generate_voronoi_mesh(16, lloyd_iters=10, rng_seed=1)
    m2 = generate_voronoi_mesh(16, lloyd_iters=10, rng_seed=2)
    assert m1.n_vertices != m2.n_vertices or not np.allclose(
        m1.vertices, m2.vertices)


def test_voronoi_mesh_explicit_quadrant_seeds():
    seeds = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
    mesh = generate_voronoi_mesh(4, seeds=seeds)
    assert mesh.n_polygons == 4
    assert mesh.n_vertices == 9
    assert mesh.n_edges == 12
    for p in range(4):
        assert mesh.geometry(p).area == pytest.approx(0.25, abs=1e-12)


def test_voronoi_lloyd_improves_worst_cell():
    rough = validate_mesh(generate_voronoi_mesh(64, lloyd_iters=0,
                                                rng_seed=2024))
    relaxed = validate_mesh(generate_voronoi_mesh(64, lloyd_iters=100,
                                                  rng_seed=2024))
    assert relaxed.min_rho > rough.min_rho


def test_mesh_file_round_trip_exact(tmp_path):
    for mesh in (generate_square_mesh(3),
                 generate_hex_mesh(2),
                 generate_voronoi_mesh(9, lloyd_iters=20, rng_seed=5)):
        path = tmp_path / "mesh.txt"
        save_mesh(mesh, path)
        back = load_mesh(path)
        assert back.n_polygons == mesh.n_polygons
        # float repr round-trips exactly
        assert np.array_equal(back.vertices, mesh.vertices)
        for p in range(mesh.n_polygons):
            assert np.array_equal(mesh.polygons[p], back.polygons[p])
        assert back.h == mesh.h


def test_mesh_file_header_and_errors(tmp_path):
    path = tmp_path / "mesh.txt"
    save_mesh(generate_square_mesh(2), path)
    first = path.read_text().splitlines()[0]
    assert first.startswith("VEMESH 1")
    bad = tmp_path / "bad.txt"
    bad.write_text("NOTAMESH 1\n")
    with pytest.raises(MeshError):
        load_mesh(bad)
    truncated = tmp_path / "trunc.txt"
    truncated.write_text("VEMESH 1\n4 1\n0.0 0.0\n")
    with pytest.raises(MeshError):
        load_mesh(truncated)


def test_validate_mesh_flags_area_defect():
    # a single unit triangle does not tile the unit square
    mesh = build_mesh([(0, 0), (1, 0), (0, 1)], [[0, 1, 2]])
    with pytest.raises(MeshError):
        validate_mesh(mesh, check_unit_area=True)
    report = validate_mesh(mesh, check_unit_area=False)
    assert report.area_total == pytest.approx(0.5)


def test_geometry_cache_returns_same_object():
    mesh = generate_square_mesh(2)
    assert mesh.geometry(1) is mesh.geometry(1)


def test_edge_helpers():
    mesh = generate_square_mesh(2)
    for e in range(mesh.n_edges):
        va, vb = mesh.edges[e]
        vec = mesh.edge_vector(e)
        assert np.allclose(vec, mesh.vertices[vb] - mesh.vertices[va])
        assert mesh.edge_length(e) == pytest.approx(np.hypot(*vec))
