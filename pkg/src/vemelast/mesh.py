"""Polygonal meshes of the unit square: construction, generators,
quality validation, and a plain-text file format.

Conventions fixed here and relied on everywhere else:

* polygons are simple ccw vertex cycles;
* each undirected edge is stored once as (v_a, v_b) with v_a < v_b;
* the fixed global edge normal n_e is the direction a->b rotated by
  -90 degrees, so the polygon traversing a->b in its ccw cycle (the
  "left" polygon) has n_e as its outward normal;
* exactly one of (left, right) is -1 on boundary edges.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .errors import MeshError
from .geometry import ElementGeometry, element_geometry

_DUPLICATE_TOL = 1e-12
_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class PolygonalMesh:
    """Immutable polygonal mesh of [0, 1]^2 with edge connectivity."""

    vertices: np.ndarray            # (nv, 2)
    polygons: tuple                 # tuple of int arrays, ccw cycles
    edges: np.ndarray               # (ne, 2), edges[i, 0] < edges[i, 1]
    edge_left: np.ndarray           # polygon ccw-traversing a->b, else -1
    edge_right: np.ndarray          # polygon ccw-traversing b->a, else -1
    polygon_edges: tuple            # per polygon: global edge ids, ccw order
    polygon_edge_signs: tuple       # +1 where local ccw direction is a->b
    h: float                        # max element diameter
    _geom: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_polygons(self) -> int:
        return len(self.polygons)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def boundary_edge_mask(self) -> np.ndarray:
        return (self.edge_left < 0) | (self.edge_right < 0)

    @property
    def interior_edge_ids(self) -> np.ndarray:
        return np.nonzero(~self.boundary_edge_mask)[0]

    @property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edge_mask].ravel()] = True
        return mask

    def geometry(self, k: int) -> ElementGeometry:
        """Element geometry for polygon k (cached)."""
        geom = self._geom.get(k)
        if geom is None:
            geom = element_geometry(self.vertices[self.polygons[k]], index=k)
            self._geom[k] = geom
        return geom

    def edge_vector(self, e: int) -> np.ndarray:
        a, b = self.edges[e]
        return self.vertices[b] - self.vertices[a]

    def edge_length(self, e: int) -> float:
        return float(np.hypot(*self.edge_vector(e)))


def build_mesh(vertices, polygons) -> PolygonalMesh:
    """Assemble a PolygonalMesh from raw vertex coordinates and polygon
    vertex cycles, deriving the edge table.

    Clockwise cycles are reversed with a warning.  Raises MeshError for
    duplicate vertices, degenerate cycles, or non-manifold edges.
    """
    verts = np.array(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise MeshError("vertices must be an (n, 2) array")
    if len(verts) >= 2:
        pairs = cKDTree(verts).query_pairs(_DUPLICATE_TOL)
        if pairs:
            i, j = sorted(next(iter(pairs)))
            raise MeshError(f"duplicate vertices {i} and {j}")

    cycles = []
    for p, poly in enumerate(polygons):
        idx = np.asarray(poly, dtype=int)
        if idx.ndim != 1 or len(idx) < 3:
            raise MeshError(f"polygon {p} needs at least 3 vertices")
        if np.any(idx < 0) or np.any(idx >= len(verts)):
            raise MeshError(f"polygon {p} references a missing vertex")
        if len(np.unique(idx)) != len(idx):
            raise MeshError(f"polygon {p} repeats a vertex")
        v = verts[idx]
        nxt = np.roll(v, -1, axis=0)
        area2 = float((v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]).sum())
        if area2 == 0.0:
            raise MeshError(f"polygon {p} has zero area")
        if area2 < 0.0:
            warnings.warn(f"polygon {p} was clockwise; reversing", stacklevel=2)
            idx = idx[::-1]
        cycles.append(idx)

    edge_ids: dict[tuple, int] = {}
    sides: list[list] = []  # per edge: [left poly, right poly]
    poly_edges = []
    poly_signs = []
    for p, idx in enumerate(cycles):
        gids = np.empty(len(idx), dtype=int)
        sgns = np.empty(len(idx), dtype=int)
        for i in range(len(idx)):
            u, w = int(idx[i]), int(idx[(i + 1) % len(idx)])
            key = (u, w) if u < w else (w, u)
            forward = key[0] == u
            e = edge_ids.get(key)
            if e is None:
                e = len(sides)
                edge_ids[key] = e
                sides.append([-1, -1])
            slot = 0 if forward else 1
            if sides[e][slot] != -1:
                raise MeshError(
                    f"edge {key} is traversed twice in the same direction "
                    "(non-manifold or inconsistent orientation)"
                )
            sides[e][slot] = p
            gids[i] = e
            sgns[i] = 1 if forward else -1
        poly_edges.append(gids)
        poly_signs.append(sgns)

    for e, (lft, rgt) in enumerate(sides):
        if lft == -1 and rgt == -1:
            raise MeshError(f"edge {e} has no incident polygon")

    edges = np.array(sorted(edge_ids, key=lambda k: edge_ids[k]), dtype=int)
    edge_left = np.array([s[0] for s in sides], dtype=int)
    edge_right = np.array([s[1] for s in sides], dtype=int)

    mesh = PolygonalMesh(
        vertices=verts,
        polygons=tuple(cycles),
        edges=edges,
        edge_left=edge_left,
        edge_right=edge_right,
        polygon_edges=tuple(poly_edges),
        polygon_edge_signs=tuple(poly_signs),
        h=0.0,
    )
    h = max(mesh.geometry(k).diameter for k in range(mesh.n_polygons))
    object.__setattr__(mesh, "h", float(h))
    for arr in (verts, edges, edge_left, edge_right):
        arr.setflags(write=False)
    return mesh


# ---------------------------------------------------------------------------
# generators


def generate_square_mesh(n: int) -> PolygonalMesh:
    """n x n uniform square mesh of [0, 1]^2."""
    if n < 1:
        raise MeshError("n must be >= 1")
    side = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(side, side, indexing="xy")
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    polys = [
        [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
        for j in range(n)
        for i in range(n)
    ]
    return build_mesh(verts, polys)


# Interior cut points of each hexagonal cell pair, in cell-local units:
# center -+ (HEX_S, HEX_T).  Chosen so both pieces are congruent
# hexagons with exactly one reflex vertex whose vertex mean stays
# strictly inside the star-shaped kernel.  Dyadic, so coordinates are
# exact floats for power-of-two n.
HEX_S = 3.0 / 16.0
HEX_T = 1.0 / 16.0


def generate_hex_mesh(n: int) -> PolygonalMesh:
    """Nonconvex hexagonal mesh: each cell of an n x n grid is split by
    a zig-zag cut through the cell center into two congruent hexagons,
    each with one reflex vertex."""
    if n < 1:
        raise MeshError("n must be >= 1")
    coords = []
    index: dict[tuple, int] = {}

    def vid(kind, i, j):
        key = (kind, i, j)
        k = index.get(key)
        if k is None:
            k = len(coords)
            index[key] = k
            if kind == "c":      # grid corner
                coords.append((i / n, j / n))
            elif kind == "m":    # midpoint of a vertical cell edge
                coords.append((i / n, (j + 0.5) / n))
            elif kind == "l":    # lower cut point of cell (i, j)
                coords.append(((i + 0.5 - HEX_S) / n, (j + 0.5 - HEX_T) / n))
            else:                # upper cut point of cell (i, j)
                coords.append(((i + 0.5 + HEX_S) / n, (j + 0.5 + HEX_T) / n))
        return k

    polys = []
    for j in range(n):
        for i in range(n):
            c1 = vid("l", i, j)
            c2 = vid("u", i, j)
            polys.append(
                [vid("c", i, j), vid("c", i + 1, j), vid("m", i + 1, j),
                 c2, c1, vid("m", i, j)]
            )
            polys.append(
                [vid("m", i, j), c1, c2, vid("m", i + 1, j),
                 vid("c", i + 1, j + 1), vid("c", i, j + 1)]
            )
    return build_mesh(np.array(coords), polys)


def _reflect_seeds(seeds):
    refl = np.vstack([
        seeds * [-1.0, 1.0],                 # across x = 0
        seeds * [-1.0, 1.0] + [2.0, 0.0],    # across x = 1
        seeds * [1.0, -1.0],                 # across y = 0
        seeds * [1.0, -1.0] + [0.0, 2.0],    # across y = 1
    ])
    return np.vstack([seeds, refl])


def _voronoi_cells(seeds):
    """Voronoi cells of the seeds clipped to [0, 1]^2 by reflection.

    Returns (points, regions): Voronoi vertex coordinates and, for each
    seed, a ccw list of indices into points.
    """
    vor = Voronoi(_reflect_seeds(seeds))
    regions = []
    for s in range(len(seeds)):
        region = vor.regions[vor.point_region[s]]
        if not region or -1 in region:
            raise MeshError("unbounded Voronoi cell; seeds degenerate")
        poly = np.asarray(region, dtype=int)
        v = vor.vertices[poly]
        nxt = np.roll(v, -1, axis=0)
        if (v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]).sum() < 0.0:
            poly = poly[::-1]
        regions.append(poly)
    return vor.vertices, regions


def _cell_centroids(points, regions):
    cent = np.empty((len(regions), 2))
    for k, poly in enumerate(regions):
        v = points[poly]
        nxt = np.roll(v, -1, axis=0)
        cross = v[:, 0] * nxt[:, 1] - v[:, 1] * nxt[:, 0]
        area = 0.5 * cross.sum()
        cent[k] = ((v + nxt) * cross[:, None]).sum(axis=0) / (6.0 * area)
    return cent


def generate_voronoi_mesh(n_seeds: int, lloyd_iters: int = 0,
                          rng_seed: int = 0, seeds=None) -> PolygonalMesh:
    """Voronoi mesh of [0, 1]^2 from random seeds, optionally relaxed
    with Lloyd iterations (seed -> cell centroid).

    Deterministic for fixed arguments.  `seeds` overrides the random
    initial seeds (must then have shape (n_seeds, 2)).
    """
    if n_seeds < 1:
        raise MeshError("n_seeds must be >= 1")
    if seeds is None:
        rng = np.random.default_rng(rng_seed)
        pts = rng.random((n_seeds, 2))
    else:
        pts = np.array(seeds, dtype=float)
        if pts.shape != (n_seeds, 2):
            raise MeshError("seeds must have shape (n_seeds, 2)")

    for _ in range(lloyd_iters):
        points, regions = _voronoi_cells(pts)
        pts = _cell_centroids(points, regions)
    points, regions = _voronoi_cells(pts)

    used = np.unique(np.concatenate(regions))
    verts = points[used].copy()
    remap = {int(g): i for i, g in enumerate(used)}

    # snap to the exact square boundary, then merge vertices that
    # coincide up to Voronoi roundoff (cocircular seed degeneracies)
    verts[np.abs(verts) < _MERGE_TOL] = 0.0
    verts[np.abs(verts - 1.0) < _MERGE_TOL] = 1.0
    parent = np.arange(len(verts))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in cKDTree(verts).query_pairs(_MERGE_TOL):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(verts))])
    kept = np.unique(roots)
    final_id = {int(r): i for i, r in enumerate(kept)}

    polys = []
    for poly in regions:
        ids = [final_id[int(roots[remap[int(g)]])] for g in poly]
        cycle = [ids[i] for i in range(len(ids)) if ids[i] != ids[i - 1]]
        if len(cycle) < 3:
            raise MeshError("Voronoi cell collapsed during vertex merge")
        polys.append(cycle)
    return build_mesh(verts[kept], polys)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class MeshQualityReport:
    """Shape-regularity summary across all elements."""

    n_polygons: int
    n_vertices: int
    n_edges: int
    n_interior_edges: int
    h: float
    area_total: float
    min_edge_ratio: float       # min over K of min_e |e| / h_K
    min_rho: float              # min over K of (dist from star center to edges) / h_K
    max_edges_per_polygon: int
    min_fan_angle: float        # radians, over all fan sub-triangles


def validate_mesh(mesh: PolygonalMesh, check_unit_area: bool = True) -> MeshQualityReport:
    """Check mesh invariants and return a quality report.

    Raises MeshError when an element is degenerate (not star-shaped,
    zero-length edge), when the per-element closed-polygon identity
    sum_e |e| n_K^e = 0 fails, or when the areas do not tile the unit
    square (disable with check_unit_area=False).
    """
    min_edge_ratio = np.inf
    min_rho = np.inf
    min_angle = np.inf
    max_edges = 0
    area = 0.0
    for k in range(mesh.n_polygons):
        geom = mesh.geometry(k)  # raises on degenerate elements
        area += geom.area
        closure = (geom.edge_lengths[:, None] * geom.normals).sum(axis=0)
        if np.abs(closure).max() > 1e-12 * geom.edge_lengths.sum():
            raise MeshError(f"polygon {k} edge loop does not close")
        hK = geom.diameter
        min_edge_ratio = min(min_edge_ratio, geom.edge_lengths.min() / hK)
        # distance from the star center to each edge line
        d = ((geom.star_center - geom.vertices) * geom.normals).sum(axis=1)
        min_rho = min(min_rho, float(np.abs(d).min()) / hK)
        max_edges = max(max_edges, geom.n_edges)
        for tri in geom.fan_triangles():
            for i in range(3):
                a = tri[(i + 1) % 3] - tri[i]
                b = tri[(i + 2) % 3] - tri[i]
                cosang = a @ b / (np.hypot(*a) * np.hypot(*b))
                min_angle = min(min_angle, float(np.arccos(np.clip(cosang, -1, 1))))
    if check_unit_area and abs(area - 1.0) > 1e-9:
        raise MeshError(f"element areas sum to {area!r}, not 1")
    return MeshQualityReport(
        n_polygons=mesh.n_polygons,
        n_vertices=mesh.n_vertices,
        n_edges=mesh.n_edges,
        n_interior_edges=len(mesh.interior_edge_ids),
        h=mesh.h,
        area_total=area,
        min_edge_ratio=float(min_edge_ratio),
        min_rho=float(min_rho),
        max_edges_per_polygon=max_edges,
        min_fan_angle=float(min_angle),
    )


# ---------------------------------------------------------------------------
# plain-text serialization

_MAGIC = "VEMESH 1"


def save_mesh(mesh: PolygonalMesh, path) -> None:
    """Write the mesh in the plain-text VEMESH 1 format:

        VEMESH 1
        VERTICES <m>
        <x> <y>            (m lines, full-precision reprs)
        POLYGONS <p>
        <k> <i_1> ... <i_k> (p lines, 0-based ccw indices)
    """
    lines = [_MAGIC, f"VERTICES {mesh.n_vertices}"]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in mesh.vertices]
    lines.append(f"POLYGONS {mesh.n_polygons}")
    lines += [
        f"{len(poly)} " + " ".join(str(int(i)) for i in poly)
        for poly in mesh.polygons
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> PolygonalMesh:
    """Read a VEMESH 1 file and rebuild full connectivity."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != _MAGIC:
        raise MeshError(f"{path}: not a VEMESH 1 file")
    try:
        tag, count = lines[1].split()
        if tag != "VERTICES":
            raise ValueError
        nv = int(count)
        verts = np.array([[float(t) for t in ln.split()] for ln in lines[2:2 + nv]])
        if verts.shape != (nv, 2):
            raise ValueError
        tag, count = lines[2 + nv].split()
        if tag != "POLYGONS":
            raise ValueError
        np_ = int(count)
        rows = lines[3 + nv:3 + nv + np_]
        if len(rows) != np_:
            raise ValueError
        polys = []
        for ln in rows:
            toks = [int(t) for t in ln.split()]
            if len(toks) != toks[0] + 1:
                raise ValueError
            polys.append(toks[1:])
    except (ValueError, IndexError) as exc:
        raise MeshError(f"{path}: malformed VEMESH data") from exc
    return build_mesh(verts, polys)
