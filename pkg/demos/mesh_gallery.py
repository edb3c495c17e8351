"""Generate one mesh from each family, report quality, and draw SVGs.

Shows the three mesh generators (structured squares, nonconvex
hexagons, Lloyd-relaxed Voronoi), the quality report, and the plain
text mesh file format.
"""
import os

from vemelast import (
    generate_hex_mesh,
    generate_square_mesh,
    generate_voronoi_mesh,
    save_mesh,
    validate_mesh,
)

OUT = os.path.join(os.path.dirname(__file__), "output")


def mesh_svg(mesh, path, size=420):
    """Minimal SVG rendering: one filled path per polygon."""
    pad = 10
    scale = size - 2 * pad
    with open(path, "w") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" '
                 f'width="{size}" height="{size}" '
                 f'viewBox="0 0 {size} {size}">\n')
        for poly in mesh.polygons:
            pts = mesh.vertices[poly]
            cmds = " ".join(
                f"{'M' if i == 0 else 'L'}"
                f"{pad + scale * x:.1f},{pad + scale * (1 - y):.1f}"
                for i, (x, y) in enumerate(pts))
            fh.write(f'  <path d="{cmds} Z" fill="#dce9f5" '
                     f'stroke="#1f3a5f" stroke-width="1"/>\n')
        fh.write("</svg>\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    meshes = {
        "square": generate_square_mesh(8),
        "hex": generate_hex_mesh(8),
        "voronoi": generate_voronoi_mesh(64, lloyd_iters=100, rng_seed=2024),
    }
    print(f"{'family':>8} {'polygons':>9} {'vertices':>9} {'edges':>7} "
          f"{'h':>8} {'min_rho':>8}")
    for name, mesh in meshes.items():
        quality = validate_mesh(mesh)
        print(f"{name:>8} {mesh.n_polygons:>9} {mesh.n_vertices:>9} "
              f"{mesh.n_edges:>7} {quality.h:>8.4f} {quality.min_rho:>8.4f}")
        save_mesh(mesh, os.path.join(OUT, f"{name}.mesh.txt"))
        mesh_svg(mesh, os.path.join(OUT, f"{name}.svg"))
    print(f"\nmesh files and drawings written to {OUT}/")

    # The hexagon family is deliberately nonconvex: every cell has one
    # reflex corner, which exercises the star-shaped quadrature paths.
    hexmesh = meshes["hex"]
    geom = hexmesh.geometry(0)
    print(f"\nfirst hex cell has {geom.n_edges} edges, "
          f"area {geom.area:.6f}, diameter {geom.diameter:.4f}")


if __name__ == "__main__":
    main()
