#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polywave/geom.hpp"

namespace polywave {

struct Cell {
    std::vector<int> vertex_ids; // simple CCW loop
    double diameter = 0.0;       // max pairwise vertex distance
    double area = 0.0;
    Point2 centroid;
    std::vector<std::array<Point2, 3>> sub_triangles; // partition of the cell
    int region_tag = 0;
};

struct Face {
    enum class Kind { interior, boundary };
    Kind kind = Kind::boundary;
    std::array<Point2, 2> endpoints; // directed as traversed by plus_cell (CCW)
    int plus_cell = -1;
    int minus_cell = -1;  // interior faces only
    int boundary_tag = -1; // index into PolyMesh::boundary_tag_names
    Point2 normal;         // unit, outward from plus_cell
    double length = 0.0;
    Point2 midpoint;
};

struct PolyMesh {
    std::vector<Point2> vertices;
    std::vector<Cell> cells;
    std::vector<Face> faces;
    std::vector<int> interior_faces; // indices into faces
    std::vector<int> boundary_faces;
    std::vector<std::string> boundary_tag_names;
    Rect domain;

    std::vector<Point2> cell_points(int cell_id) const;
    int n_cells() const { return static_cast<int>(cells.size()); }
};

struct MeshQualityReport {
    double h_max = 0.0;
    double h_min = 0.0;
    double h_ratio = 0.0;
    double min_area_to_h2 = 0.0; // min over cells of |k| / h_k^2
    int max_vertex_count = 0;
    int max_subtriangle_count = 0;
    std::vector<int> flagged_cells; // cells with |k| < tol * h_k^2
};

/// Fan triangulation from the centroid when the cell is star-shaped with
/// respect to it; falls back to ear clipping otherwise. Throws on failure.
std::vector<std::array<Point2, 3>> subtriangulate(std::span<const Point2> loop);

/// Regular hexagonal tiling clipped to the rectangle. Interior cells are
/// congruent regular hexagons; n_rows seed rows span the height.
PolyMesh generate_hex_mesh(const Rect& domain, int n_rows);

/// Clipped Voronoi diagram of n_seeds uniform random seeds, optionally Lloyd
/// relaxed. Deterministic for a fixed rng_seed.
PolyMesh generate_voronoi_mesh(const Rect& domain, int n_seeds, int lloyd_iters,
                               std::uint64_t rng_seed);

MeshQualityReport mesh_quality(const PolyMesh& mesh, double tol = 0.05);

void write_mesh(const PolyMesh& mesh, const std::string& path);
PolyMesh read_mesh(const std::string& path);

/// Build a mesh from raw vertex/loop data: derives cell metrics,
/// sub-triangulations, and the face partition. Validates the cell complex.
PolyMesh finalize_mesh(std::vector<Point2> vertices, std::vector<std::vector<int>> loops,
                       const Rect& domain);

/// Assign cell region tags with a locator (used by piecewise-material scenarios).
template <typename Locator>
void tag_regions(PolyMesh& mesh, Locator&& region_of) {
    for (auto& cell : mesh.cells) cell.region_tag = region_of(cell.centroid);
}

} // namespace polywave
