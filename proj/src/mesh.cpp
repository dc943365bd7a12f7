#include "polywave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "polywave/errors.hpp"

namespace polywave {

std::vector<Point2> PolyMesh::cell_points(int cell_id) const {
    const Cell& c = cells[cell_id];
    std::vector<Point2> pts;
    pts.reserve(c.vertex_ids.size());
    for (int v : c.vertex_ids) pts.push_back(vertices[v]);
    return pts;
}

namespace {

bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c) {
    auto side = [](Point2 u, Point2 v, Point2 w) {
        return (v.x - u.x) * (w.y - u.y) - (v.y - u.y) * (w.x - u.x);
    };
    const double d1 = side(a, b, p), d2 = side(b, c, p), d3 = side(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

std::vector<std::array<Point2, 3>> ear_clip(std::span<const Point2> loop) {
    std::vector<Point2> poly(loop.begin(), loop.end());
    std::vector<std::array<Point2, 3>> tris;
    while (poly.size() > 3) {
        bool clipped = false;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
            const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
            if (cross <= 0.0) continue; // reflex corner
            bool contains_other = false;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
                if (point_in_triangle(poly[j], a, b, c)) {
                    contains_other = true;
                    break;
                }
            }
            if (contains_other) continue;
            tris.push_back({a, b, c});
            poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped) throw NumericError("subtriangulate: ear clipping failed (invalid cell)");
    }
    tris.push_back({poly[0], poly[1], poly[2]});
    return tris;
}

} // namespace

std::vector<std::array<Point2, 3>> subtriangulate(std::span<const Point2> loop) {
    if (loop.size() < 3) throw NumericError("subtriangulate: fewer than 3 vertices");
    const Point2 c = polygon_centroid(loop);
    const double area = polygon_signed_area(loop);
    if (!(area > 0.0)) throw NumericError("subtriangulate: non-positive area (need CCW loop)");

    // Star-shapedness w.r.t. the centroid: all fan triangles positively oriented.
    bool star = true;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = loop[i], b = loop[(i + 1) % n];
        const double cross = (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
        if (cross <= 1e-14 * area) {
            star = false;
            break;
        }
    }
    if (!star) return ear_clip(loop);

    std::vector<std::array<Point2, 3>> tris;
    tris.reserve(n);
    for (std::size_t i = 0; i < n; ++i) tris.push_back({c, loop[i], loop[(i + 1) % n]});
    return tris;
}

namespace {

int classify_boundary_side(const Rect& r, Point2 a, Point2 b, double tol) {
    if (std::abs(a.x - r.xmin) <= tol && std::abs(b.x - r.xmin) <= tol) return 0; // left
    if (std::abs(a.x - r.xmax) <= tol && std::abs(b.x - r.xmax) <= tol) return 1; // right
    if (std::abs(a.y - r.ymin) <= tol && std::abs(b.y - r.ymin) <= tol) return 2; // bottom
    if (std::abs(a.y - r.ymax) <= tol && std::abs(b.y - r.ymax) <= tol) return 3; // top
    return -1;
}

} // namespace

PolyMesh finalize_mesh(std::vector<Point2> vertices, std::vector<std::vector<int>> loops,
                       const Rect& domain) {
    PolyMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.domain = domain;
    mesh.boundary_tag_names = {"left", "right", "bottom", "top", "other"};

    const int n_verts = static_cast<int>(mesh.vertices.size());
    mesh.cells.reserve(loops.size());
    for (auto& loop : loops) {
        Cell cell;
        cell.vertex_ids = std::move(loop);
        std::vector<Point2> pts;
        pts.reserve(cell.vertex_ids.size());
        for (int v : cell.vertex_ids) {
            if (v < 0 || v >= n_verts)
                throw IoError("mesh cell references nonexistent vertex " + std::to_string(v));
            pts.push_back(mesh.vertices[v]);
        }
        cell.area = polygon_signed_area(pts);
        if (!(cell.area > 0.0)) throw NumericError("mesh cell has non-positive area (need CCW loop)");
        cell.centroid = polygon_centroid(pts);
        cell.diameter = polygon_diameter(pts);
        cell.sub_triangles = subtriangulate(pts);
        mesh.cells.push_back(std::move(cell));
    }

    // Face extraction: undirected vertex pairs shared by at most two cells.
    struct PendingFace {
        int cell = -1;
        int a = -1, b = -1; // directed edge as traversed by `cell`
        int count = 0;
        int other_cell = -1;
    };
    std::map<std::pair<int, int>, PendingFace> edge_map;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const auto& ids = mesh.cells[c].vertex_ids;
        const std::size_t n = ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            const int a = ids[i], b = ids[(i + 1) % n];
            const auto key = std::minmax(a, b);
            auto [it, inserted] = edge_map.try_emplace({key.first, key.second});
            PendingFace& pf = it->second;
            if (inserted) {
                pf.cell = c;
                pf.a = a;
                pf.b = b;
                pf.count = 1;
            } else {
                pf.count += 1;
                pf.other_cell = c;
                if (pf.count > 2)
                    throw NumericError("mesh edge shared by more than two cells (non-manifold)");
            }
        }
    }

    const double btol = 1e-12 * std::max(domain.width(), domain.height());
    for (const auto& [key, pf] : edge_map) {
        Face f;
        const Point2 pa = mesh.vertices[pf.a], pb = mesh.vertices[pf.b];
        f.endpoints = {pa, pb};
        f.length = dist(pa, pb);
        if (f.length <= 0.0) throw NumericError("mesh face with zero length");
        f.midpoint = {0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
        const Point2 t = pb - pa;
        f.normal = {t.y / f.length, -t.x / f.length}; // outward for CCW traversal
        f.plus_cell = pf.cell;
        if (pf.count == 2) {
            f.kind = Face::Kind::interior;
            f.minus_cell = pf.other_cell;
        } else {
            f.kind = Face::Kind::boundary;
            int side = classify_boundary_side(domain, pa, pb, btol);
            f.boundary_tag = side >= 0 ? side : 4;
        }
        const int idx = static_cast<int>(mesh.faces.size());
        mesh.faces.push_back(f);
        (f.kind == Face::Kind::interior ? mesh.interior_faces : mesh.boundary_faces).push_back(idx);
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// Voronoi machinery

namespace {

// Clipped Voronoi cell loops for the given seeds, each a CCW polygon.
// Neighbors are processed nearest-first with the standard security-radius cutoff.
std::vector<std::vector<Point2>> voronoi_cell_loops(std::span<const Point2> seeds,
                                                    const Rect& rect) {
    const std::size_t n = seeds.size();
    const std::vector<Point2> box = {
        {rect.xmin, rect.ymin}, {rect.xmax, rect.ymin}, {rect.xmax, rect.ymax}, {rect.xmin, rect.ymax}};
    const double diag = std::hypot(rect.width(), rect.height());
    const double snap = 1e-9 * diag;

    std::vector<std::vector<Point2>> loops(n);
    std::vector<int> order(n);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 si = seeds[i];
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            const Point2 e = seeds[j] - si;
            d2[j] = dot(e, e);
        }
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
        });

        std::vector<Point2> cell = box;
        for (std::size_t r = 0; r < n && !cell.empty(); ++r) {
            const int j = order[r];
            if (j == static_cast<int>(i)) continue;
            double max_r2 = 0.0;
            for (const Point2& v : cell) {
                const Point2 e = v - si;
                max_r2 = std::max(max_r2, dot(e, e));
            }
            if (d2[j] > 4.0 * max_r2) break; // bisector cannot cut the cell
            const Point2 nrm = seeds[j] - si;
            const Point2 mid = 0.5 * (seeds[j] + si);
            cell = clip_half_plane(cell, nrm, dot(nrm, mid));
        }
        loops[i] = dedupe_loop(cell, snap);
        if (loops[i].size() < 3) loops[i].clear();
    }
    return loops;
}

// Merge per-cell loops into a shared vertex list with snap-rounding.
PolyMesh mesh_from_loops(const std::vector<std::vector<Point2>>& loops, const Rect& rect) {
    const double diag = std::hypot(rect.width(), rect.height());
    const double snap = 1e-9 * diag;

    std::vector<Point2> vertices;
    std::unordered_map<std::uint64_t, std::vector<int>> grid;
    auto key_of = [&](long long kx, long long ky) {
        return (static_cast<std::uint64_t>(kx) << 32) ^ static_cast<std::uint64_t>(ky & 0xffffffffLL);
    };
    auto vertex_id = [&](Point2 p) {
        const long long kx = std::llround(p.x / snap), ky = std::llround(p.y / snap);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find(key_of(kx + dx, ky + dy));
                if (it == grid.end()) continue;
                for (int id : it->second)
                    if (dist(vertices[id], p) <= snap) return id;
            }
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(p);
        grid[key_of(kx, ky)].push_back(id);
        return id;
    };

    std::vector<std::vector<int>> id_loops;
    id_loops.reserve(loops.size());
    for (const auto& loop : loops) {
        if (loop.empty()) continue;
        std::vector<int> ids;
        ids.reserve(loop.size());
        for (const Point2& p : loop) {
            const int id = vertex_id(p);
            if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
        if (ids.size() >= 3) id_loops.push_back(std::move(ids));
    }
    return finalize_mesh(std::move(vertices), std::move(id_loops), rect);
}

} // namespace

PolyMesh generate_hex_mesh(const Rect& domain, int n_rows) {
    if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
        throw ConfigError("generate_hex_mesh: degenerate rectangle");
    if (n_rows < 2) throw ConfigError("generate_hex_mesh: need n_rows >= 2");

    // Triangular seed lattice whose Voronoi cells are regular hexagons. Rows
    // sit on the boundary (j = 0 and j = n_rows), so boundary cells are clean
    // half-hexagons rather than clipped tips. On the (0,1) x (0, 2*sqrt(3)/3)
    // domain the lattice tiles exactly whenever n_rows is a multiple of 4.
    const double dy = domain.height() / n_rows; // row spacing = a*sqrt(3)/2
    const double a = 2.0 * dy / std::sqrt(3.0); // in-row seed spacing
    const int n_cols = static_cast<int>(std::ceil(domain.width() / a)) + 1;

    // Irrational lattice phase in x: keeps interior hexagons congruent while
    // preventing cell columns from aligning with structured solutions, which
    // otherwise produces artificial superconvergence in grid studies.
    const double phase = 0.5 * (std::sqrt(2.0) - 1.0) * a;
    std::vector<Point2> seeds;
    for (int j = 0; j <= n_rows; ++j) {
        const double y = domain.ymin + j * dy;
        const double x0 = domain.xmin + phase + (j % 2 == 1 ? 0.5 * a : 0.0);
        for (int i = -2; i <= n_cols + 1; ++i) seeds.push_back({x0 + i * a, y});
    }
    auto loops = voronoi_cell_loops(seeds, domain);
    const double area_floor = 1e-12 * domain.area();
    for (auto& loop : loops)
        if (!loop.empty() && polygon_signed_area(loop) < area_floor) loop.clear();
    return mesh_from_loops(loops, domain);
}

PolyMesh generate_voronoi_mesh(const Rect& domain, int n_seeds, int lloyd_iters,
                               std::uint64_t rng_seed) {
    if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
        throw ConfigError("generate_voronoi_mesh: degenerate rectangle");
    if (n_seeds < 4) throw ConfigError("generate_voronoi_mesh: need n_seeds >= 4");

    std::mt19937_64 rng(rng_seed);
    auto uniform01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    const double diag = std::hypot(domain.width(), domain.height());
    const double min_sep = 1e-10 * diag;

    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<Point2> seeds(n_seeds);
        for (auto& s : seeds)
            s = {domain.xmin + uniform01() * domain.width(),
                 domain.ymin + uniform01() * domain.height()};

        bool ok = true;
        std::vector<std::vector<Point2>> loops;
        for (int it = 0; it <= lloyd_iters; ++it) {
            loops = voronoi_cell_loops(seeds, domain);
            for (const auto& loop : loops)
                if (loop.empty()) ok = false;
            if (!ok) break;
            if (it == lloyd_iters) break;
            for (int i = 0; i < n_seeds; ++i) seeds[i] = polygon_centroid(loops[i]);
            // Coincident seeds after relaxation force a regeneration.
            for (int i = 0; i < n_seeds && ok; ++i)
                for (int j = i + 1; j < n_seeds; ++j)
                    if (dist(seeds[i], seeds[j]) < min_sep) {
                        ok = false;
                        break;
                    }
            if (!ok) break;
        }
        if (!ok) continue; // retry with fresh (perturbed) seeds from the same stream
        PolyMesh mesh = mesh_from_loops(loops, domain);
        if (mesh.n_cells() == n_seeds) return mesh;
    }
    throw NumericError("generate_voronoi_mesh: could not produce a valid seed set");
}

MeshQualityReport mesh_quality(const PolyMesh& mesh, double tol) {
    MeshQualityReport rep;
    if (mesh.cells.empty()) throw ConfigError("mesh_quality: empty mesh");
    rep.h_max = 0.0;
    rep.h_min = std::numeric_limits<double>::max();
    rep.min_area_to_h2 = std::numeric_limits<double>::max();
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        rep.h_max = std::max(rep.h_max, cell.diameter);
        rep.h_min = std::min(rep.h_min, cell.diameter);
        const double ratio = cell.area / (cell.diameter * cell.diameter);
        rep.min_area_to_h2 = std::min(rep.min_area_to_h2, ratio);
        rep.max_vertex_count = std::max(rep.max_vertex_count, static_cast<int>(cell.vertex_ids.size()));
        rep.max_subtriangle_count =
            std::max(rep.max_subtriangle_count, static_cast<int>(cell.sub_triangles.size()));
        if (ratio < tol) rep.flagged_cells.push_back(c);
    }
    rep.h_ratio = rep.h_max / rep.h_min;
    return rep;
}

void write_mesh(const PolyMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_mesh: cannot open " + path);
    char buf[64];
    out << "polymesh 1\n";
    out << "domain ";
    for (double v : {mesh.domain.xmin, mesh.domain.ymin, mesh.domain.xmax, mesh.domain.ymax}) {
        std::snprintf(buf, sizeof buf, "%.17g ", v);
        out << buf;
    }
    out << "\n";
    out << "vertices " << mesh.vertices.size() << "\n";
    for (const Point2& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        out << buf;
    }
    out << "cells " << mesh.cells.size() << "\n";
    for (const Cell& c : mesh.cells) {
        out << c.vertex_ids.size();
        for (int v : c.vertex_ids) out << ' ' << v;
        out << "\n";
    }
    out << "boundary_tags " << mesh.boundary_faces.size() << "\n";
    for (int f : mesh.boundary_faces) {
        const Face& face = mesh.faces[f];
        // endpoints as vertex ids of the plus cell's directed edge
        const auto& ids = mesh.cells[face.plus_cell].vertex_ids;
        const std::size_t n = ids.size();
        int va = -1, vb = -1;
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 p = mesh.vertices[ids[i]], q = mesh.vertices[ids[(i + 1) % n]];
            if (dist(p, face.endpoints[0]) == 0.0 && dist(q, face.endpoints[1]) == 0.0) {
                va = ids[i];
                vb = ids[(i + 1) % n];
                break;
            }
        }
        out << va << ' ' << vb << ' ' << mesh.boundary_tag_names[face.boundary_tag] << "\n";
    }
    if (!out) throw IoError("write_mesh: write failed for " + path);
}

namespace {

struct LineReader {
    std::ifstream in;
    int line_no = 0;
    std::string current;

    explicit LineReader(const std::string& path) : in(path) {}

    bool next() {
        while (std::getline(in, current)) {
            ++line_no;
            if (!current.empty() && current.back() == '\r') current.pop_back();
            if (!current.empty()) return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw IoError("read_mesh: line " + std::to_string(line_no) + ": " + msg);
    }
};

} // namespace

PolyMesh read_mesh(const std::string& path) {
    LineReader r(path);
    if (!r.in) throw IoError("read_mesh: cannot open " + path);
    if (!r.next()) throw IoError("read_mesh: line 1: empty file");
    if (r.current != "polymesh 1") r.fail("expected header 'polymesh 1'");

    Rect domain;
    if (!r.next()) r.fail("missing domain line");
    {
        std::istringstream s(r.current);
        std::string kw;
        s >> kw >> domain.xmin >> domain.ymin >> domain.xmax >> domain.ymax;
        if (kw != "domain" || s.fail()) r.fail("expected 'domain xmin ymin xmax ymax'");
    }

    std::size_t n_verts = 0;
    if (!r.next()) r.fail("missing vertices section");
    {
        std::istringstream s(r.current);
        std::string kw;
        s >> kw >> n_verts;
        if (kw != "vertices" || s.fail()) r.fail("expected 'vertices N'");
    }
    std::vector<Point2> vertices(n_verts);
    for (auto& p : vertices) {
        if (!r.next()) r.fail("unexpected end of vertex list");
        std::istringstream s(r.current);
        s >> p.x >> p.y;
        if (s.fail()) r.fail("malformed vertex coordinates");
    }

    std::size_t n_cells = 0;
    if (!r.next()) r.fail("missing cells section");
    {
        std::istringstream s(r.current);
        std::string kw;
        s >> kw >> n_cells;
        if (kw != "cells" || s.fail()) r.fail("expected 'cells M'");
    }
    std::vector<std::vector<int>> loops(n_cells);
    for (auto& loop : loops) {
        if (!r.next()) r.fail("unexpected end of cell list");
        std::istringstream s(r.current);
        std::size_t k = 0;
        s >> k;
        if (s.fail() || k < 3) r.fail("malformed cell line");
        loop.resize(k);
        for (auto& v : loop) s >> v;
        if (s.fail()) r.fail("malformed cell vertex list");
        for (int v : loop)
            if (v < 0 || v >= static_cast<int>(n_verts)) r.fail("cell references nonexistent vertex");
    }

    std::map<std::pair<int, int>, std::string> tag_map;
    if (r.next()) {
        std::istringstream s(r.current);
        std::string kw;
        std::size_t n_tags = 0;
        s >> kw >> n_tags;
        if (kw != "boundary_tags" || s.fail()) r.fail("expected 'boundary_tags B'");
        for (std::size_t i = 0; i < n_tags; ++i) {
            if (!r.next()) r.fail("unexpected end of boundary tag list");
            std::istringstream ts(r.current);
            int a = 0, b = 0;
            std::string name;
            ts >> a >> b >> name;
            if (ts.fail()) r.fail("malformed boundary tag line");
            tag_map[std::minmax(a, b)] = name;
        }
    }

    PolyMesh mesh;
    try {
        mesh = finalize_mesh(std::move(vertices), std::move(loops), domain);
    } catch (const NumericError& e) {
        throw IoError(std::string("read_mesh: invalid mesh: ") + e.what());
    }

    // Re-apply stored tags (named tags must exist in the palette).
    for (int f : mesh.boundary_faces) {
        Face& face = mesh.faces[f];
        // identify this face's vertex pair
        const auto& ids = mesh.cells[face.plus_cell].vertex_ids;
        const std::size_t n = ids.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 p = mesh.vertices[ids[i]], q = mesh.vertices[ids[(i + 1) % n]];
            if (dist(p, face.endpoints[0]) == 0.0 && dist(q, face.endpoints[1]) == 0.0) {
                auto it = tag_map.find(std::minmax(ids[i], ids[(i + 1) % n]));
                if (it != tag_map.end()) {
                    auto pos = std::find(mesh.boundary_tag_names.begin(),
                                         mesh.boundary_tag_names.end(), it->second);
                    if (pos == mesh.boundary_tag_names.end()) {
                        mesh.boundary_tag_names.push_back(it->second);
                        face.boundary_tag = static_cast<int>(mesh.boundary_tag_names.size()) - 1;
                    } else {
                        face.boundary_tag =
                            static_cast<int>(pos - mesh.boundary_tag_names.begin());
                    }
                }
                break;
            }
        }
    }
    return mesh;
}

} // namespace polywave
