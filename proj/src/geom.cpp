#include "polywave/geom.hpp"

namespace polywave {

double polygon_signed_area(std::span<const Point2> loop) {
    double twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = loop[i];
        const Point2 b = loop[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return 0.5 * twice;
}

Point2 polygon_centroid(std::span<const Point2> loop) {
    double cx = 0.0, cy = 0.0, twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = loop[i];
        const Point2 b = loop[(i + 1) % n];
        const double cross = a.x * b.y - b.x * a.y;
        twice += cross;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    const double area6 = 3.0 * twice;
    return {cx / area6, cy / area6};
}

double polygon_diameter(std::span<const Point2> loop) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        for (std::size_t j = i + 1; j < loop.size(); ++j) {
            const Point2 e = loop[i] - loop[j];
            d2 = std::max(d2, dot(e, e));
        }
    return std::sqrt(d2);
}

std::vector<Point2> clip_half_plane(std::span<const Point2> loop, Point2 n, double d) {
    std::vector<Point2> out;
    const std::size_t m = loop.size();
    if (m == 0) return out;
    out.reserve(m + 2);
    for (std::size_t i = 0; i < m; ++i) {
        const Point2 a = loop[i];
        const Point2 b = loop[(i + 1) % m];
        const double fa = dot(n, a) - d;
        const double fb = dot(n, b) - d;
        if (fa <= 0.0) out.push_back(a);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
            const double t = fa / (fa - fb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

std::vector<Point2> dedupe_loop(std::span<const Point2> loop, double tol) {
    std::vector<Point2> out;
    out.reserve(loop.size());
    for (const Point2& p : loop) {
        if (out.empty() || dist(out.back(), p) > tol) out.push_back(p);
    }
    while (out.size() > 1 && dist(out.front(), out.back()) <= tol) out.pop_back();
    return out;
}

} // namespace polywave
