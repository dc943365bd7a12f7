#include "polywave/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "polywave/errors.hpp"

namespace polywave {

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    // Newton iteration on P_n over [-1,1], then map to [0,1].
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = 0.5 * (1.0 - x);
        gl.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        gl.weights[i] = 0.5 * w;
        gl.weights[n - 1 - i] = 0.5 * w;
    }
    return gl;
}

namespace {

void add_orbit1(TriangleRule& r, double w) {
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(w);
}

// Barycentric (a, a, 1-2a) orbit mapped to reference coordinates.
void add_orbit3(TriangleRule& r, double a, double w) {
    const double c = 1.0 - 2.0 * a;
    r.points.push_back({a, a});
    r.points.push_back({c, a});
    r.points.push_back({a, c});
    r.weights.push_back(w);
    r.weights.push_back(w);
    r.weights.push_back(w);
}

TriangleRule symmetric_rule(int degree) {
    TriangleRule r;
    r.degree = degree;
    switch (degree) {
    case 1:
        add_orbit1(r, 1.0);
        break;
    case 2:
        add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
        break;
    case 4:
        add_orbit3(r, 0.445948490915965, 0.223381589678011);
        add_orbit3(r, 0.091576213509771, 0.109951743655322);
        break;
    case 5: {
        const double s = std::sqrt(15.0);
        add_orbit1(r, 9.0 / 40.0);
        add_orbit3(r, (6.0 + s) / 21.0, (155.0 + s) / 1200.0);
        add_orbit3(r, (6.0 - s) / 21.0, (155.0 - s) / 1200.0);
        break;
    }
    default:
        throw ConfigError("symmetric_rule: no table for this degree");
    }
    return r;
}

// Collapsed (Duffy) Gauss-Legendre product rule: x = u(1-v), y = uv, |J| = u.
// Positive weights at any degree.
TriangleRule collapsed_rule(int degree) {
    TriangleRule r;
    r.degree = degree;
    const int nu = (degree + 3) / 2; // exact to degree+1 in u
    const int nv = (degree + 2) / 2; // exact to degree in v
    const GaussLegendre gu = gauss_legendre(nu);
    const GaussLegendre gv = gauss_legendre(nv);
    r.points.reserve(static_cast<std::size_t>(nu) * nv);
    r.weights.reserve(static_cast<std::size_t>(nu) * nv);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const double u = gu.nodes[i], v = gv.nodes[j];
            r.points.push_back({u * (1.0 - v), u * v});
            r.weights.push_back(2.0 * gu.weights[i] * gv.weights[j] * u);
        }
    return r;
}

} // namespace

const TriangleRule& triangle_rule(int degree) {
    if (degree < 1) degree = 1;
    if (degree > kMaxTriangleDegree)
        throw ConfigError("triangle_rule: degree " + std::to_string(degree) +
                          " unsupported (max " + std::to_string(kMaxTriangleDegree) + ")");
    static std::map<int, TriangleRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        TriangleRule r;
        if (degree <= 2 || degree == 4 || degree == 5)
            r = symmetric_rule(degree);
        else if (degree == 3)
            r = symmetric_rule(4);
        else
            r = collapsed_rule(degree);
        it = cache.emplace(degree, std::move(r)).first;
    }
    return it->second;
}

double polygon_monomial_integral(std::span<const Point2> loop, int a, int b) {
    if (a < 0 || b < 0) throw ConfigError("polygon_monomial_integral: negative exponent");
    // (1/(a+1)) * sum over edges of dy * int_0^1 x(t)^{a+1} y(t)^b dt.
    const int A = a + 1;
    std::vector<double> binA(A + 1), binB(b + 1);
    binA[0] = 1.0;
    for (int i = 1; i <= A; ++i) binA[i] = binA[i - 1] * (A - i + 1) / i;
    binB[0] = 1.0;
    for (int j = 1; j <= b; ++j) binB[j] = binB[j - 1] * (b - j + 1) / j;

    const std::size_t n = loop.size();
    double total = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
        const Point2 p = loop[e];
        const Point2 q = loop[(e + 1) % n];
        const double dx = q.x - p.x, dy = q.y - p.y;
        if (dy == 0.0) continue;
        std::vector<double> px(A + 1), py(b + 1);
        px[0] = 1.0;
        for (int i = 1; i <= A; ++i) px[i] = px[i - 1] * p.x;
        py[0] = 1.0;
        for (int j = 1; j <= b; ++j) py[j] = py[j - 1] * p.y;
        double edge = 0.0;
        double dxi = 1.0;
        for (int i = 0; i <= A; ++i) {
            double dyj = 1.0;
            for (int j = 0; j <= b; ++j) {
                edge += binA[i] * binB[j] * px[A - i] * py[b - j] * dxi * dyj / (i + j + 1);
                dyj *= dy;
            }
            dxi *= dx;
        }
        total += dy * edge;
    }
    return total / A;
}

CellQuadrature triangle_fan_quadrature(std::span<const std::array<Point2, 3>> triangles, int degree) {
    const TriangleRule& rule = triangle_rule(degree);
    CellQuadrature q;
    q.points.reserve(triangles.size() * rule.points.size());
    q.weights.reserve(triangles.size() * rule.points.size());
    for (const auto& tri : triangles) {
        const Point2 v0 = tri[0], v1 = tri[1], v2 = tri[2];
        const double area2 = (v1.x - v0.x) * (v2.y - v0.y) - (v2.x - v0.x) * (v1.y - v0.y);
        const double area = 0.5 * area2;
        for (std::size_t k = 0; k < rule.points.size(); ++k) {
            const double xi = rule.points[k].x, eta = rule.points[k].y;
            q.points.push_back({v0.x + xi * (v1.x - v0.x) + eta * (v2.x - v0.x),
                                v0.y + xi * (v1.y - v0.y) + eta * (v2.y - v0.y)});
            q.weights.push_back(rule.weights[k] * area);
        }
    }
    return q;
}

SegmentQuadrature segment_quadrature(Point2 a, Point2 b, int n_points) {
    const GaussLegendre gl = gauss_legendre(n_points);
    SegmentQuadrature q;
    q.points.resize(n_points);
    q.weights.resize(n_points);
    const double len = dist(a, b);
    for (int i = 0; i < n_points; ++i) {
        const double t = gl.nodes[i];
        q.points[i] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        q.weights[i] = gl.weights[i] * len;
    }
    return q;
}

} // namespace polywave
