#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace polywave {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

/// Axis-aligned rectangle (xmin,ymin)-(xmax,ymax).
struct Rect {
    double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    bool contains(Point2 p, double tol = 0.0) const {
        return p.x >= xmin - tol && p.x <= xmax + tol && p.y >= ymin - tol && p.y <= ymax + tol;
    }
};

/// Signed area of a polygon loop (positive for counter-clockwise).
double polygon_signed_area(std::span<const Point2> loop);

/// Centroid of a simple polygon (area-weighted).
Point2 polygon_centroid(std::span<const Point2> loop);

/// Maximum pairwise vertex distance.
double polygon_diameter(std::span<const Point2> loop);

/// Clip a convex polygon against the half-plane dot(n, x) <= d.
/// Returns the clipped loop (possibly empty); orientation is preserved.
std::vector<Point2> clip_half_plane(std::span<const Point2> loop, Point2 n, double d);

/// Drop consecutive vertices closer than tol (also fuses last/first).
std::vector<Point2> dedupe_loop(std::span<const Point2> loop, double tol);

} // namespace polywave
