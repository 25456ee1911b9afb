#include "xcity/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace xcity {

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

double orientation(Point2 x, Point2 y, Point2 z) {
    return (y.x - x.x) * (z.y - x.y) - (y.y - x.y) * (z.x - x.x);
}

OrientationSign orientation_sign(Point2 x, Point2 y, Point2 z, double tol) {
    const double w = orientation(x, y, z);
    if (w > tol) return OrientationSign::CCW;
    if (w < -tol) return OrientationSign::CW;
    return OrientationSign::LNR;
}

double intersection_test(Point2 line_p1, Point2 line_p2, const Segment2& seg) {
    if (distance_sq(line_p1, line_p2) < kDegenerateTol * kDegenerateTol) {
        throw std::invalid_argument("intersection_test: degenerate line (coincident points)");
    }
    return orientation(line_p1, line_p2, seg.a) * orientation(line_p1, line_p2, seg.b);
}

bool segments_disjoint(const Segment2& p, const Segment2& q, double eps) {
    return intersection_test(p.a, p.b, q) >= eps || intersection_test(q.a, q.b, p) >= eps;
}

bool point_in_space(Point2 p, const Space& s, double tol) {
    const auto& v = s.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (orientation(v[i], v[(i + 1) % n], p) < -tol) return false;
    }
    return true;
}

double distance_sq(Point2 p, Point2 q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    return dx * dx + dy * dy;
}

double distance(Point2 p, Point2 q) { return std::sqrt(distance_sq(p, q)); }

double polygon_signed_area(std::span<const Point2> vertices) {
    double acc = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices[i];
        const Point2 b = vertices[(i + 1) % n];
        acc += a.x * b.y - a.y * b.x;
    }
    return 0.5 * acc;
}

Point2 polygon_vertex_mean(std::span<const Point2> vertices) {
    Point2 c{0.0, 0.0};
    if (vertices.empty()) return c;
    for (const Point2& p : vertices) {
        c.x += p.x;
        c.y += p.y;
    }
    const double inv = 1.0 / static_cast<double>(vertices.size());
    return {c.x * inv, c.y * inv};
}

BoundingBox polygon_bbox(std::span<const Point2> vertices) {
    BoundingBox box{{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()},
                    {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()}};
    for (const Point2& p : vertices) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
    }
    return box;
}

double polygon_diameter(std::span<const Point2> vertices) {
    double best = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        for (std::size_t j = i + 1; j < vertices.size(); ++j) {
            best = std::max(best, distance_sq(vertices[i], vertices[j]));
        }
    }
    return std::sqrt(best);
}

double point_segment_distance(Point2 p, const Segment2& seg) {
    const Point2 d = seg.b - seg.a;
    const double len_sq = d.x * d.x + d.y * d.y;
    if (len_sq <= 0.0) return distance(p, seg.a);
    double t = ((p.x - seg.a.x) * d.x + (p.y - seg.a.y) * d.y) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, {seg.a.x + t * d.x, seg.a.y + t * d.y});
}

double point_line_distance(Point2 p, Point2 a, Point2 b) {
    const double len = distance(a, b);
    if (len <= 0.0) return distance(p, a);
    return std::abs(orientation(a, b, p)) / len;
}

double distance_outside_space(Point2 p, const Space& s, double tol) {
    if (point_in_space(p, s, tol)) return 0.0;
    double best = std::numeric_limits<double>::max();
    const auto& v = s.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        best = std::min(best, point_segment_distance(p, {v[i], v[(i + 1) % n]}));
    }
    return best;
}

std::vector<std::string> validate_space(const Space& s) {
    std::vector<std::string> issues;
    const auto& v = s.vertices;
    if (v.size() < 3) {
        issues.push_back("space needs at least 3 vertices");
        return issues;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_finite(v[i])) issues.push_back("space vertex " + std::to_string(i) + " is not finite");
    }
    if (!issues.empty()) return issues;
    if (polygon_signed_area(v) <= 0.0) {
        issues.push_back("space vertices must be in CCW order");
        return issues;
    }
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = orientation(v[i], v[(i + 1) % n], v[(i + 2) % n]);
        if (w <= kCollinearTol) {
            issues.push_back("space is not strictly convex at vertex " + std::to_string((i + 1) % n));
        }
    }
    return issues;
}

}  // namespace xcity
