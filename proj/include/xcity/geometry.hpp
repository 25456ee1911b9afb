#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace xcity {

// Absolute collinearity tolerance for the orientation test, in m^2.
inline constexpr double kCollinearTol = 1e-9;
// Minimum segment length treated as non-degenerate, in meters.
inline constexpr double kDegenerateTol = 1e-9;
// Default offset for the chi-product disjointness test.
inline constexpr double kDefaultEps = 1e-4;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

bool is_finite(Point2 p);

struct Segment2 {
    Point2 a;
    Point2 b;
};

enum class OrientationSign { CCW, CW, LNR };

// Convex construction space; vertices in CCW order.
struct Space {
    std::vector<Point2> vertices;
};

// Signed double triangle area of (x, y, z); positive iff CCW.
double orientation(Point2 x, Point2 y, Point2 z);

OrientationSign orientation_sign(Point2 x, Point2 y, Point2 z, double tol = kCollinearTol);

// Product of the two orientation tests of seg's endpoints against the
// infinite line through (line_p1, line_p2). Positive iff both endpoints lie
// strictly on the same side. Throws std::invalid_argument on a degenerate line.
double intersection_test(Point2 line_p1, Point2 line_p2, const Segment2& seg);

// True iff either chi product clears eps. Touching or nearly touching pairs
// (products inside [0, eps)) count as colliding.
bool segments_disjoint(const Segment2& p, const Segment2& q, double eps = kDefaultEps);

// Inside-or-on-boundary test against a CCW convex polygon.
bool point_in_space(Point2 p, const Space& s, double tol = kCollinearTol);

double distance_sq(Point2 p, Point2 q);
double distance(Point2 p, Point2 q);

// --- polygon helpers -------------------------------------------------------

struct BoundingBox {
    Point2 min;
    Point2 max;
};

double polygon_signed_area(std::span<const Point2> vertices);
Point2 polygon_vertex_mean(std::span<const Point2> vertices);
BoundingBox polygon_bbox(std::span<const Point2> vertices);

// Largest pairwise vertex distance.
double polygon_diameter(std::span<const Point2> vertices);

// Distance from p to the polygon boundary if p is outside, else 0.
double distance_outside_space(Point2 p, const Space& s, double tol = kCollinearTol);

double point_segment_distance(Point2 p, const Segment2& seg);

// Unsigned perpendicular distance from p to the infinite line through (a, b).
double point_line_distance(Point2 p, Point2 a, Point2 b);

// Empty result means the polygon is a valid strictly convex CCW space.
std::vector<std::string> validate_space(const Space& s);

}  // namespace xcity
