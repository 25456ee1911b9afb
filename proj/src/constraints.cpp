#include "xcity/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xcity {

double SacsResidual::max_abs_delta() const {
    double m = 0.0;
    for (double d : deltas) m = std::max(m, std::abs(d));
    return m;
}

double SacsResidual::max_margin() const {
    double m = 0.0;
    for (double g : orientation_margins) m = std::max(m, g);
    return m;
}

void SacsResidual::append(const SacsResidual& other) {
    deltas.insert(deltas.end(), other.deltas.begin(), other.deltas.end());
    orientation_margins.insert(orientation_margins.end(), other.orientation_margins.begin(),
                               other.orientation_margins.end());
}

SacsResidual sacs_residual(const RoadAsset& asset, std::span<const Point2> coords) {
    if (coords.size() != asset.nodes.size()) {
        throw std::invalid_argument("sacs_residual: coordinate count mismatch for '" + asset.id + "'");
    }
    SacsResidual out;
    const std::size_t n = asset.nodes.size();
    if (n < 2) return out;

    out.deltas.push_back(distance_sq(coords[0], coords[1]) -
                         distance_sq(asset.nodes[0], asset.nodes[1]));
    for (std::size_t k = 2; k < n; ++k) {
        out.deltas.push_back(distance_sq(coords[0], coords[k]) -
                             distance_sq(asset.nodes[0], asset.nodes[k]));
        out.deltas.push_back(distance_sq(coords[1], coords[k]) -
                             distance_sq(asset.nodes[1], asset.nodes[k]));

        const OrientationSign original =
            orientation_sign(asset.nodes[0], asset.nodes[1], asset.nodes[k]);
        if (original == OrientationSign::LNR) {
            // A rigid motion keeps collinear triples collinear; the orientation
            // constraint is vacuous there.
            out.orientation_margins.push_back(0.0);
            continue;
        }
        const double mapped = orientation(coords[0], coords[1], coords[k]);
        const double sign = original == OrientationSign::CCW ? -1.0 : 1.0;
        out.orientation_margins.push_back(sign * mapped);
    }
    return out;
}

std::vector<CacsViolation> cacs_pairs(std::span<const RoadAsset> assets) {
    std::vector<CacsViolation> out;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            for (std::size_t p = 0; p < assets[i].segments.size(); ++p) {
                for (std::size_t q = 0; q < assets[j].segments.size(); ++q) {
                    out.push_back({i, p, j, q});
                }
            }
        }
    }
    return out;
}

namespace {

Segment2 world_segment(const RoadAsset& asset, std::span<const Point2> coords, std::size_t seg) {
    const auto [a, b] = asset.segments[seg];
    return {coords[a], coords[b]};
}

}  // namespace

std::vector<CacsViolation> cacs_check(std::span<const RoadAsset> assets,
                                      std::span<const std::vector<Point2>> world, double eps) {
    if (world.size() != assets.size()) {
        throw std::invalid_argument("cacs_check: world coordinate count mismatch");
    }
    std::vector<CacsViolation> out;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t j = i + 1; j < assets.size(); ++j) {
            for (std::size_t p = 0; p < assets[i].segments.size(); ++p) {
                const Segment2 sp = world_segment(assets[i], world[i], p);
                for (std::size_t q = 0; q < assets[j].segments.size(); ++q) {
                    const Segment2 sq = world_segment(assets[j], world[j], q);
                    if (!segments_disjoint(sp, sq, eps)) out.push_back({i, p, j, q});
                }
            }
        }
    }
    return out;
}

std::vector<ContainmentViolation> containment_check(std::span<const RoadAsset> assets,
                                                    std::span<const std::vector<Point2>> world,
                                                    const Space& space) {
    if (world.size() != assets.size()) {
        throw std::invalid_argument("containment_check: world coordinate count mismatch");
    }
    std::vector<ContainmentViolation> out;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        for (std::size_t k = 0; k < world[i].size(); ++k) {
            if (!point_in_space(world[i][k], space)) out.push_back({i, k});
        }
    }
    return out;
}

namespace {

std::int64_t choose2(std::int64_t n) { return n >= 2 ? n * (n - 1) / 2 : 0; }

}  // namespace

ConstraintCounts count_constraints(std::span<const RoadAsset> assets, Phase phase) {
    ConstraintCounts c;
    std::int64_t total_segments = 0;
    std::int64_t intra_pairs = 0;
    std::vector<std::int64_t> boundary_counts;
    for (const RoadAsset& a : assets) {
        const auto n = static_cast<std::int64_t>(a.nodes.size());
        const auto l = static_cast<std::int64_t>(a.segments.size());
        c.dist += 2 * n - 3;
        c.orient += n - 2;
        total_segments += l;
        intra_pairs += choose2(l);
        boundary_counts.push_back(static_cast<std::int64_t>(boundary_nodes(a).size()));
    }
    c.cacs_ineq = 2 * (choose2(total_segments) - intra_pairs);
    c.cacs_bin = c.cacs_ineq;

    if (phase == Phase::Phase2) {
        std::int64_t candidates = 0;
        for (std::size_t i = 0; i < boundary_counts.size(); ++i) {
            for (std::size_t j = i + 1; j < boundary_counts.size(); ++j) {
                candidates += boundary_counts[i] * boundary_counts[j];
            }
        }
        const auto num_assets = static_cast<std::int64_t>(assets.size());
        c.conn_ineq = 2 * candidates * (total_segments - 2);
        c.conn_bin = choose2(num_assets) + candidates + 2 * candidates * (total_segments - 2);
    }
    return c;
}

namespace {

// Collinear segments that do not overlap are, by the sign-product test,
// still counted as colliding; flag them so the user can nudge the layout.
bool collinear_non_overlapping(const Segment2& p, const Segment2& q) {
    if (orientation_sign(p.a, p.b, q.a) != OrientationSign::LNR ||
        orientation_sign(p.a, p.b, q.b) != OrientationSign::LNR) {
        return false;
    }
    const Point2 d = p.b - p.a;
    const double len_sq = d.x * d.x + d.y * d.y;
    if (len_sq <= 0.0) return false;
    const double t0 = ((q.a.x - p.a.x) * d.x + (q.a.y - p.a.y) * d.y) / len_sq;
    const double t1 = ((q.b.x - p.a.x) * d.x + (q.b.y - p.a.y) * d.y) / len_sq;
    return std::max(t0, t1) < 0.0 || std::min(t0, t1) > 1.0;
}

}  // namespace

FeasibilityReport feasibility_report(std::span<const RoadAsset> assets,
                                     std::span<const std::vector<Point2>> world, const Space& space,
                                     double eps, double delta_tol) {
    FeasibilityReport report;
    for (std::size_t i = 0; i < assets.size(); ++i) {
        report.sacs.append(sacs_residual(assets[i], world[i]));
    }
    report.cacs_violations = cacs_check(assets, world, eps);
    report.containment_violations = containment_check(assets, world, space);

    for (const CacsViolation& v : report.cacs_violations) {
        const Segment2 sp = world_segment(assets[v.asset_a], world[v.asset_a], v.segment_a);
        const Segment2 sq = world_segment(assets[v.asset_b], world[v.asset_b], v.segment_b);
        if (collinear_non_overlapping(sp, sq)) {
            report.warnings.push_back(
                "segments " + assets[v.asset_a].id + "#" + std::to_string(v.segment_a + 1) +
                " and " + assets[v.asset_b].id + "#" + std::to_string(v.segment_b + 1) +
                " are collinear but not overlapping; counted as colliding - rotate or move one "
                "asset slightly");
        }
    }

    report.feasible = report.cacs_violations.empty() && report.containment_violations.empty() &&
                      report.sacs.max_abs_delta() <= delta_tol &&
                      report.sacs.max_margin() <= delta_tol;
    return report;
}

std::vector<std::vector<Point2>> world_in_order(std::span<const RoadAsset> assets,
                                                const Placement& placement) {
    std::vector<std::vector<Point2>> out;
    out.reserve(assets.size());
    for (const RoadAsset& a : assets) {
        auto it = placement.world_nodes.find(a.id);
        if (it == placement.world_nodes.end()) {
            throw std::invalid_argument("placement has no coordinates for asset '" + a.id + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

FeasibilityReport feasibility_report(std::span<const RoadAsset> assets, const Placement& placement,
                                     const Space& space, double eps, double delta_tol) {
    return feasibility_report(assets, world_in_order(assets, placement), space, eps, delta_tol);
}

}  // namespace xcity
