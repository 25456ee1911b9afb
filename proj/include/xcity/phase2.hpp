#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xcity/phase1.hpp"

namespace xcity {

// Straight connection between boundary nodes of two distinct placed assets.
struct TransitionCandidate {
    std::string from_asset;
    std::size_t from_node = 0;
    std::string to_asset;
    std::size_t to_node = 0;
};

using AssetPair = std::pair<std::string, std::string>;

struct ConnectivityResult {
    int C = 0;
    std::vector<AssetPair> connected_pairs;
    std::map<AssetPair, TransitionCandidate> chosen_transitions;
    Placement placement;
    std::vector<std::string> warnings;
};

// Full cross product of boundary nodes over distinct asset pairs, in
// (pair input order, from-node, to-node) order.
std::vector<TransitionCandidate> transition_candidates(std::span<const RoadAsset> assets,
                                                       const Placement& placement);

// (asset index, segment index) pairs the transition must stay disjoint from:
// everything except the segments touching one of its own endpoint nodes.
std::vector<std::pair<std::size_t, std::size_t>> candidate_blockers(
    std::span<const RoadAsset> assets, const TransitionCandidate& c);

// True iff the placed transition segment is non-degenerate and disjoint from
// every blocker segment. A degenerate (coincident-endpoint) transition is
// invalid and appends a warning when a sink is supplied.
bool candidate_valid(const TransitionCandidate& c, std::span<const RoadAsset> assets,
                     const Placement& placement, double eps = kDefaultEps,
                     std::vector<std::string>* warnings = nullptr);

// Exact connectivity of a fixed feasible placement: a pair is connected iff
// at least one of its candidates is valid; the first valid candidate is the
// chosen transition. Throws std::invalid_argument on an infeasible placement.
ConnectivityResult direct_connectivity(std::span<const RoadAsset> assets,
                                       const Placement& placement, const Space& space,
                                       double eps = kDefaultEps,
                                       double delta_tol = kDefaultDeltaTol);

// Anneal poses starting from a feasible arrangement to raise C; never returns
// a placement that is infeasible or has lower C than the initial one. Ties on
// C prefer the smaller total transition length.
ConnectivityResult optimize_connectivity(std::span<const RoadAsset> assets,
                                         const Placement& initial, const Space& space,
                                         const SearchConfig& config, double eps = kDefaultEps,
                                         double delta_tol = kDefaultDeltaTol);

// Ground-truth maximum C over the pose grid; -1 when no grid placement is
// feasible. Same size caps as oracle_search_placement.
int oracle_connectivity_max(std::span<const RoadAsset> assets, const Space& space,
                            const GridSpec& grid, double eps = kDefaultEps,
                            double delta_tol = kDefaultDeltaTol);

}  // namespace xcity
