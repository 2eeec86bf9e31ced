#pragma once

#include <vector>

#include "maas/equilibrium.hpp"

namespace maas {

// generation cost of a link at the current fares and delays, clamped at
// zero so shortest path searches stay valid
double generation_link_cost(const Network& net, const ScenarioConfig& cfg, int link,
                            const std::vector<double>& fares, const Delays& delays);

struct PruneResult {
    std::vector<char> node_kept;
    std::vector<char> link_kept;  // dummy links are outside the prune graph
    int nodes_removed = 0;
    int links_removed = 0;
};

// Drops every node and link that cannot lie on a path whose generation
// cost stays within alpha_t * U of the demand group.
PruneResult prune_subnetwork(const Network& net, const ScenarioConfig& cfg, int od,
                             const std::vector<double>& fares, const Delays& delays);

enum class PathgenMethod { Yen, Exhaustive };

struct GenStats {
    int nodes_removed = 0;
    int links_removed = 0;
    int paths_found = 0;
};

// All simple origin->destination paths with generation cost <= alpha_t * U,
// sorted by cost then node sequence.  Both methods return the same list;
// Yen enumerates in cost order, Exhaustive walks the pruned graph with an
// admissible remaining-cost bound.
std::vector<Path> od_paths(const Network& net, const ScenarioConfig& cfg, int od,
                           const std::vector<double>& fares, const Delays& delays,
                           PathgenMethod method, GenStats* stats = nullptr);

// Full path set: slot 0 of each group is the opt-out path, then the
// generated alternatives.  threads > 1 distributes demand groups.
PathSet generate_paths(const Network& net, const ScenarioConfig& cfg,
                       const std::vector<double>& fares, const Delays& delays,
                       PathgenMethod method, int threads = 1,
                       std::vector<GenStats>* stats = nullptr);

struct UpdateResult {
    PathSet paths;
    bool regenerated = false;
    bool changed = false;           // meaningful only when regenerated
    std::vector<GenStats> stats;    // per demand group, empty when skipped
};

// Regenerates every group's path set when the outer change metric is above
// the regeneration threshold or has dropped below the convergence threshold
// (the final check); otherwise hands the current sets back untouched.
// Costs are taken at the given fares plus the delays of the solution.
UpdateResult update_path_sets(const Network& net, const ScenarioConfig& cfg,
                              const PathSet& current, const EquilibriumSolution& sol,
                              const std::vector<double>& fares, double metric,
                              PathgenMethod method, int threads = 1);

}  // namespace maas
