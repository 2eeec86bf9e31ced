#pragma once

#include <string>
#include <vector>

#include "maas/fare_opt.hpp"
#include "maas/pathgen.hpp"

namespace maas {

struct IterationRecord {
    int iter = 0;
    double revenue = 0;    // collected at this iteration's equilibrium, pre adjustment
    double beta_star = 0;
    double flow_norm = 0;  // L2 link flow change against the previous iteration
    double fare_norm = 0;  // L2 fare move made by the adjustment
    bool regenerated = false;
    long paths_total = 0;  // alternatives excluding the opt-out slots
    std::vector<GenStats> od_stats;  // per demand group, empty unless regenerated
    double duration_ms = 0;
};

struct StackelbergResult {
    std::vector<double> fares;
    PathSet paths;
    EquilibriumSolution solution;  // equilibrium at the final fares and paths
    std::vector<IterationRecord> trace;
    double traveler_payoff = 0;    // at the final equilibrium
    double unserved = 0;           // opt-out flow at the final equilibrium
    int iterations = 0;
    bool converged = false;
};

// Bilevel loop: equilibrium, fare adjustment, then a conditional path
// regeneration at the new fares and current delays.  Regeneration runs
// when the step was large (paths went stale) or nearly zero (convergence
// must be confirmed); the loop ends when a near-zero step regenerates an
// unchanged path set.  Hitting max_outer_iters leaves converged false.
StackelbergResult solve_stackelberg(const Network& net, const ScenarioConfig& cfg,
                                    PathgenMethod method = PathgenMethod::Exhaustive,
                                    int threads = 1);

struct OperatorSummary {
    std::string op;
    int links_operated = 0;  // carrying more than the reporting threshold
    int zones_operated = 0;
    double flow = 0;         // summed over the operator's service links
    double revenue = 0;
};

struct MarketSummary {
    std::vector<OperatorSummary> operators;
    double revenue = 0;
    double traveler_payoff = 0;
    double unserved = 0;
};

// Per-operator aggregates of the final state; a link or zone counts as
// operated when its flow exceeds 1e-3.
MarketSummary summarize(const Network& net, const StackelbergResult& result);

}  // namespace maas
