#pragma once

#include <vector>

#include "maas/network.hpp"

namespace maas {

struct Path {
    std::vector<int> nodes;
    std::vector<int> links;
};

// paths[od] lists the alternatives of one demand group; slot 0 is the
// opt-out path made of that group's dummy link
using PathSet = std::vector<std::vector<Path>>;

PathSet dummy_only_paths(const Network& net);

// congestion delays implied by the capacity multipliers
struct Delays {
    std::vector<double> af;  // per link, used on fixed routes
    std::vector<double> nm;  // per zone, used on its outbound services
};

Delays zero_delays(const Network& net);
double link_delay(const Network& net, const Delays& d, int link);

// alpha_t (t + D + p) + alpha_c (cbar - p); cbar is c/w on a fixed route
// and m + q/z on an on-demand ride
double link_disutility(const Network& net, const ScenarioConfig& cfg, int link,
                       const std::vector<double>& fares, const Delays& delays);

double path_generalized_cost(const Network& net, const ScenarioConfig& cfg, const Path& p,
                             const std::vector<double>& fares, const Delays& delays);

// sum of link disutilities at zero delay; the exponent driving choice
double path_systematic_disutility(const Network& net, const ScenarioConfig& cfg, const Path& p,
                                  const std::vector<double>& fares);

// alpha_t U minus the delay-free disutility of the path
double path_surplus(const Network& net, const ScenarioConfig& cfg, int od, const Path& p,
                    const std::vector<double>& fares);
double path_surplus_clipped(const Network& net, const ScenarioConfig& cfg, int od, const Path& p,
                            const std::vector<double>& fares);

struct EquilibriumSolution {
    std::vector<std::vector<double>> flows;  // aligned with the path set
    std::vector<double> lnB;                 // per demand group
    std::vector<double> lnM_af;              // per link, 0 off fixed routes
    std::vector<double> lnM_nm;              // per zone
    std::vector<double> link_flows;          // per link
    std::vector<double> lagrangian;          // dual objective after each sweep
    int sweeps = 0;
    bool converged = false;
};

// Clipped multiplicative balancing: every capacity factor starts at 1 and
// only shrinks, demand factors are free.  Converges on the L2 change of
// the path flow vector.  Throws if max_sweeps is exhausted.
EquilibriumSolution solve_equilibrium(const Network& net, const ScenarioConfig& cfg,
                                      const PathSet& paths, const std::vector<double>& fares,
                                      int max_sweeps = 200000);

Delays delays_from(const Network& net, const ScenarioConfig& cfg,
                   const EquilibriumSolution& sol);

// traveler expected payoff of each demand group, -ln B_s
std::vector<double> group_utilities(const EquilibriumSolution& sol);

struct OperatorDecisions {
    std::vector<double> y;  // per link, fixed route open share: flow / w
    std::vector<double> v;  // per zone, fleet share: outbound flow / z
};

// shares must land in [0, 1 + tol]; anything above signals an infeasible
// solution and throws
OperatorDecisions operator_decisions(const Network& net, const EquilibriumSolution& sol,
                                     double tol = 1e-6);

struct PathCostBreakdown {
    double T = 0;           // traveler side: times, delays, fares
    double C = 0;           // operator side: resource costs net of fares
    double a = 0;           // trip surplus, delay free
    double disutility = 0;  // alpha_t T + alpha_c C
};

PathCostBreakdown path_cost_breakdown(const Network& net, const ScenarioConfig& cfg, int od,
                                      const Path& p, const std::vector<double>& fares,
                                      const Delays& delays);

// perceived travel burden: times, congestion delays, fares
double traveler_cost(const Network& net, const ScenarioConfig& cfg, const Path& p,
                     const std::vector<double>& fares, const Delays& delays);
// resource cost net of fares collected
double operator_cost(const Network& net, const Path& p, const std::vector<double>& fares);

struct Multipliers {
    std::vector<double> gamma;   // per link, w ln M on fixed routes
    std::vector<double> pi;      // per zone, z ln M
    std::vector<double> mu;      // per link, unit price of fixed route capacity
    std::vector<double> lambda;  // per zone, unit price of fleet capacity
};

Multipliers recover_multipliers(const Network& net, const ScenarioConfig& cfg,
                                const EquilibriumSolution& sol);

struct KktReport {
    double max_stationarity = 0;   // |ln f + alpha_t T + alpha_c C + u_s|
    double max_logit_residual = 0; // |f - d * softmax share|
    double max_cap_excess = 0;     // fixed route flow above w
    double max_zone_excess = 0;    // zone outbound flow above z
    double max_demand_gap = 0;     // |group flow - d|
    double max_cs_af = 0;          // binding factor with slack capacity
    double max_cs_nm = 0;
};

KktReport kkt_report(const Network& net, const ScenarioConfig& cfg, const PathSet& paths,
                     const std::vector<double>& fares, const EquilibriumSolution& sol);

double total_revenue(const Network& net, const PathSet& paths,
                     const std::vector<double>& fares, const EquilibriumSolution& sol);
double unserved_demand(const Network& net, const PathSet& paths,
                       const EquilibriumSolution& sol);
// aggregate traveler expected payoff, sum of d_s u_s
double traveler_payoff(const Network& net, const EquilibriumSolution& sol);

}  // namespace maas
