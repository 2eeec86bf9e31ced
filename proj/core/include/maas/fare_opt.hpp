#pragma once

#include <vector>

#include "maas/equilibrium.hpp"
#include "maas/simplex.hpp"

namespace maas {

double path_fare_total(const Network& net, const Path& p, const std::vector<double>& fares);

// Traveler response frozen at one equilibrium: flows react to fare moves
// through the closed form f_r(p) = f0_r exp(-k (F_r(p) - F0_r)) with
// k = alpha_t - alpha_c, everything else held fixed.
struct FrozenResponse {
    double k = 0;
    std::vector<std::vector<double>> f0;  // flows at the freeze point
    std::vector<std::vector<double>> F0;  // path fare totals at the freeze point
};

FrozenResponse freeze_response(const Network& net, const ScenarioConfig& cfg,
                               const PathSet& paths, const EquilibriumSolution& sol,
                               const std::vector<double>& fares);

std::vector<std::vector<double>> frozen_flows(const Network& net, const FrozenResponse& fr,
                                              const PathSet& paths,
                                              const std::vector<double>& fares);

double frozen_revenue(const Network& net, const FrozenResponse& fr, const PathSet& paths,
                      const std::vector<double>& fares);

// exact derivative of frozen_revenue in each priceable link fare
std::vector<double> fare_gradient(const Network& net, const FrozenResponse& fr,
                                  const PathSet& paths, const std::vector<double>& fares);

struct FareLpResult {
    std::vector<double> target;  // full-length fare vector, vars replaced by the LP optimum
    double value = 0;
    int vars = 0;
    int rows_used = 0;   // rows in the final restricted program
    int rounds = 0;      // row generation rounds
};

// active cap rows of a previous solve, each one a sorted priceable link id
// set; seeding the next solve with them cuts the row generation short
using FareLpHint = std::vector<std::vector<int>>;

// Direction-finding program: maximize gradient . p' over nonnegative
// priceable fares subject to operator cost floors and per-path fare caps
// bound_multiplier * U - travel time.  Cap rows are brought in lazily.
// Links carrying no current path keep their entry in `fares` untouched.
FareLpResult solve_fare_lp(const Network& net, const ScenarioConfig& cfg, const PathSet& paths,
                           const EquilibriumSolution& sol, const std::vector<double>& grad,
                           const std::vector<double>& fares, FareLpHint* hint = nullptr);

// best step toward the target along the frozen-response revenue, 0 when no
// point of the scan beats staying put
double fare_line_search(const Network& net, const FrozenResponse& fr, const PathSet& paths,
                        const std::vector<double>& current, const std::vector<double>& target);

struct FareAdjustResult {
    std::vector<double> fares;
    std::vector<double> direction;  // last LP target, full fare vector
    double last_beta = 0;
    double fare_change = 0;      // L2 move from the entry fares
    double lp_value = 0;
    double revenue_before = 0;   // frozen-response revenue at the entry fares
    double revenue_after = 0;    // and at the returned fares
    int cycles = 0;
};

// Fare improvement around one equilibrium: response frozen once at entry,
// then up to fw_max_iters rounds of gradient, direction program and line
// search; stops early once the step stalls.
FareAdjustResult adjust_fares(const Network& net, const ScenarioConfig& cfg,
                              const PathSet& paths, const EquilibriumSolution& sol,
                              const std::vector<double>& fares, FareLpHint* hint = nullptr);

}  // namespace maas
