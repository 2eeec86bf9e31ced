#include "maas/stackelberg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace maas {

namespace {

long count_alternatives(const PathSet& ps) {
    long n = 0;
    for (const auto& group : ps) n += static_cast<long>(group.size()) - 1;
    return n;
}

}  // namespace

StackelbergResult solve_stackelberg(const Network& net, const ScenarioConfig& cfg,
                                    PathgenMethod method, int threads) {
    StackelbergResult res;
    std::vector<double> fares(net.links.size(), 0.0);
    PathSet paths = dummy_only_paths(net);
    std::vector<double> prev_flows(net.links.size(), 0.0);
    FareLpHint lp_hint;

    for (int it = 0; it < cfg.max_outer_iters; ++it) {
        auto t0 = std::chrono::steady_clock::now();
        EquilibriumSolution sol = solve_equilibrium(net, cfg, paths, fares);
        IterationRecord rec;
        rec.iter = it;
        rec.revenue = total_revenue(net, paths, fares, sol);

        FareAdjustResult adj = adjust_fares(net, cfg, paths, sol, fares, &lp_hint);
        double metric = cfg.fw_max_iters == 1 ? adj.last_beta : adj.fare_change;

        UpdateResult upd = update_path_sets(net, cfg, paths, sol, adj.fares, metric,
                                            method, threads);
        rec.regenerated = upd.regenerated;
        rec.od_stats = std::move(upd.stats);
        if (upd.regenerated && upd.changed) paths = std::move(upd.paths);

        rec.beta_star = adj.last_beta;
        rec.fare_norm = adj.fare_change;
        double d2 = 0;
        for (size_t l = 0; l < prev_flows.size(); ++l) {
            double d = sol.link_flows[l] - prev_flows[l];
            d2 += d * d;
        }
        rec.flow_norm = std::sqrt(d2);
        rec.paths_total = count_alternatives(paths);
        prev_flows = sol.link_flows;
        fares = std::move(adj.fares);
        rec.duration_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        res.trace.push_back(std::move(rec));
        res.iterations = it + 1;

        if (metric < cfg.beta_converge_threshold && upd.regenerated && !upd.changed) {
            res.converged = true;
            break;
        }
    }

    res.solution = solve_equilibrium(net, cfg, paths, fares);
    res.traveler_payoff = traveler_payoff(net, res.solution);
    res.unserved = unserved_demand(net, paths, res.solution);
    res.fares = std::move(fares);
    res.paths = std::move(paths);
    return res;
}

MarketSummary summarize(const Network& net, const StackelbergResult& result) {
    constexpr double kOperated = 1e-3;
    MarketSummary ms;
    auto row = [&](const std::string& op) -> OperatorSummary& {
        for (auto& r : ms.operators)
            if (r.op == op) return r;
        ms.operators.push_back({op, 0, 0, 0, 0});
        return ms.operators.back();
    };
    for (size_t l = 0; l < net.links.size(); ++l) {
        const Link& lk = net.links[l];
        if (!is_priceable(lk.kind)) continue;
        OperatorSummary& r = row(lk.op);
        double x = result.solution.link_flows[l];
        r.flow += x;
        r.revenue += result.fares[l] * x;
        if (x > kOperated) ++r.links_operated;
    }
    for (size_t i = 0; i < net.zones.size(); ++i) {
        double out = 0;
        for (int l : net.zone_out[i]) out += result.solution.link_flows[l];
        if (out > kOperated) ++row(net.zones[i].op).zones_operated;
    }
    for (const auto& r : ms.operators) ms.revenue += r.revenue;
    ms.traveler_payoff = result.traveler_payoff;
    ms.unserved = result.unserved;
    return ms;
}

}  // namespace maas
