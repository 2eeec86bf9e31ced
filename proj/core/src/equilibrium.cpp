#include "maas/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace maas {

PathSet dummy_only_paths(const Network& net) {
    PathSet ps(net.ods.size());
    for (size_t s = 0; s < net.ods.size(); ++s) {
        Path p;
        p.nodes = {net.ods[s].origin, net.ods[s].dest};
        p.links = {net.ods[s].dummy_link};
        ps[s].push_back(std::move(p));
    }
    return ps;
}

Delays zero_delays(const Network& net) {
    return {std::vector<double>(net.links.size(), 0.0),
            std::vector<double>(net.zones.size(), 0.0)};
}

double link_delay(const Network& net, const Delays& d, int link) {
    const Link& l = net.links[link];
    if (l.kind == LinkKind::FixedRoute) return d.af[link];
    if (l.kind == LinkKind::ModService) return d.nm[l.zone];
    return 0.0;
}

namespace {

double link_cbar(const Network& net, int link) {
    const Link& l = net.links[link];
    if (l.kind == LinkKind::FixedRoute) return l.c / l.w;
    if (l.kind == LinkKind::ModService) {
        const Zone& z = net.zones[l.zone];
        return l.m + z.q / z.z;
    }
    return 0.0;
}

void check_fares(const Network& net, const std::vector<double>& fares) {
    if (fares.size() != net.links.size())
        throw std::invalid_argument("fare vector length differs from link count");
    for (size_t l = 0; l < fares.size(); ++l) {
        if (!(fares[l] >= 0)) throw std::invalid_argument("fares must be nonnegative");
        if (fares[l] != 0 && !is_priceable(net.links[l].kind))
            throw std::invalid_argument("fare on a link that cannot carry one");
    }
}

void check_paths(const Network& net, const PathSet& paths) {
    if (paths.size() != net.ods.size())
        throw std::invalid_argument("path set group count differs from demand group count");
    for (size_t s = 0; s < paths.size(); ++s) {
        const Od& od = net.ods[s];
        if (paths[s].empty() || paths[s][0].links != std::vector<int>{od.dummy_link})
            throw std::invalid_argument("slot 0 of each group must be its opt-out path");
        for (const Path& p : paths[s]) {
            if (p.links.empty() || p.nodes.size() != p.links.size() + 1)
                throw std::invalid_argument("malformed path");
            if (p.nodes.front() != od.origin || p.nodes.back() != od.dest)
                throw std::invalid_argument("path endpoints differ from its demand group");
            for (size_t k = 0; k < p.links.size(); ++k) {
                const Link& l = net.links[p.links[k]];
                if (l.tail != p.nodes[k] || l.head != p.nodes[k + 1])
                    throw std::invalid_argument("path links do not chain");
            }
        }
    }
}

}  // namespace

double link_disutility(const Network& net, const ScenarioConfig& cfg, int link,
                       const std::vector<double>& fares, const Delays& delays) {
    const Link& l = net.links[link];
    double p = is_priceable(l.kind) ? fares[link] : 0.0;
    return cfg.alpha_t * (l.t + link_delay(net, delays, link) + p) +
           cfg.alpha_c * (link_cbar(net, link) - p);
}

double path_generalized_cost(const Network& net, const ScenarioConfig& cfg, const Path& p,
                             const std::vector<double>& fares, const Delays& delays) {
    double c = 0;
    for (int l : p.links) c += link_disutility(net, cfg, l, fares, delays);
    return c;
}

double path_systematic_disutility(const Network& net, const ScenarioConfig& cfg, const Path& p,
                                  const std::vector<double>& fares) {
    double c = 0;
    for (int l : p.links) {
        const Link& lk = net.links[l];
        double fare = is_priceable(lk.kind) ? fares[l] : 0.0;
        c += cfg.alpha_t * (lk.t + fare) + cfg.alpha_c * (link_cbar(net, l) - fare);
    }
    return c;
}

double path_surplus(const Network& net, const ScenarioConfig& cfg, int od, const Path& p,
                    const std::vector<double>& fares) {
    return cfg.alpha_t * net.ods[od].utility - path_systematic_disutility(net, cfg, p, fares);
}

double path_surplus_clipped(const Network& net, const ScenarioConfig& cfg, int od, const Path& p,
                            const std::vector<double>& fares) {
    return std::max(0.0, path_surplus(net, cfg, od, p, fares));
}

EquilibriumSolution solve_equilibrium(const Network& net, const ScenarioConfig& cfg,
                                      const PathSet& paths, const std::vector<double>& fares,
                                      int max_sweeps) {
    check_fares(net, fares);
    check_paths(net, paths);

    const int n_od = static_cast<int>(paths.size());
    std::vector<int> od_first(n_od + 1, 0);
    for (int s = 0; s < n_od; ++s) od_first[s + 1] = od_first[s] + static_cast<int>(paths[s].size());
    const int n_paths = od_first[n_od];

    std::vector<double> V(n_paths);
    std::vector<std::vector<int>> cap_inc(net.cap_links.size());
    std::vector<std::vector<int>> zone_inc(net.zones.size());
    std::vector<int> cap_slot(net.links.size(), -1);
    for (size_t k = 0; k < net.cap_links.size(); ++k) cap_slot[net.cap_links[k]] = static_cast<int>(k);

    for (int s = 0, r = 0; s < n_od; ++s)
        for (const Path& p : paths[s]) {
            V[r] = path_systematic_disutility(net, cfg, p, fares);
            for (int l : p.links) {
                if (cap_slot[l] >= 0) cap_inc[cap_slot[l]].push_back(r);
                if (net.links[l].kind == LinkKind::ModService)
                    zone_inc[net.links[l].zone].push_back(r);
            }
            ++r;
        }

    std::vector<double> lnB(n_od, 0.0);
    std::vector<double> lnM_cap(net.cap_links.size(), 0.0);
    std::vector<double> lnM_nm(net.zones.size(), 0.0);
    std::vector<double> f(n_paths), fprev(n_paths);
    for (int r = 0; r < n_paths; ++r) f[r] = std::exp(-V[r]);
    for (int s = 0; s < n_od; ++s)
        if (net.ods[s].demand == 0) {
            lnB[s] = -std::numeric_limits<double>::infinity();
            for (int r = od_first[s]; r < od_first[s + 1]; ++r) f[r] = 0;
        }

    EquilibriumSolution sol;
    double change = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        fprev = f;
        for (size_t k = 0; k < net.cap_links.size(); ++k) {
            double flow = 0;
            for (int r : cap_inc[k]) flow += f[r];
            if (flow <= 0) continue;
            double target = std::min(0.0, lnM_cap[k] + std::log(net.links[net.cap_links[k]].w) -
                                              std::log(flow));
            double delta = target - lnM_cap[k];
            if (delta == 0) continue;
            lnM_cap[k] = target;
            double scale = std::exp(delta);
            for (int r : cap_inc[k]) f[r] *= scale;
        }
        for (size_t i = 0; i < zone_inc.size(); ++i) {
            double flow = 0;
            for (int r : zone_inc[i]) flow += f[r];
            if (flow <= 0) continue;
            double target =
                std::min(0.0, lnM_nm[i] + std::log(net.zones[i].z) - std::log(flow));
            double delta = target - lnM_nm[i];
            if (delta == 0) continue;
            lnM_nm[i] = target;
            double scale = std::exp(delta);
            for (int r : zone_inc[i]) f[r] *= scale;
        }
        for (int s = 0; s < n_od; ++s) {
            if (net.ods[s].demand == 0) continue;
            double flow = 0;
            for (int r = od_first[s]; r < od_first[s + 1]; ++r) flow += f[r];
            double delta = std::log(net.ods[s].demand) - std::log(flow);
            lnB[s] += delta;
            double scale = std::exp(delta);
            for (int r = od_first[s]; r < od_first[s + 1]; ++r) f[r] *= scale;
        }

        double total = 0, diff2 = 0;
        for (int r = 0; r < n_paths; ++r) {
            total += f[r];
            double d = f[r] - fprev[r];
            diff2 += d * d;
        }
        double lag = -total;
        for (int s = 0; s < n_od; ++s)
            if (net.ods[s].demand > 0) lag += net.ods[s].demand * lnB[s];
        for (size_t k = 0; k < net.cap_links.size(); ++k)
            lag += net.links[net.cap_links[k]].w * lnM_cap[k];
        for (size_t i = 0; i < lnM_nm.size(); ++i) lag += net.zones[i].z * lnM_nm[i];
        sol.lagrangian.push_back(lag);

        change = std::sqrt(diff2);
        if (change <= cfg.eps_balancing) {
            ++sweep;
            break;
        }
    }
    if (change > cfg.eps_balancing)
        throw std::runtime_error("balancing did not converge in " + std::to_string(max_sweeps) +
                                 " sweeps, last flow change " + std::to_string(change));

    // recompute flows from the factors so the output is exactly consistent
    std::vector<double> lnf(n_paths);
    for (int s = 0; s < n_od; ++s)
        for (int r = od_first[s]; r < od_first[s + 1]; ++r) lnf[r] = -V[r] + lnB[s];
    for (size_t k = 0; k < cap_inc.size(); ++k)
        for (int r : cap_inc[k]) lnf[r] += lnM_cap[k];
    for (size_t i = 0; i < zone_inc.size(); ++i)
        for (int r : zone_inc[i]) lnf[r] += lnM_nm[i];

    sol.flows.resize(n_od);
    sol.link_flows.assign(net.links.size(), 0.0);
    for (int s = 0, r = 0; s < n_od; ++s) {
        sol.flows[s].resize(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k, ++r) {
            double fr = std::exp(lnf[r]);
            sol.flows[s][k] = fr;
            for (int l : paths[s][k].links) sol.link_flows[l] += fr;
        }
    }
    sol.lnB = std::move(lnB);
    sol.lnM_af.assign(net.links.size(), 0.0);
    for (size_t k = 0; k < net.cap_links.size(); ++k) sol.lnM_af[net.cap_links[k]] = lnM_cap[k];
    sol.lnM_nm = std::move(lnM_nm);
    sol.sweeps = sweep;
    sol.converged = true;
    return sol;
}

Delays delays_from(const Network& net, const ScenarioConfig& cfg,
                   const EquilibriumSolution& sol) {
    Delays d = zero_delays(net);
    // + 0.0 turns the -0.0 of a slack factor into a plain zero
    for (int l : net.cap_links) d.af[l] = -sol.lnM_af[l] / cfg.alpha_t + 0.0;
    for (size_t i = 0; i < net.zones.size(); ++i)
        d.nm[i] = -sol.lnM_nm[i] / cfg.alpha_t + 0.0;
    return d;
}

std::vector<double> group_utilities(const EquilibriumSolution& sol) {
    std::vector<double> u(sol.lnB.size());
    for (size_t s = 0; s < u.size(); ++s) u[s] = -sol.lnB[s];
    return u;
}

OperatorDecisions operator_decisions(const Network& net, const EquilibriumSolution& sol,
                                     double tol) {
    OperatorDecisions d;
    d.y.assign(net.links.size(), 0.0);
    d.v.assign(net.zones.size(), 0.0);
    for (int l : net.cap_links) {
        d.y[l] = sol.link_flows[l] / net.links[l].w;
        if (d.y[l] > 1 + tol)
            throw std::runtime_error("fixed route " + net.node_names[net.links[l].tail] + "->" +
                                     net.node_names[net.links[l].head] +
                                     " is loaded past capacity");
    }
    for (size_t i = 0; i < net.zones.size(); ++i) {
        double out = 0;
        for (int l : net.zone_out[i]) out += sol.link_flows[l];
        d.v[i] = out / net.zones[i].z;
        if (d.v[i] > 1 + tol)
            throw std::runtime_error("zone " + net.zones[i].id + " is loaded past its fleet");
    }
    return d;
}

PathCostBreakdown path_cost_breakdown(const Network& net, const ScenarioConfig& cfg, int od,
                                      const Path& p, const std::vector<double>& fares,
                                      const Delays& delays) {
    PathCostBreakdown b;
    b.T = traveler_cost(net, cfg, p, fares, delays);
    b.C = operator_cost(net, p, fares);
    b.a = path_surplus(net, cfg, od, p, fares);
    b.disutility = cfg.alpha_t * b.T + cfg.alpha_c * b.C;
    return b;
}

double traveler_cost(const Network& net, const ScenarioConfig& cfg, const Path& p,
                     const std::vector<double>& fares, const Delays& delays) {
    (void)cfg;
    double c = 0;
    for (int l : p.links) {
        c += net.links[l].t + link_delay(net, delays, l);
        if (is_priceable(net.links[l].kind)) c += fares[l];
    }
    return c;
}

double operator_cost(const Network& net, const Path& p, const std::vector<double>& fares) {
    double c = 0;
    for (int l : p.links) {
        c += link_cbar(net, l);
        if (is_priceable(net.links[l].kind)) c -= fares[l];
    }
    return c;
}

Multipliers recover_multipliers(const Network& net, const ScenarioConfig& cfg,
                                const EquilibriumSolution& sol) {
    Multipliers m;
    m.gamma.assign(net.links.size(), 0.0);
    m.mu.assign(net.links.size(), 0.0);
    m.pi.assign(net.zones.size(), 0.0);
    m.lambda.assign(net.zones.size(), 0.0);
    for (int l : net.cap_links) {
        const Link& lk = net.links[l];
        m.gamma[l] = lk.w * sol.lnM_af[l];
        m.mu[l] = (cfg.alpha_c * lk.c + m.gamma[l]) / lk.w;
    }
    for (size_t i = 0; i < net.zones.size(); ++i) {
        const Zone& z = net.zones[i];
        m.pi[i] = z.z * sol.lnM_nm[i];
        m.lambda[i] = (cfg.alpha_c * z.q + m.pi[i]) / z.z;
    }
    return m;
}

KktReport kkt_report(const Network& net, const ScenarioConfig& cfg, const PathSet& paths,
                     const std::vector<double>& fares, const EquilibriumSolution& sol) {
    check_fares(net, fares);
    KktReport rep;
    Delays delays = delays_from(net, cfg, sol);
    for (size_t s = 0; s < paths.size(); ++s) {
        double group_flow = 0;
        std::vector<double> neg_u(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double fr = sol.flows[s][k];
            group_flow += fr;
            double T = traveler_cost(net, cfg, paths[s][k], fares, delays);
            double C = operator_cost(net, paths[s][k], fares);
            neg_u[k] = cfg.alpha_t * T + cfg.alpha_c * C;
            if (net.ods[s].demand == 0) continue;
            double resid = std::abs(std::log(fr) + neg_u[k] - sol.lnB[s]);
            rep.max_stationarity = std::max(rep.max_stationarity, resid);
        }
        rep.max_demand_gap = std::max(rep.max_demand_gap, std::abs(group_flow - net.ods[s].demand));
        double denom = 0;
        for (double nu : neg_u) denom += std::exp(-nu);
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double share = net.ods[s].demand * std::exp(-neg_u[k]) / denom;
            rep.max_logit_residual =
                std::max(rep.max_logit_residual, std::abs(sol.flows[s][k] - share));
        }
    }
    for (int l : net.cap_links) {
        double excess = sol.link_flows[l] - net.links[l].w;
        rep.max_cap_excess = std::max(rep.max_cap_excess, excess);
        if (sol.lnM_af[l] < -1e-9)
            rep.max_cs_af = std::max(rep.max_cs_af, net.links[l].w - sol.link_flows[l]);
    }
    for (size_t i = 0; i < net.zones.size(); ++i) {
        double out = 0;
        for (int l : net.zone_out[i]) out += sol.link_flows[l];
        rep.max_zone_excess = std::max(rep.max_zone_excess, out - net.zones[i].z);
        if (sol.lnM_nm[i] < -1e-9)
            rep.max_cs_nm = std::max(rep.max_cs_nm, net.zones[i].z - out);
    }
    return rep;
}

double total_revenue(const Network& net, const PathSet& paths,
                     const std::vector<double>& fares, const EquilibriumSolution& sol) {
    double rev = 0;
    for (size_t s = 0; s < paths.size(); ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double fare_sum = 0;
            for (int l : paths[s][k].links)
                if (is_priceable(net.links[l].kind)) fare_sum += fares[l];
            rev += sol.flows[s][k] * fare_sum;
        }
    return rev;
}

double unserved_demand(const Network& net, const PathSet& paths,
                       const EquilibriumSolution& sol) {
    (void)net;
    (void)paths;
    double u = 0;
    for (const auto& group : sol.flows) u += group[0];
    return u;
}

double traveler_payoff(const Network& net, const EquilibriumSolution& sol) {
    double p = 0;
    for (size_t s = 0; s < net.ods.size(); ++s) {
        if (net.ods[s].demand == 0) continue;
        p -= net.ods[s].demand * sol.lnB[s];
    }
    return p;
}

}  // namespace maas
