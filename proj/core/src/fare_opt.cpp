#include "maas/fare_opt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace maas {

double path_fare_total(const Network& net, const Path& p, const std::vector<double>& fares) {
    double F = 0;
    for (int l : p.links)
        if (is_priceable(net.links[l].kind)) F += fares[l];
    return F;
}

FrozenResponse freeze_response(const Network& net, const ScenarioConfig& cfg,
                               const PathSet& paths, const EquilibriumSolution& sol,
                               const std::vector<double>& fares) {
    if (sol.flows.size() != paths.size())
        throw std::invalid_argument("solution does not match the path set");
    FrozenResponse fr;
    fr.k = cfg.alpha_t - cfg.alpha_c;
    fr.f0 = sol.flows;
    fr.F0.resize(paths.size());
    for (size_t s = 0; s < paths.size(); ++s) {
        fr.F0[s].resize(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k)
            fr.F0[s][k] = path_fare_total(net, paths[s][k], fares);
    }
    return fr;
}

std::vector<std::vector<double>> frozen_flows(const Network& net, const FrozenResponse& fr,
                                              const PathSet& paths,
                                              const std::vector<double>& fares) {
    std::vector<std::vector<double>> f(paths.size());
    for (size_t s = 0; s < paths.size(); ++s) {
        f[s].resize(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double F = path_fare_total(net, paths[s][k], fares);
            f[s][k] = fr.f0[s][k] * std::exp(-fr.k * (F - fr.F0[s][k]));
        }
    }
    return f;
}

double frozen_revenue(const Network& net, const FrozenResponse& fr, const PathSet& paths,
                      const std::vector<double>& fares) {
    double rev = 0;
    for (size_t s = 0; s < paths.size(); ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double F = path_fare_total(net, paths[s][k], fares);
            rev += fr.f0[s][k] * std::exp(-fr.k * (F - fr.F0[s][k])) * F;
        }
    return rev;
}

std::vector<double> fare_gradient(const Network& net, const FrozenResponse& fr,
                                  const PathSet& paths, const std::vector<double>& fares) {
    std::vector<double> g(net.links.size(), 0.0);
    for (size_t s = 0; s < paths.size(); ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            const Path& p = paths[s][k];
            double F = path_fare_total(net, p, fares);
            double coef =
                fr.f0[s][k] * std::exp(-fr.k * (F - fr.F0[s][k])) * (1.0 - fr.k * F);
            for (int l : p.links)
                if (is_priceable(net.links[l].kind)) g[l] += coef;
        }
    return g;
}

namespace {

struct CapRow {
    std::vector<int> vars;  // ascending
    double rhs;
};

// row generation stops here even if cuts keep arriving; the last vertex is
// still a sound direction for the line search
constexpr int kMaxRounds = 200;

}  // namespace

FareLpResult solve_fare_lp(const Network& net, const ScenarioConfig& cfg, const PathSet& paths,
                           const EquilibriumSolution& sol, const std::vector<double>& grad,
                           const std::vector<double>& fares, FareLpHint* hint) {
    std::vector<char> on_path(net.links.size(), 0);
    for (const auto& group : paths)
        for (const Path& p : group)
            for (int l : p.links)
                if (is_priceable(net.links[l].kind)) on_path[l] = 1;

    std::vector<int> var_link;
    std::vector<int> var_of(net.links.size(), -1);
    for (size_t l = 0; l < net.links.size(); ++l)
        if (on_path[l]) {
            var_of[l] = static_cast<int>(var_link.size());
            var_link.push_back(static_cast<int>(l));
        }
    const int nv = static_cast<int>(var_link.size());

    FareLpResult res;
    res.target = fares;
    res.vars = nv;
    if (nv == 0) return res;

    // operator floors: fare income at the frozen flows covers operating cost
    std::map<std::string, std::pair<std::vector<double>, double>> fr_floor, mod_floor;
    for (int l : net.cap_links) {
        const Link& lk = net.links[l];
        double x = sol.link_flows[l];
        auto& row = fr_floor[lk.op];
        if (row.first.empty()) row.first.assign(nv, 0.0);
        if (var_of[l] >= 0) row.first[var_of[l]] += x;
        row.second += lk.c * x / lk.w;
    }
    for (size_t i = 0; i < net.zones.size(); ++i) {
        const Zone& z = net.zones[i];
        auto& row = mod_floor[z.op];
        if (row.first.empty()) row.first.assign(nv, 0.0);
        double out = 0;
        for (int l : net.zone_out[i]) {
            double x = sol.link_flows[l];
            out += x;
            if (var_of[l] >= 0) row.first[var_of[l]] += x;
            row.second += net.links[l].m * x;
        }
        row.second += z.q * out / z.z;
    }

    std::vector<std::vector<double>> floor_rows;
    std::vector<double> floor_rhs;
    for (auto* group : {&fr_floor, &mod_floor})
        for (auto& [op, row] : *group) {
            if (row.second <= 0) continue;
            floor_rows.push_back(row.first);
            floor_rhs.push_back(row.second);
        }

    // per-path fare caps, deduplicated by their variable set
    std::map<std::vector<int>, double> cap_by_key;
    for (size_t s = 0; s < paths.size(); ++s) {
        for (size_t k = 1; k < paths[s].size(); ++k) {
            const Path& p = paths[s][k];
            std::vector<int> key;
            double tsum = 0;
            for (int l : p.links) {
                tsum += net.links[l].t;
                if (var_of[l] >= 0) key.push_back(var_of[l]);
            }
            if (key.empty()) continue;
            std::sort(key.begin(), key.end());
            double rhs = cfg.bound_multiplier * net.ods[s].utility - tsum;
            auto [it, fresh] = cap_by_key.emplace(std::move(key), rhs);
            if (!fresh && rhs < it->second) it->second = rhs;
        }
    }
    std::vector<CapRow> caps;
    std::map<std::vector<int>, int> cap_index;
    caps.reserve(cap_by_key.size());
    for (auto& [key, rhs] : cap_by_key) {
        cap_index.emplace(key, static_cast<int>(caps.size()));
        caps.push_back({key, rhs});
    }

    // start from each variable's tightest cap, pull in violated rows lazily
    std::vector<int> tightest(nv, -1);
    for (size_t c = 0; c < caps.size(); ++c)
        for (int v : caps[c].vars)
            if (tightest[v] < 0 || caps[c].rhs < caps[tightest[v]].rhs)
                tightest[v] = static_cast<int>(c);
    std::set<int> active;
    for (int v = 0; v < nv; ++v)
        if (tightest[v] >= 0) active.insert(tightest[v]);

    // rows that carried the previous optimum usually carry this one too
    if (hint)
        for (const std::vector<int>& links : *hint) {
            std::vector<int> key;
            key.reserve(links.size());
            for (int l : links) {
                if (var_of[l] < 0) {
                    key.clear();
                    break;
                }
                key.push_back(var_of[l]);
            }
            if (key.empty()) continue;
            std::sort(key.begin(), key.end());
            auto it = cap_index.find(key);
            if (it != cap_index.end()) active.insert(it->second);
        }

    std::vector<double> obj(nv);
    for (int v = 0; v < nv; ++v) obj[v] = grad[var_link[v]];

    std::set<int> ever_added(active.begin(), active.end());
    std::set<int> sticky;
    LpResult lpres;
    for (int round = 1;; ++round) {
        LinearProgram lp;
        lp.objective = obj;
        for (size_t i = 0; i < floor_rows.size(); ++i) {
            lp.A.push_back(floor_rows[i]);
            lp.rhs.push_back(floor_rhs[i]);
            lp.sense.push_back(1);
        }
        for (int c : active) {
            std::vector<double> row(nv, 0.0);
            for (int v : caps[c].vars) row[v] = 1.0;
            lp.A.push_back(std::move(row));
            lp.rhs.push_back(caps[c].rhs);
            lp.sense.push_back(-1);
        }
        lpres = solve_lp(lp);
        if (lpres.status == LpStatus::Infeasible)
            throw std::runtime_error(
                "fare direction program is infeasible: the path fare caps cannot cover "
                "operating costs, increase bound_multiplier");
        if (lpres.status == LpStatus::Unbounded)
            throw std::logic_error("fare direction program cannot be unbounded");

        std::vector<std::pair<double, int>> violated;
        for (size_t c = 0; c < caps.size(); ++c) {
            if (active.count(static_cast<int>(c))) continue;
            double lhs = 0;
            for (int v : caps[c].vars) lhs += lpres.x[v];
            if (lhs > caps[c].rhs + 1e-7) violated.push_back({caps[c].rhs - lhs, c});
        }
        res.rounds = round;
        res.rows_used = static_cast<int>(floor_rows.size() + active.size());
        if (violated.empty() || round >= kMaxRounds) break;

        // retire clearly slack rows so the tableau stays small, but a row that
        // returns after being dropped is pinned for good: letting it oscillate
        // in and out drags the generation loop on for dozens of rounds
        for (auto it = active.begin(); it != active.end();) {
            double lhs = 0;
            for (int v : caps[*it].vars) lhs += lpres.x[v];
            if (!sticky.count(*it) &&
                caps[*it].rhs - lhs > 1e-5 * (1.0 + std::abs(caps[*it].rhs)))
                it = active.erase(it);
            else
                ++it;
        }

        // deepest cut overall plus the deepest one touching each variable
        std::sort(violated.begin(), violated.end());
        std::vector<char> var_covered(nv, 0);
        int taken = 0;
        for (auto& [depth, c] : violated) {
            bool fresh = taken < 50;
            for (int v : caps[c].vars)
                if (!var_covered[v]) fresh = true;
            if (!fresh) continue;
            for (int v : caps[c].vars) var_covered[v] = 1;
            if (!ever_added.insert(c).second) sticky.insert(c);
            active.insert(c);
            ++taken;
        }
    }

    for (int v = 0; v < nv; ++v) res.target[var_link[v]] = lpres.x[v];
    res.value = lpres.value;

    if (hint) {
        hint->clear();
        for (int c : active) {
            double lhs = 0;
            for (int v : caps[c].vars) lhs += lpres.x[v];
            if (caps[c].rhs - lhs > 1e-6 * (1.0 + std::abs(caps[c].rhs))) continue;
            std::vector<int> links;
            links.reserve(caps[c].vars.size());
            for (int v : caps[c].vars) links.push_back(var_link[v]);
            hint->push_back(std::move(links));
        }
    }
    return res;
}

namespace {

// maximize over a bracket, biased left on plateaus so ties resolve to the
// smaller step
template <class F>
double golden_max(F f, double a, double b) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

}  // namespace

double fare_line_search(const Network& net, const FrozenResponse& fr, const PathSet& paths,
                        const std::vector<double>& current, const std::vector<double>& target) {
    std::vector<double> gt, Fc, dl;
    for (size_t s = 0; s < paths.size(); ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double F = path_fare_total(net, paths[s][k], current);
            double Ft = path_fare_total(net, paths[s][k], target);
            gt.push_back(fr.f0[s][k] * std::exp(-fr.k * (F - fr.F0[s][k])));
            Fc.push_back(F);
            dl.push_back(Ft - F);
        }
    if (gt.empty()) return 0;

    auto R = [&](double beta) {
        double r = 0;
        for (size_t i = 0; i < gt.size(); ++i)
            r += gt[i] * std::exp(-fr.k * beta * dl[i]) * (Fc[i] + beta * dl[i]);
        return r;
    };

    const int n = 64;
    std::vector<double> grid(n + 1);
    for (int i = 0; i <= n; ++i) grid[i] = R(static_cast<double>(i) / n);

    std::vector<std::pair<double, double>> cand;  // (beta, R)
    for (int i = 0; i <= n; ++i) {
        bool up = (i == 0) || grid[i] >= grid[i - 1];
        bool down = (i == n) || grid[i] >= grid[i + 1];
        if (!(up && down)) continue;
        cand.push_back({static_cast<double>(i) / n, grid[i]});
        double lo = static_cast<double>(std::max(0, i - 1)) / n;
        double hi = static_cast<double>(std::min(n, i + 1)) / n;
        double b = golden_max(R, lo, hi);
        cand.push_back({b, R(b)});
    }
    std::sort(cand.begin(), cand.end());
    double best_beta = 0, best_val = grid[0];
    for (auto& [beta, val] : cand)
        if (val > best_val) {
            best_val = val;
            best_beta = beta;
        }
    return best_val > grid[0] ? best_beta : 0.0;
}

FareAdjustResult adjust_fares(const Network& net, const ScenarioConfig& cfg,
                              const PathSet& paths, const EquilibriumSolution& sol,
                              const std::vector<double>& fares, FareLpHint* hint) {
    FrozenResponse fr = freeze_response(net, cfg, paths, sol, fares);
    FareAdjustResult res;
    res.revenue_before = frozen_revenue(net, fr, paths, fares);
    std::vector<double> cur = fares;
    for (int cycle = 1; cycle <= cfg.fw_max_iters; ++cycle) {
        std::vector<double> grad = fare_gradient(net, fr, paths, cur);
        FareLpResult lp = solve_fare_lp(net, cfg, paths, sol, grad, cur, hint);
        double beta = fare_line_search(net, fr, paths, cur, lp.target);
        for (size_t l = 0; l < cur.size(); ++l) cur[l] += beta * (lp.target[l] - cur[l]);
        res.last_beta = beta;
        res.lp_value = lp.value;
        res.direction = std::move(lp.target);
        res.cycles = cycle;
        if (beta < cfg.beta_converge_threshold) break;
    }
    double d2 = 0;
    for (size_t l = 0; l < cur.size(); ++l) {
        double d = cur[l] - fares[l];
        d2 += d * d;
    }
    res.revenue_after = frozen_revenue(net, fr, paths, cur);
    res.fares = std::move(cur);
    res.fare_change = std::sqrt(d2);
    return res;
}

}  // namespace maas
