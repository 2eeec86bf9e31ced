#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

// Armijo backtracking on a concave objective: x <- proj(x + step * grad),
// halving the step until the value improves.  proj and value are lambdas.
template <typename Value, typename Project>
bool ascend(std::vector<double>& x, const std::vector<double>& grad, double& step,
            Value value, Project project, double floor_step = 1e-18) {
    double base = value(x);
    double g2 = 0;
    for (double g : grad) g2 += g * g;
    while (step >= floor_step) {
        std::vector<double> trial = x;
        for (size_t i = 0; i < x.size(); ++i) trial[i] += step * grad[i];
        project(trial);
        if (value(trial) >= base + 1e-12 * step * g2 - 1e-15) {
            x = std::move(trial);
            step *= 1.3;
            return true;
        }
        step *= 0.5;
    }
    return false;
}

}  // namespace

MatchingOptimum solve_matching(const maas::Matrix& a, std::vector<double> row_caps,
                               std::vector<double> col_caps, double alpha, int max_iters,
                               double tol) {
    const int n = static_cast<int>(a.size());
    const int m = n ? static_cast<int>(a[0].size()) : 0;
    if (row_caps.empty()) row_caps.assign(n, 1.0);
    if (col_caps.empty()) col_caps.assign(m, 1.0);

    // duals stacked as [v; u], both projected onto >= 0; the start splits
    // each entry's worth between its row and column so no exponent is
    // positive before the first step
    std::vector<double> d(n + m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            d[i] = std::max(d[i], 0.5 * alpha * a[i][j]);
            d[n + j] = std::max(d[n + j], 0.5 * alpha * a[i][j]);
        }
    auto project = [&](std::vector<double>& t) {
        for (double& x : t) x = std::max(0.0, x);
    };
    auto dual_value = [&](const std::vector<double>& t) {
        double g = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) g -= std::exp(alpha * a[i][j] - t[i] - t[n + j]);
        for (int i = 0; i < n; ++i) g -= t[i] * row_caps[i];
        for (int j = 0; j < m; ++j) g -= t[n + j] * col_caps[j];
        return g;
    };

    double step = 1.0 / std::max(1, n * m);
    std::vector<double> grad(n + m);
    for (int it = 0; it < max_iters; ++it) {
        double resid = 0;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                double x = std::exp(alpha * a[i][j] - d[i] - d[n + j]);
                grad[i] += x;
                grad[n + j] += x;
            }
        for (int i = 0; i < n + m; ++i) {
            double cap = i < n ? row_caps[i] : col_caps[i - n];
            grad[i] = grad[i] - cap;  // ascent direction of -g is violation
            // projected gradient: at the boundary only inward movement counts
            double eff = (d[i] <= 0 && grad[i] < 0) ? 0.0 : grad[i];
            resid = std::max(resid, std::abs(eff));
        }
        if (resid <= tol) break;
        if (!ascend(d, grad, step, dual_value, project)) break;
    }

    MatchingOptimum opt;
    opt.x.assign(n, std::vector<double>(m));
    opt.v.assign(d.begin(), d.begin() + n);
    opt.u.assign(d.begin() + n, d.end());
    double primal = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double x = std::exp(alpha * a[i][j] - d[i] - d[n + j]);
            opt.x[i][j] = x;
            primal += x * (std::log(x) - 1) / alpha - a[i][j] * x;
        }
    opt.primal = primal;
    // dual_value is the dual of the alpha-scaled program
    opt.dual = dual_value(d) / alpha;
    opt.gap = std::abs(opt.primal - opt.dual);
    return opt;
}

EquilibriumOptimum solve_equilibrium(const maas::Network& net,
                                     const maas::ScenarioConfig& cfg,
                                     const maas::PathSet& paths,
                                     const std::vector<double>& fares, int max_iters,
                                     double tol) {
    const int S = static_cast<int>(paths.size());
    const int L = static_cast<int>(net.links.size());
    const int Z = static_cast<int>(net.zones.size());

    std::vector<std::vector<double>> V(S);
    for (int s = 0; s < S; ++s) {
        V[s].resize(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k)
            V[s][k] = maas::path_systematic_disutility(net, cfg, paths[s][k], fares);
    }
    std::vector<char> capped(L, 0);
    for (int l : net.cap_links) capped[l] = 1;

    // duals stacked as [b (free) ; g (<= 0, fixed-route links) ; h (<= 0, zones)]
    std::vector<double> d(S + L + Z, 0.0);
    auto project = [&](std::vector<double>& t) {
        for (int l = 0; l < L; ++l) t[S + l] = capped[l] ? std::min(0.0, t[S + l]) : 0.0;
        for (int i = 0; i < Z; ++i) t[S + L + i] = std::min(0.0, t[S + L + i]);
    };
    auto flow_of = [&](const std::vector<double>& t, int s, size_t k) {
        double e = -V[s][k] + t[s];
        for (int l : paths[s][k].links) {
            if (capped[l]) e += t[S + l];
            int z = net.links[l].zone;
            if (z >= 0) e += t[S + L + z];
        }
        return std::exp(e);
    };
    auto dual_value = [&](const std::vector<double>& t) {
        double g = 0;
        for (int s = 0; s < S; ++s) {
            if (net.ods[s].demand == 0) continue;
            for (size_t k = 0; k < paths[s].size(); ++k) g -= flow_of(t, s, k);
            g += net.ods[s].demand * t[s];
        }
        for (int l : net.cap_links) g += net.links[l].w * t[S + l];
        for (int i = 0; i < Z; ++i) g += net.zones[i].z * t[S + L + i];
        return g;
    };

    // demand duals start where an uncapacitated solve would put them
    for (int s = 0; s < S; ++s) {
        if (net.ods[s].demand == 0) {
            d[s] = -std::numeric_limits<double>::infinity();
            continue;
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : V[s]) mx = std::max(mx, -v);
        double acc = 0;
        for (double v : V[s]) acc += std::exp(-v - mx);
        d[s] = std::log(net.ods[s].demand) - (mx + std::log(acc));
    }

    double step = 1e-2;
    std::vector<double> grad(S + L + Z);
    for (int it = 0; it < max_iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            if (net.ods[s].demand == 0) continue;
            double total = 0;
            for (size_t k = 0; k < paths[s].size(); ++k) {
                double f = flow_of(d, s, k);
                total += f;
                for (int l : paths[s][k].links) {
                    if (capped[l]) grad[S + l] -= f;
                    int z = net.links[l].zone;
                    if (z >= 0) grad[S + L + z] -= f;
                }
            }
            grad[s] = net.ods[s].demand - total;
        }
        for (int l = 0; l < L; ++l)
            if (!capped[l]) grad[S + l] = 0.0;
        for (int l : net.cap_links) grad[S + l] += net.links[l].w;
        for (int i = 0; i < Z; ++i) grad[S + L + i] += net.zones[i].z;

        double resid = 0;
        for (int s = 0; s < S; ++s)
            if (net.ods[s].demand > 0) resid = std::max(resid, std::abs(grad[s]));
        for (int l : net.cap_links) {
            double eff = (d[S + l] >= 0 && grad[S + l] > 0) ? 0.0 : grad[S + l];
            resid = std::max(resid, std::abs(eff));
        }
        for (int i = 0; i < Z; ++i) {
            double eff = (d[S + L + i] >= 0 && grad[S + L + i] > 0) ? 0.0 : grad[S + L + i];
            resid = std::max(resid, std::abs(eff));
        }
        if (resid <= tol) break;
        if (!ascend(d, grad, step, dual_value, project)) break;
    }

    EquilibriumOptimum opt;
    opt.flows.resize(S);
    opt.lnB.resize(S);
    opt.lnM_af.assign(L, 0.0);
    opt.lnM_nm.assign(Z, 0.0);
    for (int s = 0; s < S; ++s) {
        opt.lnB[s] = d[s];
        opt.flows[s].resize(paths[s].size());
        for (size_t k = 0; k < paths[s].size(); ++k)
            opt.flows[s][k] = net.ods[s].demand == 0 ? 0.0 : flow_of(d, s, k);
    }
    for (int l : net.cap_links) opt.lnM_af[l] = d[S + l];
    for (int i = 0; i < Z; ++i) opt.lnM_nm[i] = d[S + L + i];

    double primal = 0;
    for (int s = 0; s < S; ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            double f = opt.flows[s][k];
            if (f > 0) primal += f * (std::log(f) - 1) + V[s][k] * f;
        }
    opt.primal = primal;
    opt.dual = dual_value(d);
    opt.gap = std::abs(opt.primal - opt.dual);
    return opt;
}

namespace {

void dfs_all(const maas::Network& net, const std::vector<std::vector<int>>& out, int node,
             int dest, double cost, double bound, std::vector<char>& visited,
             std::vector<int>& nodes, std::vector<int>& links,
             const std::vector<double>& link_cost, std::vector<maas::Path>& found) {
    if (cost > bound + 1e-12) return;
    if (node == dest) {
        if (cost <= bound) found.push_back({nodes, links});
        return;
    }
    for (int l : out[node]) {
        int next = net.links[l].head;
        if (visited[next]) continue;
        visited[next] = 1;
        nodes.push_back(next);
        links.push_back(l);
        dfs_all(net, out, next, dest, cost + link_cost[l], bound, visited, nodes, links,
                link_cost, found);
        links.pop_back();
        nodes.pop_back();
        visited[next] = 0;
    }
}

}  // namespace

std::vector<maas::Path> enumerate_paths(const maas::Network& net,
                                        const maas::ScenarioConfig& cfg, int od,
                                        const std::vector<double>& fares,
                                        const maas::Delays& delays, double bound) {
    const int N = static_cast<int>(net.node_names.size());
    std::vector<std::vector<int>> out(N);
    std::vector<double> link_cost(net.links.size(), 0.0);
    for (size_t l = 0; l < net.links.size(); ++l) {
        if (net.links[l].kind == maas::LinkKind::Dummy) continue;
        out[net.links[l].tail].push_back(static_cast<int>(l));
        link_cost[l] = maas::generation_link_cost(net, cfg, static_cast<int>(l), fares, delays);
    }
    std::vector<char> visited(N, 0);
    std::vector<int> nodes{net.ods[od].origin}, links;
    visited[net.ods[od].origin] = 1;
    std::vector<maas::Path> found;
    if (net.ods[od].origin == net.ods[od].dest) return found;
    dfs_all(net, out, net.ods[od].origin, net.ods[od].dest, 0.0, bound, visited, nodes, links,
            link_cost, found);

    std::vector<std::pair<double, maas::Path>> keyed;
    keyed.reserve(found.size());
    for (auto& p : found) {
        double c = 0;
        for (int l : p.links) c += link_cost[l];
        keyed.push_back({c, std::move(p)});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        if (x.second.nodes != y.second.nodes) return x.second.nodes < y.second.nodes;
        return x.second.links < y.second.links;
    });
    std::vector<maas::Path> res;
    res.reserve(keyed.size());
    for (auto& [c, p] : keyed) res.push_back(std::move(p));
    return res;
}

namespace {

// solves sys * x = rhs in place, true when nonsingular
bool solve_square(std::vector<std::vector<double>> sys, std::vector<double> rhs,
                  std::vector<double>& x) {
    const int n = static_cast<int>(rhs.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(sys[r][c]) > std::abs(sys[piv][c])) piv = r;
        if (std::abs(sys[piv][c]) < 1e-11) return false;
        std::swap(sys[piv], sys[c]);
        std::swap(rhs[piv], rhs[c]);
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = sys[r][c] / sys[c][c];
            for (int k = c; k < n; ++k) sys[r][k] -= f * sys[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = rhs[i] / sys[i][i];
    return true;
}

}  // namespace

LpVertexSolution solve_lp_by_vertices(const maas::LinearProgram& lp) {
    const int n = static_cast<int>(lp.objective.size());
    const int m = static_cast<int>(lp.rhs.size());
    // rows 0..m-1 are the constraints, rows m..m+n-1 the x_i >= 0 bounds
    const int total = m + n;
    std::vector<int> pick(n);
    LpVertexSolution best;

    auto feasible = [&](const std::vector<double>& x) {
        for (int i = 0; i < n; ++i)
            if (x[i] < -1e-8) return false;
        for (int r = 0; r < m; ++r) {
            double lhs = 0;
            for (int i = 0; i < n; ++i) lhs += lp.A[r][i] * x[i];
            if (lp.sense[r] < 0 && lhs > lp.rhs[r] + 1e-8) return false;
            if (lp.sense[r] > 0 && lhs < lp.rhs[r] - 1e-8) return false;
        }
        return true;
    };

    std::vector<std::vector<double>> sys(n, std::vector<double>(n));
    std::vector<double> rhs(n), x;
    auto try_subset = [&]() {
        for (int i = 0; i < n; ++i) {
            int r = pick[i];
            if (r < m) {
                sys[i] = lp.A[r];
                rhs[i] = lp.rhs[r];
            } else {
                std::fill(sys[i].begin(), sys[i].end(), 0.0);
                sys[i][r - m] = 1.0;
                rhs[i] = 0.0;
            }
        }
        if (!solve_square(sys, rhs, x)) return;
        if (!feasible(x)) return;
        double val = 0;
        for (int i = 0; i < n; ++i) val += lp.objective[i] * x[i];
        if (!best.feasible || val > best.value) {
            best.feasible = true;
            best.value = val;
            best.x = x;
        }
    };

    // lexicographic n-subsets of {0..total-1}
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    if (n > total) return best;
    while (true) {
        pick = idx;
        try_subset();
        int i = n - 1;
        while (i >= 0 && idx[i] == total - n + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    return best;
}

double grid_line_search(const maas::Network& net, const maas::FrozenResponse& fr,
                        const maas::PathSet& paths, const std::vector<double>& cur,
                        const std::vector<double>& target, int points) {
    double best_b = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    std::vector<double> p(cur.size());
    for (int i = 0; i <= points; ++i) {
        double b = static_cast<double>(i) / points;
        for (size_t l = 0; l < cur.size(); ++l) p[l] = cur[l] + b * (target[l] - cur[l]);
        double v = maas::frozen_revenue(net, fr, paths, p);
        if (v > best_v) {
            best_v = v;
            best_b = b;
        }
    }
    return best_b;
}

std::vector<double> fd_gradient(const maas::Network& net, const maas::FrozenResponse& fr,
                                const maas::PathSet& paths, const std::vector<double>& fares,
                                double h) {
    std::vector<double> g(fares.size(), 0.0);
    std::vector<double> p = fares;
    for (size_t l = 0; l < fares.size(); ++l) {
        if (!maas::is_priceable(net.links[l].kind)) continue;
        double step = h * std::max(1.0, std::abs(fares[l]));
        p[l] = fares[l] + step;
        double up = maas::frozen_revenue(net, fr, paths, p);
        p[l] = fares[l] - step;
        double dn = maas::frozen_revenue(net, fr, paths, p);
        p[l] = fares[l];
        g[l] = (up - dn) / (2 * step);
    }
    return g;
}

}  // namespace oracle
