#include "maas/game_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "maas/csv.hpp"

namespace maas {

namespace {

double logsumexp(const std::vector<double>& terms) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double t : terms) mx = std::max(mx, t);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

void check_instance(const Matrix& a, const std::vector<double>& rcaps,
                    const std::vector<double>& ccaps) {
    if (a.empty() || a[0].empty()) throw std::invalid_argument("empty characteristic matrix");
    const size_t m = a[0].size();
    for (const auto& row : a) {
        if (row.size() != m) throw std::invalid_argument("ragged characteristic matrix");
        for (double x : row)
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite characteristic value");
    }
    if (rcaps.size() != a.size() || ccaps.size() != m)
        throw std::invalid_argument("capacity vector shape mismatch");
    for (double c : rcaps)
        if (!(c > 0)) throw std::invalid_argument("seller capacities must be positive");
    for (double c : ccaps)
        if (!(c > 0)) throw std::invalid_argument("buyer capacities must be positive");
}

}  // namespace

CharacteristicMatrix characteristic_one_to_one(const ValuationInstance& inst) {
    const size_t n = inst.seller_values.size();
    if (inst.buyer_values.size() != n)
        throw std::invalid_argument("seller values and buyer value rows differ");
    CharacteristicMatrix cm;
    cm.a.resize(n);
    size_t m = n ? inst.buyer_values[0].size() : 0;
    for (size_t i = 0; i < n; ++i) {
        if (inst.buyer_values[i].size() != m)
            throw std::invalid_argument("ragged buyer value matrix");
        cm.a[i].resize(m);
        for (size_t j = 0; j < m; ++j)
            cm.a[i][j] = inst.buyer_values[i][j] - inst.seller_values[i];
    }
    return cm;
}

MatchingSolution solve_stochastic_matching(const CharacteristicMatrix& am,
                                           const std::vector<double>& seller_caps,
                                           const std::vector<double>& buyer_caps,
                                           const GameConfig& cfg) {
    const Matrix& a = am.a;
    std::vector<double> rcaps = seller_caps, ccaps = buyer_caps;
    if (rcaps.empty()) rcaps.assign(a.size(), 1.0);
    if (ccaps.empty()) ccaps.assign(a.empty() ? 0 : a[0].size(), 1.0);
    check_instance(a, rcaps, ccaps);
    if (!(cfg.alpha > 0) || !(cfg.tol > 0) || cfg.max_iters <= 0)
        throw std::invalid_argument("bad game config");

    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(a[0].size());
    // lnr = -v, lns = -u, both held at <= 0 so the duals stay nonnegative
    std::vector<double> lnr(n, 0.0), lns(m, 0.0);
    std::vector<double> x(static_cast<size_t>(n) * m, 0.0), xprev;
    std::vector<double> buf(std::max(n, m));

    auto fill_x = [&] {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                x[static_cast<size_t>(i) * m + j] =
                    std::exp(cfg.alpha * a[i][j] + lnr[i] + lns[j]);
    };

    MatchingSolution sol;
    double change = std::numeric_limits<double>::infinity();
    fill_x();
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        xprev = x;
        for (int i = 0; i < n; ++i) {
            buf.resize(m);
            for (int j = 0; j < m; ++j) buf[j] = cfg.alpha * a[i][j] + lns[j];
            lnr[i] = std::min(0.0, std::log(rcaps[i]) - logsumexp(buf));
        }
        for (int j = 0; j < m; ++j) {
            buf.resize(n);
            for (int i = 0; i < n; ++i) buf[i] = cfg.alpha * a[i][j] + lnr[i];
            lns[j] = std::min(0.0, std::log(ccaps[j]) - logsumexp(buf));
        }
        fill_x();
        double s = 0.0;
        for (size_t k = 0; k < x.size(); ++k) {
            double d = x[k] - xprev[k];
            s += d * d;
        }
        change = std::sqrt(s);
        if (change <= cfg.tol) break;
    }
    if (change > cfg.tol)
        throw std::runtime_error("stochastic matching did not converge in " +
                                 std::to_string(cfg.max_iters) +
                                 " iterations, last L2 change " + std::to_string(change));

    sol.x.assign(n, std::vector<double>(m));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) sol.x[i][j] = x[static_cast<size_t>(i) * m + j];
    sol.v.resize(n);
    sol.u.resize(m);
    for (int i = 0; i < n; ++i) sol.v[i] = -lnr[i] + 0.0;
    for (int j = 0; j < m; ++j) sol.u[j] = -lns[j] + 0.0;
    sol.iterations = it + 1;
    sol.converged = true;
    return sol;
}

std::pair<std::vector<double>, std::vector<double>> expected_payoffs(
    const MatchingSolution& sol, const GameConfig& cfg) {
    if (!sol.converged) throw std::invalid_argument("payoffs need a converged solution");
    std::vector<double> sv(sol.v.size()), bu(sol.u.size());
    for (size_t i = 0; i < sv.size(); ++i) sv[i] = sol.v[i] / cfg.alpha;
    for (size_t j = 0; j < bu.size(); ++j) bu[j] = sol.u[j] / cfg.alpha;
    return {sv, bu};
}

LogitReport verify_logit(const MatchingSolution& sol, const CharacteristicMatrix& am,
                         const GameConfig& cfg) {
    (void)cfg;
    if (!sol.converged) throw std::invalid_argument("logit check needs a converged solution");
    const int n = static_cast<int>(sol.x.size());
    const int m = n ? static_cast<int>(sol.x[0].size()) : 0;
    if (static_cast<int>(am.a.size()) != n)
        throw std::invalid_argument("matrix shape mismatch");
    LogitReport rep;
    for (int i = 0; i < n; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j < m; ++j) rowsum += sol.x[i][j];
        if (std::abs(rowsum - 1.0) > 1e-9) rep.slack_rows.push_back(i);
        for (int j = 0; j < m; ++j)
            rep.max_row_residual =
                std::max(rep.max_row_residual, std::abs(sol.x[i][j] - sol.x[i][j] / rowsum));
    }
    for (int j = 0; j < m; ++j) {
        double colsum = 0.0;
        for (int i = 0; i < n; ++i) colsum += sol.x[i][j];
        if (std::abs(colsum - 1.0) > 1e-9) rep.slack_cols.push_back(j);
        for (int i = 0; i < n; ++i)
            rep.max_col_residual =
                std::max(rep.max_col_residual, std::abs(sol.x[i][j] - sol.x[i][j] / colsum));
    }
    return rep;
}

MultiMatchSolution solve_many_to_many(const MultiMatchInstance& inst, const GameConfig& cfg) {
    const int ns = inst.n_sellers;
    const int nb = static_cast<int>(inst.buyers.size());
    if (static_cast<int>(inst.seller_caps.size()) != ns)
        throw std::invalid_argument("seller cap count mismatch");
    for (double c : inst.seller_caps)
        if (!(c > 0)) throw std::invalid_argument("seller capacities must be positive");
    for (const auto& mj : inst.buyers)
        for (const auto& mm : mj) {
            if (mm.sellers.empty()) throw std::invalid_argument("empty multi-matching");
            for (int i : mm.sellers)
                if (i < 0 || i >= ns) throw std::invalid_argument("multi-matching references unknown seller");
        }

    std::vector<double> lnr(ns, 0.0), lns(nb, 0.0);
    // flat view of x for the convergence norm
    std::vector<std::vector<double>> x(nb);
    for (int j = 0; j < nb; ++j) x[j].resize(inst.buyers[j].size());

    auto lnx = [&](int j, int k) {
        const MultiMatch& mm = inst.buyers[j][k];
        double e = cfg.alpha * mm.worth + lns[j];
        for (int i : mm.sellers) e += lnr[i];
        return e;
    };
    auto fill_x = [&] {
        for (int j = 0; j < nb; ++j)
            for (size_t k = 0; k < x[j].size(); ++k) x[j][k] = std::exp(lnx(j, static_cast<int>(k)));
    };

    fill_x();
    double change = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        auto xprev = x;
        for (int i = 0; i < ns; ++i) {
            double load = 0.0;
            for (int j = 0; j < nb; ++j)
                for (size_t k = 0; k < inst.buyers[j].size(); ++k) {
                    const auto& sellers = inst.buyers[j][k].sellers;
                    if (std::find(sellers.begin(), sellers.end(), i) != sellers.end())
                        load += std::exp(lnx(j, static_cast<int>(k)));
                }
            if (load > 0)
                lnr[i] = std::min(0.0, lnr[i] + std::log(inst.seller_caps[i]) - std::log(load));
        }
        for (int j = 0; j < nb; ++j) {
            double colsum = 0.0;
            for (size_t k = 0; k < inst.buyers[j].size(); ++k)
                colsum += std::exp(lnx(j, static_cast<int>(k)));
            if (colsum > 0) lns[j] = std::min(0.0, lns[j] - std::log(colsum));
        }
        fill_x();
        double s = 0.0;
        for (int j = 0; j < nb; ++j)
            for (size_t k = 0; k < x[j].size(); ++k) {
                double d = x[j][k] - xprev[j][k];
                s += d * d;
            }
        change = std::sqrt(s);
        if (change <= cfg.tol) break;
    }
    if (change > cfg.tol)
        throw std::runtime_error("many-to-many matching did not converge, last L2 change " +
                                 std::to_string(change));

    MultiMatchSolution sol;
    sol.x = x;
    sol.v.resize(ns);
    sol.u.resize(nb);
    for (int i = 0; i < ns; ++i) sol.v[i] = -lnr[i] + 0.0;
    for (int j = 0; j < nb; ++j) sol.u[j] = -lns[j] + 0.0;
    sol.iterations = it + 1;
    sol.converged = true;
    return sol;
}

namespace {

void oracle_recurse(const Matrix& a, int i, unsigned used, double acc,
                    std::vector<int>& cur, double& best, std::vector<int>& bestm) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(a[0].size());
    if (i == n) {
        if (acc > best) {
            best = acc;
            bestm = cur;
        }
        return;
    }
    cur[i] = -1;  // leaving a seller unmatched is allowed, values can be negative
    oracle_recurse(a, i + 1, used, acc, cur, best, bestm);
    for (int j = 0; j < m; ++j) {
        if (used & (1u << j)) continue;
        cur[i] = j;
        oracle_recurse(a, i + 1, used | (1u << j), acc + a[i][j], cur, best, bestm);
    }
    cur[i] = -1;
}

}  // namespace

DeterministicAssignment deterministic_oracle(const CharacteristicMatrix& am) {
    const Matrix& a = am.a;
    if (a.empty() || a[0].empty()) throw std::invalid_argument("empty matrix");
    if (a.size() > 8 || a[0].size() > 8)
        throw std::invalid_argument("deterministic oracle is exhaustive, limited to 8x8");
    std::vector<int> cur(a.size(), -1), best_match;
    double best = -std::numeric_limits<double>::infinity();
    oracle_recurse(a, 0, 0u, 0.0, cur, best, best_match);
    return {best_match, best};
}

ValuationInstance load_valuations(const std::string& sellers_csv,
                                  const std::string& buyers_csv) {
    CsvTable st = read_csv(sellers_csv);
    int sc = st.col("seller"), cc = st.col("c");
    if (sc < 0 || cc < 0) throw std::runtime_error(sellers_csv + ": expected header seller,c");
    ValuationInstance inst;
    std::vector<std::string> ids;
    for (const auto& r : st.rows) {
        ids.push_back(r[sc]);
        inst.seller_values.push_back(parse_double(r[cc], sellers_csv));
    }

    CsvTable bt = read_csv(buyers_csv);
    if (bt.header.size() < 2 || bt.header[0] != "seller")
        throw std::runtime_error(buyers_csv + ": expected first column 'seller'");
    if (bt.rows.size() != ids.size())
        throw std::runtime_error(buyers_csv + ": row count differs from sellers file");
    inst.buyer_values.resize(ids.size());
    for (size_t i = 0; i < bt.rows.size(); ++i) {
        if (bt.rows[i][0] != ids[i])
            throw std::runtime_error(buyers_csv + ": seller order differs from sellers file");
        for (size_t j = 1; j < bt.header.size(); ++j)
            inst.buyer_values[i].push_back(parse_double(bt.rows[i][j], buyers_csv));
    }
    return inst;
}

}  // namespace maas
