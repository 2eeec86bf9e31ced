#include "maas/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace maas {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kFeasEps = 1e-7;
constexpr int kMaxPivots = 200000;
constexpr int kStallLimit = 100;   // degenerate pivots tolerated before Bland kicks in
constexpr double kPerturb = 1e-9;  // rhs offsets breaking degenerate vertex ties

double trickle(int k) {
    double w = (k + 1) * 0.6180339887498949;
    return 0.5 + 0.5 * (w - std::floor(w));
}

struct Tableau {
    int rows = 0, cols = 0;  // cols excludes the rhs column
    std::vector<std::vector<double>> t;
    std::vector<double> obj;
    std::vector<int> basis;
    std::vector<char> allowed;
    std::vector<int> row_of;  // basic row of each column, -1 when nonbasic

    void sync_row_of() {
        row_of.assign(cols, -1);
        for (int i = 0; i < rows; ++i)
            if (basis[i] >= 0) row_of[basis[i]] = i;
    }

    void pivot(int pr, int pc) {
        double piv = t[pr][pc];
        for (double& v : t[pr]) v /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == pr || std::abs(t[i][pc]) < 1e-14) continue;
            double f = t[i][pc];
            for (int j = 0; j <= cols; ++j) t[i][j] -= f * t[pr][j];
        }
        double f = obj[pc];
        if (std::abs(f) > 0)
            for (int j = 0; j <= cols; ++j) obj[j] -= f * t[pr][j];
        row_of[basis[pr]] = -1;
        basis[pr] = pc;
        row_of[pc] = pr;
    }

    // Dantzig: steepest reduced cost, falling back to Bland's rule while the
    // objective stalls so degenerate vertices cannot cycle
    bool run_primal() {
        int stall = 0;
        double last = obj[cols];
        for (int iter = 0; iter < kMaxPivots; ++iter) {
            int pc = -1;
            if (stall > kStallLimit) {
                for (int j = 0; j < cols; ++j)
                    if (allowed[j] && obj[j] < -kPivotEps) {
                        pc = j;
                        break;
                    }
            } else {
                double most = -kPivotEps;
                for (int j = 0; j < cols; ++j)
                    if (allowed[j] && obj[j] < most) {
                        most = obj[j];
                        pc = j;
                    }
            }
            if (pc < 0) return true;
            int pr = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                if (t[i][pc] <= kPivotEps) continue;
                double ratio = t[i][cols] / t[i][pc];
                if (ratio < best - 1e-12 ||
                    (ratio < best + 1e-12 && (pr < 0 || basis[i] < basis[pr]))) {
                    best = ratio;
                    pr = i;
                }
            }
            if (pr < 0) return false;  // unbounded in column pc
            pivot(pr, pc);
            if (obj[cols] > last + 1e-12 * (1.0 + std::abs(last))) {
                stall = 0;
                last = obj[cols];
            } else {
                ++stall;
            }
        }
        throw std::runtime_error("simplex exceeded its pivot budget");
    }

    // restores rhs >= 0 while reduced costs stay >= 0; requires a dual
    // feasible tableau, i.e. one that was primal optimal before rows changed
    bool run_dual() {
        for (int iter = 0; iter < kMaxPivots; ++iter) {
            int pr = -1;
            double worst = -kFeasEps;
            for (int i = 0; i < rows; ++i)
                if (t[i][cols] < worst) {
                    worst = t[i][cols];
                    pr = i;
                }
            if (pr < 0) return true;
            int pc = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < cols; ++j) {
                if (!allowed[j] || t[pr][j] >= -kPivotEps) continue;
                double ratio = std::max(obj[j], 0.0) / -t[pr][j];
                if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (pc < 0 || j < pc))) {
                    best = ratio;
                    pc = j;
                }
            }
            if (pc < 0) return false;  // no way to lift the row: infeasible
            pivot(pr, pc);
        }
        throw std::runtime_error("simplex exceeded its pivot budget");
    }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
    const int n = static_cast<int>(lp.objective.size());
    const int m = static_cast<int>(lp.A.size());
    if (lp.rhs.size() != lp.A.size() || lp.sense.size() != lp.A.size())
        throw std::invalid_argument("linear program rows are inconsistent");
    for (const auto& row : lp.A)
        if (static_cast<int>(row.size()) != n)
            throw std::invalid_argument("linear program row width differs from objective");

    // normalize to nonnegative rhs
    std::vector<std::vector<double>> A = lp.A;
    std::vector<double> rhs = lp.rhs;
    std::vector<int> sense = lp.sense;
    for (int i = 0; i < m; ++i) {
        if (sense[i] != -1 && sense[i] != 1)
            throw std::invalid_argument("row sense must be -1 or +1");
        if (rhs[i] < 0) {
            for (double& v : A[i]) v = -v;
            rhs[i] = -rhs[i];
            sense[i] = -sense[i];
        }
    }

    // loosen every <= row by a deterministic trickle so vertex ties split;
    // >= rows stay exact, tightening could flip a borderline row infeasible
    for (int i = 0; i < m; ++i)
        if (sense[i] == -1) rhs[i] += kPerturb * (1.0 + rhs[i]) * trickle(i);

    int n_slack = 0, n_art = 0;
    for (int i = 0; i < m; ++i) (sense[i] == -1 ? n_slack : n_art) += 1;
    // every >= row gets a surplus and an artificial column
    const int cols = n + n_slack + 2 * n_art;

    Tableau tb;
    tb.rows = m;
    tb.cols = cols;
    tb.t.assign(m, std::vector<double>(cols + 1, 0.0));
    tb.basis.assign(m, -1);
    tb.allowed.assign(cols, 1);
    tb.obj.assign(cols + 1, 0.0);

    int slack_at = n, surplus_at = n + n_slack, art_at = n + n_slack + n_art;
    std::vector<char> is_art(cols, 0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) tb.t[i][j] = A[i][j];
        tb.t[i][cols] = rhs[i];
        if (sense[i] == -1) {
            tb.t[i][slack_at] = 1;
            tb.basis[i] = slack_at++;
        } else {
            tb.t[i][surplus_at++] = -1;
            tb.t[i][art_at] = 1;
            is_art[art_at] = 1;
            tb.basis[i] = art_at++;
        }
    }
    tb.sync_row_of();

    if (n_art > 0) {
        // phase 1: minimize the artificial total
        for (int j = 0; j < cols; ++j) tb.obj[j] = is_art[j] ? 1.0 : 0.0;
        tb.obj[cols] = 0;
        for (int i = 0; i < m; ++i)
            if (is_art[tb.basis[i]])
                for (int j = 0; j <= cols; ++j) tb.obj[j] -= tb.t[i][j];
        if (!tb.run_primal()) throw std::runtime_error("phase 1 cannot be unbounded");
        if (-tb.obj[cols] > kFeasEps) return {LpStatus::Infeasible, {}, 0};

        for (int j = 0; j < cols; ++j)
            if (is_art[j]) tb.allowed[j] = 0;
        // kick leftover zero-level artificials out of the basis
        for (int i = 0; i < m; ++i) {
            if (!is_art[tb.basis[i]]) continue;
            int pc = -1;
            for (int j = 0; j < cols && pc < 0; ++j)
                if (tb.allowed[j] && std::abs(tb.t[i][j]) > kPivotEps) pc = j;
            if (pc >= 0) tb.pivot(i, pc);
            // otherwise the row is redundant and stays parked at zero
        }
    }

    for (int j = 0; j <= cols; ++j) tb.obj[j] = 0;
    for (int j = 0; j < n; ++j) tb.obj[j] = -lp.objective[j];
    for (int i = 0; i < m; ++i) {
        double f = tb.obj[tb.basis[i]];
        if (std::abs(f) > 0)
            for (int j = 0; j <= cols; ++j) tb.obj[j] -= f * tb.t[i][j];
    }
    if (!tb.run_primal()) return {LpStatus::Unbounded, {}, 0};

    LpResult res;
    res.status = LpStatus::Optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < n) res.x[tb.basis[i]] = tb.t[i][cols];
    // evaluate at the vertex itself, the tableau total carries the rhs trickle
    res.value = 0;
    for (int j = 0; j < n; ++j) res.value += lp.objective[j] * res.x[j];
    return res;
}

struct CutLp::Impl {
    int n = 0;   // structural variables
    int nf = 0;  // floor rows, always the leading rows
    std::vector<double> objective;
    std::vector<std::vector<double>> floor_rows;
    std::vector<double> floor_rhs;

    struct PendingCut {
        std::vector<int> vars;
        double rhs;
        int id;
    };
    std::vector<PendingCut> pending;
    std::vector<PendingCut> live;  // original form of every cut in the tableau
    // a cut's identity after pivoting lives in its slack column, not a row
    struct CutRef {
        int id;
        int slack;
    };
    std::vector<CutRef> cuts;  // parallel to live

    Tableau tb;
    bool built = false;
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> xv;
    double val = 0;
    int serial = 0;  // perturbation counter over every cut ever added

    double perturbed(double rhs) { return rhs + kPerturb * (1.0 + rhs) * trickle(serial++); }

    // first solve: floors with artificials, queued cuts with slack basis
    bool build() {
        live.insert(live.end(), std::make_move_iterator(pending.begin()),
                    std::make_move_iterator(pending.end()));
        pending.clear();
        cuts.clear();
        const int m = nf + static_cast<int>(live.size());
        const int cols = n + static_cast<int>(live.size()) + 2 * nf;
        tb = Tableau{};
        tb.rows = m;
        tb.cols = cols;
        tb.t.assign(m, std::vector<double>(cols + 1, 0.0));
        tb.basis.assign(m, -1);
        tb.allowed.assign(cols, 1);
        tb.obj.assign(cols + 1, 0.0);

        int slack_at = n, surplus_at = n + static_cast<int>(live.size()),
            art_at = surplus_at + nf;
        std::vector<char> is_art(cols, 0);
        for (int i = 0; i < nf; ++i) {
            for (int j = 0; j < n; ++j) tb.t[i][j] = floor_rows[i][j];
            tb.t[i][cols] = floor_rhs[i];
            tb.t[i][surplus_at++] = -1;
            tb.t[i][art_at] = 1;
            is_art[art_at] = 1;
            tb.basis[i] = art_at++;
        }
        for (size_t c = 0; c < live.size(); ++c) {
            int i = nf + static_cast<int>(c);
            for (int v : live[c].vars) tb.t[i][v] += 1.0;
            tb.t[i][cols] = live[c].rhs;
            tb.t[i][slack_at] = 1;
            tb.basis[i] = slack_at;
            cuts.push_back({live[c].id, slack_at});
            ++slack_at;
        }
        tb.sync_row_of();

        if (nf > 0) {
            for (int j = 0; j < cols; ++j) tb.obj[j] = is_art[j] ? 1.0 : 0.0;
            tb.obj[cols] = 0;
            for (int i = 0; i < tb.rows; ++i)
                if (is_art[tb.basis[i]])
                    for (int j = 0; j <= cols; ++j) tb.obj[j] -= tb.t[i][j];
            if (!tb.run_primal()) throw std::runtime_error("phase 1 cannot be unbounded");
            if (-tb.obj[cols] > kFeasEps) return false;
            for (int j = 0; j < cols; ++j)
                if (is_art[j]) tb.allowed[j] = 0;
            for (int i = 0; i < tb.rows; ++i) {
                if (!is_art[tb.basis[i]]) continue;
                int pc = -1;
                for (int j = 0; j < cols && pc < 0; ++j)
                    if (tb.allowed[j] && std::abs(tb.t[i][j]) > kPivotEps) pc = j;
                if (pc >= 0) tb.pivot(i, pc);
            }
        }

        for (int j = 0; j <= cols; ++j) tb.obj[j] = 0;
        for (int j = 0; j < n; ++j) tb.obj[j] = -objective[j];
        for (int i = 0; i < tb.rows; ++i) {
            double f = tb.obj[tb.basis[i]];
            if (std::abs(f) > 0)
                for (int j = 0; j <= cols; ++j) tb.obj[j] -= f * tb.t[i][j];
        }
        built = true;
        return true;
    }

    // canonicalizes one queued cut against the current basis and appends it
    // with its slack basic; the slack may come out negative, run_dual fixes it
    void append(const PendingCut& cut) {
        const int slack = tb.cols;  // new column
        for (auto& row : tb.t) row.insert(row.begin() + tb.cols, 0.0);
        tb.obj.insert(tb.obj.begin() + tb.cols, 0.0);
        tb.allowed.push_back(1);
        tb.row_of.push_back(-1);
        tb.cols += 1;

        std::vector<double> row(tb.cols + 1, 0.0);
        for (int v : cut.vars) row[v] += 1.0;
        row[slack] = 1.0;
        row[tb.cols] = cut.rhs;
        for (int v : cut.vars) {
            if (std::abs(row[v]) < 1e-14) continue;
            int br = tb.row_of[v];
            if (br < 0) continue;
            double f = row[v];
            for (int j = 0; j <= tb.cols; ++j) row[j] -= f * tb.t[br][j];
        }
        tb.t.push_back(std::move(row));
        tb.basis.push_back(slack);
        tb.row_of[slack] = tb.rows;
        tb.rows += 1;
        cuts.push_back({cut.id, slack});
        live.push_back(cut);
    }

    // repeated add and remove rounds accumulate floating point drift; a cold
    // rebuild from the recorded cut rows restores an exact canonical tableau
    bool rebuild() { return build(); }

    void extract() {
        xv.assign(n, 0.0);
        for (int i = 0; i < tb.rows; ++i)
            if (tb.basis[i] < n) xv[tb.basis[i]] = tb.t[i][tb.cols];
        val = 0;
        for (int j = 0; j < n; ++j) val += objective[j] * xv[j];
    }
};

CutLp::CutLp(std::vector<double> objective, std::vector<std::vector<double>> floor_rows,
             std::vector<double> floor_rhs)
    : impl_(std::make_unique<Impl>()) {
    impl_->n = static_cast<int>(objective.size());
    impl_->nf = static_cast<int>(floor_rows.size());
    if (floor_rhs.size() != floor_rows.size())
        throw std::invalid_argument("floor rows and bounds differ in length");
    for (const auto& row : floor_rows)
        if (static_cast<int>(row.size()) != impl_->n)
            throw std::invalid_argument("floor row width differs from objective");
    for (double b : floor_rhs)
        if (b < 0) throw std::invalid_argument("floor bounds must be nonnegative");
    impl_->objective = std::move(objective);
    impl_->floor_rows = std::move(floor_rows);
    impl_->floor_rhs = std::move(floor_rhs);
}

CutLp::~CutLp() = default;
CutLp::CutLp(CutLp&&) noexcept = default;
CutLp& CutLp::operator=(CutLp&&) noexcept = default;

void CutLp::add_cut(const std::vector<int>& vars, double rhs, int id) {
    if (rhs < 0) throw std::invalid_argument("cut bound must be nonnegative");
    for (int v : vars)
        if (v < 0 || v >= impl_->n) throw std::invalid_argument("cut names an unknown variable");
    Impl::PendingCut cut{vars, impl_->perturbed(rhs), id};
    if (!impl_->built) {
        impl_->pending.push_back(std::move(cut));
    } else {
        impl_->append(cut);
    }
}

void CutLp::remove_slack_cuts(const std::vector<char>& droppable) {
    Impl& im = *impl_;
    if (!im.built) {
        std::vector<Impl::PendingCut> keep;
        for (auto& c : im.pending)
            if (!(c.id >= 0 && c.id < static_cast<int>(droppable.size()) && droppable[c.id]))
                keep.push_back(std::move(c));
        im.pending = std::move(keep);
        return;
    }

    // removable: the cut's slack column is basic with positive value, which
    // makes it a unit column, so the (row, column) pair deletes cleanly and
    // the surviving rows stay a canonical optimal tableau
    std::vector<char> del_row(im.tb.rows, 0), del_col(im.tb.cols, 0);
    bool any = false;
    for (const auto& c : im.cuts) {
        if (!(c.id >= 0 && c.id < static_cast<int>(droppable.size()) && droppable[c.id]))
            continue;
        int r = im.tb.row_of[c.slack];
        if (r < 0 || im.tb.t[r][im.tb.cols] <= kFeasEps) continue;
        del_row[r] = del_col[c.slack] = 1;
        any = true;
    }
    if (!any) return;

    std::vector<int> col_map(im.tb.cols, -1);
    int nc = 0;
    for (int j = 0; j < im.tb.cols; ++j)
        if (!del_col[j]) col_map[j] = nc++;

    Tableau nt;
    nt.cols = nc;
    nt.obj.assign(nc + 1, 0.0);
    for (int j = 0; j < im.tb.cols; ++j)
        if (col_map[j] >= 0) nt.obj[col_map[j]] = im.tb.obj[j];
    nt.obj[nc] = im.tb.obj[im.tb.cols];
    nt.allowed.assign(nc, 1);
    for (int j = 0; j < im.tb.cols; ++j)
        if (col_map[j] >= 0) nt.allowed[col_map[j]] = im.tb.allowed[j];

    for (int i = 0; i < im.tb.rows; ++i) {
        if (del_row[i]) continue;
        std::vector<double> row(nc + 1, 0.0);
        for (int j = 0; j < im.tb.cols; ++j)
            if (col_map[j] >= 0) row[col_map[j]] = im.tb.t[i][j];
        row[nc] = im.tb.t[i][im.tb.cols];
        nt.t.push_back(std::move(row));
        nt.basis.push_back(col_map[im.tb.basis[i]]);
    }
    nt.rows = static_cast<int>(nt.t.size());
    nt.sync_row_of();
    im.tb = std::move(nt);

    std::vector<Impl::CutRef> kept;
    std::vector<Impl::PendingCut> kept_live;
    for (size_t k = 0; k < im.cuts.size(); ++k)
        if (!del_col[im.cuts[k].slack]) {
            kept.push_back({im.cuts[k].id, col_map[im.cuts[k].slack]});
            kept_live.push_back(std::move(im.live[k]));
        }
    im.cuts = std::move(kept);
    im.live = std::move(kept_live);
}

LpStatus CutLp::solve() {
    Impl& im = *impl_;
    if (!im.built) {
        if (!im.build()) {
            im.status = LpStatus::Infeasible;
            return im.status;
        }
        if (!im.tb.run_primal()) {
            im.status = LpStatus::Unbounded;
            return im.status;
        }
    } else {
        bool warm_ok = false;
        try {
            if (!im.tb.run_dual()) {
                im.status = LpStatus::Infeasible;
                return im.status;
            }
            if (!im.tb.run_primal()) {
                im.status = LpStatus::Unbounded;
                return im.status;
            }
            warm_ok = true;
        } catch (const std::runtime_error&) {
            // warm repair stalled, fall through to a cold rebuild
        }
        if (!warm_ok) {
            if (!im.rebuild()) {
                im.status = LpStatus::Infeasible;
                return im.status;
            }
            if (!im.tb.run_primal()) {
                im.status = LpStatus::Unbounded;
                return im.status;
            }
        }
    }
    im.status = LpStatus::Optimal;
    im.extract();
    return im.status;
}

const std::vector<double>& CutLp::x() const { return impl_->xv; }
double CutLp::value() const { return impl_->val; }

}  // namespace maas
