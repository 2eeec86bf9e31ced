#pragma once

#include <memory>
#include <vector>

namespace maas {

// maximize objective . x subject to the rows and x >= 0
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;
    std::vector<int> sense;  // -1 for <=, +1 for >=
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double value = 0;
};

// dense two-phase primal simplex; Dantzig pricing with a Bland fallback on
// stalls, plus a tiny rhs perturbation so degenerate vertices cannot cycle
LpResult solve_lp(const LinearProgram& lp);

// Row-generation companion to solve_lp: maximize objective . x over x >= 0,
// a fixed block of >= rows, and unit-coefficient <= cuts that arrive and
// leave between solves.  The first solve runs both phases; adding cuts to a
// solved instance keeps the basis and repairs feasibility with the dual
// simplex, which is far cheaper than solving cold every round.
class CutLp {
   public:
    // floors are dense >= rows over the same variables
    CutLp(std::vector<double> objective, std::vector<std::vector<double>> floor_rows,
          std::vector<double> floor_rhs);
    ~CutLp();
    CutLp(CutLp&&) noexcept;
    CutLp& operator=(CutLp&&) noexcept;

    // sum of x[v] over vars <= rhs, rhs >= 0; id is the caller's handle
    void add_cut(const std::vector<int>& vars, double rhs, int id);
    // removes every currently slack cut whose id satisfies droppable; cuts
    // pinned by the basis stay regardless; returns the ids actually removed
    std::vector<int> remove_slack_cuts(const std::vector<char>& droppable);

    LpStatus solve();
    const std::vector<double>& x() const;  // valid after an Optimal solve
    double value() const;

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace maas
