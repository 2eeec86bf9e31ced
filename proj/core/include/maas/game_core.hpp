#pragma once

#include <string>
#include <utility>
#include <vector>

namespace maas {

using Matrix = std::vector<std::vector<double>>;

struct GameConfig {
    double alpha = 1.0;   // stochasticity scale; choices sharpen as alpha grows
    double tol = 1e-10;   // L2 change of the probability vector between sweeps
    int max_iters = 100000;
};

struct ValuationInstance {
    std::vector<double> seller_values;  // c_i
    Matrix buyer_values;                // h_ij, |sellers| x |buyers|
    std::vector<double> seller_caps;    // empty means all 1
    std::vector<double> buyer_caps;     // empty means all 1
};

struct CharacteristicMatrix {
    Matrix a;  // a_ij = h_ij - c_i, may be negative
};

struct MatchingSolution {
    Matrix x;               // matching probabilities, strictly positive
    std::vector<double> v;  // seller duals, >= 0
    std::vector<double> u;  // buyer duals, >= 0
    int iterations = 0;
    bool converged = false;
};

struct LogitReport {
    // max over (i,j) of |x_ij - row logit share| and the column analogue.
    // The shares identity needs the corresponding marginal to be saturated;
    // slack rows/columns are listed so callers can interpret the residuals.
    double max_row_residual = 0.0;
    double max_col_residual = 0.0;
    std::vector<int> slack_rows;
    std::vector<int> slack_cols;
};

// a_ij = h_ij - c_i
CharacteristicMatrix characteristic_one_to_one(const ValuationInstance& inst);

// Multiplicative balancing on x_ij = exp(alpha*a_ij) * r_i * s_j with the
// factors clipped at 1, so both marginals are inequality constraints and the
// duals v = -ln r, u = -ln s stay nonnegative. Runs in log space.
MatchingSolution solve_stochastic_matching(const CharacteristicMatrix& a,
                                           const std::vector<double>& seller_caps,
                                           const std::vector<double>& buyer_caps,
                                           const GameConfig& cfg);

// (v_i/alpha, u_j/alpha)
std::pair<std::vector<double>, std::vector<double>> expected_payoffs(
    const MatchingSolution& sol, const GameConfig& cfg);

LogitReport verify_logit(const MatchingSolution& sol, const CharacteristicMatrix& a,
                         const GameConfig& cfg);

// One multi-matching: a set of sellers engaged jointly and the worth created.
struct MultiMatch {
    std::vector<int> sellers;  // indices into seller_caps, distinct
    double worth = 0.0;        // a_mj
};

struct MultiMatchInstance {
    int n_sellers = 0;
    std::vector<std::vector<MultiMatch>> buyers;  // per buyer j, its M_j
    std::vector<double> seller_caps;              // w_i
};

struct MultiMatchSolution {
    std::vector<std::vector<double>> x;  // x_mj, shaped like buyers
    std::vector<double> v;               // seller duals
    std::vector<double> u;               // buyer duals
    int iterations = 0;
    bool converged = false;
};

// Same clipped balancing; a seller's expected load sums x over every
// multi-matching containing it, each buyer's probabilities sum to at most 1.
MultiMatchSolution solve_many_to_many(const MultiMatchInstance& inst,
                                      const GameConfig& cfg);

struct DeterministicAssignment {
    std::vector<int> match_of_seller;  // buyer index or -1 for unmatched
    double value = 0.0;
};

// Exhaustive search over partial matchings (a pair may stay unmatched since
// a_ij can be negative). Refuses instances above 8x8.
DeterministicAssignment deterministic_oracle(const CharacteristicMatrix& a);

// CSV ingestion: sellers file with header `seller,c`; buyers file is a
// matrix with one named column per buyer.
ValuationInstance load_valuations(const std::string& sellers_csv,
                                  const std::string& buyers_csv);

}  // namespace maas
