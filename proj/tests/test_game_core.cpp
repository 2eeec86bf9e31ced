#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "maas/game_core.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace maas;

namespace {

// the product market fixture: three sellers, three buyers
ValuationInstance product_market() {
    ValuationInstance inst;
    inst.seller_values = {37, 25, 43};
    inst.buyer_values = {{42, 41, 42}, {26, 23, 25}, {47, 48, 46}};
    return inst;
}

double row_sum(const Matrix& x, int i) {
    double s = 0;
    for (double v : x[i]) s += v;
    return s;
}

double col_sum(const Matrix& x, int j) {
    double s = 0;
    for (const auto& r : x) s += r[j];
    return s;
}

// When every marginal is saturated the dual split has one flat direction
// (v + c, u - c); both solutions are moved to min u = 0 before comparing.
void canonicalize(std::vector<double>& v, std::vector<double>& u, const Matrix& x,
                  const std::vector<double>& rcap, const std::vector<double>& ccap) {
    for (size_t i = 0; i < v.size(); ++i)
        if (row_sum(x, static_cast<int>(i)) < rcap[i] - 1e-7) return;
    for (size_t j = 0; j < u.size(); ++j)
        if (col_sum(x, static_cast<int>(j)) < ccap[j] - 1e-7) return;
    double c = u.empty() ? 0.0 : *std::min_element(u.begin(), u.end());
    for (double& x2 : u) x2 -= c;
    for (double& x2 : v) x2 += c;
}

}  // namespace

TEST_CASE("characteristic matrix is buyer value minus seller value") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    Matrix want = {{5, 4, 5}, {1, -2, 0}, {4, 5, 3}};
    REQUIRE(cm.a.size() == 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(cm.a[i][j] == doctest::Approx(want[i][j]));
}

TEST_CASE("characteristic matrix rejects ragged input") {
    ValuationInstance inst = product_market();
    inst.buyer_values[1].pop_back();
    CHECK_THROWS(characteristic_one_to_one(inst));
    inst = product_market();
    inst.seller_values.pop_back();
    CHECK_THROWS(characteristic_one_to_one(inst));
}

TEST_CASE("product market solution matches the certified optimum") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    GameConfig gc;
    MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
    CHECK(sol.converged);

    oracle::MatchingOptimum opt = oracle::solve_matching(cm.a, {}, {}, gc.alpha);
    REQUIRE(opt.gap < 1e-8);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(sol.x[i][j] == doctest::Approx(opt.x[i][j]).epsilon(1e-6));

    std::vector<double> sv = sol.v, su = sol.u, ov = opt.v, ou = opt.u;
    std::vector<double> ones(3, 1.0);
    canonicalize(sv, su, sol.x, ones, ones);
    canonicalize(ov, ou, opt.x, ones, ones);
    for (int i = 0; i < 3; ++i) {
        CHECK(sv[i] == doctest::Approx(ov[i]).epsilon(1e-6));
        CHECK(su[i] == doctest::Approx(ou[i]).epsilon(1e-6));
    }
}

TEST_CASE("logit identities hold at the fixed point") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    GameConfig gc;
    MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
    LogitReport lr = verify_logit(sol, cm, gc);
    CHECK(lr.max_row_residual < 1e-6);
    CHECK(lr.max_col_residual < 1e-6);
    CHECK(lr.slack_rows.empty());
    CHECK(lr.slack_cols.empty());
}

TEST_CASE("duals stay nonnegative and marginals feasible") {
    std::mt19937 rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        int n = 1 + rep % 4, m = 1 + (rep * 7 + 3) % 4;
        CharacteristicMatrix cm = testgen::random_characteristic(rng, n, m);
        GameConfig gc;
        gc.alpha = 0.5 + 0.1 * rep;
        MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
        for (double v : sol.v) CHECK(v >= 0);
        for (double u : sol.u) CHECK(u >= 0);
        for (int i = 0; i < n; ++i) CHECK(row_sum(sol.x, i) <= 1 + 1e-8);
        for (int j = 0; j < m; ++j) CHECK(col_sum(sol.x, j) <= 1 + 1e-8);
        for (const auto& row : sol.x)
            for (double x : row) CHECK(x > 0);
    }
}

TEST_CASE("random instances match the certified optimum") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> cap(0.4, 2.0);
    for (int rep = 0; rep < 12; ++rep) {
        int n = 1 + rep % 4, m = 1 + (rep * 5 + 2) % 4;
        CharacteristicMatrix cm = testgen::random_characteristic(rng, n, m);
        std::vector<double> rcap(n), ccap(m);
        for (double& c : rcap) c = cap(rng);
        for (double& c : ccap) c = cap(rng);
        GameConfig gc;
        gc.alpha = 1.0;
        MatchingSolution sol = solve_stochastic_matching(cm, rcap, ccap, gc);
        oracle::MatchingOptimum opt = oracle::solve_matching(cm.a, rcap, ccap, gc.alpha);
        REQUIRE(opt.gap < 1e-7 * (1 + std::abs(opt.primal)));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                CHECK(sol.x[i][j] ==
                      doctest::Approx(opt.x[i][j]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("expected payoffs are duals over alpha") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    GameConfig gc;
    gc.alpha = 4.0;
    MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
    auto [pv, pu] = expected_payoffs(sol, gc);
    for (size_t i = 0; i < pv.size(); ++i) CHECK(pv[i] == doctest::Approx(sol.v[i] / 4.0));
    for (size_t j = 0; j < pu.size(); ++j) CHECK(pu[j] == doctest::Approx(sol.u[j] / 4.0));
}

TEST_CASE("deterministic oracle finds the assignment of the product market") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    DeterministicAssignment da = deterministic_oracle(cm);
    CHECK(da.match_of_seller == std::vector<int>{2, 0, 1});
    CHECK(da.value == doctest::Approx(11.0));
}

TEST_CASE("deterministic oracle may leave sellers unmatched") {
    CharacteristicMatrix cm;
    cm.a = {{-1.0, -2.0}, {3.0, -1.0}};
    DeterministicAssignment da = deterministic_oracle(cm);
    CHECK(da.match_of_seller == std::vector<int>{-1, 0});
    CHECK(da.value == doctest::Approx(3.0));
}

TEST_CASE("deterministic oracle refuses large instances") {
    CharacteristicMatrix cm;
    cm.a.assign(9, std::vector<double>(9, 1.0));
    CHECK_THROWS(deterministic_oracle(cm));
}

TEST_CASE("sharpening alpha approaches the deterministic assignment") {
    CharacteristicMatrix cm = characteristic_one_to_one(product_market());
    DeterministicAssignment da = deterministic_oracle(cm);
    double prev_off = 1.0;
    for (double alpha : {1.0, 5.0, 20.0, 100.0}) {
        GameConfig gc;
        gc.alpha = alpha;
        gc.max_iters = 1000000;  // sweeps per unit of precision grow with alpha
        MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
        double off = 0;
        for (size_t i = 0; i < sol.x.size(); ++i)
            for (size_t j = 0; j < sol.x[i].size(); ++j)
                if (static_cast<int>(j) != da.match_of_seller[i])
                    off = std::max(off, sol.x[i][j]);
        CHECK(off < prev_off);
        prev_off = off;
        if (alpha >= 5.0)
            for (size_t i = 0; i < sol.x.size(); ++i) {
                int argmax = static_cast<int>(
                    std::max_element(sol.x[i].begin(), sol.x[i].end()) - sol.x[i].begin());
                CHECK(argmax == da.match_of_seller[i]);
            }
    }
}

TEST_CASE("one by one zero instance matches with certainty") {
    CharacteristicMatrix cm;
    cm.a = {{0.0}};
    GameConfig gc;
    MatchingSolution sol = solve_stochastic_matching(cm, {}, {}, gc);
    CHECK(sol.x[0][0] == doctest::Approx(1.0));
    CHECK(sol.v[0] == doctest::Approx(0.0));
    CHECK(sol.u[0] == doctest::Approx(0.0));
}

TEST_CASE("many-to-many with singleton coalitions reduces to one-to-one") {
    std::mt19937 rng(11);
    CharacteristicMatrix cm = testgen::random_characteristic(rng, 3, 3);
    GameConfig gc;
    MatchingSolution one = solve_stochastic_matching(cm, {}, {}, gc);

    MultiMatchInstance mi;
    mi.n_sellers = 3;
    mi.seller_caps = {1, 1, 1};
    mi.buyers.resize(3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) mi.buyers[j].push_back({{i}, cm.a[i][j]});
    MultiMatchSolution many = solve_many_to_many(mi, gc);
    CHECK(many.converged);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
            CHECK(many.x[j][i] == doctest::Approx(one.x[i][j]).epsilon(1e-6));
}

TEST_CASE("many-to-many respects loads and buyer budgets") {
    MultiMatchInstance mi;
    mi.n_sellers = 2;
    mi.seller_caps = {1.2, 0.4};
    mi.buyers = {
        {{{0}, 1.0}, {{1}, 0.8}, {{0, 1}, 1.6}},
        {{{0}, 0.7}, {{0, 1}, 1.2}},
    };
    GameConfig gc;
    MultiMatchSolution sol = solve_many_to_many(mi, gc);
    CHECK(sol.converged);
    for (size_t j = 0; j < mi.buyers.size(); ++j) {
        double tot = 0;
        for (double x : sol.x[j]) {
            CHECK(x > 0);
            tot += x;
        }
        CHECK(tot <= 1 + 1e-8);
        // slack budget means a zero dual
        if (tot < 1 - 1e-7) CHECK(sol.u[j] == doctest::Approx(0.0).epsilon(1e-9));
    }
    for (int i = 0; i < 2; ++i) {
        double load = 0;
        for (size_t j = 0; j < mi.buyers.size(); ++j)
            for (size_t k = 0; k < mi.buyers[j].size(); ++k)
                for (int s : mi.buyers[j][k].sellers)
                    if (s == i) load += sol.x[j][k];
        CHECK(load <= mi.seller_caps[i] + 1e-8);
        if (load < mi.seller_caps[i] - 1e-7) CHECK(sol.v[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("valuations load from the fixture files") {
    std::string dir = std::string(MAAS_SOURCE_DIR) + "/tests/data";
    ValuationInstance inst =
        load_valuations(dir + "/products_sellers.csv", dir + "/products_buyers.csv");
    CHECK(inst.seller_values == std::vector<double>{37, 25, 43});
    REQUIRE(inst.buyer_values.size() == 3);
    CHECK(inst.buyer_values[2] == std::vector<double>{47, 48, 46});
}
