#include "support/random_instances.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace testgen {

using maas::LinkSpec;
using maas::Scenario;

maas::CharacteristicMatrix random_characteristic(std::mt19937& rng, int rows, int cols) {
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    maas::CharacteristicMatrix cm;
    cm.a.assign(rows, std::vector<double>(cols));
    for (auto& r : cm.a)
        for (double& x : r) x = val(rng);
    return cm;
}

namespace {

std::string node_name(int i) { return "n" + std::to_string(i); }

LinkSpec walk(const std::string& a, const std::string& b, double t) {
    LinkSpec l;
    l.tail = a;
    l.head = b;
    l.kind = "walk";
    l.t = t;
    return l;
}

}  // namespace

Scenario random_scenario(std::mt19937& rng, const ScenarioOpts& opts) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    Scenario s;
    const int n = pick(2, opts.max_street_nodes);

    // walk backbone chaining every street node keeps Dijkstra fills alive
    for (int i = 0; i + 1 < n; ++i) {
        s.links.push_back(walk(node_name(i), node_name(i + 1), uniform(1, 6)));
        if (u01(rng) < 0.7)
            s.links.push_back(walk(node_name(i + 1), node_name(i), uniform(1, 6)));
    }

    const int zones = n >= 2 ? pick(0, opts.max_zones) : 0;
    for (int k = 0; k < zones; ++k) {
        maas::Zone z;
        z.id = "Z" + std::to_string(k);
        z.op = "mod";
        z.street_node = node_name(pick(0, n - 1));
        z.q = uniform(5, 40);
        z.z = uniform(50, 300);
        z.access_cost = uniform(0.5, 3);
        s.zones.push_back(z);
    }
    if (zones >= 2) {
        for (int a = 0; a < zones && static_cast<int>(s.links.size()) < opts.max_links; ++a)
            for (int b = 0; b < zones && static_cast<int>(s.links.size()) < opts.max_links;
                 ++b) {
                if (a == b || u01(rng) < 0.4) continue;
                LinkSpec l;
                l.tail = "Z" + std::to_string(a);
                l.head = "Z" + std::to_string(b);
                l.kind = "mod_service";
                l.op = "mod";
                l.t = uniform(2, 12);
                l.m = uniform(0.1, 1.0);
                s.links.push_back(l);
            }
    }

    while (static_cast<int>(s.links.size()) < opts.max_links && u01(rng) < 0.75) {
        int a = pick(0, n - 1), b = pick(0, n - 1);
        if (a == b) continue;
        if (u01(rng) < 0.5) {
            s.links.push_back(walk(node_name(a), node_name(b), uniform(1, 8)));
        } else {
            LinkSpec l;
            l.tail = node_name(a);
            l.head = node_name(b);
            l.kind = "fixed_route";
            l.op = u01(rng) < 0.5 ? "op1" : "op2";
            l.t = uniform(1, 8);
            l.c = uniform(20, 200);
            l.w = uniform(20, 120);
            s.links.push_back(l);
        }
    }

    const int ods = pick(1, opts.max_ods);
    std::set<std::pair<int, int>> used;
    for (int k = 0; k < ods; ++k) {
        int o = pick(0, n - 1), d = pick(0, n - 1);
        if (o == d || !used.insert({o, d}).second) continue;
        maas::OdSpec od;
        od.origin = node_name(o);
        od.destination = node_name(d);
        od.demand = u01(rng) < 0.1 ? 0.0 : uniform(5, 80);
        od.utility = uniform(8, 30);
        s.demand.push_back(od);
    }
    if (s.demand.empty()) {
        maas::OdSpec od;
        od.origin = node_name(0);
        od.destination = node_name(n - 1);
        od.demand = uniform(5, 80);
        od.utility = uniform(8, 30);
        s.demand.push_back(od);
    }

    s.config.alpha_t = uniform(0.5, 2.0);
    s.config.alpha_c =
        opts.equal_alphas ? s.config.alpha_t : uniform(0.0, 0.9 * s.config.alpha_t);
    s.config.eps_balancing = opts.eps_balancing;
    return s;
}

std::vector<double> random_fares(std::mt19937& rng, const maas::Network& net,
                                 double max_fare) {
    std::uniform_real_distribution<double> u(0.0, max_fare);
    std::vector<double> fares(net.links.size(), 0.0);
    for (size_t l = 0; l < net.links.size(); ++l)
        if (maas::is_priceable(net.links[l].kind)) fares[l] = u(rng);
    return fares;
}

maas::LinearProgram random_lp(std::mt19937& rng, int n, int m) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    maas::LinearProgram lp;
    lp.objective.resize(n);
    for (double& c : lp.objective) c = -1.0 + 3.0 * u01(rng);
    // a box row keeps the region bounded whatever else is drawn
    lp.A.push_back(std::vector<double>(n, 1.0));
    lp.rhs.push_back(5.0 + 20.0 * u01(rng));
    lp.sense.push_back(-1);
    for (int r = 0; r < m; ++r) {
        std::vector<double> row(n);
        for (double& a : row) a = -1.0 + 2.0 * u01(rng);
        double rhs = u01(rng) * 4.0;
        int sense = u01(rng) < 0.7 ? -1 : +1;
        if (sense > 0) rhs *= 0.3;  // loose floors keep most instances feasible
        lp.A.push_back(std::move(row));
        lp.rhs.push_back(rhs);
        lp.sense.push_back(sense);
    }
    return lp;
}

}  // namespace testgen
