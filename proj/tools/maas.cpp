// Command line front end: scenario loading, one subcommand per solver
// layer, trace and report emission.
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maas/csv.hpp"
#include "maas/game_core.hpp"
#include "maas/network.hpp"
#include "maas/pathgen.hpp"
#include "maas/stackelberg.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using namespace maas;

// csv cells carry enough digits to reload without visible drift
std::string cell(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

std::string cell(int x) { return std::to_string(x); }
std::string cell(long x) { return std::to_string(x); }

struct CommonArgs {
    std::string scenario;
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    int threads = 1;
    std::string method = "exhaustive";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--scenario", a.scenario, "scenario directory")->required();
    cmd->add_option("--config", a.config, "config file replacing the scenario's");
    cmd->add_option("--out", a.out, "output directory for the result bundle");
    cmd->add_option("--override", a.overrides, "config override key=value, repeatable");
    cmd->add_option("--threads", a.threads, "worker threads for path generation")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--method", a.method, "path enumeration: yen or exhaustive");
}

PathgenMethod parse_method(const std::string& m) {
    if (m == "yen") return PathgenMethod::Yen;
    if (m == "exhaustive") return PathgenMethod::Exhaustive;
    throw std::runtime_error("unknown method '" + m + "', expected yen or exhaustive");
}

std::pair<Network, ScenarioConfig> load_expanded(const CommonArgs& a) {
    Scenario s = load_scenario(a.scenario);
    if (!a.config.empty()) s.config = parse_scenario_config(a.config);
    for (const std::string& ov : a.overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("override '" + ov + "' is not key=value");
        set_config_key(s.config, trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)),
                       "--override");
    }
    validate_config(s.config, "--override");
    Network net = expand_network(s);
    return {std::move(net), s.config};
}

// fare rows address links by endpoint names; only operated services carry
// fares, so parallel walk links never collide with the lookup
std::vector<double> read_fares_csv(const Network& net, const std::string& path) {
    std::vector<double> fares(net.links.size(), 0.0);
    CsvTable t = read_csv(path);
    int ct = t.col("tail"), ch = t.col("head"), cf = t.col("fare");
    if (ct < 0 || ch < 0 || cf < 0)
        throw std::runtime_error(path + ": needs columns tail,head,fare");
    for (const auto& r : t.rows) {
        int found = -1;
        for (size_t l = 0; l < net.links.size(); ++l) {
            const Link& lk = net.links[l];
            if (!is_priceable(lk.kind)) continue;
            if (net.node_names[lk.tail] != r[ct] || net.node_names[lk.head] != r[ch])
                continue;
            if (found >= 0)
                throw std::runtime_error(path + ": link " + r[ct] + "," + r[ch] +
                                         " is ambiguous");
            found = static_cast<int>(l);
        }
        if (found < 0)
            throw std::runtime_error(path + ": no priceable link " + r[ct] + "," + r[ch]);
        fares[found] = parse_double(r[cf], path);
        if (fares[found] < 0)
            throw std::runtime_error(path + ": fares must be nonnegative");
    }
    return fares;
}

void write_fares_csv(const Network& net, const std::vector<double>& fares,
                     const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (size_t l = 0; l < net.links.size(); ++l) {
        const Link& lk = net.links[l];
        if (!is_priceable(lk.kind)) continue;
        rows.push_back({net.node_names[lk.tail], net.node_names[lk.head], cell(fares[l])});
    }
    write_csv(path, {"tail", "head", "fare"}, rows);
}

json solution_to_json(const Network& net, const ScenarioConfig& cfg, const PathSet& paths,
                      const std::vector<double>& fares, const EquilibriumSolution& sol) {
    Delays delays = delays_from(net, cfg, sol);
    OperatorDecisions dec = operator_decisions(net, sol, 1e-6 + cfg.eps_balancing);
    json jp = json::array();
    for (size_t s = 0; s < paths.size(); ++s)
        for (size_t k = 0; k < paths[s].size(); ++k) {
            PathCostBreakdown b = path_cost_breakdown(net, cfg, static_cast<int>(s),
                                                      paths[s][k], fares, delays);
            jp.push_back({{"group", s},
                          {"links", paths[s][k].links},
                          {"flow", sol.flows[s][k]},
                          {"T", b.T},
                          {"C", b.C},
                          {"disutility", b.disutility}});
        }
    json j;
    j["paths"] = std::move(jp);
    j["link_flows"] = sol.link_flows;
    j["y"] = dec.y;
    j["v"] = dec.v;
    j["D_AF"] = delays.af;
    j["D_NM"] = delays.nm;
    j["u_s"] = group_utilities(sol);
    j["lagrangian_trace"] = sol.lagrangian;
    j["converged"] = sol.converged;
    j["sweeps"] = sol.sweeps;
    j["revenue"] = total_revenue(net, paths, fares, sol);
    j["unserved"] = unserved_demand(net, paths, sol);
    j["traveler_payoff"] = traveler_payoff(net, sol);
    return j;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << "\n";
}

// one table across link kinds; the per-kind report slices fall out of the
// kind column
void write_link_flows_csv(const Network& net, const ScenarioConfig& cfg,
                          const std::vector<double>& fares, const EquilibriumSolution& sol,
                          const std::string& path) {
    Delays delays = delays_from(net, cfg, sol);
    OperatorDecisions dec = operator_decisions(net, sol, 1e-6 + cfg.eps_balancing);
    std::vector<std::vector<std::string>> rows;
    for (size_t l = 0; l < net.links.size(); ++l) {
        const Link& lk = net.links[l];
        std::string capacity, share, fare, delay;
        if (lk.kind == LinkKind::FixedRoute) {
            capacity = cell(lk.w);
            share = cell(dec.y[l]);
            delay = cell(delays.af[l]);
        } else if (lk.kind == LinkKind::ModService) {
            capacity = cell(net.zones[lk.zone].z);
            share = cell(dec.v[lk.zone]);
            delay = cell(delays.nm[lk.zone]);
        }
        if (is_priceable(lk.kind)) fare = cell(fares[l]);
        rows.push_back({net.node_names[lk.tail], net.node_names[lk.head],
                        to_string(lk.kind), lk.op, cell(sol.link_flows[l]), fare, capacity,
                        share, delay});
    }
    write_csv(path, {"tail", "head", "kind", "operator", "flow", "fare", "capacity",
                     "share", "delay"},
              rows);
}

void print_equilibrium_summary(const Network& net, const ScenarioConfig& cfg,
                               const PathSet& paths, const std::vector<double>& fares,
                               const EquilibriumSolution& sol) {
    KktReport kkt = kkt_report(net, cfg, paths, fares, sol);
    double worst_drop = 0;
    for (size_t i = 1; i < sol.lagrangian.size(); ++i)
        worst_drop = std::max(worst_drop, sol.lagrangian[i - 1] - sol.lagrangian[i]);
    std::cout << "sweeps            " << sol.sweeps << "\n"
              << "revenue           " << total_revenue(net, paths, fares, sol) << "\n"
              << "unserved demand   " << unserved_demand(net, paths, sol) << "\n"
              << "traveler payoff   " << traveler_payoff(net, sol) << "\n"
              << "kkt stationarity  " << kkt.max_stationarity << "\n"
              << "kkt logit         " << kkt.max_logit_residual << "\n"
              << "kkt demand gap    " << kkt.max_demand_gap << "\n"
              << "kkt cap excess    " << std::max(kkt.max_cap_excess, kkt.max_zone_excess)
              << "\n"
              << "kkt slackness     " << std::max(kkt.max_cs_af, kkt.max_cs_nm) << "\n";
    if (!sol.lagrangian.empty())
        std::cout << "dual objective    " << sol.lagrangian.front() << " -> "
                  << sol.lagrangian.back() << " (worst drop " << worst_drop << ")\n";
}

int cmd_game(const std::string& sellers, const std::string& buyers, double alpha,
             int max_iters, const std::string& out) {
    ValuationInstance inst = load_valuations(sellers, buyers);
    CharacteristicMatrix a = characteristic_one_to_one(inst);
    GameConfig gc;
    gc.alpha = alpha;
    gc.max_iters = max_iters;
    MatchingSolution sol = solve_stochastic_matching(a, inst.seller_caps, inst.buyer_caps, gc);
    auto [pv, pu] = expected_payoffs(sol, gc);
    LogitReport lr = verify_logit(sol, a, gc);

    std::cout << "matching probabilities (sellers x buyers)\n";
    for (const auto& row : sol.x) {
        for (size_t j = 0; j < row.size(); ++j) std::cout << (j ? " " : "") << row[j];
        std::cout << "\n";
    }
    auto print_vec = [](const char* label, const std::vector<double>& v) {
        std::cout << label;
        for (double x : v) std::cout << " " << x;
        std::cout << "\n";
    };
    print_vec("seller duals v:", sol.v);
    print_vec("buyer duals u: ", sol.u);
    print_vec("seller payoffs:", pv);
    print_vec("buyer payoffs: ", pu);
    std::cout << "logit residuals row " << lr.max_row_residual << " col "
              << lr.max_col_residual << "\n"
              << "iterations " << sol.iterations << "\n";

    if (!out.empty()) {
        fs::create_directories(out);
        json j;
        json x = json::array();
        for (const auto& row : sol.x)
            for (double v : row) x.push_back(v);
        j["x"] = std::move(x);
        j["v"] = sol.v;
        j["u"] = sol.u;
        j["iterations"] = sol.iterations;
        j["converged"] = sol.converged;
        write_json(j, out + "/matching.json");
    }
    return sol.converged ? 0 : 2;
}

int cmd_equilibrium(const CommonArgs& a, const std::string& fares_path, bool dummy_only) {
    auto [net, cfg] = load_expanded(a);
    std::vector<double> fares(net.links.size(), 0.0);
    if (!fares_path.empty()) fares = read_fares_csv(net, fares_path);

    PathSet paths;
    if (dummy_only) {
        paths = dummy_only_paths(net);
    } else {
        paths = generate_paths(net, cfg, fares, zero_delays(net), parse_method(a.method),
                               a.threads);
    }
    EquilibriumSolution sol = solve_equilibrium(net, cfg, paths, fares);
    print_equilibrium_summary(net, cfg, paths, fares, sol);

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_json(solution_to_json(net, cfg, paths, fares, sol), a.out + "/equilibrium.json");
        write_link_flows_csv(net, cfg, fares, sol, a.out + "/link_flows.csv");
    }
    return 0;
}

std::string od_label(const Network& net, int od) {
    return net.node_names[net.ods[od].origin] + "->" + net.node_names[net.ods[od].dest];
}

int cmd_stackelberg(const CommonArgs& a) {
    auto [net, cfg] = load_expanded(a);
    StackelbergResult r = solve_stackelberg(net, cfg, parse_method(a.method), a.threads);

    for (const IterationRecord& rec : r.trace)
        std::cout << "iter " << rec.iter << "  revenue " << rec.revenue << "  beta "
                  << rec.beta_star << "  paths " << rec.paths_total
                  << (rec.regenerated ? "  regen" : "") << "\n";
    std::cout << (r.converged ? "converged" : "iteration cap reached") << " after "
              << r.iterations << " iterations\n";

    MarketSummary ms = summarize(net, r);
    std::cout << "revenue           " << ms.revenue << "\n"
              << "traveler payoff   " << ms.traveler_payoff << "\n"
              << "unserved demand   " << ms.unserved << "\n";
    for (const OperatorSummary& os : ms.operators)
        std::cout << "operator " << os.op << ": links " << os.links_operated << ", zones "
                  << os.zones_operated << ", flow " << os.flow << ", revenue " << os.revenue
                  << "\n";

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        json ej = solution_to_json(net, cfg, r.paths, r.fares, r.solution);
        write_json(ej, a.out + "/equilibrium.json");
        write_link_flows_csv(net, cfg, r.fares, r.solution, a.out + "/link_flows.csv");
        write_fares_csv(net, r.fares, a.out + "/fares.csv");

        std::vector<std::vector<std::string>> rows;
        for (const IterationRecord& rec : r.trace)
            rows.push_back({cell(rec.iter), cell(rec.revenue), cell(rec.beta_star),
                            cell(rec.flow_norm), cell(rec.fare_norm),
                            rec.regenerated ? "1" : "0", cell(rec.paths_total),
                            cell(rec.duration_ms)});
        write_csv(a.out + "/trace.csv",
                  {"iter", "revenue", "beta_star", "flow_norm", "fare_norm", "regenerated",
                   "paths_total", "duration_ms"},
                  rows);

        rows.clear();
        for (const IterationRecord& rec : r.trace)
            for (size_t s = 0; s < rec.od_stats.size(); ++s)
                rows.push_back({od_label(net, static_cast<int>(s)), cell(rec.iter),
                                cell(rec.od_stats[s].nodes_removed),
                                cell(rec.od_stats[s].links_removed),
                                cell(rec.od_stats[s].paths_found)});
        write_csv(a.out + "/paths.csv",
                  {"od", "iteration", "nodes_removed", "links_removed", "paths_found"}, rows);

        rows.clear();
        for (const OperatorSummary& os : ms.operators)
            rows.push_back({os.op, cell(os.links_operated), cell(os.zones_operated),
                            cell(os.flow), cell(os.revenue)});
        write_csv(a.out + "/summary.csv",
                  {"operator", "links_operated", "zones_operated", "flow", "revenue"}, rows);

        json run;
        run["subcommand"] = "stackelberg";
        run["scenario"] = a.scenario;
        run["config"] = a.config;
        run["out"] = a.out;
        run["overrides"] = a.overrides;
        run["threads"] = a.threads;
        run["method"] = a.method;
        run["converged"] = r.converged;
        run["iterations"] = r.iterations;
        run["revenue"] = ms.revenue;
        run["traveler_payoff"] = ms.traveler_payoff;
        run["unserved"] = ms.unserved;
        write_json(run, a.out + "/run.json");
    }
    return r.converged ? 0 : 2;
}

int cmd_paths(const CommonArgs& a, const std::string& fares_path) {
    auto [net, cfg] = load_expanded(a);
    std::vector<double> fares(net.links.size(), 0.0);
    if (!fares_path.empty()) fares = read_fares_csv(net, fares_path);

    std::vector<GenStats> gs;
    PathSet paths = generate_paths(net, cfg, fares, zero_delays(net), parse_method(a.method),
                                   a.threads, &gs);

    std::cout << "od,iteration,nodes_removed,links_removed,paths_found\n";
    for (size_t s = 0; s < gs.size(); ++s)
        std::cout << od_label(net, static_cast<int>(s)) << ",0," << gs[s].nodes_removed
                  << "," << gs[s].links_removed << "," << gs[s].paths_found << "\n";

    std::vector<std::vector<std::string>> rows;
    for (size_t s = 0; s < paths.size(); ++s) {
        std::cout << "paths " << od_label(net, static_cast<int>(s)) << " (opt-out cost "
                  << cfg.alpha_t * net.ods[s].utility << ")\n";
        for (size_t k = 1; k < paths[s].size(); ++k) {
            const Path& p = paths[s][k];
            double cost = path_systematic_disutility(net, cfg, p, fares);
            std::string seq;
            for (size_t i = 0; i < p.nodes.size(); ++i)
                seq += (i ? "-" : "") + net.node_names[p.nodes[i]];
            std::cout << "  " << cost << "  " << seq << "\n";
            rows.push_back({od_label(net, static_cast<int>(s)), cell(cost), seq});
        }
    }

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        std::vector<std::vector<std::string>> srows;
        for (size_t s = 0; s < gs.size(); ++s)
            srows.push_back({od_label(net, static_cast<int>(s)), "0",
                             cell(gs[s].nodes_removed), cell(gs[s].links_removed),
                             cell(gs[s].paths_found)});
        write_csv(a.out + "/paths.csv",
                  {"od", "iteration", "nodes_removed", "links_removed", "paths_found"},
                  srows);
        write_csv(a.out + "/path_lists.csv", {"od", "cost", "nodes"}, rows);
    }
    return 0;
}

int cmd_report(const std::string& dir) {
    bool any = false;
    std::string runp = dir + "/run.json";
    if (fs::exists(runp)) {
        any = true;
        std::ifstream f(runp);
        json run = json::parse(f);
        std::cout << "run: " << run.value("subcommand", std::string("?")) << " on "
                  << run.value("scenario", std::string("?")) << "\n"
                  << (run.value("converged", false) ? "converged" : "not converged")
                  << " after " << run.value("iterations", 0) << " iterations\n"
                  << "revenue           " << run.value("revenue", 0.0) << "\n"
                  << "traveler payoff   " << run.value("traveler_payoff", 0.0) << "\n"
                  << "unserved demand   " << run.value("unserved", 0.0) << "\n";
    }
    std::string sump = dir + "/summary.csv";
    if (fs::exists(sump)) {
        any = true;
        CsvTable t = read_csv(sump);
        for (const auto& r : t.rows) {
            std::cout << "operator " << r[0] << ": links " << r[1] << ", zones " << r[2]
                      << ", flow " << parse_double(r[3], sump) << ", revenue "
                      << parse_double(r[4], sump) << "\n";
        }
    }
    std::string tracep = dir + "/trace.csv";
    if (fs::exists(tracep)) {
        any = true;
        CsvTable t = read_csv(tracep);
        std::cout << "iterations " << t.rows.size() << "\n";
        if (!t.rows.empty()) {
            const auto& last = t.rows.back();
            std::cout << "final revenue " << parse_double(last[1], tracep) << ", beta "
                      << parse_double(last[2], tracep) << ", paths " << last[6] << "\n";
        }
    }
    if (!any) throw std::runtime_error(dir + " holds no run.json, summary.csv or trace.csv");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::cout << std::setprecision(6);
    CLI::App app{"solvers for stochastic assignment games on mobility networks"};
    app.require_subcommand(1);

    std::string sellers, buyers, game_out;
    double alpha = 1.0;
    CLI::App* game = app.add_subcommand("game", "one-to-one stochastic matching from CSVs");
    game->add_option("--sellers", sellers, "csv with columns seller,c")->required();
    game->add_option("--buyers", buyers, "matrix csv, one column per buyer")->required();
    game->add_option("--alpha", alpha, "stochasticity scale");
    int game_max_iters = 1000000;
    game->add_option("--max-iters", game_max_iters, "balancing sweep limit");
    game->add_option("--out", game_out, "output directory");

    CommonArgs ea;
    std::string eq_fares;
    bool dummy_only = false;
    CLI::App* equilibrium =
        app.add_subcommand("equilibrium", "matching equilibrium at fixed fares");
    add_common(equilibrium, ea);
    equilibrium->add_option("--fares", eq_fares, "fare csv tail,head,fare");
    equilibrium->add_flag("--dummy-only", dummy_only, "restrict every group to opting out");

    CommonArgs sa;
    CLI::App* stackelberg =
        app.add_subcommand("stackelberg", "bilevel fare optimization over the scenario");
    add_common(stackelberg, sa);

    CommonArgs pa;
    std::string paths_fares;
    CLI::App* paths = app.add_subcommand("paths", "bounded path generation per demand group");
    add_common(paths, pa);
    paths->add_option("--fares", paths_fares, "fare csv tail,head,fare");

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "summarize a result bundle directory");
    report->add_option("dir", report_dir, "bundle directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*game) return cmd_game(sellers, buyers, alpha, game_max_iters, game_out);
        if (*equilibrium) return cmd_equilibrium(ea, eq_fares, dummy_only);
        if (*stackelberg) return cmd_stackelberg(sa);
        if (*paths) return cmd_paths(pa, paths_fares);
        if (*report) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
