#include "maas/pathgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace maas {

double generation_link_cost(const Network& net, const ScenarioConfig& cfg, int link,
                            const std::vector<double>& fares, const Delays& delays) {
    return std::max(0.0, link_disutility(net, cfg, link, fares, delays));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr size_t kPathCap = 5000000;  // refuse to enumerate past this, the bound is off

struct Arc {
    int other;
    int link;
    double cost;
};

struct Adjacency {
    std::vector<std::vector<Arc>> out, in;
};

Adjacency build_adjacency(const Network& net, const ScenarioConfig& cfg,
                          const std::vector<double>& fares, const Delays& delays) {
    Adjacency a;
    a.out.resize(net.node_names.size());
    a.in.resize(net.node_names.size());
    for (size_t l = 0; l < net.links.size(); ++l) {
        if (net.links[l].kind == LinkKind::Dummy) continue;
        double c = generation_link_cost(net, cfg, static_cast<int>(l), fares, delays);
        a.out[net.links[l].tail].push_back({net.links[l].head, static_cast<int>(l), c});
        a.in[net.links[l].head].push_back({net.links[l].tail, static_cast<int>(l), c});
    }
    return a;
}

std::vector<double> dijkstra(const std::vector<std::vector<Arc>>& adj, int src,
                             const std::vector<char>* node_ok = nullptr,
                             const std::vector<char>* link_ok = nullptr) {
    std::vector<double> dist(adj.size(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (const Arc& arc : adj[v]) {
            if (node_ok && !(*node_ok)[arc.other]) continue;
            if (link_ok && !(*link_ok)[arc.link]) continue;
            if (d + arc.cost < dist[arc.other]) {
                dist[arc.other] = d + arc.cost;
                pq.push({dist[arc.other], arc.other});
            }
        }
    }
    return dist;
}

PruneResult prune_impl(const Network& net, const ScenarioConfig& cfg, const Adjacency& adj,
                       int od) {
    const Od& o = net.ods[od];
    double bound = cfg.alpha_t * o.utility;
    std::vector<double> tau_o = dijkstra(adj.out, o.origin);
    std::vector<double> tau_d = dijkstra(adj.in, o.dest);

    PruneResult pr;
    pr.node_kept.assign(net.node_names.size(), 0);
    pr.link_kept.assign(net.links.size(), 0);
    for (size_t v = 0; v < net.node_names.size(); ++v) {
        if (tau_o[v] + tau_d[v] <= bound) pr.node_kept[v] = 1;
        else ++pr.nodes_removed;
    }
    for (size_t l = 0; l < net.links.size(); ++l) {
        const Link& lk = net.links[l];
        if (lk.kind == LinkKind::Dummy) continue;
        double c = 0;
        for (const Arc& arc : adj.out[lk.tail])
            if (arc.link == static_cast<int>(l)) {
                c = arc.cost;
                break;
            }
        if (tau_o[lk.tail] + c + tau_d[lk.head] <= bound) pr.link_kept[l] = 1;
        else ++pr.links_removed;
    }
    return pr;
}

struct DfsCtx {
    const Adjacency& adj;
    const PruneResult& pr;
    const std::vector<double>& h;
    double bound;
    int dest;
    std::vector<char> visited;
    Path cur;
    std::vector<Path>& out;

    void go(int v, double g) {
        if (v == dest) {
            if (out.size() >= kPathCap)
                throw std::runtime_error("path enumeration exceeded the safety cap");
            out.push_back(cur);
            return;
        }
        visited[v] = 1;
        for (const Arc& arc : adj.out[v]) {
            if (!pr.link_kept[arc.link] || !pr.node_kept[arc.other] || visited[arc.other])
                continue;
            double ng = g + arc.cost;
            if (ng + h[arc.other] > bound) continue;
            cur.nodes.push_back(arc.other);
            cur.links.push_back(arc.link);
            go(arc.other, ng);
            cur.nodes.pop_back();
            cur.links.pop_back();
        }
        visited[v] = 0;
    }
};

struct Cand {
    double cost;
    std::vector<int> nodes, links;
    bool operator<(const Cand& o) const {
        return std::tie(cost, nodes, links) < std::tie(o.cost, o.nodes, o.links);
    }
};

std::optional<Cand> shortest_path(const Adjacency& adj, int src, int dst,
                                  const PruneResult& pr, const std::vector<char>& node_banned,
                                  const std::set<int>& link_banned) {
    std::vector<double> dist(adj.out.size(), kInf);
    std::vector<int> par_node(adj.out.size(), -1), par_link(adj.out.size(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        if (v == dst) break;
        for (const Arc& arc : adj.out[v]) {
            if (!pr.link_kept[arc.link] || !pr.node_kept[arc.other]) continue;
            if (node_banned[arc.other] || link_banned.count(arc.link)) continue;
            if (d + arc.cost < dist[arc.other]) {
                dist[arc.other] = d + arc.cost;
                par_node[arc.other] = v;
                par_link[arc.other] = arc.link;
                pq.push({dist[arc.other], arc.other});
            }
        }
    }
    if (!std::isfinite(dist[dst])) return std::nullopt;
    Cand c;
    c.cost = dist[dst];
    for (int v = dst; v != src; v = par_node[v]) {
        c.nodes.push_back(v);
        c.links.push_back(par_link[v]);
    }
    c.nodes.push_back(src);
    std::reverse(c.nodes.begin(), c.nodes.end());
    std::reverse(c.links.begin(), c.links.end());
    return c;
}

std::vector<Path> yen_paths(const Network& net, const Adjacency& adj, const PruneResult& pr,
                            int origin, int dest, double bound) {
    std::vector<char> no_ban(net.node_names.size(), 0);
    std::set<int> no_link_ban;
    auto first = shortest_path(adj, origin, dest, pr, no_ban, no_link_ban);
    if (!first || first->cost > bound) return {};

    std::vector<Cand> accepted{*first};
    std::set<std::vector<int>> seen{first->links};
    std::set<Cand> frontier;

    auto link_cost = [&](int l) {
        for (const Arc& arc : adj.out[net.links[l].tail])
            if (arc.link == l) return arc.cost;
        return kInf;
    };

    while (true) {
        const Cand last = accepted.back();
        double root_cost = 0;
        std::vector<char> node_banned(net.node_names.size(), 0);
        for (size_t i = 0; i + 1 < last.nodes.size(); ++i) {
            int spur = last.nodes[i];
            std::set<int> banned_links;
            for (const Cand& q : accepted)
                if (q.links.size() > i &&
                    std::equal(last.links.begin(), last.links.begin() + i, q.links.begin()))
                    banned_links.insert(q.links[i]);
            auto sp = shortest_path(adj, spur, dest, pr, node_banned, banned_links);
            if (sp) {
                Cand cand;
                cand.cost = root_cost + sp->cost;
                cand.nodes.assign(last.nodes.begin(), last.nodes.begin() + i);
                cand.nodes.insert(cand.nodes.end(), sp->nodes.begin(), sp->nodes.end());
                cand.links.assign(last.links.begin(), last.links.begin() + i);
                cand.links.insert(cand.links.end(), sp->links.begin(), sp->links.end());
                if (seen.insert(cand.links).second) frontier.insert(std::move(cand));
            }
            node_banned[spur] = 1;  // the root up to and including spur is off limits next
            root_cost += link_cost(last.links[i]);
        }
        if (frontier.empty()) break;
        Cand best = *frontier.begin();
        frontier.erase(frontier.begin());
        if (best.cost > bound) break;
        if (accepted.size() >= kPathCap)
            throw std::runtime_error("path enumeration exceeded the safety cap");
        accepted.push_back(std::move(best));
    }

    std::vector<Path> out;
    out.reserve(accepted.size());
    for (Cand& c : accepted) out.push_back({std::move(c.nodes), std::move(c.links)});
    return out;
}

std::vector<Path> od_paths_impl(const Network& net, const ScenarioConfig& cfg,
                                const Adjacency& adj, int od, const std::vector<double>& fares,
                                const Delays& delays, PathgenMethod method, GenStats* stats) {
    PruneResult pr = prune_impl(net, cfg, adj, od);
    if (stats) {
        stats->nodes_removed = pr.nodes_removed;
        stats->links_removed = pr.links_removed;
        stats->paths_found = 0;
    }
    const Od& o = net.ods[od];
    double bound = cfg.alpha_t * o.utility;
    std::vector<Path> paths;
    if (pr.node_kept[o.origin] && pr.node_kept[o.dest]) {
        if (method == PathgenMethod::Exhaustive) {
            std::vector<double> h = dijkstra(adj.in, o.dest, &pr.node_kept, &pr.link_kept);
            DfsCtx ctx{adj, pr, h, bound, o.dest,
                       std::vector<char>(net.node_names.size(), 0), Path{}, paths};
            ctx.cur.nodes.push_back(o.origin);
            ctx.go(o.origin, 0.0);
        } else {
            paths = yen_paths(net, adj, pr, o.origin, o.dest, bound);
        }
    }
    auto canonical_cost = [&](const Path& p) {
        double c = 0;
        for (int l : p.links) c += generation_link_cost(net, cfg, l, fares, delays);
        return c;
    };
    std::vector<std::pair<double, size_t>> order(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) order[i] = {canonical_cost(paths[i]), i};
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        const Path &pa = paths[a.second], &pb = paths[b.second];
        return std::tie(pa.nodes, pa.links) < std::tie(pb.nodes, pb.links);
    });
    std::vector<Path> sorted;
    sorted.reserve(paths.size());
    for (auto& [c, i] : order) sorted.push_back(std::move(paths[i]));
    if (stats) stats->paths_found = static_cast<int>(sorted.size());
    return sorted;
}

}  // namespace

PruneResult prune_subnetwork(const Network& net, const ScenarioConfig& cfg, int od,
                             const std::vector<double>& fares, const Delays& delays) {
    Adjacency adj = build_adjacency(net, cfg, fares, delays);
    return prune_impl(net, cfg, adj, od);
}

std::vector<Path> od_paths(const Network& net, const ScenarioConfig& cfg, int od,
                           const std::vector<double>& fares, const Delays& delays,
                           PathgenMethod method, GenStats* stats) {
    Adjacency adj = build_adjacency(net, cfg, fares, delays);
    return od_paths_impl(net, cfg, adj, od, fares, delays, method, stats);
}

PathSet generate_paths(const Network& net, const ScenarioConfig& cfg,
                       const std::vector<double>& fares, const Delays& delays,
                       PathgenMethod method, int threads, std::vector<GenStats>* stats) {
    Adjacency adj = build_adjacency(net, cfg, fares, delays);
    const int n_od = static_cast<int>(net.ods.size());
    PathSet ps(n_od);
    if (stats) stats->assign(n_od, GenStats{});

    auto run_od = [&](int s) {
        GenStats gs;
        std::vector<Path> real =
            od_paths_impl(net, cfg, adj, s, fares, delays, method, &gs);
        Path dummy;
        dummy.nodes = {net.ods[s].origin, net.ods[s].dest};
        dummy.links = {net.ods[s].dummy_link};
        ps[s].clear();
        ps[s].push_back(std::move(dummy));
        for (Path& p : real) ps[s].push_back(std::move(p));
        if (stats) (*stats)[s] = gs;
    };

    threads = std::max(1, std::min(threads, n_od));
    if (threads == 1) {
        for (int s = 0; s < n_od; ++s) run_od(s);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(threads);
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (int s = next.fetch_add(1); s < n_od; s = next.fetch_add(1)) run_od(s);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    return ps;
}

namespace {

// set equality up to ordering, by link sequence
bool same_path_sets(const PathSet& a, const PathSet& b) {
    if (a.size() != b.size()) return false;
    for (size_t s = 0; s < a.size(); ++s) {
        if (a[s].size() != b[s].size()) return false;
        std::vector<std::vector<int>> la, lb;
        la.reserve(a[s].size());
        lb.reserve(b[s].size());
        for (const Path& p : a[s]) la.push_back(p.links);
        for (const Path& p : b[s]) lb.push_back(p.links);
        std::sort(la.begin(), la.end());
        std::sort(lb.begin(), lb.end());
        if (la != lb) return false;
    }
    return true;
}

}  // namespace

UpdateResult update_path_sets(const Network& net, const ScenarioConfig& cfg,
                              const PathSet& current, const EquilibriumSolution& sol,
                              const std::vector<double>& fares, double metric,
                              PathgenMethod method, int threads) {
    UpdateResult res;
    // a large step left the alternatives stale, a vanishing step needs the
    // convergence check; anything in between keeps the current sets
    if (metric > cfg.beta_regen_threshold || metric < cfg.beta_converge_threshold) {
        Delays delays = delays_from(net, cfg, sol);
        res.paths = generate_paths(net, cfg, fares, delays, method, threads, &res.stats);
        res.regenerated = true;
        res.changed = !same_path_sets(current, res.paths);
    } else {
        res.paths = current;
    }
    return res;
}

}  // namespace maas
