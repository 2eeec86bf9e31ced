#include "maas/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "maas/csv.hpp"

namespace maas {

const char* to_string(LinkKind k) {
    switch (k) {
        case LinkKind::Walk: return "walk";
        case LinkKind::FixedRoute: return "fixed_route";
        case LinkKind::ModService: return "mod_service";
        case LinkKind::Access: return "access";
        case LinkKind::Egress: return "egress";
        case LinkKind::Dummy: return "dummy";
    }
    return "?";
}

LinkKind link_kind_from_string(const std::string& s) {
    if (s == "walk") return LinkKind::Walk;
    if (s == "fixed_route") return LinkKind::FixedRoute;
    if (s == "mod_service") return LinkKind::ModService;
    if (s == "access") return LinkKind::Access;
    if (s == "egress") return LinkKind::Egress;
    if (s == "dummy") return LinkKind::Dummy;
    throw std::runtime_error("unknown link kind '" + s + "'");
}

void set_config_key(ScenarioConfig& c, const std::string& key, const std::string& val,
                    const std::string& where) {
    double x = parse_double(val, where + " (" + key + ")");
    if (key == "alpha_t") c.alpha_t = x;
    else if (key == "alpha_c") c.alpha_c = x;
    else if (key == "eps_balancing") c.eps_balancing = x;
    else if (key == "beta_regen_threshold") c.beta_regen_threshold = x;
    else if (key == "beta_converge_threshold") c.beta_converge_threshold = x;
    else if (key == "fw_max_iters") c.fw_max_iters = static_cast<int>(x);
    else if (key == "bound_multiplier") c.bound_multiplier = x;
    else if (key == "mod_travel_cost_factor") c.mod_travel_cost_factor = x;
    else if (key == "max_outer_iters") c.max_outer_iters = static_cast<int>(x);
    else if (key == "seed") c.seed = static_cast<unsigned>(x);
    else throw std::runtime_error(where + ": unknown config key '" + key + "'");
}

void validate_config(const ScenarioConfig& c, const std::string& where) {
    if (!(c.alpha_t > 0)) throw std::runtime_error(where + ": alpha_t must be positive");
    if (!(c.alpha_c >= 0)) throw std::runtime_error(where + ": alpha_c must be nonnegative");
    if (!(c.eps_balancing > 0)) throw std::runtime_error(where + ": eps_balancing must be positive");
    if (c.fw_max_iters < 1) throw std::runtime_error(where + ": fw_max_iters must be at least 1");
    if (!(c.bound_multiplier >= 1)) throw std::runtime_error(where + ": bound_multiplier must be at least 1");
    if (c.max_outer_iters < 1) throw std::runtime_error(where + ": max_outer_iters must be at least 1");
}

ScenarioConfig parse_scenario_config(const std::string& path) {
    ScenarioConfig c;
    for (const auto& [key, val] : read_config_file(path))
        set_config_key(c, key, val, path);
    validate_config(c, path);
    return c;
}

namespace {

std::optional<double> opt_field(const std::vector<std::string>& row, int col,
                                const std::string& where) {
    if (col < 0 || row[col].empty()) return std::nullopt;
    return parse_double(row[col], where);
}

}  // namespace

Scenario load_scenario(const std::string& dir) {
    Scenario s;
    const std::string lp = dir + "/links.csv";
    CsvTable lt = read_csv(lp);
    int ctail = lt.col("tail"), chead = lt.col("head"), ckind = lt.col("kind"),
        cop = lt.col("operator"), ct = lt.col("t"), cc = lt.col("c"), cw = lt.col("w"),
        cm = lt.col("m");
    if (ctail < 0 || chead < 0 || ckind < 0)
        throw std::runtime_error(lp + ": needs columns tail,head,kind");
    for (const auto& r : lt.rows) {
        LinkSpec ls;
        ls.tail = r[ctail];
        ls.head = r[chead];
        ls.kind = r[ckind];
        if (cop >= 0) ls.op = r[cop];
        ls.t = opt_field(r, ct, lp);
        ls.c = opt_field(r, cc, lp);
        ls.w = opt_field(r, cw, lp);
        ls.m = opt_field(r, cm, lp);
        s.links.push_back(std::move(ls));
    }

    const std::string zp = dir + "/zones.csv";
    CsvTable zt = read_csv(zp);
    int zid = zt.col("zone"), zop = zt.col("operator"), zn = zt.col("node"), zq = zt.col("q"),
        zz = zt.col("z"), za = zt.col("access_cost");
    if (zid < 0 || zop < 0 || zn < 0 || zq < 0 || zz < 0 || za < 0)
        throw std::runtime_error(zp + ": needs columns zone,operator,node,q,z,access_cost");
    for (const auto& r : zt.rows) {
        Zone z;
        z.id = r[zid];
        z.op = r[zop];
        z.street_node = r[zn];
        z.q = parse_double(r[zq], zp);
        z.z = parse_double(r[zz], zp);
        z.access_cost = parse_double(r[za], zp);
        s.zones.push_back(std::move(z));
    }

    const std::string dp = dir + "/demand.csv";
    CsvTable dt = read_csv(dp);
    int dor = dt.col("origin"), dde = dt.col("destination"), dd = dt.col("demand"),
        du = dt.col("U");
    if (dor < 0 || dde < 0 || dd < 0 || du < 0)
        throw std::runtime_error(dp + ": needs columns origin,destination,demand,U");
    for (const auto& r : dt.rows) {
        OdSpec od;
        od.origin = r[dor];
        od.destination = r[dde];
        od.demand = parse_double(r[dd], dp);
        od.utility = parse_double(r[du], dp);
        s.demand.push_back(std::move(od));
    }

    s.config = parse_scenario_config(dir + "/config");
    return s;
}

namespace {

struct StreetGraph {
    std::vector<std::vector<std::pair<int, double>>> out;  // node -> (node, t)
};

std::vector<double> dijkstra_times(const StreetGraph& g, int src) {
    std::vector<double> dist(g.out.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (auto [w, len] : g.out[v])
            if (d + len < dist[w]) {
                dist[w] = d + len;
                pq.push({d + len, w});
            }
    }
    return dist;
}

}  // namespace

int Network::find_link(const std::string& tail, const std::string& head) const {
    int ti = node_id(tail), hi = node_id(head);
    if (ti < 0 || hi < 0) return -1;
    for (size_t l = 0; l < links.size(); ++l)
        if (links[l].tail == ti && links[l].head == hi) return static_cast<int>(l);
    return -1;
}

Network expand_network(const Scenario& s) {
    Network net;
    auto add_node = [&](const std::string& name) {
        auto it = net.node_index.find(name);
        if (it != net.node_index.end()) return it->second;
        int id = static_cast<int>(net.node_names.size());
        net.node_names.push_back(name);
        net.node_index.emplace(name, id);
        return id;
    };

    std::unordered_map<std::string, int> zone_of;
    for (size_t i = 0; i < s.zones.size(); ++i) {
        const Zone& z = s.zones[i];
        if (!zone_of.emplace(z.id, static_cast<int>(i)).second)
            throw std::runtime_error("duplicate zone id '" + z.id + "'");
        if (z.op.empty()) throw std::runtime_error("zone '" + z.id + "' has no operator");
        if (!(z.q >= 0)) throw std::runtime_error("zone '" + z.id + "': q must be nonnegative");
        if (!(z.z > 0)) throw std::runtime_error("zone '" + z.id + "': z must be positive");
        if (!(z.access_cost >= 0))
            throw std::runtime_error("zone '" + z.id + "': access_cost must be nonnegative");
    }

    // street nodes first, in links.csv order of appearance
    for (const auto& ls : s.links) {
        LinkKind k = link_kind_from_string(ls.kind);
        if (k == LinkKind::Walk || k == LinkKind::FixedRoute) {
            add_node(ls.tail);
            add_node(ls.head);
        }
    }
    for (const auto& z : s.zones) {
        if (zone_of.count(z.street_node))
            throw std::runtime_error("zone '" + z.id + "' uses a zone id as its street node");
        add_node(z.street_node);
    }
    for (const auto& od : s.demand) {
        if (zone_of.count(od.origin) || zone_of.count(od.destination))
            throw std::runtime_error("demand endpoints must be street nodes");
        add_node(od.origin);
        add_node(od.destination);
    }
    const int n_street = static_cast<int>(net.node_names.size());

    net.zones = s.zones;
    net.zone_node.resize(s.zones.size());
    for (size_t i = 0; i < s.zones.size(); ++i) {
        if (net.node_index.count(s.zones[i].id))
            throw std::runtime_error("zone id '" + s.zones[i].id + "' collides with a node name");
        net.zone_node[i] = add_node(s.zones[i].id);
    }

    StreetGraph street;
    street.out.resize(n_street);
    std::vector<std::pair<int, int>> pending_mod_t;  // (link id, nothing) filled below

    for (const auto& ls : s.links) {
        LinkKind k = link_kind_from_string(ls.kind);
        Link l;
        l.kind = k;
        l.op = ls.op;
        if (ls.tail == ls.head)
            throw std::runtime_error("self-loop link at '" + ls.tail + "'");
        switch (k) {
            case LinkKind::Walk: {
                if (!ls.t || !(*ls.t >= 0))
                    throw std::runtime_error("walk link " + ls.tail + "->" + ls.head +
                                             " needs a nonnegative t");
                l.tail = net.node_id(ls.tail);
                l.head = net.node_id(ls.head);
                l.t = *ls.t;
                street.out[l.tail].push_back({l.head, l.t});
                break;
            }
            case LinkKind::FixedRoute: {
                if (!ls.t || !(*ls.t >= 0) || !ls.c || !(*ls.c >= 0) || !ls.w || !(*ls.w > 0))
                    throw std::runtime_error("fixed_route link " + ls.tail + "->" + ls.head +
                                             " needs t>=0, c>=0, w>0");
                if (ls.op.empty())
                    throw std::runtime_error("fixed_route link " + ls.tail + "->" + ls.head +
                                             " has no operator");
                l.tail = net.node_id(ls.tail);
                l.head = net.node_id(ls.head);
                l.t = *ls.t;
                l.c = *ls.c;
                l.w = *ls.w;
                street.out[l.tail].push_back({l.head, l.t});
                break;
            }
            case LinkKind::ModService: {
                auto ti = zone_of.find(ls.tail);
                auto hi = zone_of.find(ls.head);
                if (ti == zone_of.end() || hi == zone_of.end())
                    throw std::runtime_error("mod_service link " + ls.tail + "->" + ls.head +
                                             " must connect zone ids");
                if (!ls.m || !(*ls.m >= 0))
                    throw std::runtime_error("mod_service link " + ls.tail + "->" + ls.head +
                                             " needs a nonnegative m");
                if (ls.op.empty() || s.zones[ti->second].op != ls.op ||
                    s.zones[hi->second].op != ls.op)
                    throw std::runtime_error("mod_service link " + ls.tail + "->" + ls.head +
                                             " must carry the operator of both zones");
                l.tail = net.zone_node[ti->second];
                l.head = net.zone_node[hi->second];
                l.m = *ls.m;
                l.zone = ti->second;
                if (ls.t) {
                    if (!(*ls.t >= 0))
                        throw std::runtime_error("mod_service link " + ls.tail + "->" + ls.head +
                                                 ": t must be nonnegative");
                    l.t = *ls.t;
                } else {
                    pending_mod_t.push_back({static_cast<int>(net.links.size()), 0});
                }
                break;
            }
            default:
                throw std::runtime_error("link kind '" + ls.kind +
                                         "' is generated during expansion, not read from csv");
        }
        net.links.push_back(std::move(l));
    }

    if (!pending_mod_t.empty()) {
        // ride times proxy street shortest paths, one dijkstra per source zone
        std::unordered_map<int, std::vector<double>> times;
        for (auto [lid, _] : pending_mod_t) {
            Link& l = net.links[lid];
            int src = net.node_id(net.zones[l.zone].street_node);
            auto it = times.find(src);
            if (it == times.end()) it = times.emplace(src, dijkstra_times(street, src)).first;
            int head_zone = -1;
            for (size_t zi = 0; zi < net.zone_node.size(); ++zi)
                if (net.zone_node[zi] == l.head) head_zone = static_cast<int>(zi);
            int dst = net.node_id(net.zones[head_zone].street_node);
            double d = it->second[dst];
            if (!std::isfinite(d))
                throw std::runtime_error("cannot derive ride time for " +
                                         net.zones[l.zone].id + "->" +
                                         net.zones[head_zone].id +
                                         ": street nodes are not connected");
            l.t = s.config.mod_travel_cost_factor * d;
        }
    }

    for (size_t zi = 0; zi < net.zones.size(); ++zi) {
        const Zone& z = net.zones[zi];
        int street_id = net.node_id(z.street_node);
        Link acc;
        acc.tail = street_id;
        acc.head = net.zone_node[zi];
        acc.kind = LinkKind::Access;
        acc.op = z.op;
        acc.t = z.access_cost;
        net.links.push_back(acc);
    }
    for (size_t zi = 0; zi < net.zones.size(); ++zi) {
        Link eg;
        eg.tail = net.zone_node[zi];
        eg.head = net.node_id(net.zones[zi].street_node);
        eg.kind = LinkKind::Egress;
        eg.op = net.zones[zi].op;
        eg.t = 0;
        net.links.push_back(eg);
    }

    std::set<std::pair<int, int>> seen_od;
    for (const auto& od : s.demand) {
        Od o;
        o.origin = net.node_id(od.origin);
        o.dest = net.node_id(od.destination);
        o.demand = od.demand;
        o.utility = od.utility;
        if (o.origin == o.dest)
            throw std::runtime_error("demand pair " + od.origin + "->" + od.destination +
                                     " has equal endpoints");
        if (!seen_od.insert({o.origin, o.dest}).second)
            throw std::runtime_error("duplicate demand pair " + od.origin + "->" +
                                     od.destination);
        if (!(o.demand >= 0))
            throw std::runtime_error("demand pair " + od.origin + "->" + od.destination +
                                     " must have nonnegative demand");
        if (!std::isfinite(o.utility) || !(o.utility > 0))
            throw std::runtime_error("demand pair " + od.origin + "->" + od.destination +
                                     " needs a positive finite utility");
        Link dl;
        dl.tail = o.origin;
        dl.head = o.dest;
        dl.kind = LinkKind::Dummy;
        dl.t = od.utility;  // opting out forfeits exactly the reservation utility
        o.dummy_link = static_cast<int>(net.links.size());
        net.links.push_back(dl);
        net.ods.push_back(o);
    }

    net.zone_out.resize(net.zones.size());
    for (size_t l = 0; l < net.links.size(); ++l) {
        if (net.links[l].kind == LinkKind::FixedRoute) net.cap_links.push_back(static_cast<int>(l));
        if (net.links[l].kind == LinkKind::ModService)
            net.zone_out[net.links[l].zone].push_back(static_cast<int>(l));
    }
    return net;
}

}  // namespace maas
