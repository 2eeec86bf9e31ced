#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace maas {

enum class LinkKind { Walk, FixedRoute, ModService, Access, Egress, Dummy };

const char* to_string(LinkKind k);
LinkKind link_kind_from_string(const std::string& s);

// fares attach only to operated services
inline bool is_priceable(LinkKind k) {
    return k == LinkKind::FixedRoute || k == LinkKind::ModService;
}

// raw rows as they appear in links.csv; tail/head of mod_service rows are zone ids
struct LinkSpec {
    std::string tail, head;
    std::string kind;
    std::string op;
    std::optional<double> t, c, w, m;
};

struct Zone {
    std::string id;
    std::string op;
    std::string street_node;
    double q = 0;            // fleet operating cost
    double z = 0;            // fleet size
    double access_cost = 0;  // walk time from the street node into the service area
};

struct OdSpec {
    std::string origin, destination;
    double demand = 0;
    double utility = 0;  // reservation utility of not traveling
};

struct ScenarioConfig {
    double alpha_t = 1.0;
    double alpha_c = 0.5;
    double eps_balancing = 1e-4;
    double beta_regen_threshold = 0.05;
    double beta_converge_threshold = 1e-4;
    int fw_max_iters = 1;
    double bound_multiplier = 2.0;
    double mod_travel_cost_factor = 0.75;
    int max_outer_iters = 200;
    unsigned seed = 0;
};

struct Scenario {
    std::vector<LinkSpec> links;
    std::vector<Zone> zones;
    std::vector<OdSpec> demand;
    ScenarioConfig config;
};

// one key=value assignment; unknown keys are errors, `where` labels them
void set_config_key(ScenarioConfig& c, const std::string& key, const std::string& value,
                    const std::string& where);
void validate_config(const ScenarioConfig& c, const std::string& where);

ScenarioConfig parse_scenario_config(const std::string& path);

// reads links.csv, zones.csv, demand.csv and, when present, config
Scenario load_scenario(const std::string& dir);

struct Link {
    int tail = -1, head = -1;
    LinkKind kind = LinkKind::Walk;
    std::string op;
    double t = 0;  // travel time (dummy links carry the forgone utility here)
    double c = 0;  // operating cost of a fixed route
    double w = 0;  // vehicle capacity of a fixed route
    double m = 0;  // per-ride operating cost of an on-demand service
    int zone = -1; // tail zone of a mod_service link
};

struct Od {
    int origin = -1, dest = -1;
    double demand = 0;
    double utility = 0;
    int dummy_link = -1;
};

struct Network {
    std::vector<std::string> node_names;
    std::unordered_map<std::string, int> node_index;
    std::vector<Link> links;
    std::vector<Zone> zones;
    std::vector<int> zone_node;              // zone -> its service node
    std::vector<std::vector<int>> zone_out;  // zone -> outbound mod_service links
    std::vector<int> cap_links;              // fixed_route links, ascending
    std::vector<Od> ods;

    int node_id(const std::string& name) const {
        auto it = node_index.find(name);
        return it == node_index.end() ? -1 : it->second;
    }
    // first link tail->head by node names, -1 if absent
    int find_link(const std::string& tail, const std::string& head) const;
};

// Builds the routable graph: street nodes, one service node per zone,
// access/egress connectors, one dummy link per od pair.  Missing
// mod_service travel times are filled from shortest walk/transit times
// between the zone street nodes scaled by mod_travel_cost_factor.
// Generated kinds (access/egress/dummy) are rejected in the input csv,
// so an already expanded network cannot be expanded again.
Network expand_network(const Scenario& s);

}  // namespace maas
