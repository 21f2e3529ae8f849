#include "telsim/topology.hpp"

#include "telsim/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace telsim {

using nlohmann::json;

std::string_view to_string(NodeRole role) {
    switch (role) {
    case NodeRole::Aco:
        return "ACO";
    case NodeRole::Maco:
        return "MACO";
    case NodeRole::Transit:
        return "TRANSIT";
    }
    return "TRANSIT";
}

std::optional<NodeRole> parse_role(std::string_view text) {
    if (text == "ACO") return NodeRole::Aco;
    if (text == "MACO") return NodeRole::Maco;
    if (text == "TRANSIT") return NodeRole::Transit;
    return std::nullopt;
}

Topology::Topology(std::string name, std::vector<NodeSpec> nodes, std::vector<LinkSpec> links)
    : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
    validate();
}

const NodeSpec* Topology::find_node(std::string_view id) const {
    auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const NodeSpec& n) { return n.id == id; });
    return it == nodes_.end() ? nullptr : &*it;
}

const LinkSpec* Topology::find_link(std::string_view id) const {
    auto it = std::find_if(links_.begin(), links_.end(), [&](const LinkSpec& l) { return l.id == id; });
    return it == links_.end() ? nullptr : &*it;
}

std::vector<std::string> Topology::nodes_with_role(NodeRole role) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_) {
        if (n.role == role) out.push_back(n.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double Topology::path_length_km(const PathSpec& path) const {
    double total = 0.0;
    for (const auto& id : path.link_ids) {
        const LinkSpec* link = find_link(id);
        if (link == nullptr) throw RoutingError("unknown link '" + id + "'");
        total += link->length_km;
    }
    return total;
}

void Topology::check_path(const PathSpec& path) const {
    if (find_node(path.source) == nullptr) throw RoutingError("unknown node '" + path.source + "'");
    if (find_node(path.destination) == nullptr) {
        throw RoutingError("unknown node '" + path.destination + "'");
    }
    if (path.link_ids.empty()) throw RoutingError("path " + path.id() + " has no links");

    std::set<std::string> visited{path.source};
    std::string at = path.source;
    for (const auto& id : path.link_ids) {
        const LinkSpec* link = find_link(id);
        if (link == nullptr) throw RoutingError("unknown link '" + id + "'");
        if (!link->touches(at)) {
            throw RoutingError("path " + path.id() + ": link '" + id + "' does not touch node '" + at + "'");
        }
        at = link->other_end(at);
        if (!visited.insert(at).second) {
            throw RoutingError("path " + path.id() + " revisits node '" + at + "'");
        }
    }
    if (at != path.destination) {
        throw RoutingError("path " + path.id() + " ends at '" + at + "'");
    }
}

void Topology::validate() const {
    std::set<std::string> node_ids;
    for (const auto& n : nodes_) {
        if (n.id.empty()) throw ValidationError("node with empty id");
        if (!node_ids.insert(n.id).second) throw ValidationError("duplicate node id '" + n.id + "'");
    }

    std::set<std::string> link_ids;
    for (const auto& l : links_) {
        const std::string where = "link '" + l.id + "'";
        if (l.id.empty()) throw ValidationError("link with empty id");
        if (!link_ids.insert(l.id).second) throw ValidationError("duplicate link id '" + l.id + "'");
        if (!node_ids.contains(l.a)) throw ValidationError(where + ": unknown endpoint '" + l.a + "'");
        if (!node_ids.contains(l.b)) throw ValidationError(where + ": unknown endpoint '" + l.b + "'");
        if (l.a == l.b) throw ValidationError(where + ": both endpoints are '" + l.a + "'");
        if (!(std::isfinite(l.length_km) && l.length_km > 0.0)) {
            throw ValidationError(where + ": length_km must be > 0");
        }
        if (!(l.load > 0.0 && l.load < 1.0)) {
            std::ostringstream os;
            os << where << ": load " << l.load << " outside (0,1)";
            throw ValidationError(os.str());
        }
        if (!(std::isfinite(l.mean_service_time_us) && l.mean_service_time_us > 0.0)) {
            throw ValidationError(where + ": mean_service_time_us must be > 0");
        }
    }

    // Every ACO must reach every MACO: label connected components.
    std::map<std::string, std::string> parent;
    for (const auto& id : node_ids) parent[id] = id;
    auto find = [&](std::string x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& l : links_) {
        auto ra = find(l.a);
        auto rb = find(l.b);
        if (ra != rb) parent[ra] = rb;
    }
    for (const auto& aco : nodes_with_role(NodeRole::Aco)) {
        for (const auto& maco : nodes_with_role(NodeRole::Maco)) {
            if (find(aco) != find(maco)) {
                throw ValidationError("ACO '" + aco + "' cannot reach MACO '" + maco + "'");
            }
        }
    }
}

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (auto key : required) {
        if (!obj.contains(key)) throw ParseError(where + ": missing field '" + std::string(key) + "'");
    }
    for (const auto& [key, _] : obj.items()) {
        bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                     std::find(optional.begin(), optional.end(), key) != optional.end();
        if (!known) throw ParseError(where + ": unknown field '" + key + "'");
    }
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

} // namespace

Topology parse_topology(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed topology document: ") + e.what());
    }

    require_keys(doc, {"name", "nodes", "links"}, {}, "topology");
    std::string name = get_string(doc, "name", "topology");
    if (!doc["nodes"].is_array()) throw ParseError("topology: 'nodes' must be a list");
    if (!doc["links"].is_array()) throw ParseError("topology: 'links' must be a list");

    std::vector<NodeSpec> nodes;
    for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
        const auto& n = doc["nodes"][i];
        std::string where = "nodes[" + std::to_string(i) + "]";
        require_keys(n, {"id", "role"}, {}, where);
        NodeSpec spec;
        spec.id = get_string(n, "id", where);
        auto role_text = get_string(n, "role", where);
        auto role = parse_role(role_text);
        if (!role) throw ParseError(where + " ('" + spec.id + "'): unknown role '" + role_text + "'");
        spec.role = *role;
        nodes.push_back(std::move(spec));
    }

    std::vector<LinkSpec> links;
    for (std::size_t i = 0; i < doc["links"].size(); ++i) {
        const auto& l = doc["links"][i];
        std::string where = "links[" + std::to_string(i) + "]";
        require_keys(l, {"id", "a", "b", "length_km", "load"}, {"mean_service_time_us"}, where);
        LinkSpec spec;
        spec.id = get_string(l, "id", where);
        where += " ('" + spec.id + "')";
        spec.a = get_string(l, "a", where);
        spec.b = get_string(l, "b", where);
        spec.length_km = get_number(l, "length_km", where);
        spec.load = get_number(l, "load", where);
        if (l.contains("mean_service_time_us")) {
            spec.mean_service_time_us = get_number(l, "mean_service_time_us", where);
        }
        links.push_back(std::move(spec));
    }

    return Topology(std::move(name), std::move(nodes), std::move(links));
}

Topology load_topology(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot open topology file '" + file.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_topology(buf.str());
}

std::string serialize_topology(const Topology& topology) {
    json doc;
    doc["name"] = topology.name();
    doc["nodes"] = json::array();
    for (const auto& n : topology.nodes()) {
        doc["nodes"].push_back({{"id", n.id}, {"role", std::string(to_string(n.role))}});
    }
    doc["links"] = json::array();
    for (const auto& l : topology.links()) {
        doc["links"].push_back({{"id", l.id},
                                {"a", l.a},
                                {"b", l.b},
                                {"length_km", l.length_km},
                                {"load", l.load},
                                {"mean_service_time_us", l.mean_service_time_us}});
    }
    return doc.dump(2) + "\n";
}

namespace {

bool same_length(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
}

// Label-correcting Dijkstra keyed on (length, link-id sequence).
std::vector<std::string> shortest_links(const Topology& topology, const std::string& from,
                                        const std::string& to) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < topology.nodes().size(); ++i) index[topology.nodes()[i].id] = i;

    const std::size_t n = topology.nodes().size();
    std::vector<std::vector<const LinkSpec*>> adjacent(n);
    for (const auto& l : topology.links()) {
        adjacent[index.at(l.a)].push_back(&l);
        adjacent[index.at(l.b)].push_back(&l);
    }

    const std::size_t src = index.at(from);
    const std::size_t dst = index.at(to);
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<std::vector<std::string>> seq(n);
    std::vector<std::size_t> version(n, 0);

    using Entry = std::tuple<double, std::size_t, std::size_t>; // dist, node, version
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[src] = 0.0;
    queue.emplace(0.0, src, 0);

    while (!queue.empty()) {
        auto [d, u, ver] = queue.top();
        queue.pop();
        if (ver != version[u]) continue;
        for (const LinkSpec* link : adjacent[u]) {
            const std::size_t v = index.at(link->other_end(topology.nodes()[u].id));
            const double cand = d + link->length_km;
            bool better = false;
            if (same_length(cand, dist[v])) {
                auto cand_seq = seq[u];
                cand_seq.push_back(link->id);
                if (cand_seq < seq[v]) {
                    seq[v] = std::move(cand_seq);
                    better = true;
                }
            } else if (cand < dist[v]) {
                seq[v] = seq[u];
                seq[v].push_back(link->id);
                better = true;
            }
            if (better) {
                dist[v] = std::min(dist[v], cand);
                queue.emplace(dist[v], v, ++version[v]);
            }
        }
    }

    if (!std::isfinite(dist[dst])) {
        throw RoutingError("no path from '" + from + "' to '" + to + "'");
    }
    return seq[dst];
}

} // namespace

PathSpec route(const Topology& topology, std::string_view source, std::string_view destination) {
    if (topology.find_node(source) == nullptr) {
        throw RoutingError("unknown node '" + std::string(source) + "'");
    }
    if (topology.find_node(destination) == nullptr) {
        throw RoutingError("unknown node '" + std::string(destination) + "'");
    }
    if (source == destination) {
        throw RoutingError("source and destination are both '" + std::string(source) + "'");
    }

    PathSpec path{std::string(source), std::string(destination), {}};
    if (source < destination) {
        path.link_ids = shortest_links(topology, path.source, path.destination);
    } else {
        path.link_ids = shortest_links(topology, path.destination, path.source);
        std::reverse(path.link_ids.begin(), path.link_ids.end());
    }
    return path;
}

std::vector<std::pair<std::string, std::string>> all_pairs(const Topology& topology) {
    std::vector<std::pair<std::string, std::string>> pairs;
    const auto macos = topology.nodes_with_role(NodeRole::Maco);
    for (const auto& aco : topology.nodes_with_role(NodeRole::Aco)) {
        for (const auto& maco : macos) pairs.emplace_back(aco, maco);
    }
    return pairs;
}

} // namespace telsim
