#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace telsim {

enum class NodeRole { Aco, Maco, Transit };

std::string_view to_string(NodeRole role);
std::optional<NodeRole> parse_role(std::string_view text);

struct NodeSpec {
    std::string id;
    NodeRole role = NodeRole::Transit;

    bool operator==(const NodeSpec&) const = default;
};

/// Undirected link. `load` is the utilisation rho, strictly inside (0,1).
struct LinkSpec {
    std::string id;
    std::string a;
    std::string b;
    double length_km = 0.0;
    double load = 0.0;
    double mean_service_time_us = 1.0;

    bool operator==(const LinkSpec&) const = default;

    /// Endpoint opposite `node`; requires `node` to be one of a/b.
    const std::string& other_end(std::string_view node) const { return node == a ? b : a; }
    bool touches(std::string_view node) const { return a == node || b == node; }
};

struct PathSpec {
    std::string source;
    std::string destination;
    std::vector<std::string> link_ids;

    bool operator==(const PathSpec&) const = default;

    /// "source->destination", used as a stable path identifier.
    std::string id() const { return source + "->" + destination; }
};

class Topology {
  public:
    Topology() = default;

    /// Validates and takes ownership of the element lists.
    /// Throws ValidationError naming the offending element.
    Topology(std::string name, std::vector<NodeSpec> nodes, std::vector<LinkSpec> links);

    const std::string& name() const { return name_; }
    const std::vector<NodeSpec>& nodes() const { return nodes_; }
    const std::vector<LinkSpec>& links() const { return links_; }

    const NodeSpec* find_node(std::string_view id) const;
    const LinkSpec* find_link(std::string_view id) const;

    /// Node ids with the given role, sorted.
    std::vector<std::string> nodes_with_role(NodeRole role) const;

    /// Total length of a path's links; throws RoutingError on unknown ids.
    double path_length_km(const PathSpec& path) const;

    /// Checks the simple-path invariants of `path` against this topology.
    /// Throws RoutingError describing the first violation.
    void check_path(const PathSpec& path) const;

    bool operator==(const Topology&) const = default;

  private:
    void validate() const;

    std::string name_;
    std::vector<NodeSpec> nodes_;
    std::vector<LinkSpec> links_;
};

/// Parses the JSON topology document. Throws ParseError or ValidationError.
Topology parse_topology(std::string_view text);

/// Reads and parses a topology file. Missing/unreadable files raise ParseError.
Topology load_topology(const std::filesystem::path& file);

/// Canonical JSON rendering; parse_topology(serialize_topology(t)) == t.
std::string serialize_topology(const Topology& topology);

/// Shortest path by total length_km. Among equal-length paths the one whose
/// link-id sequence, read from the lexicographically smaller endpoint, is
/// smallest wins; route(b, a) is the reverse of route(a, b).
PathSpec route(const Topology& topology, std::string_view source, std::string_view destination);

/// All (ACO, MACO) pairs, ACOs outer, both sorted by id.
std::vector<std::pair<std::string, std::string>> all_pairs(const Topology& topology);

} // namespace telsim
