#ifndef EXPRESSLANE_NETWORK_HPP
#define EXPRESSLANE_NETWORK_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "expresslane/errors.hpp"
#include "expresslane/latency.hpp"

namespace expresslane {

enum class Lane : int { Express = 0, General = 1 };

inline constexpr std::size_t kLanes = 2;

inline std::size_t lane_index(Lane lane) { return static_cast<std::size_t>(lane); }

struct Edge {
    std::string id;
    std::string tail;
    std::string head;
    LatencyFn express;
    LatencyFn general;

    const LatencyFn& latency(Lane lane) const { return lane == Lane::Express ? express : general; }
};

/// Raw network description. Origins and destinations are lists so that a
/// malformed input can be reported instead of silently truncated.
struct Network {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> origins;
    std::vector<std::string> destinations;
};

/// A network that passed validate(). Node indices follow the order of
/// Network::nodes; edge indices follow Network::edges.
class ValidatedNetwork {
public:
    const Network& raw() const noexcept { return net_; }
    std::size_t node_count() const noexcept { return net_.nodes.size(); }
    std::size_t edge_count() const noexcept { return net_.edges.size(); }
    const Edge& edge(std::size_t e) const { return net_.edges.at(e); }

    std::size_t origin() const noexcept { return origin_; }
    std::size_t destination() const noexcept { return destination_; }
    std::size_t tail(std::size_t e) const { return tail_.at(e); }
    std::size_t head(std::size_t e) const { return head_.at(e); }

    /// Node indices in topological order.
    const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }
    /// Node names in topological order.
    std::vector<std::string> topological_names() const;
    /// Outgoing edge indices of a node, ascending.
    const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_.at(node); }
    const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_.at(node); }

    /// Every edge was confirmed to lie on some origin-destination path.
    bool edge_on_path(std::size_t e) const { return on_path_.at(e); }

private:
    friend ValidatedNetwork validate(const Network&, double);

    Network net_;
    std::size_t origin_ = 0;
    std::size_t destination_ = 0;
    std::vector<std::size_t> tail_;
    std::vector<std::size_t> head_;
    std::vector<std::size_t> topo_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::vector<bool> on_path_;
};

/// All problems with a network description; empty when it is valid.
/// Latency derivatives are sampled on {0, d/10, ..., d} with d = total_demand.
std::vector<Violation> find_violations(const Network& net, double total_demand = 1.0);

/// Throws ValidationError listing every violation.
ValidatedNetwork validate(const Network& net, double total_demand = 1.0);

enum class CostUnit { Time, Money };

/// Per-(edge, lane) costs for one group at one time.
struct LaneCostVector {
    std::vector<std::array<double, kLanes>> cost;
    CostUnit unit = CostUnit::Money;

    double at(std::size_t e, Lane lane) const { return cost.at(e)[lane_index(lane)]; }
};

struct EdgeLane {
    std::size_t edge;
    Lane lane;

    bool operator==(const EdgeLane&) const = default;
};

struct Route {
    std::vector<EdgeLane> legs;
    double cost = 0.0;
};

/// Minimum-cost origin-destination route over edge-lane choices.
/// Ties go to the lower edge index at each node and to the express lane.
Route cheapest_route(const ValidatedNetwork& net, const LaneCostVector& costs);

/// o -> d with one edge carrying the given lane latencies.
Network make_single_edge_network(const LatencyFn& express, const LatencyFn& general);

}  // namespace expresslane

#endif
