#include "expresslane/network.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace expresslane {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Indexed {
    std::map<std::string, std::size_t> index;
    std::vector<std::size_t> tail;
    std::vector<std::size_t> head;
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::vector<std::size_t>> in;
};

std::size_t lookup(const Indexed& ix, const std::string& name)
{
    auto it = ix.index.find(name);
    return it == ix.index.end() ? kNone : it->second;
}

std::vector<bool> reach(const Indexed& ix, std::size_t start, bool forward)
{
    std::vector<bool> seen(ix.out.size(), false);
    if (start == kNone)
        return seen;
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        const auto& adj = forward ? ix.out[u] : ix.in[u];
        for (std::size_t e : adj) {
            std::size_t v = forward ? ix.head[e] : ix.tail[e];
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

// Kahn's algorithm; ties resolved by node index so the order is stable.
std::vector<std::size_t> topo_sort(const Indexed& ix)
{
    std::size_t n = ix.out.size();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v)
        indeg[v] = ix.in[v].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0)
            ready.push(v);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        std::size_t u = ready.top();
        ready.pop();
        order.push_back(u);
        for (std::size_t e : ix.out[u])
            if (--indeg[ix.head[e]] == 0)
                ready.push(ix.head[e]);
    }
    return order;
}

void check_latency(const LatencyFn& fn, const std::string& where, double demand,
                   std::vector<Violation>& out)
{
    double prev_prime = -1.0;
    for (int i = 0; i <= 10; ++i) {
        double x = demand * i / 10.0;
        double d1 = fn.prime(x);
        if (x > 0.0 && !(d1 > 0.0)) {
            out.push_back({ErrorCode::NonIncreasingLatency,
                           where + ": derivative " + std::to_string(d1) + " at x=" + std::to_string(x)});
            return;
        }
        if (x > 0.0 && !(d1 > prev_prime)) {
            out.push_back({ErrorCode::NonIncreasingLatency,
                           where + ": derivative not increasing at x=" + std::to_string(x)});
            return;
        }
        prev_prime = d1;
    }
}

}  // namespace

std::vector<std::string> ValidatedNetwork::topological_names() const
{
    std::vector<std::string> names;
    names.reserve(topo_.size());
    for (std::size_t v : topo_)
        names.push_back(net_.nodes[v]);
    return names;
}

std::vector<Violation> find_violations(const Network& net, double total_demand)
{
    std::vector<Violation> out;
    Indexed ix;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        if (!ix.index.emplace(net.nodes[i], i).second)
            out.push_back({ErrorCode::InvalidArgument, "duplicate node '" + net.nodes[i] + "'"});
    }
    ix.out.resize(net.nodes.size());
    ix.in.resize(net.nodes.size());

    bool edges_ok = true;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        const Edge& edge = net.edges[e];
        std::size_t t = lookup(ix, edge.tail);
        std::size_t h = lookup(ix, edge.head);
        if (t == kNone || h == kNone) {
            out.push_back({ErrorCode::InvalidArgument,
                           "edge '" + edge.id + "' references unknown node"});
            edges_ok = false;
            t = h = 0;
        }
        ix.tail.push_back(t);
        ix.head.push_back(h);
        if (t != kNone && h != kNone && edges_ok) {
            ix.out[t].push_back(e);
            ix.in[h].push_back(e);
        }
        double demand = total_demand > 0.0 ? total_demand : 1.0;
        check_latency(edge.express, "edge '" + edge.id + "' express", demand, out);
        check_latency(edge.general, "edge '" + edge.id + "' general", demand, out);
    }

    if (net.origins.size() != 1)
        out.push_back({ErrorCode::MultipleOrigins,
                       std::to_string(net.origins.size()) + " origins given, exactly one required"});
    if (net.destinations.size() != 1)
        out.push_back({ErrorCode::MultipleOrigins,
                       std::to_string(net.destinations.size()) +
                           " destinations given, exactly one required"});

    std::size_t o = net.origins.size() == 1 ? lookup(ix, net.origins[0]) : kNone;
    std::size_t d = net.destinations.size() == 1 ? lookup(ix, net.destinations[0]) : kNone;
    if (net.origins.size() == 1 && o == kNone)
        out.push_back({ErrorCode::InvalidArgument, "origin '" + net.origins[0] + "' is not a node"});
    if (net.destinations.size() == 1 && d == kNone)
        out.push_back({ErrorCode::InvalidArgument,
                       "destination '" + net.destinations[0] + "' is not a node"});
    if (!edges_ok)
        return out;

    auto order = topo_sort(ix);
    if (order.size() != net.nodes.size())
        out.push_back({ErrorCode::CycleDetected, "graph contains a directed cycle"});

    if (o != kNone && d != kNone) {
        if (o == d)
            out.push_back({ErrorCode::InvalidArgument, "origin equals destination"});
        auto from_o = reach(ix, o, true);
        auto to_d = reach(ix, d, false);
        if (!from_o[d])
            out.push_back({ErrorCode::NoPath, "destination not reachable from origin"});
        for (std::size_t e = 0; e < net.edges.size(); ++e) {
            if (!(from_o[ix.tail[e]] && to_d[ix.head[e]]))
                out.push_back({ErrorCode::UnreachableEdge,
                               "edge '" + net.edges[e].id + "' is on no origin-destination path"});
        }
    }
    return out;
}

ValidatedNetwork validate(const Network& net, double total_demand)
{
    auto violations = find_violations(net, total_demand);
    if (!violations.empty())
        throw ValidationError(std::move(violations));

    ValidatedNetwork v;
    v.net_ = net;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < net.nodes.size(); ++i)
        index[net.nodes[i]] = i;
    v.out_.resize(net.nodes.size());
    v.in_.resize(net.nodes.size());
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        v.tail_.push_back(index[net.edges[e].tail]);
        v.head_.push_back(index[net.edges[e].head]);
        v.out_[v.tail_[e]].push_back(e);
        v.in_[v.head_[e]].push_back(e);
    }
    v.origin_ = index[net.origins[0]];
    v.destination_ = index[net.destinations[0]];
    Indexed ix;
    ix.tail = v.tail_;
    ix.head = v.head_;
    ix.out = v.out_;
    ix.in = v.in_;
    v.topo_ = topo_sort(ix);
    v.on_path_.assign(net.edges.size(), true);
    return v;
}

Route cheapest_route(const ValidatedNetwork& net, const LaneCostVector& costs)
{
    const std::size_t m = net.edge_count();
    if (costs.cost.size() != m)
        throw Error(ErrorCode::InvalidArgument, "cost vector size does not match edge count");
    for (const auto& c : costs.cost)
        for (double v : c)
            if (!std::isfinite(v) || v < 0.0)
                throw Error(ErrorCode::InvalidArgument, "lane costs must be finite and nonnegative");

    auto edge_cost = [&](std::size_t e, Lane& lane) {
        double ex = costs.cost[e][0];
        double ge = costs.cost[e][1];
        lane = ex <= ge ? Lane::Express : Lane::General;
        return ex <= ge ? ex : ge;
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> to_go(net.node_count(), inf);
    to_go[net.destination()] = 0.0;
    const auto& order = net.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        std::size_t u = *it;
        if (u == net.destination())
            continue;
        for (std::size_t e : net.out_edges(u)) {
            Lane lane;
            double c = edge_cost(e, lane) + to_go[net.head(e)];
            if (c < to_go[u])
                to_go[u] = c;
        }
    }
    if (!std::isfinite(to_go[net.origin()]))
        throw Error(ErrorCode::NoPath, "no route from origin to destination");

    Route route;
    route.cost = to_go[net.origin()];
    std::size_t u = net.origin();
    while (u != net.destination()) {
        std::size_t pick = kNone;
        Lane pick_lane = Lane::Express;
        for (std::size_t e : net.out_edges(u)) {
            Lane lane;
            double c = edge_cost(e, lane) + to_go[net.head(e)];
            if (c == to_go[u]) {
                pick = e;
                pick_lane = lane;
                break;
            }
        }
        if (pick == kNone)
            throw Error(ErrorCode::NoPath, "route reconstruction failed");
        route.legs.push_back({pick, pick_lane});
        u = net.head(pick);
    }
    return route;
}

Network make_single_edge_network(const LatencyFn& express, const LatencyFn& general)
{
    Network net;
    net.nodes = {"o", "d"};
    net.edges.push_back({"e", "o", "d", express, general});
    net.origins = {"o"};
    net.destinations = {"d"};
    return net;
}

}  // namespace expresslane
