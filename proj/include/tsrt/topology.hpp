#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsrt {

using NodeId = int;
using ChannelId = int;

// Static undirected network graph with a per-edge propagation delay and a
// designated reference node. Immutable after construction; construction
// validates connectivity and positive, symmetric delays.
class NetworkGraph {
public:
    struct Edge {
        NodeId u;
        NodeId v;
        double delay;  // seconds, same in both directions
    };

    NetworkGraph() = default;
    NetworkGraph(int node_count, const std::vector<Edge>& edges, NodeId reference);

    int node_count() const { return static_cast<int>(adj_.size()); }
    NodeId reference() const { return reference_; }
    int edge_count() const { return edge_count_; }

    bool has_node(NodeId u) const { return u >= 0 && u < node_count(); }
    bool adjacent(NodeId u, NodeId v) const;
    // Neighbor ids in ascending order.
    const std::vector<NodeId>& neighbors(NodeId u) const;
    double edge_delay(NodeId u, NodeId v) const;
    double max_edge_delay() const { return max_delay_; }

private:
    void check_node(NodeId u) const;

    std::vector<std::vector<NodeId>> adj_;
    std::vector<std::vector<double>> delay_;  // parallel to adj_
    NodeId reference_ = 0;
    int edge_count_ = 0;
    double max_delay_ = 0.0;
};

// Path graph of depth+1 nodes, node 0 as reference, every edge with the same
// delay. depth = 0 yields a single-node network.
NetworkGraph linear_network(int depth, double delay);

// Control channel is channel 0, shared by all nodes. Every node additionally
// owns a clock channel distinct from the control channel and from all of its
// neighbors' clock channels.
struct ChannelAssignment {
    static constexpr ChannelId kControl = 0;

    std::vector<ChannelId> clock;

    ChannelId clock_channel(NodeId u) const { return clock.at(static_cast<size_t>(u)); }
    // Throws if either uniqueness requirement is violated.
    void validate(const NetworkGraph& g) const;
};

// Greedy coloring over node-id order; deterministic, uses at most
// max_degree + 1 clock channels starting at channel 1.
ChannelAssignment assign_channels(const NetworkGraph& g);

// Open neighborhood of u: every node sharing the physical broadcast medium.
std::vector<NodeId> broadcast_domain(const NetworkGraph& g, NodeId u);

// Text format: one `u v delay_seconds` line per edge plus a `reference <id>`
// line; `#` starts a comment. Node count is max id + 1.
NetworkGraph load_graph(std::istream& in);
NetworkGraph load_graph_file(const std::string& path);
std::string graph_to_text(const NetworkGraph& g);

}  // namespace tsrt
