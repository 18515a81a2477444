#include "tsrt/topology.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace tsrt {

NetworkGraph::NetworkGraph(int node_count, const std::vector<Edge>& edges, NodeId reference) {
    if (node_count < 1)
        throw std::invalid_argument("NetworkGraph: node_count must be >= 1");
    if (reference < 0 || reference >= node_count)
        throw std::invalid_argument("NetworkGraph: reference node out of range");

    adj_.assign(static_cast<size_t>(node_count), {});
    delay_.assign(static_cast<size_t>(node_count), {});
    reference_ = reference;

    for (const Edge& e : edges) {
        if (e.u < 0 || e.u >= node_count || e.v < 0 || e.v >= node_count)
            throw std::invalid_argument("NetworkGraph: edge endpoint out of range");
        if (e.u == e.v)
            throw std::invalid_argument("NetworkGraph: self-loop not allowed");
        if (!(e.delay > 0.0))
            throw std::invalid_argument("NetworkGraph: edge delay must be > 0");
        for (NodeId w : adj_[static_cast<size_t>(e.u)])
            if (w == e.v)
                throw std::invalid_argument("NetworkGraph: duplicate edge");
        adj_[static_cast<size_t>(e.u)].push_back(e.v);
        delay_[static_cast<size_t>(e.u)].push_back(e.delay);
        adj_[static_cast<size_t>(e.v)].push_back(e.u);
        delay_[static_cast<size_t>(e.v)].push_back(e.delay);
        ++edge_count_;
        max_delay_ = std::max(max_delay_, e.delay);
    }

    // Keep neighbor lists in ascending id order for deterministic iteration.
    for (size_t u = 0; u < adj_.size(); ++u) {
        std::vector<size_t> order(adj_[u].size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return adj_[u][a] < adj_[u][b]; });
        std::vector<NodeId> na(adj_[u].size());
        std::vector<double> nd(adj_[u].size());
        for (size_t i = 0; i < order.size(); ++i) {
            na[i] = adj_[u][order[i]];
            nd[i] = delay_[u][order[i]];
        }
        adj_[u] = std::move(na);
        delay_[u] = std::move(nd);
    }

    // Connectivity is required for the synchronization ripple to reach all nodes.
    std::vector<char> seen(static_cast<size_t>(node_count), 0);
    std::queue<NodeId> q;
    q.push(reference_);
    seen[static_cast<size_t>(reference_)] = 1;
    int reached = 1;
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop();
        for (NodeId v : adj_[static_cast<size_t>(u)]) {
            if (!seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = 1;
                ++reached;
                q.push(v);
            }
        }
    }
    if (reached != node_count)
        throw std::invalid_argument("NetworkGraph: graph is not connected");
}

void NetworkGraph::check_node(NodeId u) const {
    if (!has_node(u))
        throw std::invalid_argument("NetworkGraph: unknown node " + std::to_string(u));
}

bool NetworkGraph::adjacent(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto& ns = adj_[static_cast<size_t>(u)];
    return std::binary_search(ns.begin(), ns.end(), v);
}

const std::vector<NodeId>& NetworkGraph::neighbors(NodeId u) const {
    check_node(u);
    return adj_[static_cast<size_t>(u)];
}

double NetworkGraph::edge_delay(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    const auto& ns = adj_[static_cast<size_t>(u)];
    auto it = std::lower_bound(ns.begin(), ns.end(), v);
    if (it == ns.end() || *it != v)
        throw std::invalid_argument("NetworkGraph: no edge between " + std::to_string(u) +
                                    " and " + std::to_string(v));
    return delay_[static_cast<size_t>(u)][static_cast<size_t>(it - ns.begin())];
}

NetworkGraph linear_network(int depth, double delay) {
    if (depth < 0)
        throw std::invalid_argument("linear_network: depth must be >= 0");
    std::vector<NetworkGraph::Edge> edges;
    edges.reserve(static_cast<size_t>(depth));
    for (int i = 0; i < depth; ++i)
        edges.push_back({i, i + 1, delay});
    return NetworkGraph(depth + 1, edges, 0);
}

void ChannelAssignment::validate(const NetworkGraph& g) const {
    if (static_cast<int>(clock.size()) != g.node_count())
        throw std::logic_error("ChannelAssignment: size mismatch");
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (clock_channel(u) == kControl)
            throw std::logic_error("ChannelAssignment: clock channel equals control channel");
        for (NodeId v : g.neighbors(u))
            if (clock_channel(u) == clock_channel(v))
                throw std::logic_error("ChannelAssignment: neighbors share a clock channel");
    }
}

ChannelAssignment assign_channels(const NetworkGraph& g) {
    ChannelAssignment ca;
    ca.clock.assign(static_cast<size_t>(g.node_count()), 0);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        std::vector<char> used(g.neighbors(u).size() + 2, 0);
        for (NodeId v : g.neighbors(u)) {
            if (v < u) {
                ChannelId c = ca.clock[static_cast<size_t>(v)];
                if (c < static_cast<ChannelId>(used.size())) used[static_cast<size_t>(c)] = 1;
            }
        }
        ChannelId c = 1;  // channel 0 is the control channel
        while (used[static_cast<size_t>(c)]) ++c;
        ca.clock[static_cast<size_t>(u)] = c;
    }
    ca.validate(g);
    return ca;
}

std::vector<NodeId> broadcast_domain(const NetworkGraph& g, NodeId u) {
    return g.neighbors(u);
}

NetworkGraph load_graph(std::istream& in) {
    std::vector<NetworkGraph::Edge> edges;
    NodeId reference = -1;
    NodeId max_id = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank line
        if (first == "reference") {
            if (!(ls >> reference))
                throw std::invalid_argument("graph line " + std::to_string(lineno) +
                                            ": expected `reference <id>`");
            max_id = std::max(max_id, reference);
            continue;
        }
        NetworkGraph::Edge e{};
        try {
            e.u = std::stoi(first);
        } catch (const std::exception&) {
            throw std::invalid_argument("graph line " + std::to_string(lineno) +
                                        ": expected node id, got `" + first + "`");
        }
        if (!(ls >> e.v >> e.delay))
            throw std::invalid_argument("graph line " + std::to_string(lineno) +
                                        ": expected `u v delay_seconds`");
        std::string extra;
        if (ls >> extra)
            throw std::invalid_argument("graph line " + std::to_string(lineno) +
                                        ": trailing token `" + extra + "`");
        max_id = std::max({max_id, e.u, e.v});
        edges.push_back(e);
    }
    if (reference < 0)
        throw std::invalid_argument("graph file: missing `reference <id>` line");
    return NetworkGraph(max_id + 1, edges, reference);
}

NetworkGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open graph file: " + path);
    return load_graph(in);
}

std::string graph_to_text(const NetworkGraph& g) {
    std::ostringstream out;
    out << "reference " << g.reference() << "\n";
    char buf[64];
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (u < v) {
                std::snprintf(buf, sizeof buf, "%d %d %.12g\n", u, v, g.edge_delay(u, v));
                out << buf;
            }
        }
    }
    return out.str();
}

}  // namespace tsrt
