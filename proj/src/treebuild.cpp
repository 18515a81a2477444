#include "tsrt/treebuild.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tsrt {

std::vector<NodeId> TreeState::children(NodeId u) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < node_count(); ++v)
        if (nodes_[static_cast<size_t>(v)].parent == u) out.push_back(v);
    return out;
}

int TreeState::accepted_count() const {
    int n = 0;
    for (const auto& nd : nodes_)
        if (nd.accepted) ++n;
    return n;
}

int TreeState::internal_count() const {
    std::vector<char> has_child(nodes_.size(), 0);
    for (const auto& nd : nodes_)
        if (nd.parent) has_child[static_cast<size_t>(*nd.parent)] = 1;
    int n = 0;
    for (size_t u = 0; u < nodes_.size(); ++u)
        if (nodes_[u].accepted && has_child[u]) ++n;
    return n;
}

int TreeState::max_level() const {
    int m = 0;
    for (const auto& nd : nodes_)
        if (nd.accepted) m = std::max(m, nd.level);
    return m;
}

bool TreeState::acyclic() const {
    // Union-find over parent edges; a cycle shows up as a union of two nodes
    // already in the same set.
    std::vector<int> root(nodes_.size());
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](int x) {
        while (root[static_cast<size_t>(x)] != x) {
            root[static_cast<size_t>(x)] = root[static_cast<size_t>(root[static_cast<size_t>(x)])];
            x = root[static_cast<size_t>(x)];
        }
        return x;
    };
    for (NodeId v = 0; v < node_count(); ++v) {
        const auto& nd = nodes_[static_cast<size_t>(v)];
        if (!nd.parent) continue;
        int a = find(v);
        int b = find(*nd.parent);
        if (a == b) return false;
        root[static_cast<size_t>(a)] = b;
    }
    return true;
}

std::string TreeState::dump() const {
    std::ostringstream out;
    for (NodeId u = 0; u < node_count(); ++u) {
        const auto& nd = nodes_[static_cast<size_t>(u)];
        out << u << ' ' << (nd.parent ? *nd.parent : -1) << ' ' << nd.level << ' '
            << nd.no_receiver << '\n';
    }
    return out.str();
}

FloodPhase::FloodPhase(Sim& sim) : sim_(sim), tree_(sim.graph().node_count()) {}

void FloodPhase::initiate_flood(NodeId root) {
    if (started_)
        throw std::logic_error("FloodPhase: flood already initiated");
    started_ = true;
    TreeNode& r = tree_.node(root);
    r.level = 0;
    r.accepted = true;
    Message m;
    m.kind = MsgKind::FdPkt;
    m.channel = ChannelAssignment::kControl;
    m.level = 0;
    sim_.engine().broadcast(root, m);
}

void FloodPhase::handle_fd_pkt(NodeId node, const Message& msg) {
    TreeNode& nd = tree_.node(node);
    if (nd.accepted) return;  // first fd_pkt wins, later ones are ignored
    nd.accepted = true;
    nd.parent = msg.src;
    nd.level = msg.level + 1;  // parent's level travels in the packet

    Message ack;
    ack.kind = MsgKind::AckPkt;
    ack.channel = ChannelAssignment::kControl;
    sim_.engine().unicast(node, msg.src, ack);

    Message fwd;
    fwd.kind = MsgKind::FdPkt;
    fwd.channel = ChannelAssignment::kControl;
    fwd.level = nd.level;
    sim_.engine().broadcast(node, fwd);
}

void FloodPhase::handle_ack_pkt(NodeId node, const Message&) {
    tree_.node(node).no_receiver += 1;
}

void FloodPhase::on_message(NodeId node, const Message& msg, double) {
    switch (msg.kind) {
        case MsgKind::FdPkt:
            handle_fd_pkt(node, msg);
            break;
        case MsgKind::AckPkt:
            if (msg.dest == node) handle_ack_pkt(node, msg);
            break;
        default:
            break;
    }
}

TreeState build_tree(Sim& sim) {
    FloodPhase flood(sim);
    sim.engine().set_handler(&flood);
    flood.initiate_flood(sim.graph().reference());
    sim.engine().run_all();
    sim.engine().set_handler(nullptr);
    return flood.take_tree();
}

}  // namespace tsrt
