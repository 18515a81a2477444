#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsrt/sim.hpp"

namespace tsrt {

// Per-node result of the flooding phase.
struct TreeNode {
    std::optional<NodeId> parent;
    int level = -1;
    int no_receiver = 0;  // how many nodes acknowledged this node as parent
    bool accepted = false;
};

class TreeState {
public:
    TreeState() = default;
    explicit TreeState(int node_count) : nodes_(static_cast<size_t>(node_count)) {}

    int node_count() const { return static_cast<int>(nodes_.size()); }
    TreeNode& node(NodeId u) { return nodes_.at(static_cast<size_t>(u)); }
    const TreeNode& node(NodeId u) const { return nodes_.at(static_cast<size_t>(u)); }

    std::vector<NodeId> children(NodeId u) const;
    int accepted_count() const;
    int internal_count() const;  // accepted nodes with at least one child
    int max_level() const;
    // Parent pointers contain no cycle (union-find check over parent edges).
    bool acyclic() const;

    // Per-node line: `id parent level no_receiver` (parent -1 for the root).
    std::string dump() const;

private:
    std::vector<TreeNode> nodes_;
};

// Algorithm-1 flooding: the root broadcasts fd_pkt on the control channel;
// each node accepts the first fd_pkt it hears (parent := sender,
// level := sender level + 1), acknowledges its parent, rebroadcasts once, and
// ignores every later fd_pkt.
class FloodPhase : public EngineHandler {
public:
    explicit FloodPhase(Sim& sim);

    // Starts the flood; throws std::logic_error when called twice.
    void initiate_flood(NodeId root);

    void handle_fd_pkt(NodeId node, const Message& msg);
    void handle_ack_pkt(NodeId node, const Message& msg);

    void on_message(NodeId node, const Message& msg, double t_true) override;

    const TreeState& tree() const { return tree_; }
    TreeState take_tree() { return std::move(tree_); }

private:
    Sim& sim_;
    TreeState tree_;
    bool started_ = false;
};

// Floods from the graph's reference node and drains the engine.
TreeState build_tree(Sim& sim);

}  // namespace tsrt
