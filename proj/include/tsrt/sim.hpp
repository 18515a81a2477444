#pragma once

#include <vector>

#include "tsrt/clock.hpp"
#include "tsrt/engine.hpp"
#include "tsrt/topology.hpp"

namespace tsrt {

// One simulation instance: the topology, its channel assignment, per-node
// local clocks and the event engine. Protocol phases (flooding, HTS, pairwise
// exchanges) attach to the engine as handlers and drive the node clocks.
// Strictly single-threaded; independent instances share nothing.
class Sim {
public:
    Sim(NetworkGraph g, SimConfig cfg);
    Sim(NetworkGraph g, SimConfig cfg, std::vector<LocalClock> clocks);
    // The engine keeps references into this object; pin it in place.
    Sim(const Sim&) = delete;
    Sim& operator=(const Sim&) = delete;

    const NetworkGraph& graph() const { return graph_; }
    const ChannelAssignment& channels() const { return channels_; }
    Engine& engine() { return engine_; }
    const Engine& engine() const { return engine_; }

    LocalClock& clock(NodeId u) { return clocks_.at(static_cast<size_t>(u)); }
    const LocalClock& clock(NodeId u) const { return clocks_.at(static_cast<size_t>(u)); }
    // Local reading of u's clock at the current simulation (true) time.
    double local_now(NodeId u) const { return clock(u).local_time(engine_.now()); }

    // Mismatch of every node against the reference node's clock at t_true.
    std::vector<double> mismatch_vs_reference(double t_true) const;

    // Independent Gaussian initial offsets/skews, deterministic per seed.
    static std::vector<LocalClock> random_clocks(int n, double offset_std, double skew_std,
                                                 std::uint64_t seed);

private:
    NetworkGraph graph_;
    ChannelAssignment channels_;
    std::vector<LocalClock> clocks_;
    Engine engine_;
};

}  // namespace tsrt
