#include "tsrt/sim.hpp"

#include <stdexcept>

namespace tsrt {

Sim::Sim(NetworkGraph g, SimConfig cfg)
    : Sim(std::move(g), cfg, std::vector<LocalClock>()) {}

Sim::Sim(NetworkGraph g, SimConfig cfg, std::vector<LocalClock> clocks)
    : graph_(std::move(g)),
      channels_(assign_channels(graph_)),
      clocks_(std::move(clocks)),
      engine_(graph_, channels_, cfg) {
    if (clocks_.empty())
        clocks_.assign(static_cast<size_t>(graph_.node_count()), LocalClock());
    if (static_cast<int>(clocks_.size()) != graph_.node_count())
        throw std::invalid_argument("Sim: clock count does not match node count");
}

std::vector<double> Sim::mismatch_vs_reference(double t_true) const {
    std::vector<double> out(clocks_.size());
    const LocalClock& ref = clock(graph_.reference());
    for (size_t u = 0; u < clocks_.size(); ++u)
        out[u] = clocks_[u].mismatch_vs(ref, t_true);
    return out;
}

std::vector<LocalClock> Sim::random_clocks(int n, double offset_std, double skew_std,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<LocalClock> clocks;
    clocks.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double off = offset_std * unit(rng);
        double skew = skew_std * unit(rng);
        clocks.emplace_back(off, skew, 0.0);
    }
    return clocks;
}

}  // namespace tsrt
