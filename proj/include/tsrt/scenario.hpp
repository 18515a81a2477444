#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "tsrt/analysis.hpp"
#include "tsrt/hts.hpp"
#include "tsrt/neteval.hpp"
#include "tsrt/sim.hpp"

namespace tsrt {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scenario file is line-oriented `key = value` text; `#` starts a comment.
// Unknown keys are rejected so typos surface as validation errors. The full
// key schema is documented in the README.
struct Scenario {
    // topology
    std::string topology;       // "linear:<depth>" or "file:<path>"
    double edge_delay = 0.010;  // for built-in topologies, seconds

    // engine
    std::uint64_t seed = 1;
    double loss_prob = 0.0;
    double jitter_control = 0.0;
    double jitter_clock = 0.0;
    double backoff_max = 0.0;
    double response_timeout = -1.0;  // < 0: derived from the topology

    // initial clocks
    double clock_offset_std = 0.0;
    double clock_skew_std = 0.0;

    // synchronization
    int n_beacons = 1;
    double beacon_spacing = 0.4;
    int rounds = 1;
    CorrectionMode correction = CorrectionMode::CorrectedFormula;
    std::optional<bool> regression;  // unset: enabled when n_beacons >= 3

    // network evaluation (no defaults: scenario files state them explicitly)
    std::optional<int> branches;  // unset: derived from the built tree
    double tau_sync = 0.0;
    double hop_rate = 0.0;
    double latency_factor = 0.0;
    double resync_period = 1.0;
    std::optional<double> eps_max;
    std::optional<double> ps_limit;
    std::optional<double> sigma_o1;
    std::optional<double> sigma_s1;
    VarianceScaling offset_scaling = VarianceScaling::InverseN;
    VarianceScaling skew_scaling = VarianceScaling::InverseN;

    // outputs (empty: stdout)
    std::string out;
    std::string trace_out;
    std::string json_out;

    static Scenario load_file(const std::string& path);
    static Scenario parse(std::istream& in);
    void set(const std::string& key, const std::string& value);

    // Per-command validation; throws ScenarioError naming the offending key.
    void require_topology() const;
    void require_eval_params() const;

    NetworkGraph make_graph() const;
    SimConfig make_sim_config() const;
    std::vector<LocalClock> make_clocks(int node_count) const;
    ErrorModel make_error_model() const;
    HtsOptions make_hts_options() const;
    // branches must be resolved by the caller when the key is unset.
    SyncParams make_sync_params(int resolved_branches) const;
    bool regression_enabled() const { return regression ? *regression : n_beacons >= 3; }
};

}  // namespace tsrt
