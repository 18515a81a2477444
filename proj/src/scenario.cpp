#include "tsrt/scenario.hpp"

#include <fstream>
#include <sstream>

namespace tsrt {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ScenarioError("config key `" + key + "`: not a number: `" + v + "`");
    }
    if (pos != v.size())
        throw ScenarioError("config key `" + key + "`: trailing characters in `" + v + "`");
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    size_t pos = 0;
    long out;
    try {
        out = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ScenarioError("config key `" + key + "`: not an integer: `" + v + "`");
    }
    if (pos != v.size())
        throw ScenarioError("config key `" + key + "`: trailing characters in `" + v + "`");
    return static_cast<int>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ScenarioError("config key `" + key + "`: expected on/off, got `" + v + "`");
}

VarianceScaling parse_scaling(const std::string& key, const std::string& v) {
    if (v == "inverse_n") return VarianceScaling::InverseN;
    if (v == "constant") return VarianceScaling::Constant;
    throw ScenarioError("config key `" + key + "`: expected inverse_n or constant, got `" + v + "`");
}

}  // namespace

void Scenario::set(const std::string& key, const std::string& value) {
    if (key == "topology") topology = value;
    else if (key == "edge_delay") edge_delay = parse_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_double(key, value));
    else if (key == "loss_prob") loss_prob = parse_double(key, value);
    else if (key == "jitter_control") jitter_control = parse_double(key, value);
    else if (key == "jitter_clock") jitter_clock = parse_double(key, value);
    else if (key == "backoff_max") backoff_max = parse_double(key, value);
    else if (key == "response_timeout") response_timeout = parse_double(key, value);
    else if (key == "clock_offset_std") clock_offset_std = parse_double(key, value);
    else if (key == "clock_skew_std") clock_skew_std = parse_double(key, value);
    else if (key == "n_beacons") n_beacons = parse_int(key, value);
    else if (key == "beacon_spacing") beacon_spacing = parse_double(key, value);
    else if (key == "rounds") rounds = parse_int(key, value);
    else if (key == "correction") {
        if (value == "paper") correction = CorrectionMode::PaperFormula;
        else if (value == "corrected") correction = CorrectionMode::CorrectedFormula;
        else throw ScenarioError("config key `correction`: expected paper or corrected, got `" + value + "`");
    }
    else if (key == "regression") regression = parse_bool(key, value);
    else if (key == "branches") branches = parse_int(key, value);
    else if (key == "tau_sync") tau_sync = parse_double(key, value);
    else if (key == "hop_rate") hop_rate = parse_double(key, value);
    else if (key == "latency_factor") latency_factor = parse_double(key, value);
    else if (key == "resync_period") resync_period = parse_double(key, value);
    else if (key == "eps_max") eps_max = parse_double(key, value);
    else if (key == "ps_limit") ps_limit = parse_double(key, value);
    else if (key == "sigma_o1") sigma_o1 = parse_double(key, value);
    else if (key == "sigma_s1") sigma_s1 = parse_double(key, value);
    else if (key == "offset_scaling") offset_scaling = parse_scaling(key, value);
    else if (key == "skew_scaling") skew_scaling = parse_scaling(key, value);
    else if (key == "out") out = value;
    else if (key == "trace_out") trace_out = value;
    else if (key == "json_out") json_out = value;
    else throw ScenarioError("unknown config key `" + key + "`");
}

Scenario Scenario::parse(std::istream& in) {
    Scenario sc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ScenarioError("config line " + std::to_string(lineno) +
                                ": expected `key = value`, got `" + t + "`");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ScenarioError("config line " + std::to_string(lineno) + ": empty key or value");
        sc.set(key, value);
    }
    return sc;
}

Scenario Scenario::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open config file: " + path);
    return parse(in);
}

void Scenario::require_topology() const {
    if (topology.empty()) throw ScenarioError("missing required config key `topology`");
}

void Scenario::require_eval_params() const {
    if (!eps_max) throw ScenarioError("missing required config key `eps_max`");
    if (!ps_limit) throw ScenarioError("missing required config key `ps_limit`");
    if (!sigma_o1) throw ScenarioError("missing required config key `sigma_o1`");
    if (!sigma_s1) throw ScenarioError("missing required config key `sigma_s1`");
    if (!(*eps_max > 0.0)) throw ScenarioError("config key `eps_max`: must be > 0");
    if (!(*ps_limit > 0.0 && *ps_limit < 1.0))
        throw ScenarioError("config key `ps_limit`: must be in (0,1)");
    if (!(*sigma_o1 > 0.0)) throw ScenarioError("config key `sigma_o1`: must be > 0");
    if (!(*sigma_s1 > 0.0)) throw ScenarioError("config key `sigma_s1`: must be > 0");
}

NetworkGraph Scenario::make_graph() const {
    require_topology();
    if (topology.rfind("linear:", 0) == 0) {
        int depth = parse_int("topology", topology.substr(7));
        if (depth < 0) throw ScenarioError("config key `topology`: linear depth must be >= 0");
        if (!(edge_delay > 0.0)) throw ScenarioError("config key `edge_delay`: must be > 0");
        return linear_network(depth, edge_delay);
    }
    if (topology.rfind("file:", 0) == 0) {
        try {
            return load_graph_file(topology.substr(5));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(std::string("config key `topology`: ") + e.what());
        }
    }
    throw ScenarioError("config key `topology`: expected linear:<depth> or file:<path>, got `" +
                        topology + "`");
}

SimConfig Scenario::make_sim_config() const {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.loss_prob = loss_prob;
    cfg.jitter_control = jitter_control;
    cfg.jitter_clock = jitter_clock;
    cfg.backoff_max = backoff_max;
    cfg.response_timeout = response_timeout;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    return cfg;
}

std::vector<LocalClock> Scenario::make_clocks(int node_count) const {
    // Separate stream from the engine seed so clock draws never interleave
    // with jitter/loss draws.
    return Sim::random_clocks(node_count, clock_offset_std, clock_skew_std, seed + 0x5eed);
}

ErrorModel Scenario::make_error_model() const {
    require_eval_params();
    ErrorModel m;
    m.sigma_o1 = *sigma_o1;
    m.sigma_s1 = *sigma_s1;
    m.offset_scaling = offset_scaling;
    m.skew_scaling = skew_scaling;
    return m;
}

HtsOptions Scenario::make_hts_options() const {
    HtsOptions opt;
    opt.n_beacons = n_beacons;
    opt.correction = correction;
    opt.use_regression = regression_enabled() && n_beacons >= 3;
    opt.beacon_spacing = beacon_spacing;
    opt.rounds = rounds;
    if (n_beacons < 1) throw ScenarioError("config key `n_beacons`: must be >= 1");
    if (rounds < 1) throw ScenarioError("config key `rounds`: must be >= 1");
    if (!(beacon_spacing >= 0.0)) throw ScenarioError("config key `beacon_spacing`: must be >= 0");
    return opt;
}

SyncParams Scenario::make_sync_params(int resolved_branches) const {
    require_eval_params();
    SyncParams p;
    p.branches = branches ? *branches : resolved_branches;
    p.tau = resync_period;
    p.hop_rate = hop_rate;
    p.latency_factor = latency_factor;
    p.n_beacons = n_beacons;
    p.eps_max = *eps_max;
    p.ps_limit = *ps_limit;
    p.tau_sync = tau_sync;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
    return p;
}

}  // namespace tsrt
