#include "tsrt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tsrt {

long tsrt_messages_per_sync(const TreeState& tree, int n_beacons) {
    if (n_beacons < 1) throw std::invalid_argument("tsrt_messages_per_sync: n_beacons must be >= 1");
    return static_cast<long>(tree.internal_count()) * (2L * n_beacons + 1L);
}

long tpsn_messages_per_sync(const TreeState& tree, int n_beacons) {
    if (n_beacons < 1) throw std::invalid_argument("tpsn_messages_per_sync: n_beacons must be >= 1");
    long non_root = std::max(0, tree.accepted_count() - 1);
    return 2L * n_beacons * non_root;
}

long rbs_messages_closed_form(int n_receivers) {
    if (n_receivers < 0) throw std::invalid_argument("rbs_messages_closed_form: n_receivers must be >= 0");
    long n = n_receivers;
    return 1L + n * (n - 1);  // reference broadcast + 2 * C(n,2) pair exchanges
}

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    out << "N,M_tsrt,M_tpsn,tau_max_tsrt,tau_max_tpsn,mode\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%s\n", r.n_beacons,
                      r.tsrt_valid ? r.m_tsrt : std::nan(""),
                      r.tpsn_valid ? r.m_tpsn : std::nan(""),
                      r.tsrt_valid ? r.tau_max_tsrt : std::nan(""),
                      r.tpsn_valid ? r.tau_max_tpsn : std::nan(""), to_string(r.mode));
        out << buf;
    }
    return out.str();
}

std::string SweepResult::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"N", r.n_beacons},
                       {"M_tsrt", r.m_tsrt},
                       {"M_tpsn", r.m_tpsn},
                       {"tau_max_tsrt", r.tau_max_tsrt},
                       {"tau_max_tpsn", r.tau_max_tpsn},
                       {"mode", to_string(r.mode)},
                       {"tsrt_valid", r.tsrt_valid},
                       {"tpsn_valid", r.tpsn_valid}});
    }
    return nlohmann::json{{"rows", arr}}.dump(2) + "\n";
}

SweepResult sweep_m_vs_n(const SyncParams& p, const ErrorModel& model, const TreeState& tree,
                         int n_min, int n_max) {
    if (n_min < 1 || n_max < n_min)
        throw std::invalid_argument("sweep_m_vs_n: need 1 <= n_min <= n_max");
    model.validate();
    double sigma_eps = sigma_from_ps(p.eps_max, p.ps_limit);

    ErrorModel tsrt_model = model;  // as configured; both variances shrink by default
    ErrorModel tpsn_model = model;
    tpsn_model.skew_scaling = VarianceScaling::Constant;  // no drift estimation

    SweepResult out;
    for (int n = n_min; n <= n_max; ++n) {
        SweepRow row;
        row.n_beacons = n;
        SyncParams q = p;
        q.n_beacons = n;
        try {
            row.tau_max_tsrt = tau_max_period(sigma_eps, tsrt_model.sigma_o(n), tsrt_model.sigma_s(n));
            row.m_tsrt = static_cast<double>(tsrt_messages_per_sync(tree, n)) /
                         (row.tau_max_tsrt + p.tau_sync);
        } catch (const std::invalid_argument&) {
            row.tsrt_valid = false;
        }
        try {
            row.tau_max_tpsn = tau_max_period(sigma_eps, tpsn_model.sigma_o(n), tpsn_model.sigma_s(n));
            row.m_tpsn = static_cast<double>(tpsn_messages_per_sync(tree, n)) /
                         (row.tau_max_tpsn + p.tau_sync);
        } catch (const std::invalid_argument&) {
            row.tpsn_valid = false;
        }
        q.tau = row.tsrt_valid ? row.tau_max_tsrt + p.tau_sync : p.tau;
        row.mode = select_mode(q);
        out.rows.push_back(row);
    }
    return out;
}

ErrorStats error_stats(const SyncErrorReport& report, double eps_max) {
    if (report.rows.empty()) throw std::invalid_argument("error_stats: empty report");
    if (!(eps_max > 0.0)) throw std::invalid_argument("error_stats: eps_max must be > 0");

    std::map<int, std::vector<double>> by_level;
    ErrorStats st;
    st.node_count = static_cast<int>(report.rows.size());
    long exceed = 0;
    for (const auto& r : report.rows) {
        by_level[r.level].push_back(r.abs_error);
        st.overall_max = std::max(st.overall_max, r.abs_error);
        if (r.abs_error > eps_max) ++exceed;
    }
    st.exceedance_fraction = static_cast<double>(exceed) / static_cast<double>(report.rows.size());
    for (const auto& [level, vals] : by_level) {
        double n = static_cast<double>(vals.size());
        double mean = 0.0, mx = 0.0;
        for (double v : vals) {
            mean += v;
            mx = std::max(mx, v);
        }
        mean /= n;
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        double sd = vals.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        st.per_level.push_back({level, static_cast<int>(vals.size()), mean, sd, mx});
    }
    return st;
}

std::string ErrorStats::to_text() const {
    std::ostringstream out;
    char buf[160];
    out << "level count mean_abs std_abs max_abs\n";
    for (const auto& r : per_level) {
        std::snprintf(buf, sizeof buf, "%d %d %.12e %.12e %.12e\n", r.level, r.count, r.mean_abs,
                      r.std_abs, r.max_abs);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "overall_max %.12e\nexceedance_fraction %.12g\n", overall_max,
                  exceedance_fraction);
    out << buf;
    return out.str();
}

SyncErrorReport tpsn_sync_tree(Sim& sim, const TreeState& tree, int n_beacons) {
    if (n_beacons < 1) throw std::invalid_argument("tpsn_sync_tree: n_beacons must be >= 1");
    size_t trace_start = sim.engine().trace().size();

    // Order the non-root nodes by level, ties by id: each level completes
    // before the next starts, as TPSN's level-discovery phase enforces.
    std::vector<NodeId> order;
    for (NodeId u = 0; u < tree.node_count(); ++u)
        if (tree.node(u).accepted && tree.node(u).parent) order.push_back(u);
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return tree.node(a).level < tree.node(b).level;
    });

    SyncErrorReport report;
    report.rounds = 1;
    std::vector<char> synced(static_cast<size_t>(tree.node_count()), 0);
    std::vector<double> sync_time(static_cast<size_t>(tree.node_count()), -1.0);
    for (NodeId child : order) {
        NodeId parent = *tree.node(child).parent;
        try {
            auto records = two_way_exchange(sim, child, parent, n_beacons);
            DriftDelayEstimate est = aggregate_mean(records);
            // The child initiated, so est.delta is parent minus child; flip it
            // into the child-minus-parent convention synchronize_pair expects.
            est.delta = -est.delta;
            synchronize_pair(sim.clock(child), est, sim.engine().now());
            synced[static_cast<size_t>(child)] = 1;
            sync_time[static_cast<size_t>(child)] = sim.engine().now();
        } catch (const ExchangeFailed&) {
            sim.engine().note(child, "tpsn exchange failed");
        }
    }

    report.end_time = sim.engine().now();
    std::vector<double> mism = sim.mismatch_vs_reference(report.end_time);
    for (NodeId u = 0; u < sim.graph().node_count(); ++u) {
        if (u == sim.graph().reference()) continue;
        report.rows.push_back({u, tree.node(u).level, std::abs(mism[static_cast<size_t>(u)]),
                               synced[static_cast<size_t>(u)] != 0,
                               sync_time[static_cast<size_t>(u)]});
    }
    const EventTrace& trace = sim.engine().trace();
    for (size_t i = trace_start; i < trace.size(); ++i) {
        const TraceEvent& ev = trace[i];
        if (ev.type == TraceEvent::Type::Send && ev.kind) report.sent[*ev.kind] += 1;
    }
    return report;
}

}  // namespace tsrt
