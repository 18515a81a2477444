#include "tsrt/neteval.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace tsrt {

const char* to_string(SyncMode m) { return m == SyncMode::AO ? "AO" : "SI"; }

void SyncParams::validate() const {
    if (branches < 1) throw std::invalid_argument("SyncParams: branches must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("SyncParams: tau must be > 0");
    if (!(hop_rate >= 0.0)) throw std::invalid_argument("SyncParams: hop_rate must be >= 0");
    if (!(latency_factor >= 0.0 && latency_factor <= 1.0))
        throw std::invalid_argument("SyncParams: latency_factor must be in [0,1]");
    if (n_beacons < 1) throw std::invalid_argument("SyncParams: n_beacons must be >= 1");
    if (!(eps_max > 0.0)) throw std::invalid_argument("SyncParams: eps_max must be > 0");
    if (!(ps_limit > 0.0 && ps_limit < 1.0))
        throw std::invalid_argument("SyncParams: ps_limit must be in (0,1)");
    if (!(tau_sync >= 0.0)) throw std::invalid_argument("SyncParams: tau_sync must be >= 0");
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    char buf[64];
    out << "mode " << to_string(mode) << '\n';
    auto line = [&](const char* name, double v) {
        std::snprintf(buf, sizeof buf, "%s %.12g\n", name, v);
        out << buf;
    };
    line("sigma_eps", sigma_eps);
    line("tau_max", tau_max);
    line("tau", tau);
    line("messages_per_unit_time", messages_per_unit_time);
    return out.str();
}

double messages_per_unit_time(SyncMode mode, const SyncParams& p) {
    if (p.n_beacons < 1) throw std::invalid_argument("messages_per_unit_time: n_beacons must be >= 1");
    if (mode == SyncMode::AO) {
        if (!(p.tau > 0.0)) throw std::invalid_argument("messages_per_unit_time: tau must be > 0");
        return 2.0 * p.branches * p.n_beacons / p.tau;
    }
    return 2.0 * p.hop_rate * p.n_beacons;
}

SyncMode select_mode(const SyncParams& p) {
    if (!(p.hop_rate >= 0.0)) throw std::invalid_argument("select_mode: hop_rate must be >= 0");
    if (!(p.tau > 0.0)) throw std::invalid_argument("select_mode: tau must be > 0");
    if (!(p.latency_factor >= 0.0 && p.latency_factor <= 1.0))
        throw std::invalid_argument("select_mode: latency_factor must be in [0,1]");
    // Delay-weighted AO rate vs SI rate; ties (including delta = 0 with no
    // traffic) resolve to AO. With delta > 0 and h = 0 the SI side is free.
    double ao_weighted = 2.0 * p.branches * p.n_beacons * p.latency_factor / p.tau;
    double si = 2.0 * p.hop_rate * p.n_beacons;
    return ao_weighted > si ? SyncMode::SI : SyncMode::AO;
}

double sigma_from_ps(double eps_max, double ps) {
    if (!(eps_max > 0.0)) throw std::invalid_argument("sigma_from_ps: eps_max must be > 0");
    if (!(ps > 0.0 && ps < 1.0)) throw std::invalid_argument("sigma_from_ps: ps must be in (0,1)");
    auto exceedance = [&](double sigma) { return std::erfc(eps_max / (std::sqrt(2.0) * sigma)); };
    // erfc is increasing in sigma here; bracket then bisect.
    double lo = eps_max / (std::sqrt(2.0) * 40.0);  // erfc(40) is far below any valid ps
    double hi = eps_max;
    while (exceedance(hi) < ps) hi *= 2.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-12 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (exceedance(mid) < ps)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double tau_max_period(double sigma_eps, double sigma_oN, double sigma_sN) {
    if (!(sigma_sN > 0.0)) throw std::invalid_argument("tau_max_period: sigma_sN must be > 0");
    if (!(sigma_eps > sigma_oN))
        throw std::invalid_argument("tau_max_period: offset error alone exceeds budget");
    return std::sqrt((sigma_eps * sigma_eps - sigma_oN * sigma_oN) / (sigma_sN * sigma_sN));
}

EvalReport evaluate(const SyncParams& p, const ErrorModel& model) {
    p.validate();
    model.validate();
    EvalReport r;
    r.sigma_eps = sigma_from_ps(p.eps_max, p.ps_limit);
    r.tau_max = tau_max_period(r.sigma_eps, model.sigma_o(p.n_beacons), model.sigma_s(p.n_beacons));
    r.tau = r.tau_max + p.tau_sync;
    SyncParams q = p;
    q.tau = r.tau;
    r.mode = select_mode(q);
    r.messages_per_unit_time = messages_per_unit_time(r.mode, q);
    return r;
}

void HopRateTracker::record_delivery(int hops) {
    if (hops < 0) throw std::invalid_argument("HopRateTracker: hops must be >= 0");
    total_hops_ += hops;
    packets_ += 1;
}

double HopRateTracker::hop_rate(double window) const {
    if (!(window > 0.0)) throw std::invalid_argument("HopRateTracker: window must be > 0");
    return static_cast<double>(total_hops_) / window;
}

namespace {

// Forwards data packets hop by hop along hop-count shortest paths and lets
// the destination record the accumulated hop count.
class TrafficDriver : public EngineHandler {
public:
    TrafficDriver(Sim& sim, HopRateTracker& tracker) : sim_(sim), tracker_(tracker) {
        int n = sim.graph().node_count();
        next_hop_.assign(static_cast<size_t>(n), std::vector<NodeId>(static_cast<size_t>(n), -1));
        for (NodeId dst = 0; dst < n; ++dst) {
            std::queue<NodeId> q;
            q.push(dst);
            std::vector<char> seen(static_cast<size_t>(n), 0);
            seen[static_cast<size_t>(dst)] = 1;
            while (!q.empty()) {
                NodeId u = q.front();
                q.pop();
                for (NodeId v : sim.graph().neighbors(u)) {
                    if (!seen[static_cast<size_t>(v)]) {
                        seen[static_cast<size_t>(v)] = 1;
                        // First hop from v toward dst goes through u.
                        next_hop_[static_cast<size_t>(v)][static_cast<size_t>(dst)] = u;
                        q.push(v);
                    }
                }
            }
        }
    }

    void send_packet(NodeId src, NodeId final_dest) {
        forward(src, final_dest, 0);
    }

    void on_message(NodeId node, const Message& msg, double) override {
        if (msg.kind != MsgKind::DataPkt) return;
        if (node == msg.final_dest) {
            tracker_.record_delivery(msg.hops);
            return;
        }
        forward(node, msg.final_dest, msg.hops);
    }

private:
    void forward(NodeId at, NodeId final_dest, int hops_so_far) {
        NodeId next = next_hop_[static_cast<size_t>(at)][static_cast<size_t>(final_dest)];
        if (next < 0) return;
        Message m;
        m.kind = MsgKind::DataPkt;
        m.channel = ChannelAssignment::kControl;
        m.final_dest = final_dest;
        m.hops = hops_so_far + 1;
        sim_.engine().unicast(at, next, m);
    }

    Sim& sim_;
    HopRateTracker& tracker_;
    std::vector<std::vector<NodeId>> next_hop_;
};

}  // namespace

void run_poisson_traffic(Sim& sim, HopRateTracker& tracker, double rate, double duration) {
    if (!(rate >= 0.0)) throw std::invalid_argument("run_poisson_traffic: rate must be >= 0");
    if (!(duration > 0.0)) throw std::invalid_argument("run_poisson_traffic: duration must be > 0");
    int n = sim.graph().node_count();
    if (n < 2) {
        sim.engine().run_until(sim.engine().now() + duration);
        return;
    }
    TrafficDriver driver(sim, tracker);
    sim.engine().set_handler(&driver);
    double t_end = sim.engine().now() + duration;
    if (rate > 0.0) {
        std::exponential_distribution<double> gap(rate);
        std::uniform_int_distribution<NodeId> pick(0, n - 1);
        auto& rng = sim.engine().rng();
        // Arrival times and endpoints are drawn up front from the seeded
        // generator, so the schedule is independent of delivery interleaving.
        double t = sim.engine().now() + gap(rng);
        while (t <= t_end) {
            NodeId src = pick(rng);
            NodeId dst = pick(rng);
            while (dst == src) dst = pick(rng);
            sim.engine().schedule_action_at(src, t, [&driver, src, dst] {
                driver.send_packet(src, dst);
            });
            t += gap(rng);
        }
    }
    sim.engine().run_until(t_end);
    sim.engine().set_handler(nullptr);
}

}  // namespace tsrt
