#include "tsrt/hts.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace tsrt {

namespace {
// Crystal oscillators stay well below this rate error; a fitted slope beyond
// it is channel jitter leaking through a short beacon train, not clock skew.
constexpr double kMaxPlausibleRateError = 200e-6;
}  // namespace

bool SyncErrorReport::all_synced() const {
    for (const auto& r : rows)
        if (!r.synced) return false;
    return true;
}

double SyncErrorReport::max_abs_error() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.abs_error);
    return m;
}

long SyncErrorReport::total_sync_messages() const {
    long n = 0;
    for (MsgKind k : {MsgKind::SynBegin, MsgKind::Reply, MsgKind::OffsetBcast}) {
        auto it = sent.find(k);
        if (it != sent.end()) n += it->second;
    }
    return n;
}

std::string SyncErrorReport::to_text() const {
    std::ostringstream out;
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12e", r.abs_error);
        out << r.id << ' ' << r.level << ' ' << buf << (r.synced ? "" : " unsynced") << '\n';
    }
    for (const auto& [kind, n] : sent)
        out << "# sent " << to_string(kind) << ' ' << n << '\n';
    return out.str();
}

HtsPhase::HtsPhase(Sim& sim, const TreeState& tree, HtsOptions opt)
    : sim_(sim), tree_(tree), opt_(opt), states_(static_cast<size_t>(sim.graph().node_count())) {
    if (opt_.n_beacons < 1)
        throw std::invalid_argument("HtsPhase: n_beacons must be >= 1");
    if (opt_.use_regression && opt_.n_beacons < 3)
        throw std::invalid_argument("HtsPhase: regression needs n_beacons >= 3");
    children_.resize(states_.size());
    for (NodeId u = 0; u < sim.graph().node_count(); ++u)
        children_[static_cast<size_t>(u)] = tree.children(u);
}

void HtsPhase::begin_round() {
    for (auto& st : states_) {
        st.phase = HtsPhaseState::Idle;
        st.t2prime.reset();
        st.designated.reset();
        st.timer.reset();
        st.designated_this_round = false;
        st.initiated_this_round = false;
        st.records.clear();
        st.beacons_done = 0;
        st.beacon_obs.clear();
    }
    NodeId rn = sim_.graph().reference();
    HtsNodeState& st = states_[static_cast<size_t>(rn)];
    if (!st.synced) {
        st.synced = true;  // the reference is the time source itself
        st.first_sync_time = sim_.engine().now();
    }
    start_sync(rn);
}

NodeId HtsPhase::pick_designated(NodeId u) {
    const auto& kids = children_[static_cast<size_t>(u)];
    if (kids.empty())
        throw std::logic_error("HtsPhase::pick_designated: node has no children");
    std::uniform_int_distribution<size_t> dist(0, kids.size() - 1);
    return kids[dist(sim_.engine().rng())];
}

void HtsPhase::start_sync(NodeId u) {
    HtsNodeState& st = states_[static_cast<size_t>(u)];
    if (st.initiated_this_round) return;
    st.initiated_this_round = true;
    if (children_[static_cast<size_t>(u)].empty()) {
        sim_.engine().note(u, "start_sync: no children, nothing to do");
        return;
    }
    st.designated = pick_designated(u);
    st.records.clear();
    st.beacons_done = 0;
    send_sync_beacon(u);
}

void HtsPhase::send_sync_beacon(NodeId u) {
    HtsNodeState& st = states_[static_cast<size_t>(u)];
    st.last_t1 = sim_.local_now(u);
    Message m;
    m.kind = MsgKind::SynBegin;
    m.channel = ChannelAssignment::kControl;
    m.t1 = st.last_t1;
    m.dest = *st.designated;
    sim_.engine().broadcast(u, m);
    // The initiator jumps to its own clock channel to wait for the reply.
    sim_.engine().listen(u, sim_.channels().clock_channel(u));
    st.timer = sim_.engine().set_timer(u, sim_.engine().response_timeout());
    st.phase = HtsPhaseState::AwaitingReply;
}

void HtsPhase::handle_syn_begin(NodeId node, const Message& msg) {
    // Only the sender's tree children take part in this domain.
    if (!tree_.node(node).parent || *tree_.node(node).parent != msg.src) return;
    HtsNodeState& st = states_[static_cast<size_t>(node)];
    st.t2prime = sim_.local_now(node);
    st.beacon_obs.emplace_back(msg.t1, *st.t2prime);
    if (msg.dest == node) {
        st.designated_this_round = true;
        ChannelId ch = sim_.channels().clock_channel(msg.src);
        sim_.engine().listen(node, ch);
        double wait = sim_.engine().uniform_backoff();
        double t1_echo = msg.t1;
        double t2 = *st.t2prime;
        NodeId parent = msg.src;
        sim_.engine().schedule_action(node, wait, [this, node, parent, ch, t1_echo, t2] {
            Message reply;
            reply.kind = MsgKind::Reply;
            reply.channel = ch;
            reply.t1 = t1_echo;
            reply.t2 = t2;
            reply.t3 = sim_.local_now(node);
            reply.dest = parent;
            sim_.engine().broadcast(node, reply);
            // Back to the control channel for the offset broadcast.
            sim_.engine().listen(node, ChannelAssignment::kControl);
        });
    } else {
        st.phase = HtsPhaseState::AwaitingOffset;
    }
}

void HtsPhase::handle_reply(NodeId node, const Message& msg) {
    HtsNodeState& st = states_[static_cast<size_t>(node)];
    if (st.phase != HtsPhaseState::AwaitingReply) return;  // stale round
    if (msg.dest != node || !st.designated || msg.src != *st.designated) return;
    if (msg.t1 != st.last_t1) return;  // reply to an already timed-out beacon
    if (st.timer) sim_.engine().cancel_timer(*st.timer);
    st.timer.reset();
    ExchangeRecord rec{msg.t1, msg.t2, msg.t3, sim_.local_now(node)};
    st.records.push_back(rec);
    ++st.beacons_done;
    if (st.beacons_done < opt_.n_beacons) {
        sim_.engine().schedule_action(node, opt_.beacon_spacing,
                                      [this, node] { send_sync_beacon(node); });
    } else {
        complete_domain(node);
    }
}

void HtsPhase::complete_domain(NodeId u) {
    HtsNodeState& st = states_[static_cast<size_t>(u)];
    sim_.engine().listen(u, ChannelAssignment::kControl);
    DriftDelayEstimate est = aggregate_mean(st.records);
    if (opt_.use_regression && st.records.size() >= 3) {
        // Drift compensation: broadcast the fitted drift at the last beacon
        // instead of the train mean, so skewed children are not corrected
        // toward the middle of the beacon train. A fit whose slope is buried
        // in noise falls back to the mean.
        RegressionEstimate reg = aggregate_regression(st.records);
        if (reg.skew_significant() && std::abs(reg.skew) <= kMaxPlausibleRateError) {
            est.delta = reg.delta_at_end;
            est.d = reg.d;
        }
    }
    Message m;
    m.kind = MsgKind::OffsetBcast;
    m.channel = ChannelAssignment::kControl;
    m.t2 = st.records.back().t1 + est.delta + est.d;
    m.delta = est.delta;
    m.d = est.d;
    sim_.engine().broadcast(u, m);
    st.phase = st.synced ? HtsPhaseState::Synchronized : HtsPhaseState::Idle;
}

void HtsPhase::abort_domain(NodeId u, const char* why) {
    HtsNodeState& st = states_[static_cast<size_t>(u)];
    sim_.engine().listen(u, ChannelAssignment::kControl);
    st.phase = st.synced ? HtsPhaseState::Synchronized : HtsPhaseState::Idle;
    st.timer.reset();
    st.records.clear();
    sim_.engine().note(u, std::string("hts domain aborted: ") + why);
}

void HtsPhase::handle_offset_bcast(NodeId node, const Message& msg) {
    HtsNodeState& st = states_[static_cast<size_t>(node)];
    if (!st.t2prime) return;  // never heard this round's syn_begin
    if (!tree_.node(node).parent || *tree_.node(node).parent != msg.src) return;

    double d_prime = msg.t2 - *st.t2prime;
    double amount;
    if (opt_.correction == CorrectionMode::PaperFormula) {
        amount = msg.d + d_prime;
    } else if (st.designated_this_round) {
        // The designated child took part in the exchange itself; its drift is
        // exactly the broadcast delta.
        amount = -msg.delta;
    } else {
        amount = d_prime - msg.delta;
    }

    double skew_delta = 0.0;
    if (opt_.use_regression && st.beacon_obs.size() >= 3) {
        // Rate error against the parent from the beacon train: slope of
        // (t2' - t1) over t1. Only applied when the slope stands out of the
        // fit noise; a short train under jitter measures nothing but jitter,
        // and integrating that would cost more than it corrects.
        std::vector<std::pair<double, double>> gaps;
        gaps.reserve(st.beacon_obs.size());
        for (auto [t1, t2p] : st.beacon_obs) gaps.emplace_back(t1, t2p - t1);
        LineFit fit = fit_line(gaps);
        if (std::abs(fit.slope) > 3.0 * fit.slope_stderr &&
            std::abs(fit.slope) <= kMaxPlausibleRateError)
            skew_delta = -fit.slope;
    }

    sim_.clock(node).apply_correction(sim_.engine().now(), amount, skew_delta);
    st.t2prime.reset();
    st.designated_this_round = false;
    st.phase = HtsPhaseState::Synchronized;
    if (!st.synced) {
        st.synced = true;
        st.first_sync_time = sim_.engine().now();
    }
    if (!children_[static_cast<size_t>(node)].empty()) {
        double wait = sim_.engine().uniform_backoff();
        sim_.engine().schedule_action(node, wait, [this, node] { start_sync(node); });
    }
}

void HtsPhase::on_message(NodeId node, const Message& msg, double) {
    switch (msg.kind) {
        case MsgKind::SynBegin:
            handle_syn_begin(node, msg);
            break;
        case MsgKind::Reply:
            handle_reply(node, msg);
            break;
        case MsgKind::OffsetBcast:
            handle_offset_bcast(node, msg);
            break;
        default:
            break;
    }
}

void HtsPhase::on_timer(NodeId node, TimerId id) {
    HtsNodeState& st = states_[static_cast<size_t>(node)];
    if (st.phase != HtsPhaseState::AwaitingReply || !st.timer || *st.timer != id) return;
    abort_domain(node, "reply timeout");
}

SyncErrorReport run_network_sync(Sim& sim, const TreeState& tree, HtsOptions opt) {
    HtsPhase phase(sim, tree, opt);
    size_t trace_start = sim.engine().trace().size();
    sim.engine().set_handler(&phase);
    for (int r = 0; r < opt.rounds; ++r) {
        phase.begin_round();
        sim.engine().run_all();
    }
    sim.engine().set_handler(nullptr);

    SyncErrorReport report;
    report.rounds = opt.rounds;
    report.end_time = sim.engine().now();
    std::vector<double> mism = sim.mismatch_vs_reference(report.end_time);
    for (NodeId u = 0; u < sim.graph().node_count(); ++u) {
        if (u == sim.graph().reference()) continue;
        const HtsNodeState& st = phase.state(u);
        report.rows.push_back({u, tree.node(u).level, std::abs(mism[static_cast<size_t>(u)]),
                               st.synced, st.first_sync_time});
    }
    const EventTrace& trace = sim.engine().trace();
    for (size_t i = trace_start; i < trace.size(); ++i) {
        const TraceEvent& ev = trace[i];
        if (ev.type == TraceEvent::Type::Send && ev.kind) report.sent[*ev.kind] += 1;
    }
    return report;
}

}  // namespace tsrt
