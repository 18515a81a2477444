#include "tsrt/engine.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace tsrt {

const char* to_string(MsgKind k) {
    switch (k) {
        case MsgKind::FdPkt: return "fd_pkt";
        case MsgKind::AckPkt: return "ack_pkt";
        case MsgKind::SynBegin: return "syn_begin";
        case MsgKind::Reply: return "reply";
        case MsgKind::OffsetBcast: return "offset_bcast";
        case MsgKind::DataPkt: return "data_pkt";
    }
    return "?";
}

const char* to_string(TraceEvent::Type t) {
    switch (t) {
        case TraceEvent::Type::Send: return "send";
        case TraceEvent::Type::Deliver: return "deliver";
        case TraceEvent::Type::DropLoss: return "drop_loss";
        case TraceEvent::Type::DropChannel: return "drop_channel";
        case TraceEvent::Type::TimerSet: return "timer_set";
        case TraceEvent::Type::TimerFire: return "timer_fire";
        case TraceEvent::Type::TimerCancel: return "timer_cancel";
        case TraceEvent::Type::Note: return "note";
    }
    return "?";
}

namespace {
bool has(double v) { return !std::isnan(v); }

void require(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("Message payload: missing ") + what);
}
}  // namespace

void Message::validate_payload() const {
    switch (kind) {
        case MsgKind::FdPkt:
            require(level >= 0, "level in fd_pkt");
            break;
        case MsgKind::AckPkt:
            require(dest >= 0, "dest in ack_pkt");
            break;
        case MsgKind::SynBegin:
            require(has(t1), "t1 in syn_begin");
            break;
        case MsgKind::Reply:
            require(has(t1) && has(t2) && has(t3), "t1/t2/t3 in reply");
            require(dest >= 0, "dest in reply");
            break;
        case MsgKind::OffsetBcast:
            require(has(t2) && has(delta) && has(d), "t2/delta/d in offset_bcast");
            break;
        case MsgKind::DataPkt:
            require(final_dest >= 0, "final_dest in data_pkt");
            require(hops >= 0, "hops in data_pkt");
            break;
    }
}

std::string Message::payload_text() const {
    char buf[160];
    std::ostringstream out;
    out << "src=" << src << " ch=" << channel;
    if (dest >= 0) out << " dest=" << dest;
    auto field = [&](const char* name, double v) {
        if (has(v)) {
            std::snprintf(buf, sizeof buf, " %s=%.9f", name, v);
            out << buf;
        }
    };
    field("t1", t1);
    field("t2", t2);
    field("t3", t3);
    field("delta", delta);
    field("d", d);
    if (level >= 0) out << " level=" << level;
    if (kind == MsgKind::DataPkt) out << " final=" << final_dest << " hops=" << hops;
    return out.str();
}

void SimConfig::validate() const {
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
        throw std::invalid_argument("SimConfig: loss_prob must be in [0,1]");
    if (!(jitter_control >= 0.0) || !(jitter_clock >= 0.0))
        throw std::invalid_argument("SimConfig: jitter std-dev must be >= 0");
    if (!(backoff_max >= 0.0))
        throw std::invalid_argument("SimConfig: backoff_max must be >= 0");
}

long EventTrace::count(TraceEvent::Type t) const {
    long n = 0;
    for (const auto& ev : events_)
        if (ev.type == t) ++n;
    return n;
}

long EventTrace::count_sends(MsgKind k) const {
    long n = 0;
    for (const auto& ev : events_)
        if (ev.type == TraceEvent::Type::Send && ev.kind && *ev.kind == k) ++n;
    return n;
}

std::string EventTrace::to_text() const {
    std::ostringstream out;
    char buf[64];
    for (const auto& ev : events_) {
        std::snprintf(buf, sizeof buf, "%.9f", ev.at);
        out << buf << ' ' << to_string(ev.type) << " node=" << ev.node;
        if (ev.kind) out << ' ' << to_string(*ev.kind);
        if (!ev.detail.empty()) out << ' ' << ev.detail;
        out << '\n';
    }
    return out.str();
}

Engine::Engine(const NetworkGraph& g, const ChannelAssignment& ca, SimConfig cfg)
    : graph_(g), channels_(ca), cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    timeout_ = cfg_.response_timeout >= 0.0
                   ? cfg_.response_timeout
                   : 4.0 * graph_.max_edge_delay() + cfg_.backoff_max;
    listen_.assign(static_cast<size_t>(g.node_count()), ChannelAssignment::kControl);
}

void Engine::push(Ev ev) {
    if (ev.at < now_)
        throw std::invalid_argument("Engine: cannot schedule event in the past");
    ev.seq = next_seq_++;
    queue_.push(std::move(ev));
}

void Engine::listen(NodeId node, ChannelId ch) {
    listen_.at(static_cast<size_t>(node)) = ch;
}

double Engine::draw_jitter(ChannelId ch) {
    double std = ch == ChannelAssignment::kControl ? cfg_.jitter_control : cfg_.jitter_clock;
    if (std <= 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, std);
    return dist(rng_);
}

void Engine::transmit(NodeId src, const std::vector<NodeId>& targets, const Message& msg) {
    msg.validate_payload();
    trace_.append({now_, TraceEvent::Type::Send, src, msg.kind, msg.payload_text()});
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (NodeId v : targets) {
        double jitter = draw_jitter(msg.channel);
        bool lost = cfg_.loss_prob > 0.0 && coin(rng_) < cfg_.loss_prob;
        if (lost) {
            trace_.append({now_, TraceEvent::Type::DropLoss, v, msg.kind, "from=" + std::to_string(src)});
            continue;
        }
        // Physical propagation time stays positive even under extreme jitter.
        double delay = std::max(graph_.edge_delay(src, v) + jitter, 1e-12);
        Ev ev{};
        ev.at = now_ + delay;
        ev.target = v;
        ev.body_kind = 0;
        ev.delivery.msg = msg;
        push(std::move(ev));
    }
}

void Engine::broadcast(NodeId src, Message msg) {
    msg.src = src;
    transmit(src, graph_.neighbors(src), msg);
}

void Engine::unicast(NodeId src, NodeId dst, Message msg) {
    if (!graph_.adjacent(src, dst))
        throw std::logic_error("Engine::unicast: nodes are not adjacent");
    msg.src = src;
    msg.dest = dst;
    transmit(src, {dst}, msg);
}

TimerId Engine::set_timer(NodeId node, double delay) {
    if (delay < 0.0)
        throw std::invalid_argument("Engine::set_timer: delay must be >= 0");
    TimerId id = next_timer_++;
    active_timers_.insert(id);
    Ev ev{};
    ev.at = now_ + delay;
    ev.target = node;
    ev.body_kind = 1;
    ev.timer.id = id;
    push(std::move(ev));
    trace_.append({now_, TraceEvent::Type::TimerSet, node, std::nullopt, "timer=" + std::to_string(id)});
    return id;
}

void Engine::cancel_timer(TimerId id) {
    // Idempotent: cancelling a fired or unknown timer is a no-op.
    if (active_timers_.erase(id) > 0)
        trace_.append({now_, TraceEvent::Type::TimerCancel, -1, std::nullopt, "timer=" + std::to_string(id)});
}

void Engine::schedule_action(NodeId node, double delay, std::function<void()> fn) {
    schedule_action_at(node, now_ + delay, std::move(fn));
}

void Engine::schedule_action_at(NodeId node, double at, std::function<void()> fn) {
    Ev ev{};
    ev.at = at;
    ev.target = node;
    ev.body_kind = 2;
    ev.action.fn = std::move(fn);
    push(std::move(ev));
}

double Engine::uniform_backoff() {
    if (cfg_.backoff_max <= 0.0) return 0.0;
    std::uniform_real_distribution<double> dist(0.0, cfg_.backoff_max);
    return dist(rng_);
}

void Engine::dispatch(Ev& ev) {
    now_ = ev.at;
    switch (ev.body_kind) {
        case 0: {
            const Message& msg = ev.delivery.msg;
            if (listening(ev.target) != msg.channel) {
                trace_.append({now_, TraceEvent::Type::DropChannel, ev.target, msg.kind,
                               "ch=" + std::to_string(msg.channel)});
                return;
            }
            trace_.append({now_, TraceEvent::Type::Deliver, ev.target, msg.kind, msg.payload_text()});
            if (handler_) handler_->on_message(ev.target, msg, now_);
            return;
        }
        case 1: {
            if (active_timers_.erase(ev.timer.id) == 0) return;  // cancelled
            trace_.append({now_, TraceEvent::Type::TimerFire, ev.target, std::nullopt,
                           "timer=" + std::to_string(ev.timer.id)});
            if (handler_) handler_->on_timer(ev.target, ev.timer.id);
            return;
        }
        case 2:
            if (ev.action.fn) ev.action.fn();
            return;
    }
}

void Engine::run_until(double t_end) {
    if (t_end < now_)
        throw std::invalid_argument("Engine::run_until: t_end precedes current time");
    while (!queue_.empty() && queue_.top().at <= t_end) {
        Ev ev = queue_.top();
        queue_.pop();
        dispatch(ev);
    }
    now_ = t_end;
}

void Engine::run_all() {
    while (!queue_.empty()) {
        Ev ev = queue_.top();
        queue_.pop();
        dispatch(ev);
    }
}

void Engine::note(NodeId node, std::string text) {
    trace_.append({now_, TraceEvent::Type::Note, node, std::nullopt, std::move(text)});
}

}  // namespace tsrt
