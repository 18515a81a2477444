#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "tsrt/topology.hpp"

namespace tsrt {

using TimerId = std::uint64_t;

enum class MsgKind { FdPkt, AckPkt, SynBegin, Reply, OffsetBcast, DataPkt };
const char* to_string(MsgKind k);

inline constexpr double kNoTimestamp = std::numeric_limits<double>::quiet_NaN();

// Protocol message. Timestamp payload fields are local-clock seconds; unused
// fields stay NaN (or -1 for ids). Required fields per kind:
//   FdPkt:      level (sender's tree level)
//   AckPkt:     dest (the parent being acknowledged)
//   SynBegin:   t1, dest (the designated child; -1 allowed for pairwise use)
//   Reply:      t1, t2, t3, dest
//   OffsetBcast: t2, delta, d
//   DataPkt:    final_dest, hops (dest holds the next-hop relay)
struct Message {
    MsgKind kind{};
    NodeId src = -1;
    ChannelId channel = ChannelAssignment::kControl;
    NodeId dest = -1;
    double t1 = kNoTimestamp;
    double t2 = kNoTimestamp;
    double t3 = kNoTimestamp;
    double delta = kNoTimestamp;
    double d = kNoTimestamp;
    int level = -1;
    int hops = 0;
    NodeId final_dest = -1;

    // Throws std::logic_error when a field required by `kind` is missing.
    void validate_payload() const;
    std::string payload_text() const;
};

struct SimConfig {
    std::uint64_t seed = 1;
    double loss_prob = 0.0;
    // Per channel class; the shared control channel carries general traffic
    // and sees at least as much delay variation as a dedicated clock channel.
    double jitter_control = 0.0;
    double jitter_clock = 0.0;
    double backoff_max = 0.0;       // uniform random wait bound, seconds
    double response_timeout = -1.0;  // < 0: use 4 * max_edge_delay + backoff_max

    void validate() const;
};

struct TraceEvent {
    enum class Type { Send, Deliver, DropLoss, DropChannel, TimerSet, TimerFire, TimerCancel, Note };

    double at = 0.0;
    Type type{};
    NodeId node = -1;
    std::optional<MsgKind> kind;
    std::string detail;
};
const char* to_string(TraceEvent::Type t);

class EventTrace {
public:
    void append(TraceEvent ev) { events_.push_back(std::move(ev)); }
    size_t size() const { return events_.size(); }
    const TraceEvent& operator[](size_t i) const { return events_[i]; }
    auto begin() const { return events_.begin(); }
    auto end() const { return events_.end(); }

    long count(TraceEvent::Type t) const;
    long count_sends(MsgKind k) const;

    // One event per line: time, node, event type, kind, payload.
    std::string to_text() const;

private:
    std::vector<TraceEvent> events_;
};

class EngineHandler {
public:
    virtual ~EngineHandler() = default;
    virtual void on_message(NodeId node, const Message& msg, double t_true) = 0;
    virtual void on_timer(NodeId /*node*/, TimerId /*id*/) {}
};

// Seeded single-threaded discrete-event kernel. Events are processed in
// (time, schedule-sequence) order, so equal-time events run FIFO. All
// randomness (jitter, loss, backoff) comes from one seeded generator, making
// a run a pure function of (topology, config, scenario).
class Engine {
public:
    Engine(const NetworkGraph& g, const ChannelAssignment& ca, SimConfig cfg);
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    double now() const { return now_; }
    std::mt19937_64& rng() { return rng_; }
    const SimConfig& config() const { return cfg_; }
    double response_timeout() const { return timeout_; }

    void set_handler(EngineHandler* h) { handler_ = h; }
    EngineHandler* handler() const { return handler_; }

    void listen(NodeId node, ChannelId ch);
    ChannelId listening(NodeId node) const { return listen_.at(static_cast<size_t>(node)); }

    // Radio transmission at the current time on msg.channel. Every neighbor
    // gets an independent delivery event at now + edge_delay + jitter, each
    // independently lost with loss_prob; a delivery only reaches the handler
    // if the neighbor is listening on msg.channel at arrival time.
    void broadcast(NodeId src, Message msg);
    // Addressed transmission to one adjacent node; same delay/jitter/loss.
    void unicast(NodeId src, NodeId dst, Message msg);

    TimerId set_timer(NodeId node, double delay);
    void cancel_timer(TimerId id);

    // Deferred callback helpers (node-local processing steps).
    void schedule_action(NodeId node, double delay, std::function<void()> fn);
    void schedule_action_at(NodeId node, double at, std::function<void()> fn);

    double uniform_backoff();  // U[0, backoff_max]

    void run_until(double t_end);
    void run_all();
    bool empty() const { return queue_.empty(); }

    EventTrace& trace() { return trace_; }
    const EventTrace& trace() const { return trace_; }
    void note(NodeId node, std::string text);

private:
    struct Delivery {
        Message msg;
    };
    struct TimerFire {
        TimerId id;
    };
    struct Action {
        std::function<void()> fn;
    };
    struct Ev {
        double at;
        std::uint64_t seq;
        NodeId target;
        int body_kind;  // 0 delivery, 1 timer, 2 action
        Delivery delivery;
        TimerFire timer;
        Action action;
    };
    struct EvOrder {
        bool operator()(const Ev& a, const Ev& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    void push(Ev ev);
    void transmit(NodeId src, const std::vector<NodeId>& targets, const Message& msg);
    double draw_jitter(ChannelId ch);
    void dispatch(Ev& ev);

    const NetworkGraph& graph_;
    const ChannelAssignment& channels_;
    SimConfig cfg_;
    double timeout_;
    std::mt19937_64 rng_;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    TimerId next_timer_ = 1;
    std::priority_queue<Ev, std::vector<Ev>, EvOrder> queue_;
    std::unordered_set<TimerId> active_timers_;
    std::vector<ChannelId> listen_;
    EventTrace trace_;
    EngineHandler* handler_ = nullptr;
};

}  // namespace tsrt
