#include "tsrt/pairwise.hpp"

#include <cmath>

namespace tsrt {

DriftDelayEstimate compute_drift_delay(const ExchangeRecord& rec) {
    double forward = rec.t2 - rec.t1;
    double backward = rec.t4 - rec.t3;
    DriftDelayEstimate est;
    est.delta = (forward - backward) / 2.0;
    est.d = (forward + backward) / 2.0;
    est.negative_delay = est.d < 0.0;
    return est;
}

DriftDelayEstimate aggregate_mean(std::span<const ExchangeRecord> records) {
    if (records.empty())
        throw std::invalid_argument("aggregate_mean: no records");
    DriftDelayEstimate acc;
    bool neg = false;
    for (const auto& rec : records) {
        DriftDelayEstimate e = compute_drift_delay(rec);
        acc.delta += e.delta;
        acc.d += e.d;
        neg = neg || e.negative_delay;
    }
    acc.delta /= static_cast<double>(records.size());
    acc.d /= static_cast<double>(records.size());
    acc.negative_delay = neg;
    return acc;
}

LineFit fit_line(std::span<const std::pair<double, double>> points) {
    LineFit fit;
    fit.slope_stderr = std::numeric_limits<double>::infinity();
    double n = static_cast<double>(points.size());
    if (points.size() < 2) return fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : points) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    if (points.size() >= 3) {
        double ssr = 0.0;
        for (auto [x, y] : points) {
            double r = y - (fit.intercept + fit.slope * x);
            ssr += r * r;
        }
        double sigma2 = ssr / (n - 2.0);
        fit.slope_stderr = std::sqrt(sigma2 * n / denom);
    }
    return fit;
}

RegressionEstimate aggregate_regression(std::span<const ExchangeRecord> records) {
    if (records.size() < 2)
        throw std::invalid_argument("aggregate_regression: need at least two rounds");
    std::vector<std::pair<double, double>> points;
    points.reserve(records.size());
    double sum_delay = 0.0;
    bool degenerate = true;
    for (const auto& rec : records) {
        DriftDelayEstimate e = compute_drift_delay(rec);
        points.emplace_back(rec.t1, e.delta);
        sum_delay += e.d;
        degenerate = degenerate && rec.t1 == records.front().t1;
    }
    if (degenerate)
        throw std::invalid_argument("aggregate_regression: send times are degenerate");
    LineFit fit = fit_line(points);
    RegressionEstimate out;
    out.skew = fit.slope;
    out.skew_stderr = fit.slope_stderr;
    out.delta_at_end = fit.intercept + fit.slope * records.back().t1;
    out.d = sum_delay / static_cast<double>(records.size());
    return out;
}

void synchronize_pair(LocalClock& child, const DriftDelayEstimate& estimate, double t_true_now) {
    child.apply_correction(t_true_now, -estimate.delta);
}

TwoWayPhase::TwoWayPhase(Sim& sim, NodeId initiator, NodeId responder, int n_beacons,
                         double spacing)
    : sim_(sim),
      initiator_(initiator),
      responder_(responder),
      n_beacons_(n_beacons),
      spacing_(spacing) {
    if (n_beacons < 1)
        throw std::invalid_argument("TwoWayPhase: n_beacons must be >= 1");
    if (!sim.graph().adjacent(initiator, responder))
        throw std::invalid_argument("TwoWayPhase: nodes are not adjacent");
}

void TwoWayPhase::begin() { send_beacon(); }

void TwoWayPhase::send_beacon() {
    t1_sent_ = sim_.local_now(initiator_);
    Message m;
    m.kind = MsgKind::SynBegin;
    m.channel = ChannelAssignment::kControl;
    m.t1 = t1_sent_;
    sim_.engine().unicast(initiator_, responder_, m);
    awaiting_ = true;
    timer_ = sim_.engine().set_timer(initiator_, sim_.engine().response_timeout());
}

void TwoWayPhase::finish_round() {
    awaiting_ = false;
    ++rounds_done_;
    if (rounds_done_ >= n_beacons_) {
        done_ = true;
        return;
    }
    sim_.engine().schedule_action(initiator_, spacing_, [this] { send_beacon(); });
}

void TwoWayPhase::on_message(NodeId node, const Message& msg, double) {
    if (msg.kind == MsgKind::SynBegin && node == responder_ && msg.src == initiator_) {
        double t_recv = sim_.local_now(responder_);
        Message reply;
        reply.kind = MsgKind::Reply;
        reply.channel = ChannelAssignment::kControl;
        reply.t1 = msg.t1;
        reply.t2 = t_recv;
        reply.t3 = sim_.local_now(responder_);
        sim_.engine().unicast(responder_, initiator_, reply);
        return;
    }
    if (msg.kind == MsgKind::Reply && node == initiator_ && msg.dest == initiator_) {
        // A reply from an already timed-out round carries a stale t1.
        if (!awaiting_ || msg.t1 != t1_sent_) return;
        sim_.engine().cancel_timer(timer_);
        ExchangeRecord rec{msg.t1, msg.t2, msg.t3, sim_.local_now(initiator_)};
        records_.push_back(rec);
        finish_round();
    }
}

void TwoWayPhase::on_timer(NodeId node, TimerId id) {
    if (node != initiator_ || id != timer_ || !awaiting_) return;
    sim_.engine().note(initiator_, "two_way round timed out");
    finish_round();
}

std::vector<ExchangeRecord> two_way_exchange(Sim& sim, NodeId initiator, NodeId responder,
                                             int n_beacons, double spacing) {
    TwoWayPhase phase(sim, initiator, responder, n_beacons, spacing);
    EngineHandler* prev = sim.engine().handler();
    sim.engine().set_handler(&phase);
    phase.begin();
    sim.engine().run_all();
    sim.engine().set_handler(prev);
    if (phase.records().empty())
        throw ExchangeFailed("two_way_exchange: no round completed between node " +
                             std::to_string(initiator) + " and node " + std::to_string(responder));
    return phase.records();
}

}  // namespace tsrt
