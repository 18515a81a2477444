#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "tsrt/sim.hpp"

namespace tsrt {

// Local timestamps of one two-way exchange: t1 (send) and t4 (receive) on the
// initiator's clock, t2 (receive) and t3 (send) on the responder's clock.
struct ExchangeRecord {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
    double t4 = 0.0;

    void validate() const {
        if (t4 < t1 || t3 < t2)
            throw std::invalid_argument("ExchangeRecord: local timestamps must be monotone");
    }
};

// delta is the relative clock drift (responder minus initiator), d the
// propagation delay. Heavy asymmetric jitter can drive the estimated d
// negative; it is kept as-is and flagged, never clamped.
struct DriftDelayEstimate {
    double delta = 0.0;
    double d = 0.0;
    bool negative_delay = false;
};

DriftDelayEstimate compute_drift_delay(const ExchangeRecord& rec);

// Arithmetic mean of the per-round estimates.
DriftDelayEstimate aggregate_mean(std::span<const ExchangeRecord> records);

// Least-squares line y = intercept + slope * x with the OLS standard error
// of the slope (infinite when there are fewer than three points or the x
// values are degenerate).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};
LineFit fit_line(std::span<const std::pair<double, double>> points);

// Least-squares fit of the per-round drift over the initiator send times:
// delta(t1) = a + skew * t1. delta_at_end evaluates the fit at the last
// round's t1. Needs at least two rounds with distinct send times.
struct RegressionEstimate {
    double delta_at_end = 0.0;
    double d = 0.0;
    double skew = 0.0;         // relative rate error, responder vs initiator
    double skew_stderr = 0.0;  // infinite when it cannot be assessed

    // A slope buried in the fit noise must not be applied as a correction:
    // integrating it would inject more error than it removes.
    bool skew_significant() const { return std::abs(skew) > 3.0 * skew_stderr; }
};
RegressionEstimate aggregate_regression(std::span<const ExchangeRecord> records);

// The child aligns its clock to the parent at true time t_true_now: the local
// reading is corrected by -delta, where estimate.delta is the drift of the
// child relative to the parent.
void synchronize_pair(LocalClock& child, const DriftDelayEstimate& estimate, double t_true_now);

struct ExchangeFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs n_beacons request/acknowledge rounds between two adjacent nodes on the
// control channel, timestamping with each node's local clock at the true
// send/receive instants. Rounds whose request or reply is lost are omitted.
class TwoWayPhase : public EngineHandler {
public:
    TwoWayPhase(Sim& sim, NodeId initiator, NodeId responder, int n_beacons,
                double spacing = 0.0);

    void begin();  // sends the first beacon at the current time
    bool done() const { return done_; }
    const std::vector<ExchangeRecord>& records() const { return records_; }

    void on_message(NodeId node, const Message& msg, double t_true) override;
    void on_timer(NodeId node, TimerId id) override;

private:
    void send_beacon();
    void finish_round();

    Sim& sim_;
    NodeId initiator_;
    NodeId responder_;
    int n_beacons_;
    double spacing_;
    int rounds_done_ = 0;
    bool awaiting_ = false;
    bool done_ = false;
    double t1_sent_ = 0.0;
    TimerId timer_ = 0;
    std::vector<ExchangeRecord> records_;
};

// Drives a TwoWayPhase to completion on the sim's engine and returns all
// successful rounds. Throws ExchangeFailed when no round succeeded.
std::vector<ExchangeRecord> two_way_exchange(Sim& sim, NodeId initiator, NodeId responder,
                                             int n_beacons, double spacing = 0.0);

}  // namespace tsrt
