#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsrt/pairwise.hpp"
#include "tsrt/sim.hpp"
#include "tsrt/treebuild.hpp"

namespace tsrt {

// How a neighbor turns the offset broadcast into a clock correction.
// PaperFormula applies T = t + d + d' verbatim and carries a systematic
// d + delta bias per domain; CorrectedFormula applies T = t + d' - delta,
// which is exact under the model (and reduces to a direct -delta correction
// at the designated child).
enum class CorrectionMode { PaperFormula, CorrectedFormula };

struct HtsOptions {
    int n_beacons = 1;
    CorrectionMode correction = CorrectionMode::CorrectedFormula;
    // Receiver-side regression over the beacon train: each concerned node
    // fits its rate error against the t1 timestamps carried by the beacons
    // and corrects its skew along with the offset. Needs n_beacons >= 3.
    // Fits whose slope is statistically insignificant or implausibly large
    // for an oscillator are discarded rather than applied.
    bool use_regression = false;
    double beacon_spacing = 0.0;  // gap between beacon exchanges, seconds
    int rounds = 1;               // full ripples root -> leaves
};

enum class HtsPhaseState { Idle, AwaitingReply, AwaitingOffset, Synchronized };

struct HtsNodeState {
    HtsPhaseState phase = HtsPhaseState::Idle;
    std::optional<double> t2prime;        // local receive time of the last syn_begin
    std::optional<NodeId> designated;     // initiator side: child asked to reply
    std::optional<TimerId> timer;         // initiator side: reply timeout
    bool designated_this_round = false;   // receiver side
    bool initiated_this_round = false;
    bool synced = false;
    double first_sync_time = -1.0;        // true time of first Synchronized transition
    // Initiator-side beacon bookkeeping.
    std::vector<ExchangeRecord> records;
    int beacons_done = 0;
    double last_t1 = 0.0;
    // Receiver-side beacon observations for the regression fit.
    std::vector<std::pair<double, double>> beacon_obs;  // (t1, t2')
};

struct SyncErrorReport {
    struct Row {
        NodeId id;
        int level;
        double abs_error;  // |local - reference local| at end_time, seconds
        bool synced;
        double first_sync_time;
    };
    std::vector<Row> rows;  // every node except the reference, ascending id
    std::map<MsgKind, long> sent;
    double end_time = 0.0;
    int rounds = 0;

    bool all_synced() const;
    double max_abs_error() const;
    long total_sync_messages() const;  // syn_begin + reply + offset_bcast
    // Per node `id level abs_error_seconds`, then message-count totals.
    std::string to_text() const;
};

// Hierarchy Time Synchronization ripple. Each initiator broadcasts syn_begin
// on the control channel and jumps to its clock channel; the designated child
// replies there; the initiator computes (delta, d), broadcasts the offset on
// the control channel, and every child corrects its clock and continues the
// ripple toward its own children.
class HtsPhase : public EngineHandler {
public:
    HtsPhase(Sim& sim, const TreeState& tree, HtsOptions opt);

    // Resets per-round state and lets the reference node initiate.
    void begin_round();

    // Initiator entry point; a node without children records a trace note
    // and does nothing.
    void start_sync(NodeId u);

    void on_message(NodeId node, const Message& msg, double t_true) override;
    void on_timer(NodeId node, TimerId id) override;

    const HtsNodeState& state(NodeId u) const { return states_.at(static_cast<size_t>(u)); }
    NodeId pick_designated(NodeId u);  // uniform over tree children

private:
    void send_sync_beacon(NodeId u);
    void complete_domain(NodeId u);
    void abort_domain(NodeId u, const char* why);
    void handle_syn_begin(NodeId node, const Message& msg);
    void handle_reply(NodeId node, const Message& msg);
    void handle_offset_bcast(NodeId node, const Message& msg);

    Sim& sim_;
    const TreeState& tree_;
    HtsOptions opt_;
    std::vector<HtsNodeState> states_;
    std::vector<std::vector<NodeId>> children_;
};

// Runs `opt.rounds` complete ripples and reports the per-node mismatch
// against the reference clock at the end time plus sync-phase message counts.
SyncErrorReport run_network_sync(Sim& sim, const TreeState& tree, HtsOptions opt);

}  // namespace tsrt
