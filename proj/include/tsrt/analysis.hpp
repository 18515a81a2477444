#pragma once

#include <string>
#include <vector>

#include "tsrt/hts.hpp"
#include "tsrt/neteval.hpp"
#include "tsrt/treebuild.hpp"

namespace tsrt {

// Closed-form protocol message counts for one network-wide synchronization.
// TSRT: every broadcast domain (internal tree node) costs N beacon broadcasts,
// N designated replies and one offset broadcast, regardless of how many
// children share the domain. TPSN: every non-root node runs its own N-round
// two-way exchange with its parent.
long tsrt_messages_per_sync(const TreeState& tree, int n_beacons);
long tpsn_messages_per_sync(const TreeState& tree, int n_beacons);

// RBS closed form for one broadcast domain: one reference broadcast plus a
// two-message exchange per receiver pair.
long rbs_messages_closed_form(int n_receivers);

struct SweepRow {
    int n_beacons = 0;
    double m_tsrt = 0.0;
    double m_tpsn = 0.0;
    double tau_max_tsrt = 0.0;
    double tau_max_tpsn = 0.0;
    SyncMode mode{};
    bool tsrt_valid = true;  // false when tau_max is undefined for this N
    bool tpsn_valid = true;
};

struct SweepResult {
    std::vector<SweepRow> rows;

    std::string to_csv() const;   // header N,M_tsrt,M_tpsn,tau_max_tsrt,tau_max_tpsn,mode
    std::string to_json() const;  // same fields plus validity flags
};

// Message rate M(N) = messages_per_sync(N) / (tau_max(N) + tau_sync) for both
// protocols over n_beacons in [n_min, n_max]. TSRT estimates the skew, so
// both error variances shrink with N; TPSN corrects offset only, so its skew
// error stays at the one-exchange value.
SweepResult sweep_m_vs_n(const SyncParams& p, const ErrorModel& model, const TreeState& tree,
                         int n_min, int n_max);

struct ErrorStats {
    struct LevelRow {
        int level;
        int count;
        double mean_abs;
        double std_abs;
        double max_abs;
    };
    std::vector<LevelRow> per_level;  // ascending level
    double overall_max = 0.0;
    double exceedance_fraction = 0.0;  // |error| > eps_max
    int node_count = 0;

    std::string to_text() const;
};

ErrorStats error_stats(const SyncErrorReport& report, double eps_max);

// TPSN reference simulation: pairwise two-way exchanges along the tree edges,
// level by level from the root, each child correcting offset only.
SyncErrorReport tpsn_sync_tree(Sim& sim, const TreeState& tree, int n_beacons);

}  // namespace tsrt
