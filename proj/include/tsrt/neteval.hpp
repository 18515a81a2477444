#pragma once

#include <string>

#include "tsrt/clock.hpp"
#include "tsrt/sim.hpp"

namespace tsrt {

enum class SyncMode { AO, SI };  // always-on periodic vs sensor-initiated
const char* to_string(SyncMode m);

// Network-evaluation parameter set: tree branch count B, re-sync period tau,
// average hops per unit time h, latency factor delta in [0,1], beacons per
// pairwise synchronization N, error budget eps_max at exceedance probability
// ps_limit, and the sync-phase duration tau_sync during which data traffic
// is unavailable.
struct SyncParams {
    int branches = 1;
    double tau = 1.0;
    double hop_rate = 0.0;
    double latency_factor = 0.0;
    int n_beacons = 1;
    double eps_max = 0.0;
    double ps_limit = 0.0;
    double tau_sync = 0.0;

    void validate() const;
};

struct EvalReport {
    SyncMode mode{};
    double sigma_eps = 0.0;
    double tau_max = 0.0;
    double tau = 0.0;  // tau_max + tau_sync
    double messages_per_unit_time = 0.0;

    std::string to_text() const;
};

// Timing messages per unit time: AO mode 2*B*N/tau, SI mode 2*h*N.
double messages_per_unit_time(SyncMode mode, const SyncParams& p);

// SI wins when its message rate 2hN is below the delay-weighted AO rate
// 2BN*delta/tau; ties go to AO. With delta = 0 the result is always AO.
SyncMode select_mode(const SyncParams& p);

// Solves erfc(eps_max / (sqrt(2) * sigma)) = ps for sigma by bisection to
// 1e-12 relative tolerance. ps is the probability that |eps| exceeds eps_max.
double sigma_from_ps(double eps_max, double ps);

// Longest sync period keeping the mismatch budget: with
// sigma_eps^2 = sigma_oN^2 + sigma_sN^2 * tau^2, the bound is
// sqrt((sigma_eps^2 - sigma_oN^2) / sigma_sN^2). Errors out when the offset
// error alone already exceeds the budget.
double tau_max_period(double sigma_eps, double sigma_oN, double sigma_sN);

// Full composition: sigma budget -> scaled estimator errors -> tau_max ->
// tau -> mode -> message rate.
EvalReport evaluate(const SyncParams& p, const ErrorModel& model);

// Destination-side hop accounting for sensed-data traffic; the reference
// node reads the average hop rate at sync time.
class HopRateTracker {
public:
    void record_delivery(int hops);
    long total_hops() const { return total_hops_; }
    long packets() const { return packets_; }
    // h = hops recorded in the window / window length.
    double hop_rate(double window) const;

private:
    long total_hops_ = 0;
    long packets_ = 0;
};

// Poisson data traffic over the sim: packets with exponential interarrival
// times at `rate` per second between uniformly random distinct node pairs,
// forwarded hop by hop along shortest paths; the destination records the hop
// count into the tracker. Runs the engine until `duration`.
void run_poisson_traffic(Sim& sim, HopRateTracker& tracker, double rate, double duration);

}  // namespace tsrt
