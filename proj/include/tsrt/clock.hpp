#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace tsrt {

// Affine local clock: reading(t) = t + offset + skew * (t - epoch), where t is
// true (reference) time and epoch is the true time of the last correction.
// The clock is piecewise linear; each correction restarts the skew term.
class LocalClock {
public:
    LocalClock() = default;
    LocalClock(double offset, double skew, double epoch_true = 0.0);

    double offset() const { return offset_; }
    double skew() const { return skew_; }
    double epoch() const { return epoch_; }

    // Local reading at true time t_true. t_true must not precede the last
    // correction epoch (the model is undefined before it).
    double local_time(double t_true) const;

    // Inverse of local_time; round-trips to within 1e-12 relative tolerance.
    double true_time(double t_local) const;

    // Mismatch against another clock at the same true instant.
    double mismatch_vs(const LocalClock& other, double t_true) const {
        return local_time(t_true) - other.local_time(t_true);
    }

    // Step correction at true time t_true: the local reading jumps by
    // `amount` (new reading = old reading + amount) and, optionally, the rate
    // changes by `skew_delta`. Resets the epoch to t_true.
    void apply_correction(double t_true, double amount, double skew_delta = 0.0);

private:
    double offset_ = 0.0;
    double skew_ = 0.0;
    double epoch_ = 0.0;
};

// Clock mismatch model: eps = eps_o + eps_s * t, t in reference time.
inline double clock_mismatch(double eps_o, double eps_s, double t) {
    return eps_o + eps_s * t;
}

enum class VarianceScaling {
    InverseN,  // variance shrinks as 1/N with N beacon exchanges
    Constant,  // no improvement with N (e.g. skew when it is never estimated)
};

// Gaussian estimation-error model for pairwise synchronization. sigma_o1 and
// sigma_s1 are the one-exchange standard deviations of the offset estimate
// (seconds) and of the skew error (dimensionless).
struct ErrorModel {
    double sigma_o1 = 0.0;
    double sigma_s1 = 0.0;
    VarianceScaling offset_scaling = VarianceScaling::InverseN;
    VarianceScaling skew_scaling = VarianceScaling::InverseN;

    void validate() const;
    double sigma_o(int n_beacons) const;
    double sigma_s(int n_beacons) const;
};

// Draws (eps_o, eps_s) as zero-mean Gaussians with standard deviations scaled
// per the model. Deterministic for a given rng state / seed.
std::pair<double, double> sample_estimation_errors(const ErrorModel& model, int n_beacons,
                                                   std::mt19937_64& rng);
std::pair<double, double> sample_estimation_errors(const ErrorModel& model, int n_beacons,
                                                   std::uint64_t seed);

}  // namespace tsrt
