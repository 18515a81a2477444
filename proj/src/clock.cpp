#include "tsrt/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tsrt {

namespace {
constexpr double kMaxSkew = 1e-2;  // plausible oscillator bound

void check_skew(double skew) {
    if (!(std::abs(skew) < kMaxSkew))
        throw std::invalid_argument("LocalClock: |skew| must be < 1e-2, got " +
                                    std::to_string(skew));
}
}  // namespace

LocalClock::LocalClock(double offset, double skew, double epoch_true)
    : offset_(offset), skew_(skew), epoch_(epoch_true) {
    check_skew(skew);
}

double LocalClock::local_time(double t_true) const {
    if (t_true < epoch_)
        throw std::invalid_argument("LocalClock::local_time: t_true precedes correction epoch");
    return t_true + offset_ + skew_ * (t_true - epoch_);
}

double LocalClock::true_time(double t_local) const {
    // Solve t_local = t + offset + skew*(t - epoch) for t.
    double t = (t_local - offset_ + skew_ * epoch_) / (1.0 + skew_);
    if (t < epoch_ - 1e-9)
        throw std::invalid_argument("LocalClock::true_time: reading precedes correction epoch");
    return t;
}

void LocalClock::apply_correction(double t_true, double amount, double skew_delta) {
    double reading = local_time(t_true) + amount;
    skew_ += skew_delta;
    check_skew(skew_);
    epoch_ = t_true;
    offset_ = reading - t_true;
}

void ErrorModel::validate() const {
    if (!(sigma_o1 >= 0.0) || !(sigma_s1 >= 0.0))
        throw std::invalid_argument("ErrorModel: sigma_o1 and sigma_s1 must be >= 0");
}

namespace {
double scaled(double sigma1, VarianceScaling s, int n) {
    if (n < 1)
        throw std::invalid_argument("ErrorModel: n_beacons must be >= 1");
    switch (s) {
        case VarianceScaling::InverseN:
            return sigma1 / std::sqrt(static_cast<double>(n));
        case VarianceScaling::Constant:
            return sigma1;
    }
    throw std::logic_error("ErrorModel: unknown scaling");
}
}  // namespace

double ErrorModel::sigma_o(int n_beacons) const { return scaled(sigma_o1, offset_scaling, n_beacons); }
double ErrorModel::sigma_s(int n_beacons) const { return scaled(sigma_s1, skew_scaling, n_beacons); }

std::pair<double, double> sample_estimation_errors(const ErrorModel& model, int n_beacons,
                                                   std::mt19937_64& rng) {
    model.validate();
    double so = model.sigma_o(n_beacons);
    double ss = model.sigma_s(n_beacons);
    std::normal_distribution<double> unit(0.0, 1.0);
    // Degenerate sigmas yield exactly zero without consuming different stream
    // lengths: always draw two variates.
    double zo = unit(rng);
    double zs = unit(rng);
    return {so * zo, ss * zs};
}

std::pair<double, double> sample_estimation_errors(const ErrorModel& model, int n_beacons,
                                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_estimation_errors(model, n_beacons, rng);
}

}  // namespace tsrt
