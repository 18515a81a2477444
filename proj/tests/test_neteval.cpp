#include <cmath>

#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "tsrt/neteval.hpp"

using namespace tsrt;

namespace {

// Reference values computed with mpmath at 40 digits.
struct ErfcFixture {
    double x;
    double value;
};
constexpr ErfcFixture kErfcFixtures[] = {
    {0.0, 1.0},
    {0.1, 0.8875370839817151078},
    {0.5, 0.4795001221869534623},
    {1.0, 0.15729920705028513066},
    {1.5, 0.033894853524689272933},
    {2.0, 0.0046777349810472658379},
    {2.3267537655, 0.0010000000000679838310},
    {2.5, 0.00040695201744495893956},
    {3.0, 2.2090496998585441373e-05},
    {3.5, 7.4309837234141274552e-07},
    {4.0, 1.5417257900280018852e-08},
    {5.0, 1.5374597944280348502e-12},
    {-1.0, 1.8427007929497148693},
    {-2.5, 1.9995930479825550411},
};

constexpr double kSigma01Percent = 0.0030390271272666705;   // sigma_from_ps(10ms, 0.1%)
constexpr double kSigma001Percent = 0.0025703030006623068;  // sigma_from_ps(10ms, 0.01%)
constexpr double kSigma1Percent = 0.0038822448312946430;    // sigma_from_ps(10ms, 1%)

SyncParams base_params() {
    SyncParams p;
    p.branches = 5;
    p.tau = 100.0;
    p.hop_rate = 1.0;
    p.latency_factor = 0.5;
    p.n_beacons = 2;
    p.eps_max = 10e-3;
    p.ps_limit = 1e-3;
    p.tau_sync = 2.0;
    return p;
}

}  // namespace

TEST_SUITE("neteval") {

TEST_CASE("message rate formulas") {
    SyncParams p = base_params();
    p.branches = 5;
    p.n_beacons = 2;
    p.tau = 10.0;
    CHECK(messages_per_unit_time(SyncMode::AO, p) == doctest::Approx(2.0));
    p.hop_rate = 3.0;
    CHECK(messages_per_unit_time(SyncMode::SI, p) == doctest::Approx(12.0));
    p.hop_rate = 0.0;
    p.n_beacons = 1;
    CHECK(messages_per_unit_time(SyncMode::SI, p) == 0.0);
    p.tau = 0.0;
    CHECK_THROWS_AS(messages_per_unit_time(SyncMode::AO, p), std::invalid_argument);
    p.tau = 1.0;
    p.n_beacons = 0;
    CHECK_THROWS_AS(messages_per_unit_time(SyncMode::AO, p), std::invalid_argument);
}

TEST_CASE("mode selection examples") {
    SyncParams p = base_params();
    p.latency_factor = 0.0;
    for (double h : {0.0, 0.5, 100.0}) {
        p.hop_rate = h;
        CHECK(select_mode(p) == SyncMode::AO);
    }
    p.branches = 5;
    p.latency_factor = 1.0;
    p.hop_rate = 10.0;
    p.tau = 0.4;
    CHECK(select_mode(p) == SyncMode::SI);
    p.tau = 0.5;  // boundary: strict inequality keeps AO
    CHECK(select_mode(p) == SyncMode::AO);
    // No traffic at all: sensor-initiated sync costs nothing.
    p.hop_rate = 0.0;
    p.tau = 1e6;
    CHECK(select_mode(p) == SyncMode::SI);
}

TEST_CASE("mode selection agrees with the direct rate comparison") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        SyncParams p = base_params();
        p.branches = 1 + static_cast<int>(rng() % 20);
        p.n_beacons = 1 + static_cast<int>(rng() % 10);
        p.tau = 0.01 + 100.0 * u(rng);
        p.hop_rate = 10.0 * u(rng);
        p.latency_factor = u(rng);
        bool si_direct = 2.0 * p.branches * p.n_beacons * p.latency_factor / p.tau >
                         2.0 * p.hop_rate * p.n_beacons;
        CHECK((select_mode(p) == SyncMode::SI) == si_direct);
    }
}

TEST_CASE("raising the latency factor never flips SI back to AO") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        SyncParams p = base_params();
        p.tau = 0.01 + 10.0 * u(rng);
        p.hop_rate = 5.0 * u(rng);
        double d1 = u(rng), d2 = u(rng);
        if (d1 > d2) std::swap(d1, d2);
        p.latency_factor = d1;
        SyncMode low = select_mode(p);
        p.latency_factor = d2;
        SyncMode high = select_mode(p);
        if (low == SyncMode::SI) CHECK(high == SyncMode::SI);
    }
}

TEST_CASE("erfc stays within 1e-14 of the committed reference values") {
    for (const auto& f : kErfcFixtures) {
        CHECK(std::abs(std::erfc(f.x) - f.value) <= 1e-14);
        // The independent test-side implementation agrees too.
        CHECK(std::abs(oracle::erfc_reference(f.x) - f.value) <= 1e-13);
    }
}

TEST_CASE("sigma_from_ps reproduces the worked 3.04 ms budget") {
    double sigma = sigma_from_ps(10e-3, 1e-3);
    CHECK(std::abs(sigma - 3.04e-3) <= 0.01e-3);
    CHECK(sigma == doctest::Approx(kSigma01Percent).epsilon(1e-9));
}

TEST_CASE("sigma_from_ps matches the frozen inversions and the bisection oracle") {
    CHECK(sigma_from_ps(10e-3, 1e-4) == doctest::Approx(kSigma001Percent).epsilon(1e-9));
    CHECK(sigma_from_ps(10e-3, 1e-2) == doctest::Approx(kSigma1Percent).epsilon(1e-9));
    for (double ps : {1e-4, 1e-3, 1e-2, 0.2}) {
        double want = oracle::sigma_from_ps_reference(10e-3, ps);
        CHECK(sigma_from_ps(10e-3, ps) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("sigma_from_ps round-trips through the exceedance probability") {
    for (double ps : {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.5}) {
        double sigma = sigma_from_ps(10e-3, ps);
        double back = std::erfc(10e-3 / (std::sqrt(2.0) * sigma));
        CHECK(std::abs(back - ps) <= 1e-10 * ps);
    }
}

TEST_CASE("sigma_from_ps is monotone in ps and validates its arguments") {
    double tight = sigma_from_ps(10e-3, 1e-4);
    double loose = sigma_from_ps(10e-3, 1e-2);
    CHECK(loose > tight);
    CHECK_THROWS_AS(sigma_from_ps(10e-3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sigma_from_ps(10e-3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sigma_from_ps(0.0, 0.5), std::invalid_argument);
}

TEST_CASE("tau_max substitution with the benchmark values") {
    // sqrt((3.04e-3)^2 - (16.67e-6)^2) / 1.58e-6, frozen from mpmath.
    CHECK(tau_max_period(3.04e-3, 16.67e-6, 1.58e-6) ==
          doctest::Approx(1924.0217052184985).epsilon(1e-12));
    // With the unrounded 0.1% budget the period lands near 1923.4 s.
    CHECK(tau_max_period(kSigma01Percent, 16.67e-6, 1.58e-6) ==
          doctest::Approx(1923.4059537215573).epsilon(1e-12));
}

TEST_CASE("tau_max boundary and scaling") {
    CHECK_THROWS_AS(tau_max_period(16.67e-6, 16.67e-6, 1.58e-6), std::invalid_argument);
    CHECK_THROWS_AS(tau_max_period(1e-3, 2e-3, 1.58e-6), std::invalid_argument);
    CHECK_THROWS_AS(tau_max_period(1e-3, 1e-6, 0.0), std::invalid_argument);
    double base = tau_max_period(3.04e-3, 16.67e-6, 1.58e-6);
    CHECK(tau_max_period(3.04e-3, 16.67e-6, 0.79e-6) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("tau_max is monotone in each argument") {
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double so = 1e-6 + 1e-4 * u(rng);
        double se = so * (1.1 + 10.0 * u(rng));
        double ss = 1e-7 + 1e-5 * u(rng);
        double base = tau_max_period(se, so, ss);
        CHECK(tau_max_period(se * 1.01, so, ss) > base);
        CHECK(tau_max_period(se, so * 0.99, ss) > base);
        CHECK(tau_max_period(se, so, ss * 1.01) < base);
    }
}

TEST_CASE("evaluate composes the pieces") {
    SyncParams p = base_params();
    ErrorModel m;
    m.sigma_o1 = 16.67e-6;
    m.sigma_s1 = 1.58e-6;

    p.latency_factor = 0.0;
    p.hop_rate = 50.0;
    EvalReport r = evaluate(p, m);
    CHECK(r.mode == SyncMode::AO);  // delta = 0 forces always-on
    CHECK(r.tau == doctest::Approx(r.tau_max + p.tau_sync));

    p.tau_sync = 0.0;
    r = evaluate(p, m);
    CHECK(r.tau == doctest::Approx(r.tau_max));
}

TEST_CASE("evaluate matches an independent recomputation across N") {
    // Spreadsheet-style oracle: each quantity recomputed from scratch here.
    SyncParams p = base_params();
    p.latency_factor = 0.0;
    p.tau_sync = 2.0;
    ErrorModel m;
    m.sigma_o1 = 16.67e-6;
    m.sigma_s1 = 1.58e-6;
    for (int n = 1; n <= 30; ++n) {
        p.n_beacons = n;
        EvalReport r = evaluate(p, m);
        double sigma = oracle::sigma_from_ps_reference(p.eps_max, p.ps_limit);
        double so = 16.67e-6 / std::sqrt(static_cast<double>(n));
        double ss = 1.58e-6 / std::sqrt(static_cast<double>(n));
        double tmax = std::sqrt((sigma * sigma - so * so) / (ss * ss));
        double tau = tmax + 2.0;
        double msgs = 2.0 * 5.0 * n / tau;
        CHECK(r.sigma_eps == doctest::Approx(sigma).epsilon(1e-9));
        CHECK(r.tau_max == doctest::Approx(tmax).epsilon(1e-9));
        CHECK(r.messages_per_unit_time == doctest::Approx(msgs).epsilon(1e-9));
    }
}

TEST_CASE("parameter validation names the failing range") {
    SyncParams p = base_params();
    p.latency_factor = 1.5;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("latency_factor"), std::invalid_argument);
    p = base_params();
    p.ps_limit = 2.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("ps_limit"), std::invalid_argument);
    p = base_params();
    p.eps_max = -1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("eps_max"), std::invalid_argument);
}

TEST_CASE("hop tracker arithmetic") {
    HopRateTracker t;
    CHECK(t.hop_rate(5.0) == 0.0);
    for (int i = 0; i < 10; ++i) t.record_delivery(1);
    CHECK(t.hop_rate(2.0) == doctest::Approx(5.0));
    CHECK(t.packets() == 10);
    CHECK_THROWS_AS(t.hop_rate(0.0), std::invalid_argument);
    CHECK_THROWS_AS(t.record_delivery(-1), std::invalid_argument);
}

TEST_CASE("poisson traffic hop rate matches rate x mean path length") {
    SimConfig cfg;
    cfg.seed = 2718;
    Sim sim(linear_network(3, 1e-3), cfg);
    HopRateTracker tracker;
    const double rate = 20.0, window = 50.0;
    run_poisson_traffic(sim, tracker, rate, window);
    // Mean shortest-path length over distinct ordered pairs of the 4-node
    // path graph: 10/6 hops.
    double expect = rate * 10.0 / 6.0;
    // Compound-Poisson 3-sigma band: var(total hops) = lambda*T*E[hops^2].
    double e_h2 = (3.0 * 1 + 2.0 * 4 + 1.0 * 9) / 6.0;
    double sd = std::sqrt(rate * window * e_h2) / window;
    CHECK(std::abs(tracker.hop_rate(window) - expect) < 3.0 * sd);
}

TEST_CASE("traffic with zero rate records nothing") {
    Sim sim(linear_network(2, 1e-3), SimConfig{});
    HopRateTracker tracker;
    run_poisson_traffic(sim, tracker, 0.0, 1.0);
    CHECK(tracker.packets() == 0);
    CHECK(tracker.hop_rate(1.0) == 0.0);
}

}  // TEST_SUITE
