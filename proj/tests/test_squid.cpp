#include <doctest.h>

#include <cmath>

#include "soen/squid.hpp"

using namespace soen;
using namespace soen::squid;

TEST_CASE("parameter validation") {
    SquidCircuitParams p;
    p.dt_jj = 0.0;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
    p = {};
    p.bias = -1.0;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
    p = {};
    p.beta_C = -0.1;
    CHECK_THROWS_AS(p.validate(), InvariantViolation);
}

TEST_CASE("no applied flux, subcritical bias: zero slip rate") {
    SquidCircuitParams p;  // bias 1.7 -> 0.85 per junction, below critical
    p.applied_flux = 0.0;
    const auto m = measure_rate(p, 0.0, 200.0);
    CHECK(m.g_measured == 0.0);
}

TEST_CASE("half flux quantum drives sustained slipping") {
    SquidCircuitParams p;
    p.applied_flux = 0.5;
    const auto m = measure_rate(p, 0.0);
    CHECK(m.g_measured > 0.0);
    CHECK(m.slips > 10);
}

TEST_CASE("rate is nondecreasing in applied flux") {
    double prev = 0.0;
    for (double phi : {0.0, 0.2, 0.3, 0.4, 0.5}) {
        SquidCircuitParams p;
        p.applied_flux = phi;
        const double g = measure_rate(p, 0.0).g_measured;
        CHECK(g >= prev - 1e-6);
        prev = g;
    }
}

TEST_CASE("back-action: rate is nonincreasing in the loop current") {
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {0.0, 0.2, 0.4, 0.6}) {
        SquidCircuitParams p;
        p.applied_flux = 0.5;
        const double g = measure_rate(p, s).g_measured;
        CHECK(g <= prev + 1e-6);
        prev = g;
    }
}

TEST_CASE("rate grows with bias") {
    SquidCircuitParams lo, hi;
    lo.applied_flux = hi.applied_flux = 0.5;
    lo.bias = 1.6;
    hi.bias = 1.9;
    CHECK(measure_rate(hi, 0.0).g_measured > measure_rate(lo, 0.0).g_measured);
}

TEST_CASE("decoupled-junction limit reproduces the analytic rotation rate") {
    // With beta_L huge the circulating current vanishes and each overdamped
    // junction obeys dphi/dt = i - sin(phi) with i = bias/2. The mean phase
    // then rotates at sqrt(i^2 - 1).
    SquidCircuitParams p;
    p.beta_C = 0.0;
    p.beta_L = 1e12;
    p.bias = 3.0;  // i = 1.5 per junction
    p.applied_flux = 0.0;
    p.dt_jj = 0.005;
    const double expect = std::sqrt(1.5 * 1.5 - 1.0);
    const auto m = measure_rate(p, 0.0, 800.0);
    CHECK(m.g_measured == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("rate is stable under step refinement") {
    SquidCircuitParams coarse, fine;
    coarse.applied_flux = fine.applied_flux = 0.45;
    coarse.dt_jj = 0.01;
    fine.dt_jj = 0.005;
    const double a = measure_rate(coarse, 0.1).g_measured;
    const double b = measure_rate(fine, 0.1).g_measured;
    CHECK(a == doctest::Approx(b).epsilon(2e-3));
}

TEST_CASE("count_phase_slips agrees with the measured rate") {
    SquidCircuitParams p;
    p.applied_flux = 0.5;
    const double duration = 400.0;
    const auto traj = integrate_squid(p, duration, 4);
    const auto slips = count_phase_slips(traj);
    CHECK(slips > 0);
    // The loop current relaxes slowly (loop_tau = 1e4), so over 400 time units
    // the free-running rate should be within ~20% of the pinned s=0 rate.
    const double g_pinned = measure_rate(p, 0.0).g_measured;
    const double g_free = 2.0 * M_PI * static_cast<double>(slips) / duration;
    CHECK(g_free == doctest::Approx(g_pinned).epsilon(0.2));
}

TEST_CASE("the integration loop charges up under applied flux") {
    SquidCircuitParams p;
    p.applied_flux = 0.5;
    const auto traj = integrate_squid(p, 2000.0, 16);
    CHECK(traj.s.back() > traj.s.front());
    CHECK(traj.s.back() > 0.0);
    for (double v : traj.s) CHECK(std::abs(v) < p.bias);
}

TEST_CASE("driven integration with zero flux matches the constant-flux path") {
    SquidCircuitParams p;
    p.applied_flux = 0.0;
    DriveSeries zero{DriveSeries::Mode::PiecewiseConstant, {0.0}, {0.0}};
    const auto a = integrate_squid(p, 50.0, 8);
    const auto b = integrate_squid_driven(p, zero, 50.0, 8);
    CHECK(a.phi1 == b.phi1);
    CHECK(a.phi2 == b.phi2);
    CHECK(a.s == b.s);
}
