#include <doctest.h>

#include <cmath>

#include "soen/analysis.hpp"
#include "soen/engine.hpp"
#include "test_helpers.hpp"

using namespace soen;
using namespace soen::analysis;

TEST_CASE("chi_squared: identical traces score zero") {
    std::vector<double> a{0.1, 0.2, 0.3};
    CHECK(chi_squared(a, a).chi2 == 0.0);
}

TEST_CASE("chi_squared: hand-computed value") {
    std::vector<double> ref{1.0, 2.0};
    std::vector<double> cand{1.5, 1.0};
    // (0.25 + 1.0) / (1.0 + 4.0)
    CHECK(chi_squared(ref, cand).chi2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("chi_squared is asymmetric: normalized by the reference") {
    std::vector<double> a{1.0, 1.0};
    std::vector<double> b{2.0, 2.0};
    CHECK(chi_squared(a, b).chi2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(chi_squared(b, a).chi2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("chi_squared error modes") {
    std::vector<double> a{1.0, 2.0}, short_b{1.0}, zero{0.0, 0.0};
    CHECK_THROWS_AS(chi_squared(a, short_b), GridMismatch);
    CHECK_THROWS_AS(chi_squared(zero, a), ZeroReference);
    CHECK_THROWS_AS(chi_squared({}, {}), GridMismatch);
}

TEST_CASE("chi_squared on trace buffers rejects mismatched grids") {
    Network net;
    net.specs = {make_dendrite(0, DendriteKind::FirstOrder, 100.0, 10.0, 1.7, 0)};
    net.sources = {testing::constant_table(0.3)};
    net.coupling = CouplingMatrix(1, {});
    net.dt = 0.05;
    net.t_end = 5.0;
    const auto a = run(net, NetworkState::zeros(1));
    net.dt = 0.025;
    net.t_end = 2.5;  // same row count, different grid
    const auto b = run(net, NetworkState::zeros(1));
    REQUIRE(a.n_rows() == b.n_rows());
    CHECK_THROWS_AS(chi_squared(a, 0, b, 0), GridMismatch);
    CHECK(chi_squared(a, 0, a, 0).chi2 == 0.0);
}

TEST_CASE("steady_state solves alpha*s = g(phi, s) self-consistently") {
    // Synthetic table: g = 1.7 * (phi - 0.15) * (1 - s/2) for phi above 0.15,
    // linear in s, so the fixed point has a closed form.
    const auto sf = testing::synthetic_dendrite_table();
    const double alpha = 1.0, phi = 0.4;
    const double c = 1.7 * (phi - 0.15);
    const double expect = c / (alpha + 0.5 * c);
    const double s = steady_state(sf, 1.7, phi, alpha);
    CHECK(s == doctest::Approx(expect).epsilon(1e-8));
    CHECK(std::abs(alpha * s - evaluate_source(sf, 1.7, phi, s)) < 1e-9);
}

TEST_CASE("steady_state: zero source pins the state at zero") {
    CHECK(steady_state(testing::zero_table(), 1.7, 0.4, 1.0) == 0.0);
    const auto sf = testing::synthetic_dendrite_table();
    CHECK(steady_state(sf, 1.7, 0.1, 1.0) == 0.0);  // below the flux threshold
}

TEST_CASE("steady_state agrees with a long engine run") {
    const auto sf = testing::synthetic_dendrite_table();
    const double beta = 100.0, tau = 5.0, phi = 0.45;
    const double alpha = beta / tau;  // ds/dt = 0  <=>  g = (beta/tau) s
    Network net;
    net.specs = {make_dendrite(0, DendriteKind::FirstOrder, beta, tau, 1.7, 0)};
    net.sources = {sf};
    net.coupling = CouplingMatrix(1, {});
    net.drive.series[0] = DriveSeries{DriveSeries::Mode::PiecewiseConstant, {0.0}, {phi}};
    net.dt = 0.002;
    net.t_end = 100.0;
    const auto trace = run(net, NetworkState::zeros(1));
    CHECK(trace.s_of(0).back() ==
          doctest::Approx(steady_state(sf, 1.7, phi, alpha)).epsilon(1e-4));
}

TEST_CASE("transfer_curve is nondecreasing and spans [0, 0.5]") {
    const auto tc = transfer_curve(testing::synthetic_dendrite_table(), 1.7, 1.0, 101);
    CHECK(tc.phi.front() == 0.0);
    CHECK(tc.phi.back() == 0.5);
    CHECK(tc.s_ss.front() == 0.0);
    CHECK(tc.s_ss.back() > 0.0);
    CHECK_NOTHROW(tc.validate());
}

TEST_CASE("count_inflections distinguishes curve shapes") {
    TransferCurve tc;
    const std::size_t n = 101;
    tc.phi.resize(n);
    tc.s_ss.resize(n);
    SUBCASE("pure convex ramp: none") {
        for (std::size_t k = 0; k < n; ++k) {
            tc.phi[k] = 0.5 * k / (n - 1.0);
            tc.s_ss[k] = tc.phi[k] * tc.phi[k];
        }
        CHECK(count_inflections(tc) == 0);
    }
    SUBCASE("sigmoid: exactly one") {
        for (std::size_t k = 0; k < n; ++k) {
            tc.phi[k] = 0.5 * k / (n - 1.0);
            tc.s_ss[k] = 1.0 / (1.0 + std::exp(-(tc.phi[k] - 0.25) * 40.0));
        }
        CHECK(count_inflections(tc) == 1);
    }
    SUBCASE("tiny numerical wiggles are ignored") {
        for (std::size_t k = 0; k < n; ++k) {
            tc.phi[k] = 0.5 * k / (n - 1.0);
            tc.s_ss[k] = tc.phi[k] * tc.phi[k] + 1e-12 * ((k % 2) ? 1.0 : -1.0);
        }
        CHECK(count_inflections(tc) == 0);
    }
}

TEST_CASE("dendrite_energy is 1/2 beta s^2 per dendrite") {
    std::vector<DendriteSpec> specs = {make_dendrite(0, DendriteKind::FirstOrder, 100.0, 10.0, 1.7, 0),
                                       make_dendrite(1, DendriteKind::FirstOrder, 200.0, 10.0, 1.7, 0)};
    const auto e = dendrite_energy({0.5, 0.1}, specs);
    CHECK(e[0] == doctest::Approx(0.5 * 100.0 * 0.25).epsilon(1e-15));
    CHECK(e[1] == doctest::Approx(0.5 * 200.0 * 0.01).epsilon(1e-15));
    CHECK_THROWS_AS(dendrite_energy({0.5}, specs), ValidationError);
    CHECK_THROWS_AS(dendrite_energy({0.5, std::nan("")}, specs), InvariantViolation);
}
