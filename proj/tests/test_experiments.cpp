#include <doctest.h>

#include <cmath>

#include "soen/experiments.hpp"
#include "test_helpers.hpp"

using namespace soen;
using namespace soen::experiments;

namespace {

// Small, fast experiment setup over the synthetic tables. Weights are chosen
// per test so the soma fires (or deliberately does not).
ExperimentConfig synthetic_config() {
    ExperimentConfig cfg;
    cfg.g_d = testing::synthetic_dendrite_table({1.6, 1.7, 1.8});
    cfg.g_n = cfg.g_d;
    cfg.g_n.kind = SourceKind::Neuron;
    return cfg;
}

}  // namespace

TEST_CASE("experiment kind names round-trip") {
    for (ExperimentKind k :
         {ExperimentKind::StepResponse, ExperimentKind::SingleEvent, ExperimentKind::BiasSweep,
          ExperimentKind::PulseTrainPeriodic, ExperimentKind::PulseTrainAperiodic,
          ExperimentKind::Coincidence, ExperimentKind::Sequence})
        CHECK(experiment_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(experiment_kind_from_string("bogus"), ValidationError);
}

TEST_CASE("step response produces a matched, scored pair") {
    auto cfg = synthetic_config();
    cfg.step_flux = 0.45;
    const auto rep = run_comparison_experiment(ExperimentKind::StepResponse, cfg);

    REQUIRE(rep.param.size() == 1);
    CHECK(rep.param_name == "step_flux");
    CHECK(rep.param[0] == 0.45);
    CHECK(rep.n_spikes[0] > 0);
    CHECK(std::isfinite(rep.chi2[0]));
    CHECK(rep.chi2[0] > 0.0);
    CHECK(rep.peak_spiking[0] > 0.0);
    CHECK(rep.peak_phenom[0] > 0.0);

    // Both engines record on the same time grid so chi^2 is well defined.
    const auto& pair = rep.pairs[0];
    REQUIRE(pair.spiking.n_rows() == pair.phenom.n_rows());
    CHECK(pair.spiking.dt == pair.phenom.dt);
    CHECK(pair.spiking.t == pair.phenom.t);
    CHECK(pair.out_spiking == 3);  // input, soma, refractory, output
    CHECK(pair.out_phenom == 1);   // input, output
}

TEST_CASE("sweep experiments refuse empty sweeps and missing seeds") {
    auto cfg = synthetic_config();
    CHECK_THROWS_AS(run_comparison_experiment(ExperimentKind::SingleEvent, cfg), ValidationError);
    CHECK_THROWS_AS(run_comparison_experiment(ExperimentKind::BiasSweep, cfg), ValidationError);
    CHECK_THROWS_AS(run_comparison_experiment(ExperimentKind::Coincidence, cfg), ValidationError);
    CHECK_THROWS_AS(run_comparison_experiment(ExperimentKind::PulseTrainAperiodic, cfg),
                    ValidationError);
}

TEST_CASE("table kinds are enforced") {
    auto cfg = synthetic_config();
    std::swap(cfg.g_d, cfg.g_n);
    CHECK_THROWS_AS(run_comparison_experiment(ExperimentKind::StepResponse, cfg), ValidationError);
}

TEST_CASE("sub-threshold sweep points report NaN chi^2 and zero peaks") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 50.0;
    cfg.w_in = 0.5;  // never fires
    cfg.tau_out_sweep_ns = {100.0, 400.0};
    const auto rep = run_comparison_experiment(ExperimentKind::SingleEvent, cfg);
    REQUIRE(rep.param.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(rep.n_spikes[i] == 0);
        CHECK(std::isnan(rep.chi2[i]));
        CHECK(rep.peak_spiking[i] == 0.0);
        CHECK(rep.peak_phenom[i] > 0.0);  // the graded model still responds
    }
}

TEST_CASE("periodic pulse train acts as a repeater at matched weight") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 50.0;
    cfg.w_in = 4.0;
    cfg.n_events = 5;
    cfg.isi_ns = 500.0;
    cfg.tau_out_ns = 250.0;
    const auto rep = run_comparison_experiment(ExperimentKind::PulseTrainPeriodic, cfg);
    REQUIRE(rep.param.size() == 1);
    CHECK(rep.n_spikes[0] == cfg.n_events);  // one output spike per input event
    const auto& times = rep.pairs[0].spikes[0].times;
    REQUIRE(times.size() == cfg.n_events);
    const double period = cfg.nd(cfg.isi_ns);
    for (std::size_t k = 1; k < times.size(); ++k)
        CHECK(times[k] - times[k - 1] == doctest::Approx(period).epsilon(1e-12));
}

TEST_CASE("aperiodic pulse train is reproducible from its seed") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 50.0;
    cfg.n_events = 4;
    cfg.tau_out_ns = 250.0;
    cfg.has_seed = true;
    cfg.seed = 42;
    const auto a = run_comparison_experiment(ExperimentKind::PulseTrainAperiodic, cfg);
    const auto b = run_comparison_experiment(ExperimentKind::PulseTrainAperiodic, cfg);
    CHECK(a.pairs[0].phenom.s_cols == b.pairs[0].phenom.s_cols);
    CHECK(a.pairs[0].spiking.s_cols == b.pairs[0].spiking.s_cols);

    cfg.seed = 43;
    const auto c = run_comparison_experiment(ExperimentKind::PulseTrainAperiodic, cfg);
    CHECK(a.peak_phenom[0] != c.peak_phenom[0]);
}

TEST_CASE("coincidence response is symmetric in the delay for equal synapses") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 100.0;
    cfg.tau_out_ns = 250.0;
    cfg.w_in = cfg.w_in2 = 0.5;
    cfg.delay_sweep_ns = {-150.0, -50.0, 0.0, 50.0, 150.0};
    const auto rep = run_comparison_experiment(ExperimentKind::Coincidence, cfg);
    REQUIRE(rep.param.size() == 5);
    CHECK(rep.param_name == "delay_ns");
    // Mirrored delays are the same physical drive with the synapse roles
    // swapped; with equal weights and time constants the response matches.
    CHECK(rep.peak_phenom[0] == doctest::Approx(rep.peak_phenom[4]).epsilon(1e-12));
    CHECK(rep.peak_phenom[1] == doctest::Approx(rep.peak_phenom[3]).epsilon(1e-12));
    // Peak response is largest at zero delay and decays with |delay|.
    CHECK(rep.peak_phenom[2] > rep.peak_phenom[1]);
    CHECK(rep.peak_phenom[1] > rep.peak_phenom[0]);
}

TEST_CASE("sequence detector with unequal synapse time constants is asymmetric") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 250.0;   // slow first synapse
    cfg.tau_in2_ns = 50.0;   // fast second synapse
    cfg.tau_out_ns = 250.0;
    cfg.w_in = cfg.w_in2 = 0.5;
    cfg.delay_sweep_ns = {-150.0, 150.0};
    const auto rep = run_comparison_experiment(ExperimentKind::Sequence, cfg);
    REQUIRE(rep.param.size() == 2);
    // Event on the slow synapse first (positive delay) leaves residual signal
    // for the fast event to stack on; the reverse order does not.
    CHECK(rep.peak_phenom[1] > 2.0 * rep.peak_phenom[0]);
}

TEST_CASE("bias sweep moves both the soma and output dendrite bias") {
    auto cfg = synthetic_config();
    cfg.beta_in = 2.0 * M_PI * 1e2;
    cfg.tau_in_ns = 50.0;
    cfg.tau_out_ns = 250.0;
    cfg.bias_sweep = {1.6, 1.8};
    const auto rep = run_comparison_experiment(ExperimentKind::BiasSweep, cfg);
    REQUIRE(rep.param.size() == 2);
    CHECK(rep.param_name == "bias");
    // The synthetic rate scales with bias, so the graded response does too.
    CHECK(rep.peak_phenom[1] > rep.peak_phenom[0]);
}
