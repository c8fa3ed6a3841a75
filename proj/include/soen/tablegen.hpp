#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "soen/parallel.hpp"
#include "soen/source_function.hpp"
#include "soen/spiking.hpp"
#include "soen/squid.hpp"

namespace soen::tablegen {

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

namespace detail {

/// Clean up measurement noise so the table passes validation exactly:
/// running max along phi, then running min along s (dendrite tables only).
/// Each pass preserves the monotonicity established by the other.
inline void enforce_monotone(SourceFunction& sf, bool s_nonincreasing) {
    const std::size_t nb = sf.n_bias(), np = sf.n_phi(), ns = sf.n_s();
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t si = 0; si < ns; ++si)
            for (std::size_t p = 1; p < np; ++p)
                sf.at(b, p, si) = std::max(sf.at(b, p, si), sf.at(b, p - 1, si));
    if (s_nonincreasing)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t p = 0; p < np; ++p)
                for (std::size_t si = 1; si < ns; ++si)
                    sf.at(b, p, si) = std::min(sf.at(b, p, si), sf.at(b, p, si - 1));
}

}  // namespace detail

struct DendriteGridSpec {
    std::vector<double> bias_grid = {1.7};
    std::size_t n_phi = 101;
    std::size_t n_s = 101;
    double s_max = 1.0;
};

/// Assemble g_d(phi, s; i_b) from first principles: one pinned-loop rate
/// measurement of the SQUID circuit per grid node. Node measurements are
/// independent; the table layout is fixed, so worker count does not affect
/// the result.
inline SourceFunction generate_dendrite_source(const DendriteGridSpec& grid,
                                               const squid::SquidCircuitParams& circuit,
                                               double window = 800.0, int workers = 1) {
    if (grid.bias_grid.empty() || grid.n_phi < 2 || grid.n_s < 2)
        throw ValidationError("gen-sf: need at least one bias and 2x2 (phi, s) nodes");
    SourceFunction sf;
    sf.kind = SourceKind::Dendrite;
    sf.bias_grid = grid.bias_grid;
    sf.phi_grid = uniform_grid(0.0, 0.5, grid.n_phi);
    sf.s_grid = uniform_grid(0.0, grid.s_max, grid.n_s);
    sf.values.assign(sf.bias_grid.size() * grid.n_phi * grid.n_s, 0.0);

    const std::size_t n_nodes = sf.values.size();
    parallel_for_index(n_nodes, workers, [&](std::size_t idx) {
        const std::size_t si = idx % grid.n_s;
        const std::size_t p = (idx / grid.n_s) % grid.n_phi;
        const std::size_t b = idx / (grid.n_s * grid.n_phi);
        squid::SquidCircuitParams params = circuit;
        params.bias = sf.bias_grid[b];
        params.applied_flux = sf.phi_grid[p];
        try {
            sf.values[idx] = squid::measure_rate(params, sf.s_grid[si], window).g_measured;
        } catch (const NoSteadyState& e) {
            throw NoSteadyState(std::string(e.what()) + " [node bias=" + std::to_string(params.bias) +
                                " phi=" + std::to_string(params.applied_flux) + " s=" +
                                std::to_string(sf.s_grid[si]) + "]");
        }
    });

    detail::enforce_monotone(sf, /*s_nonincreasing=*/true);
    sf.validate();
    return sf;
}

struct NeuronGenConfig {
    std::vector<double> neuron_bias_grid = {1.7};  // i_n planes
    std::size_t n_phi = 51;
    std::size_t n_s = 51;
    double s_max = 1.0;

    double dendrite_bias = 1.7;  // i_d of the receiving dendrite

    // Soma and refractory dendrite, dimensionless.
    double soma_beta = 2.0 * M_PI * 1e3;
    double soma_tau = 5e3;
    double s_threshold = 0.2;
    double j_ref = -0.35;
    double t_tx = 5e2;

    // Synaptic single-photon-detector response.
    double phi_spd = 0.25;
    double tau_spd = 5e3;

    double dt = 50.0;          // spiking integration step
    double transient = 3e4;    // settle time before measuring
    double window = 2e5;       // measurement window
};

/// Assemble g_n(phi_n, s; i_n) by driving a spiking soma at constant flux and
/// time-averaging the receiving dendrite's source rate at each pinned s.
inline SourceFunction generate_neuron_source(const NeuronGenConfig& cfg, const SourceFunction& g_d,
                                             int workers = 1) {
    if (cfg.neuron_bias_grid.empty() || cfg.n_phi < 2 || cfg.n_s < 2)
        throw ValidationError("gen-nsf: need at least one bias and 2x2 (phi, s) nodes");
    SourceFunction sf;
    sf.kind = SourceKind::Neuron;
    sf.bias_grid = cfg.neuron_bias_grid;
    sf.phi_grid = uniform_grid(0.0, 0.5, cfg.n_phi);
    sf.s_grid = uniform_grid(0.0, cfg.s_max, cfg.n_s);
    sf.values.assign(sf.bias_grid.size() * cfg.n_phi * cfg.n_s, 0.0);

    const std::size_t n_cols = sf.bias_grid.size() * cfg.n_phi;
    parallel_for_index(n_cols, workers, [&](std::size_t col) {
        const std::size_t p = col % cfg.n_phi;
        const std::size_t b = col / cfg.n_phi;
        const double i_n = sf.bias_grid[b];
        const double phi_n = sf.phi_grid[p];

        for (int attempt = 0;; ++attempt) {
            const double window = cfg.window * (attempt == 0 ? 1.0 : 2.0);

            SpikingNetwork snet;
            snet.base.specs = {make_dendrite(0, DendriteKind::Soma, cfg.soma_beta, cfg.soma_tau, i_n, 0),
                               make_dendrite(1, DendriteKind::Refractory, cfg.soma_beta, cfg.soma_tau,
                                             i_n, 0)};
            snet.base.specs[0].s_threshold = cfg.s_threshold;
            snet.base.specs[0].has_threshold = true;
            snet.base.sources = {g_d};
            snet.base.coupling = CouplingMatrix(2, {});
            snet.base.drive.series[0] = DriveSeries{DriveSeries::Mode::PiecewiseConstant, {0.0}, {phi_n}};
            snet.base.dt = cfg.dt;
            snet.base.t_end = cfg.transient + window;
            snet.somas = {{0, 1, cfg.j_ref, cfg.t_tx}};

            TraceConfig tc;
            tc.ids = {0};
            tc.stride = 1 << 20;  // spikes only; the trace itself is not used
            const auto res = run_spiking(snet, NetworkState::zeros(2), tc);
            const auto& spike_times = res.spikes[0].times;

            if (spike_times.empty()) break;  // below the neuronal flux threshold: zero column

            ExpPulseTrain train{cfg.phi_spd, cfg.tau_spd, spike_times};
            PulseSampler sampler(train);
            const std::size_t n_samples = static_cast<std::size_t>(std::llround(window / cfg.dt));
            std::vector<double> phi_syn(n_samples);
            for (std::size_t k = 0; k < n_samples; ++k)
                phi_syn[k] = sampler.sample(cfg.transient + static_cast<double>(k + 1) * cfg.dt);

            // Steadiness: compare mean synaptic flux across window halves.
            std::size_t n_meas = 0;
            for (double ts : spike_times) n_meas += (ts >= cfg.transient);
            const std::size_t mid = n_samples / 2;
            double mean_a = 0.0, mean_b = 0.0;
            for (std::size_t k = 0; k < mid; ++k) mean_a += phi_syn[k];
            for (std::size_t k = mid; k < n_samples; ++k) mean_b += phi_syn[k];
            mean_a /= static_cast<double>(mid);
            mean_b /= static_cast<double>(n_samples - mid);
            if (n_meas >= 6) {
                const double drift = std::abs(mean_a - mean_b) / std::max(mean_a, mean_b);
                const double tol = std::max(0.05, 2.0 / static_cast<double>(n_meas));
                if (drift > tol) {
                    if (attempt == 0) continue;
                    throw NoSteadyState("gen-nsf: firing rate did not settle at phi_n=" +
                                        std::to_string(phi_n) + ", i_n=" + std::to_string(i_n) +
                                        " (drift=" + std::to_string(drift) + ")");
                }
            }

            for (std::size_t si = 0; si < cfg.n_s; ++si) {
                double acc = 0.0;
                for (double phi : phi_syn)
                    acc += evaluate_source(g_d, cfg.dendrite_bias, phi, sf.s_grid[si]);
                sf.at(b, p, si) = acc / static_cast<double>(n_samples);
            }
            break;
        }
    });

    detail::enforce_monotone(sf, /*s_nonincreasing=*/false);
    sf.validate();
    return sf;
}

}  // namespace soen::tablegen
