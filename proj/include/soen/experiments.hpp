#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "soen/analysis.hpp"
#include "soen/engine.hpp"
#include "soen/spiking.hpp"

namespace soen::experiments {

enum class ExperimentKind {
    StepResponse,
    SingleEvent,
    BiasSweep,
    PulseTrainPeriodic,
    PulseTrainAperiodic,
    Coincidence,
    Sequence,
};

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::StepResponse: return "step_response";
        case ExperimentKind::SingleEvent: return "single_event";
        case ExperimentKind::BiasSweep: return "bias_sweep";
        case ExperimentKind::PulseTrainPeriodic: return "pulse_train_periodic";
        case ExperimentKind::PulseTrainAperiodic: return "pulse_train_aperiodic";
        case ExperimentKind::Coincidence: return "coincidence";
        case ExperimentKind::Sequence: return "sequence";
    }
    return "?";
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::StepResponse, ExperimentKind::SingleEvent,
                             ExperimentKind::BiasSweep, ExperimentKind::PulseTrainPeriodic,
                             ExperimentKind::PulseTrainAperiodic, ExperimentKind::Coincidence,
                             ExperimentKind::Sequence})
        if (s == to_string(k)) return k;
    throw ValidationError("experiment: unknown kind '" + s + "'");
}

/// One monosynaptic (or disynaptic) neuron, in matched spiking and
/// phenomenological versions. The two circuits are identical up to the soma:
/// input dendrites, their drives, and the coupling weights are shared, and
/// the neuronal flux phi_n = sum_k w_k * s_in_k is fed to the spiking soma in
/// one case and directly to the downstream dendrite (phi_d = phi_n) in the
/// other, with the soma/refractory/transmitter/synapse chain folded into g_n.
struct ExperimentConfig {
    double omega_c = 100.0;  // rad/ns

    SourceFunction g_d;  // Dendrite table, biases must cover bias_in/bias_d
    SourceFunction g_n;  // Neuron table, biases must cover bias_n; must be
                         // generated with the same soma/synapse constants below

    // Input dendrite(s). The second entry is only used by Coincidence/Sequence.
    double bias_in = 1.7;
    double beta_in = 2.0 * M_PI * 1e3;
    double tau_in_ns = 250.0;
    double tau_in2_ns = 250.0;
    double w_in = 1.0;
    double w_in2 = 1.0;

    // Soma and refractory dendrite.
    double bias_n = 1.7;
    double beta_ni = 2.0 * M_PI * 1e3;
    double tau_ni_ns = 50.0;
    double s_th = 0.2;
    double j_ref = -0.35;
    double t_tx_ns = 5.0;

    // Synapses (input events and the soma's output synapse).
    double phi_spd = 0.25;
    double tau_spd_ns = 50.0;

    // Output dendrite.
    double bias_d = 1.7;
    double beta_out = 2.0 * M_PI * 1e4;
    double tau_out_ns = 1250.0;

    // Drive.
    double step_flux = 0.3;       // StepResponse
    double t_on_ns = 100.0;       // step onset / first event time
    std::size_t n_events = 7;     // pulse trains
    double isi_ns = 100.0;        // PulseTrainPeriodic
    double isi_min_ns = 50.0;     // PulseTrainAperiodic
    double isi_max_ns = 1000.0;
    bool has_seed = false;
    std::uint64_t seed = 0;

    // Sweeps.
    std::vector<double> tau_out_sweep_ns;  // SingleEvent
    std::vector<double> bias_sweep;        // BiasSweep (i_n = i_d swept together)
    std::vector<double> delay_sweep_ns;    // Coincidence / Sequence

    // Integration.
    double dt_ns = 1.0;
    double t_end_ns = 0.0;  // 0 = kind-specific default
    int trace_stride = 1;

    double nd(double t_ns) const { return t_ns * omega_c; }  // ns -> dimensionless
};

struct PairResult {
    TraceBuffer spiking;
    TraceBuffer phenom;
    std::vector<SpikeRecord> spikes;
    int out_spiking = -1;  // output dendrite id in each trace
    int out_phenom = -1;
    double chi2 = 0.0;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::StepResponse;
    std::string param_name;
    std::vector<double> param;
    std::vector<double> chi2;
    std::vector<double> peak_spiking, peak_phenom;
    std::vector<std::uint64_t> n_spikes;  // soma output spikes per sweep point
    std::vector<PairResult> pairs;
};

namespace detail {

inline double trace_peak(const TraceBuffer& tb, int id) {
    double peak = 0.0;
    for (double v : tb.s_of(id)) peak = std::max(peak, v);
    return peak;
}

struct PointSetup {
    bool disynaptic = false;
    double tau_in2_ns = 0.0;
    double tau_out_ns = 0.0;
    double bias_n = 0.0, bias_d = 0.0;
    std::vector<double> events1_ns;  // synapse events on input 1 (empty = step drive)
    std::vector<double> events2_ns;  // synapse events on input 2
    bool step = false;
};

/// Run one matched pair. Dendrite ids, spiking: inputs, soma, refractory,
/// output; phenomenological: inputs, output.
inline PairResult run_pair(const ExperimentConfig& cfg, const PointSetup& pt, double t_end_ns) {
    const int n_in = pt.disynaptic ? 2 : 1;

    auto add_input_drive = [&](Network& net) {
        if (pt.step) {
            net.drive.series[0] = DriveSeries{DriveSeries::Mode::PiecewiseConstant,
                                              {cfg.nd(cfg.t_on_ns)},
                                              {cfg.step_flux}};
            return;
        }
        auto to_train = [&](const std::vector<double>& ev_ns) {
            ExpPulseTrain train;
            train.amplitude = cfg.phi_spd;
            train.tau = cfg.nd(cfg.tau_spd_ns);
            for (double t : ev_ns) train.times.push_back(cfg.nd(t));
            return train;
        };
        if (!pt.events1_ns.empty()) net.drive.pulses[0].push_back(to_train(pt.events1_ns));
        if (pt.disynaptic && !pt.events2_ns.empty())
            net.drive.pulses[1].push_back(to_train(pt.events2_ns));
    };

    PairResult out;

    {  // Spiking circuit.
        SpikingNetwork snet;
        Network& net = snet.base;
        net.specs.push_back(make_dendrite(0, DendriteKind::FirstOrder, cfg.beta_in,
                                          cfg.nd(cfg.tau_in_ns), cfg.bias_in, 0));
        if (pt.disynaptic)
            net.specs.push_back(make_dendrite(1, DendriteKind::FirstOrder, cfg.beta_in,
                                              cfg.nd(pt.tau_in2_ns), cfg.bias_in, 0));
        const int soma = n_in, refr = n_in + 1, dout = n_in + 2;
        net.specs.push_back(make_dendrite(soma, DendriteKind::Soma, cfg.beta_ni,
                                          cfg.nd(cfg.tau_ni_ns), pt.bias_n, 0));
        net.specs.back().s_threshold = cfg.s_th;
        net.specs.back().has_threshold = true;
        net.specs.push_back(make_dendrite(refr, DendriteKind::Refractory, cfg.beta_ni,
                                          cfg.nd(cfg.tau_ni_ns), pt.bias_n, 0));
        net.specs.push_back(make_dendrite(dout, DendriteKind::FirstOrder, cfg.beta_out,
                                          cfg.nd(pt.tau_out_ns), pt.bias_d, 0));
        net.sources = {cfg.g_d};
        std::vector<CouplingMatrix::Entry> entries{{soma, 0, cfg.w_in}};
        if (pt.disynaptic) entries.push_back({soma, 1, cfg.w_in2});
        net.coupling = CouplingMatrix(static_cast<int>(net.specs.size()), entries);
        add_input_drive(net);
        net.dt = cfg.nd(cfg.dt_ns);
        net.t_end = cfg.nd(t_end_ns);
        snet.somas = {{soma, refr, cfg.j_ref, cfg.nd(cfg.t_tx_ns)}};
        snet.synapses = {{0, dout, cfg.phi_spd, cfg.nd(cfg.tau_spd_ns)}};

        TraceConfig tc;
        tc.stride = cfg.trace_stride;
        auto res = run_spiking(snet, NetworkState::zeros(net.n()), tc);
        out.spiking = std::move(res.trace);
        out.spikes = std::move(res.spikes);
        out.out_spiking = dout;
    }

    {  // Phenomenological circuit: phi_d = phi_n.
        Network net;
        net.specs.push_back(make_dendrite(0, DendriteKind::FirstOrder, cfg.beta_in,
                                          cfg.nd(cfg.tau_in_ns), cfg.bias_in, 0));
        if (pt.disynaptic)
            net.specs.push_back(make_dendrite(1, DendriteKind::FirstOrder, cfg.beta_in,
                                              cfg.nd(pt.tau_in2_ns), cfg.bias_in, 1));
        const int dout = n_in;
        net.specs.push_back(make_dendrite(dout, DendriteKind::FirstOrder, cfg.beta_out,
                                          cfg.nd(pt.tau_out_ns), pt.bias_n, pt.disynaptic ? 2 : 1));
        net.sources.assign(n_in, cfg.g_d);
        net.sources.push_back(cfg.g_n);
        std::vector<CouplingMatrix::Entry> entries{{dout, 0, cfg.w_in}};
        if (pt.disynaptic) entries.push_back({dout, 1, cfg.w_in2});
        net.coupling = CouplingMatrix(static_cast<int>(net.specs.size()), entries);
        add_input_drive(net);
        net.dt = cfg.nd(cfg.dt_ns);
        net.t_end = cfg.nd(t_end_ns);

        TraceConfig tc;
        tc.stride = cfg.trace_stride;
        out.phenom = run(net, NetworkState::zeros(net.n()), tc, 1);
        out.out_phenom = dout;
    }

    try {
        out.chi2 = analysis::chi_squared(out.spiking.s_of(out.out_spiking),
                                         out.phenom.s_of(out.out_phenom), out.spiking.dt)
                       .chi2;
    } catch (const ZeroReference&) {
        // Sweep points where the soma never fires (e.g. wide coincidence
        // delays) have no defined chi^2; the peak columns still carry data.
        out.chi2 = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace detail

/// Build, run, and score one matched spiking/phenomenological pair per sweep
/// point of the requested experiment.
inline ExperimentReport run_comparison_experiment(ExperimentKind kind, const ExperimentConfig& cfg) {
    if (cfg.g_d.kind != SourceKind::Dendrite || cfg.g_n.kind != SourceKind::Neuron)
        throw ValidationError("experiment: g_d must be a dendrite table and g_n a neuron table");

    ExperimentReport rep;
    rep.kind = kind;

    detail::PointSetup base;
    base.tau_in2_ns = cfg.tau_in2_ns;
    base.tau_out_ns = cfg.tau_out_ns;
    base.bias_n = cfg.bias_n;
    base.bias_d = cfg.bias_d;

    auto push_point = [&](double param, const detail::PointSetup& pt, double t_end_ns) {
        auto pair = detail::run_pair(cfg, pt, t_end_ns);
        rep.param.push_back(param);
        rep.chi2.push_back(pair.chi2);
        rep.peak_spiking.push_back(detail::trace_peak(pair.spiking, pair.out_spiking));
        rep.peak_phenom.push_back(detail::trace_peak(pair.phenom, pair.out_phenom));
        rep.n_spikes.push_back(pair.spikes.empty() ? 0 : pair.spikes[0].times.size());
        rep.pairs.push_back(std::move(pair));
    };

    auto periodic_events = [&](std::size_t n, double isi_ns) {
        std::vector<double> ev(n);
        for (std::size_t k = 0; k < n; ++k) ev[k] = cfg.t_on_ns + static_cast<double>(k) * isi_ns;
        return ev;
    };

    switch (kind) {
        case ExperimentKind::StepResponse: {
            rep.param_name = "step_flux";
            auto pt = base;
            pt.step = true;
            const double t_end = cfg.t_end_ns > 0.0 ? cfg.t_end_ns : cfg.t_on_ns + 8.0 * cfg.tau_out_ns;
            push_point(cfg.step_flux, pt, t_end);
            break;
        }
        case ExperimentKind::SingleEvent: {
            rep.param_name = "tau_out_ns";
            if (cfg.tau_out_sweep_ns.empty())
                throw ValidationError("experiment: single_event needs tau_out_sweep_ns");
            for (double tau_out : cfg.tau_out_sweep_ns) {
                auto pt = base;
                pt.tau_out_ns = tau_out;
                pt.events1_ns = {cfg.t_on_ns};
                const double t_end =
                    cfg.t_end_ns > 0.0 ? cfg.t_end_ns : cfg.t_on_ns + 6.0 * cfg.tau_spd_ns + 5.0 * tau_out;
                push_point(tau_out, pt, t_end);
            }
            break;
        }
        case ExperimentKind::BiasSweep: {
            rep.param_name = "bias";
            if (cfg.bias_sweep.empty()) throw ValidationError("experiment: bias_sweep needs biases");
            for (double bias : cfg.bias_sweep) {
                auto pt = base;
                pt.bias_n = bias;
                pt.bias_d = bias;
                pt.events1_ns = {cfg.t_on_ns};
                const double t_end = cfg.t_end_ns > 0.0
                                         ? cfg.t_end_ns
                                         : cfg.t_on_ns + 6.0 * cfg.tau_spd_ns + 5.0 * cfg.tau_out_ns;
                push_point(bias, pt, t_end);
            }
            break;
        }
        case ExperimentKind::PulseTrainPeriodic: {
            rep.param_name = "isi_ns";
            auto pt = base;
            pt.events1_ns = periodic_events(cfg.n_events, cfg.isi_ns);
            const double t_end = cfg.t_end_ns > 0.0
                                     ? cfg.t_end_ns
                                     : pt.events1_ns.back() + 6.0 * cfg.tau_spd_ns + 5.0 * cfg.tau_out_ns;
            push_point(cfg.isi_ns, pt, t_end);
            break;
        }
        case ExperimentKind::PulseTrainAperiodic: {
            rep.param_name = "seed";
            if (!cfg.has_seed)
                throw ValidationError("experiment: pulse_train_aperiodic requires a seed");
            std::mt19937_64 rng(cfg.seed);
            auto pt = base;
            double t = cfg.t_on_ns;
            for (std::size_t k = 0; k < cfg.n_events; ++k) {
                pt.events1_ns.push_back(t);
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                t += cfg.isi_min_ns + u * (cfg.isi_max_ns - cfg.isi_min_ns);
            }
            const double t_end = cfg.t_end_ns > 0.0
                                     ? cfg.t_end_ns
                                     : pt.events1_ns.back() + 6.0 * cfg.tau_spd_ns + 5.0 * cfg.tau_out_ns;
            push_point(static_cast<double>(cfg.seed), pt, t_end);
            break;
        }
        case ExperimentKind::Coincidence:
        case ExperimentKind::Sequence: {
            rep.param_name = "delay_ns";
            if (cfg.delay_sweep_ns.empty())
                throw ValidationError("experiment: coincidence/sequence needs delay_sweep_ns");
            for (double delay : cfg.delay_sweep_ns) {
                auto pt = base;
                pt.disynaptic = true;
                if (kind == ExperimentKind::Coincidence) pt.tau_in2_ns = cfg.tau_in_ns;
                const double shift = std::max(0.0, -delay);  // keep both events >= t_on
                pt.events1_ns = {cfg.t_on_ns + shift};
                pt.events2_ns = {cfg.t_on_ns + shift + delay};
                const double last = std::max(pt.events1_ns[0], pt.events2_ns[0]);
                const double t_end = cfg.t_end_ns > 0.0
                                         ? cfg.t_end_ns
                                         : last + 6.0 * cfg.tau_spd_ns + 5.0 * cfg.tau_out_ns;
                push_point(delay, pt, t_end);
            }
            break;
        }
    }
    return rep;
}

}  // namespace soen::experiments
