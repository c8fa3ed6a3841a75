#pragma once

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "soen/engine.hpp"
#include "soen/network.hpp"

namespace soen {

/// A soma is a Soma-kind dendrite plus threshold/reset bookkeeping: on firing,
/// the signal is evacuated, a unit impulse enters the refractory dendrite
/// (which couples j_ref * s_ref back into the soma's input), and a spike is
/// emitted after the transmitter latency.
struct SomaSpec {
    int soma_id = -1;
    int refractory_id = -1;
    double j_ref = 0.0;  // inhibitory, < 0
    double t_tx = 0.0;   // transmitter latency, dimensionless

    void validate(const Network& net) const {
        if (soma_id < 0 || soma_id >= net.n()) throw ValidationError("soma: unknown dendrite id");
        if (refractory_id < 0 || refractory_id >= net.n())
            throw ValidationError("soma: unknown refractory dendrite id");
        const auto& d = net.specs[soma_id];
        if (d.kind != DendriteKind::Soma) throw ValidationError("soma: dendrite is not Soma kind");
        if (!(d.s_threshold > 0.0 && d.s_threshold < 1.0))
            throw InvariantViolation("soma: s_threshold must lie in (0, 1)");
        if (net.specs[refractory_id].kind != DendriteKind::Refractory)
            throw ValidationError("soma: refractory target is not Refractory kind");
        if (!(j_ref < 0.0)) throw InvariantViolation("soma: j_ref must be < 0");
        if (t_tx < 0.0) throw InvariantViolation("soma: t_tx must be >= 0");
    }
};

/// Synaptic single-photon detector response: each delivered spike adds an
/// instantaneous flux step of phi_spd decaying with tau_spd on the target.
struct SynapseSpec {
    int source_soma = -1;  // index into the somas array
    int target_id = -1;
    double phi_spd = 0.0;
    double tau_spd = 0.0;

    void validate(const Network& net, std::size_t n_somas) const {
        if (source_soma < 0 || source_soma >= static_cast<int>(n_somas))
            throw ValidationError("synapse: unknown source soma");
        if (target_id < 0 || target_id >= net.n()) throw ValidationError("synapse: unknown target dendrite");
        if (!(phi_spd > 0.0 && phi_spd <= 0.5))
            throw InvariantViolation("synapse: phi_spd must lie in (0, 0.5]");
        if (!(tau_spd > 0.0)) throw InvariantViolation("synapse: tau_spd must be > 0");
    }
};

struct SpikeRecord {
    int soma_id = -1;
    std::vector<double> times;  // dimensionless, strictly increasing
};

struct SpikingNetwork {
    Network base;
    std::vector<SomaSpec> somas;
    std::vector<SynapseSpec> synapses;

    void validate() const {
        base.validate(/*allow_somas=*/true);
        for (const auto& m : somas) m.validate(base);
        for (const auto& sy : synapses) sy.validate(base, somas.size());
        for (int i = 0; i < base.n(); ++i) {
            if (base.specs[i].kind != DendriteKind::Soma) continue;
            bool owned = false;
            for (const auto& m : somas) owned |= (m.soma_id == i);
            if (!owned)
                throw ValidationError("spiking: Soma-kind dendrite " + std::to_string(i) +
                                      " has no SomaSpec");
        }
    }
};

struct SpikingResult {
    TraceBuffer trace;
    std::vector<SpikeRecord> spikes;  // one record per soma, in soma order
};

/// Reference model: engine dynamics plus explicit threshold/reset somas,
/// refractory feedback, transmitter latency, and synaptic flux responses.
inline SpikingResult run_spiking(const SpikingNetwork& snet, const NetworkState& s0,
                                 const TraceConfig& cfg = {}) {
    snet.validate();
    const Network& net = snet.base;
    detail::Stepper st(net, /*allow_somas=*/true);
    st.load_state(s0);

    std::size_t n_steps = 0;
    if (net.t_end > 0.0) {
        if (net.dt <= 0.0) throw ValidationError("run_spiking: dt must be > 0 when t_end > 0");
        n_steps = static_cast<std::size_t>(std::llround(net.t_end / net.dt));
    }

    const int n = net.n();
    const std::size_t n_syn = snet.synapses.size();
    std::vector<double> syn_y(n_syn, 0.0);
    std::vector<double> syn_decay(n_syn, 0.0);
    for (std::size_t k = 0; k < n_syn; ++k)
        syn_decay[k] = std::exp(-net.dt / snet.synapses[k].tau_spd);
    std::vector<std::deque<double>> pending(n_syn);  // scheduled delivery times

    SpikingResult out;
    out.spikes.resize(snet.somas.size());
    for (std::size_t m = 0; m < snet.somas.size(); ++m)
        out.spikes[m].soma_id = snet.somas[m].soma_id;

    detail::init_trace(out.trace, net, cfg);
    st.compute_phi_range(0, n, s0.t);
    for (const auto& m : snet.somas) st.add_flux(m.soma_id, m.j_ref * st.s()[m.refractory_id]);
    detail::record_row(out.trace, s0.t, st.s(), st.phi());

    ClampStats clamp;
    std::uint64_t capped = 0;
    const double cap = net.s_cap;

    for (std::size_t p = 0; p < n_steps; ++p) {
        const double t_next = s0.t + static_cast<double>(p + 1) * net.dt;

        // Synapse states at t_next.
        for (std::size_t k = 0; k < n_syn; ++k) {
            syn_y[k] *= syn_decay[k];
            auto& q = pending[k];
            while (!q.empty() && q.front() <= t_next) {
                syn_y[k] += snet.synapses[k].phi_spd *
                            std::exp(-(t_next - q.front()) / snet.synapses[k].tau_spd);
                q.pop_front();
            }
        }

        st.compute_phi_range(0, n, t_next);
        for (std::size_t k = 0; k < n_syn; ++k) st.add_flux(snet.synapses[k].target_id, syn_y[k]);
        for (const auto& m : snet.somas) st.add_flux(m.soma_id, m.j_ref * st.s()[m.refractory_id]);

        bool nonfinite = false;
        st.update_range(0, n, clamp, capped, nonfinite);
        if (nonfinite) throw NonFiniteState("non-finite state at t=" + std::to_string(t_next));
        st.swap_buffers(t_next);

        // Threshold pass, in soma order.
        auto& s = st.mutable_s();
        for (std::size_t m = 0; m < snet.somas.size(); ++m) {
            const auto& soma = snet.somas[m];
            if (s[soma.soma_id] < net.specs[soma.soma_id].s_threshold) continue;
            s[soma.soma_id] = 0.0;  // evacuation
            double& ref = s[soma.refractory_id];
            ref += 1.0;
            if (ref > cap) {
                ref = cap;
                ++capped;
            }
            const double t_spike = t_next + soma.t_tx;
            out.spikes[m].times.push_back(t_spike);
            for (std::size_t k = 0; k < n_syn; ++k)
                if (snet.synapses[k].source_soma == static_cast<int>(m))
                    pending[k].push_back(t_spike);
        }

        if ((p + 1) % static_cast<std::size_t>(out.trace.stride) == 0)
            detail::record_row(out.trace, t_next, st.s(), st.phi());
    }

    out.trace.clamp = clamp;
    out.trace.s_capped = capped;
    return out;
}

}  // namespace soen
