#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "soen/network.hpp"
#include "soen/spiking.hpp"

namespace soen::csv {

/// Trace CSV: `t, t_ns, s_<id>, phi_<id>, ...` with %.17g numbers so reruns
/// can be compared byte-for-byte.
inline void write_trace(std::ostream& out, const TraceBuffer& tb, double omega_c) {
    using soen::detail::fmt17;
    out << "t, t_ns";
    for (int id : tb.ids) out << ", s_" << id;
    for (int id : tb.ids) out << ", phi_" << id;
    out << "\n";
    for (std::size_t p = 0; p < tb.n_rows(); ++p) {
        out << fmt17(tb.t[p]) << ", " << fmt17(tb.t[p] / omega_c);
        for (std::size_t k = 0; k < tb.ids.size(); ++k) out << ", " << fmt17(tb.s_cols[k][p]);
        for (std::size_t k = 0; k < tb.ids.size(); ++k) out << ", " << fmt17(tb.phi_cols[k][p]);
        out << "\n";
    }
}

/// Spike CSV: `soma_id, t_spike, t_spike_ns`.
inline void write_spikes(std::ostream& out, const std::vector<SpikeRecord>& spikes, double omega_c) {
    using soen::detail::fmt17;
    out << "soma_id, t_spike, t_spike_ns\n";
    for (const auto& rec : spikes)
        for (double t : rec.times)
            out << rec.soma_id << ", " << fmt17(t) << ", " << fmt17(t / omega_c) << "\n";
}

/// Generic sweep report: one labelled parameter column plus named metrics.
inline void write_report(std::ostream& out, const std::string& param_name,
                         const std::vector<std::string>& metric_names,
                         const std::vector<double>& param,
                         const std::vector<std::vector<double>>& metrics) {
    using soen::detail::fmt17;
    out << param_name;
    for (const auto& m : metric_names) out << ", " << m;
    out << "\n";
    for (std::size_t p = 0; p < param.size(); ++p) {
        out << fmt17(param[p]);
        for (const auto& col : metrics) out << ", " << fmt17(col[p]);
        out << "\n";
    }
}

}  // namespace soen::csv
