#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "soen/coupling.hpp"
#include "soen/errors.hpp"
#include "soen/flux_drive.hpp"
#include "soen/source_function.hpp"
#include "soen/types.hpp"

namespace soen {

/// A phenomenological network: dendrite specs, sparse coupling, external drive
/// and the integration grid. Somas are rejected here; in this model a neuron is
/// represented by Neuron-kind source functions on its downstream dendrites.
struct Network {
    std::vector<DendriteSpec> specs;
    std::vector<SourceFunction> sources;
    CouplingMatrix coupling;
    FluxDrive drive;
    double dt = 0.0;
    double t_end = 0.0;
    double s_cap = 2.0;  // saturation guard on |s|

    int n() const { return static_cast<int>(specs.size()); }

    double min_tau() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& d : specs) m = std::min(m, d.tau);
        return m;
    }

    void validate(bool allow_somas = false) const {
        if (specs.empty()) throw ValidationError("network: no dendrites");
        if (coupling.n() != n()) throw ValidationError("network: coupling size != dendrite count");
        for (int i = 0; i < n(); ++i) {
            const auto& d = specs[i];
            if (d.id != i) throw ValidationError("network: dendrite ids must be dense, 0..n-1");
            d.validate();
            if (!allow_somas && d.kind == DendriteKind::Soma)
                throw ValidationError("network: soma dendrites are not valid in the phenomenological engine");
            if (d.source_id < 0 || d.source_id >= static_cast<int>(sources.size()))
                throw ValidationError("network: dendrite " + std::to_string(i) +
                                      " references unknown source function " + std::to_string(d.source_id));
        }
        drive.validate();
        for (const auto& [id, series] : drive.series) {
            (void)series;
            if (id < 0 || id >= n())
                throw ValidationError("network: drive targets unknown dendrite " + std::to_string(id));
        }
        for (const auto& [id, trains] : drive.pulses) {
            (void)trains;
            if (id < 0 || id >= n())
                throw ValidationError("network: pulse drive targets unknown dendrite " + std::to_string(id));
        }
        if (!(dt >= 0.0) || !std::isfinite(dt)) throw ValidationError("network: dt must be finite and >= 0");
        if (dt > 0.0 && dt >= min_tau() / 10.0)
            throw ValidationError("network: dt must be < min(tau)/10 (dt=" + std::to_string(dt) +
                                  ", min tau=" + std::to_string(min_tau()) + ")");
        if (t_end < 0.0) throw ValidationError("network: t_end must be >= 0");
    }
};

/// State vector of the system at time t. `aux` carries the accumulated
/// oscillator coordinate for SecondOrder dendrites and is empty otherwise.
struct NetworkState {
    double t = 0.0;
    std::vector<double> s;
    std::vector<double> aux;

    static NetworkState zeros(int n, bool second_order = false) {
        NetworkState st;
        st.s.assign(n, 0.0);
        if (second_order) st.aux.assign(n, 0.0);
        return st;
    }
};

struct TraceConfig {
    std::vector<int> ids;  // dendrites to record; empty = all
    int stride = 1;        // record every k-th step
};

/// Recorded s(t) and phi(t) columns for selected dendrites.
struct TraceBuffer {
    std::vector<int> ids;
    int stride = 1;
    double dt = 0.0;
    std::vector<double> t;
    std::vector<std::vector<double>> s_cols;    // one column per recorded id
    std::vector<std::vector<double>> phi_cols;

    ClampStats clamp;
    std::uint64_t s_capped = 0;

    std::size_t n_rows() const { return t.size(); }

    const std::vector<double>& s_of(int id) const { return s_cols[col_of(id)]; }
    const std::vector<double>& phi_of(int id) const { return phi_cols[col_of(id)]; }

  private:
    std::size_t col_of(int id) const {
        for (std::size_t k = 0; k < ids.size(); ++k)
            if (ids[k] == id) return k;
        throw Error("trace: dendrite " + std::to_string(id) + " was not recorded");
    }
};

}  // namespace soen
