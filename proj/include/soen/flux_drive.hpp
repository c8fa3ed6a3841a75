#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "soen/errors.hpp"

namespace soen {

/// External flux time series for one dendrite. Zero before the first sample,
/// held at the last value after the final sample.
struct DriveSeries {
    enum class Mode { PiecewiseConstant, PiecewiseLinear };

    Mode mode = Mode::PiecewiseConstant;
    std::vector<double> times;   // dimensionless, strictly increasing
    std::vector<double> values;

    void validate() const {
        if (times.size() != values.size())
            throw InvariantViolation("flux drive: times/values length mismatch");
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            if (!(times[i] < times[i + 1]))
                throw InvariantViolation("flux drive: sample times must be strictly increasing");
    }

    /// Sample at time t. `cursor` caches the last bracket for monotone queries.
    double sample(double t, std::size_t& cursor) const {
        if (times.empty() || t < times.front()) return 0.0;
        while (cursor + 1 < times.size() && times[cursor + 1] <= t) ++cursor;
        if (cursor >= times.size()) cursor = times.size() - 1;
        if (mode == Mode::PiecewiseConstant || cursor + 1 >= times.size()) return values[cursor];
        const double f = (t - times[cursor]) / (times[cursor + 1] - times[cursor]);
        return values[cursor] + f * (values[cursor + 1] - values[cursor]);
    }

    double sample(double t) const {
        std::size_t cursor = 0;
        return sample(t, cursor);
    }
};

/// A train of instantaneous-rise, exponentially decaying flux pulses:
/// sum over events of amplitude * exp(-(t - t_event)/tau) for t >= t_event.
struct ExpPulseTrain {
    double amplitude = 0.0;
    double tau = 0.0;
    std::vector<double> times;  // dimensionless, strictly increasing

    void validate() const {
        if (!(tau > 0.0)) throw InvariantViolation("pulse train: tau must be > 0");
        if (!std::isfinite(amplitude)) throw InvariantViolation("pulse train: non-finite amplitude");
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            if (!(times[i] < times[i + 1]))
                throw InvariantViolation("pulse train: event times must be strictly increasing");
    }
};

/// Stateful sampler for an ExpPulseTrain; queries must be time-monotone.
/// Uses the same decay recurrence as the spiking engine's synapse state so the
/// two engines see bit-identical input flux on a shared time grid.
struct PulseSampler {
    const ExpPulseTrain* train = nullptr;
    double y = 0.0;
    double t_last = 0.0;
    std::size_t next = 0;

    explicit PulseSampler(const ExpPulseTrain& p) : train(&p) {}

    double sample(double t) {
        y *= std::exp(-(t - t_last) / train->tau);
        while (next < train->times.size() && train->times[next] <= t) {
            y += train->amplitude * std::exp(-(t - train->times[next]) / train->tau);
            ++next;
        }
        t_last = t;
        return y;
    }
};

/// Per-dendrite external drive phi_ext_i(t). Dendrites without an entry see 0.
struct FluxDrive {
    std::unordered_map<int, DriveSeries> series;
    std::unordered_map<int, std::vector<ExpPulseTrain>> pulses;

    void validate() const {
        for (const auto& [id, s] : series) {
            (void)id;
            s.validate();
        }
        for (const auto& [id, trains] : pulses) {
            (void)id;
            for (const auto& p : trains) p.validate();
        }
    }
};

}  // namespace soen
