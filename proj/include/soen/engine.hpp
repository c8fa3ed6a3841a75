#pragma once

#include <barrier>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "soen/network.hpp"

namespace soen {

inline int default_workers() {
    if (const char* env = std::getenv("SOEN_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

inline double default_dt(const Network& net) { return net.min_tau() / 100.0; }

namespace detail {

/// Shared per-step machinery for the phenomenological and spiking engines.
/// Double-buffered state; update_range writes only s_next/aux_next, so ranges
/// can be advanced concurrently and results do not depend on the partition.
class Stepper {
  public:
    Stepper(const Network& net, bool allow_somas) : net_(&net) {
        net.validate(allow_somas);
        const int n = net.n();
        gsrc_.resize(n);
        dt_gamma_.resize(n);
        dt_over_tau_.resize(n);
        omega2_.resize(n);
        second_order_ = false;
        // Dendrites sharing a (source, bias) pair share one compiled slice;
        // large homogeneous networks then keep a cache-resident table.
        std::map<std::pair<int, double>, std::size_t> compiled_index;
        for (int i = 0; i < n; ++i) {
            const auto& d = net.specs[i];
            const auto key = std::make_pair(d.source_id, d.bias);
            auto it = compiled_index.find(key);
            if (it == compiled_index.end()) {
                compiled_.emplace_back(net.sources[d.source_id], d.bias);
                it = compiled_index.emplace(key, compiled_.size() - 1).first;
            }
            gsrc_[i] = it->second;
            dt_gamma_[i] = net.dt * d.gamma;
            dt_over_tau_[i] = net.dt / d.tau;
            omega2_[i] = d.kind == DendriteKind::SecondOrder
                             ? d.omega_lc_ratio * d.omega_lc_ratio
                             : 0.0;
            if (d.kind == DendriteKind::SecondOrder) second_order_ = true;
        }
        series_cursor_.assign(n, 0);
        pulse_samplers_.resize(n);
        for (int i = 0; i < n; ++i) {
            auto it = net.drive.pulses.find(i);
            if (it != net.drive.pulses.end())
                for (const auto& train : it->second) pulse_samplers_[i].emplace_back(train);
        }
        phi_.assign(n, 0.0);
    }

    void load_state(const NetworkState& st) {
        if (static_cast<int>(st.s.size()) != net_->n())
            throw ValidationError("state vector length != dendrite count");
        for (double v : st.s)
            if (!std::isfinite(v)) throw NonFiniteState("initial state is not finite");
        s_cur_ = st.s;
        s_next_ = st.s;
        aux_cur_ = st.aux;
        if (second_order_ && aux_cur_.empty()) aux_cur_.assign(net_->n(), 0.0);
        aux_next_ = aux_cur_;
        t_ = st.t;
    }

    NetworkState extract_state() const {
        NetworkState st;
        st.t = t_;
        st.s = s_cur_;
        st.aux = aux_cur_;
        return st;
    }

    /// phi_i(t_next) = sum_j J_ij s_j(t_p) + phi_ext_i(t_next).
    void compute_phi_range(int i0, int i1, double t_next) {
        const auto& J = net_->coupling;
        for (int i = i0; i < i1; ++i) {
            double phi = J.row_dot(i, s_cur_);
            auto it = net_->drive.series.find(i);
            if (it != net_->drive.series.end()) phi += it->second.sample(t_next, series_cursor_[i]);
            for (auto& ps : pulse_samplers_[i]) phi += ps.sample(t_next);
            phi_[i] = phi;
        }
    }

    /// Forward Euler for first-order loops; semi-implicit Euler on the
    /// oscillator pair (s, integrated s) for second-order loops.
    void update_range(int i0, int i1, ClampStats& clamp, std::uint64_t& capped, bool& nonfinite) {
        const double cap = net_->s_cap;
        for (int i = i0; i < i1; ++i) {
            const double s = s_cur_[i];
            const double g = compiled_[gsrc_[i]](phi_[i], s, clamp);
            double ds = dt_gamma_[i] * g - dt_over_tau_[i] * s;
            if (omega2_[i] != 0.0) ds -= net_->dt * omega2_[i] * aux_cur_[i];
            double sn = s + ds;
            if (!std::isfinite(sn)) {
                nonfinite = true;
                sn = 0.0;
            } else if (sn > cap) {
                sn = cap;
                ++capped;
            } else if (sn < -cap) {
                sn = -cap;
                ++capped;
            }
            s_next_[i] = sn;
            if (second_order_) aux_next_[i] = aux_cur_[i] + net_->dt * sn;
        }
    }

    void swap_buffers(double t_next) {
        s_cur_.swap(s_next_);
        if (second_order_) aux_cur_.swap(aux_next_);
        t_ = t_next;
    }

    double t() const { return t_; }
    const std::vector<double>& s() const { return s_cur_; }
    std::vector<double>& mutable_s() { return s_cur_; }
    void add_flux(int i, double v) { phi_[i] += v; }
    const std::vector<double>& phi() const { return phi_; }
    const Network& net() const { return *net_; }
    const CompiledSource& source_of(int i) const { return compiled_[gsrc_[i]]; }

  private:
    const Network* net_;
    std::vector<CompiledSource> compiled_;  // unique (source, bias) slices
    std::vector<std::size_t> gsrc_;         // per-dendrite index into compiled_
    std::vector<double> dt_gamma_, dt_over_tau_, omega2_;
    std::vector<double> s_cur_, s_next_, aux_cur_, aux_next_, phi_;
    std::vector<std::size_t> series_cursor_;
    std::vector<std::vector<PulseSampler>> pulse_samplers_;
    double t_ = 0.0;
    bool second_order_ = false;
};

inline std::vector<std::pair<int, int>> partition(int n, int workers) {
    std::vector<std::pair<int, int>> ranges;
    const int w = std::max(1, workers);
    const int base = n / w, extra = n % w;
    int begin = 0;
    for (int k = 0; k < w; ++k) {
        const int len = base + (k < extra ? 1 : 0);
        ranges.emplace_back(begin, begin + len);
        begin += len;
    }
    return ranges;
}

}  // namespace detail

/// phi = J s + phi_ext(t). One-shot variant of the engine's step-1 kernel.
inline std::vector<double> compute_flux(const Network& net, const std::vector<double>& s, double t) {
    if (static_cast<int>(s.size()) != net.n())
        throw ValidationError("compute_flux: state length != dendrite count");
    std::vector<double> phi(net.n(), 0.0);
    for (int i = 0; i < net.n(); ++i) {
        phi[i] = net.coupling.row_dot(i, s);
        auto it = net.drive.series.find(i);
        if (it != net.drive.series.end()) phi[i] += it->second.sample(t);
        auto pit = net.drive.pulses.find(i);
        if (pit != net.drive.pulses.end())
            for (const auto& train : pit->second) {
                PulseSampler ps(train);
                phi[i] += ps.sample(t);
            }
    }
    return phi;
}

/// One forward-Euler step of the full network. Convenience path for tests;
/// run() is the batch equivalent.
inline NetworkState step(const Network& net, const NetworkState& state) {
    detail::Stepper st(net, false);
    st.load_state(state);
    if (net.dt == 0.0) return st.extract_state();
    ClampStats clamp;
    std::uint64_t capped = 0;
    bool nonfinite = false;
    st.compute_phi_range(0, net.n(), state.t + net.dt);
    st.update_range(0, net.n(), clamp, capped, nonfinite);
    if (nonfinite) throw NonFiniteState("non-finite state at t=" + std::to_string(state.t + net.dt));
    st.swap_buffers(state.t + net.dt);
    return st.extract_state();
}

namespace detail {

inline void init_trace(TraceBuffer& tb, const Network& net, const TraceConfig& cfg) {
    if (cfg.stride < 1) throw ValidationError("trace: stride must be >= 1");
    tb.ids = cfg.ids;
    if (tb.ids.empty())
        for (int i = 0; i < net.n(); ++i) tb.ids.push_back(i);
    for (int id : tb.ids)
        if (id < 0 || id >= net.n())
            throw ValidationError("trace: unknown dendrite id " + std::to_string(id));
    tb.stride = cfg.stride;
    tb.dt = net.dt;
    tb.s_cols.assign(tb.ids.size(), {});
    tb.phi_cols.assign(tb.ids.size(), {});
}

inline void record_row(TraceBuffer& tb, double t, const std::vector<double>& s,
                       const std::vector<double>& phi) {
    tb.t.push_back(t);
    for (std::size_t k = 0; k < tb.ids.size(); ++k) {
        tb.s_cols[k].push_back(s[tb.ids[k]]);
        tb.phi_cols[k].push_back(phi[tb.ids[k]]);
    }
}

}  // namespace detail

/// Integrate the network from s0 through the time grid, recording a trace.
/// The trajectory is bit-identical for any worker count.
inline TraceBuffer run(const Network& net, const NetworkState& s0, const TraceConfig& cfg = {},
                       int workers = default_workers()) {
    detail::Stepper st(net, false);
    st.load_state(s0);

    std::size_t n_steps = 0;
    if (net.t_end > 0.0) {
        if (net.dt <= 0.0) throw ValidationError("run: dt must be > 0 when t_end > 0");
        n_steps = static_cast<std::size_t>(std::llround(net.t_end / net.dt));
    }

    TraceBuffer tb;
    detail::init_trace(tb, net, cfg);
    st.compute_phi_range(0, net.n(), s0.t);
    detail::record_row(tb, s0.t, st.s(), st.phi());

    const int n = net.n();
    workers = std::max(1, std::min(workers, n));

    ClampStats clamp;
    std::uint64_t capped = 0;
    std::optional<double> failed_at;

    if (workers == 1) {
        bool nonfinite = false;
        for (std::size_t p = 0; p < n_steps; ++p) {
            const double t_next = s0.t + static_cast<double>(p + 1) * net.dt;
            st.compute_phi_range(0, n, t_next);
            st.update_range(0, n, clamp, capped, nonfinite);
            if (nonfinite) throw NonFiniteState("non-finite state at t=" + std::to_string(t_next));
            st.swap_buffers(t_next);
            if ((p + 1) % static_cast<std::size_t>(tb.stride) == 0)
                detail::record_row(tb, t_next, st.s(), st.phi());
        }
    } else {
        const auto ranges = detail::partition(n, workers);
        std::vector<ClampStats> wclamp(workers);
        std::vector<std::uint64_t> wcapped(workers, 0);
        std::vector<char> wflag(workers, 0);
        std::size_t p = 0;
        bool stop = false;

        auto completion = [&]() noexcept {
            for (int k = 0; k < workers; ++k)
                if (wflag[k]) {
                    failed_at = s0.t + static_cast<double>(p + 1) * net.dt;
                    stop = true;
                    return;
                }
            const double t_next = s0.t + static_cast<double>(p + 1) * net.dt;
            st.swap_buffers(t_next);
            if ((p + 1) % static_cast<std::size_t>(tb.stride) == 0)
                detail::record_row(tb, t_next, st.s(), st.phi());
            ++p;
        };
        std::barrier sync(workers, completion);

        auto worker = [&](int k) {
            const auto [i0, i1] = ranges[k];
            for (std::size_t q = 0; q < n_steps; ++q) {
                const double t_next = s0.t + static_cast<double>(q + 1) * net.dt;
                bool nf = false;
                st.compute_phi_range(i0, i1, t_next);
                st.update_range(i0, i1, wclamp[k], wcapped[k], nf);
                if (nf) wflag[k] = 1;
                sync.arrive_and_wait();
                if (stop) break;
            }
        };
        std::vector<std::thread> threads;
        for (int k = 0; k < workers; ++k) threads.emplace_back(worker, k);
        for (auto& th : threads) th.join();
        for (int k = 0; k < workers; ++k) {
            clamp += wclamp[k];
            capped += wcapped[k];
        }
        if (failed_at) throw NonFiniteState("non-finite state at t=" + std::to_string(*failed_at));
    }

    tb.clamp = clamp;
    tb.s_capped = capped;
    return tb;
}

}  // namespace soen
