#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "soen/errors.hpp"
#include "soen/network.hpp"
#include "soen/source_function.hpp"
#include "soen/types.hpp"

namespace soen::analysis {

struct ChiSquaredReport {
    double chi2 = 0.0;
    int reference_id = -1;
    int candidate_id = -1;
    std::size_t n_t = 0;
    double dt = 0.0;
};

/// chi^2 = sum |s_ref - s_cand|^2 / sum |s_ref|^2, over matched time grids.
/// Normalization is always by the reference (spiking) trace; the metric is
/// deliberately asymmetric.
inline ChiSquaredReport chi_squared(const std::vector<double>& s_ref, const std::vector<double>& s_cand,
                                    double dt = 0.0, int ref_id = -1, int cand_id = -1) {
    if (s_ref.size() != s_cand.size()) throw GridMismatch("chi_squared: trace length mismatch");
    if (s_ref.empty()) throw GridMismatch("chi_squared: empty traces");
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < s_ref.size(); ++p) {
        const double d = s_ref[p] - s_cand[p];
        num += d * d;
        den += s_ref[p] * s_ref[p];
    }
    if (den == 0.0) throw ZeroReference("chi_squared: reference trace is identically zero");
    return {num / den, ref_id, cand_id, s_ref.size(), dt};
}

inline ChiSquaredReport chi_squared(const TraceBuffer& ref, int ref_id, const TraceBuffer& cand,
                                    int cand_id) {
    if (ref.n_rows() != cand.n_rows() || ref.dt != cand.dt || ref.stride != cand.stride)
        throw GridMismatch("chi_squared: traces recorded on different time grids");
    for (std::size_t p = 0; p < ref.t.size(); ++p)
        if (ref.t[p] != cand.t[p]) throw GridMismatch("chi_squared: time grids differ");
    return chi_squared(ref.s_of(ref_id), cand.s_of(cand_id), ref.dt, ref_id, cand_id);
}

/// Self-consistent steady state of s = g(phi, s)/alpha: damped fixed-point
/// iteration with a bisection fallback. Residual |alpha*s - g| < 1e-9.
inline double steady_state(const SourceFunction& sf, double bias, double phi, double alpha,
                           std::size_t max_iters = 20000) {
    if (!(alpha > 0.0)) throw ValidationError("steady_state: alpha must be > 0");
    constexpr double kResidualTol = 1e-9;
    auto g = [&](double s) { return evaluate_source(sf, bias, phi, s); };
    if (g(0.0) == 0.0) return 0.0;

    double s = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        const double gs = g(s);
        if (std::abs(alpha * s - gs) < kResidualTol) return s;
        s = 0.5 * s + 0.5 * gs / alpha;
    }

    // Bisection on h(s) = g(s)/alpha - s. h(0) > 0; expand until h < 0.
    double lo = 0.0, hi = std::max(sf.s_grid.back(), g(0.0) / alpha);
    while (g(hi) / alpha - hi > 0.0 && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = g(mid) / alpha - mid;
        if (std::abs(alpha * mid - g(mid)) < kResidualTol) return mid;
        (h > 0.0 ? lo : hi) = mid;
    }
    throw NoConvergence("steady_state: no convergence, bracket [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] at phi=" + std::to_string(phi));
}

struct TransferCurve {
    std::vector<double> phi;
    std::vector<double> s_ss;
    double bias = 0.0;
    double alpha = 0.0;
    SourceKind kind = SourceKind::Dendrite;

    void validate() const {
        for (double v : s_ss)
            if (!(v >= 0.0)) throw InvariantViolation("transfer curve: s_ss must be >= 0");
        for (std::size_t i = 0; i + 1 < s_ss.size(); ++i)
            if (s_ss[i + 1] < s_ss[i] - 1e-9)
                throw InvariantViolation("transfer curve: s_ss must be nondecreasing in phi");
    }
};

/// Sweep the steady state over phi in [0, 0.5].
inline TransferCurve transfer_curve(const SourceFunction& sf, double bias, double alpha,
                                    std::size_t n_samples) {
    if (n_samples < 2) throw ValidationError("transfer_curve: need at least 2 samples");
    TransferCurve tc;
    tc.bias = bias;
    tc.alpha = alpha;
    tc.kind = sf.kind;
    tc.phi.resize(n_samples);
    tc.s_ss.resize(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        tc.phi[k] = 0.5 * static_cast<double>(k) / static_cast<double>(n_samples - 1);
        try {
            tc.s_ss[k] = steady_state(sf, bias, tc.phi[k], alpha);
        } catch (const NoConvergence& e) {
            throw NoConvergence(std::string(e.what()) + " [transfer curve phi=" +
                                std::to_string(tc.phi[k]) + "]");
        }
    }
    tc.validate();
    return tc;
}

/// Sign changes of the second difference of s_ss(phi), ignoring wiggles below
/// tol. One inflection = sigmoid-like.
inline int count_inflections(const TransferCurve& tc, double tol_frac = 1e-3) {
    const std::size_t n = tc.s_ss.size();
    if (n < 3) return 0;
    double scale = 0.0;
    std::vector<double> d2(n - 2);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        d2[k - 1] = tc.s_ss[k + 1] - 2.0 * tc.s_ss[k] + tc.s_ss[k - 1];
        scale = std::max(scale, std::abs(d2[k - 1]));
    }
    const double tol = tol_frac * scale;
    int flips = 0, last_sign = 0;
    for (double v : d2) {
        if (std::abs(v) <= tol) continue;
        const int sign = v > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++flips;
        last_sign = sign;
    }
    return flips;
}

/// E_i = 1/2 * beta_i * s_i^2, per dendrite.
inline std::vector<double> dendrite_energy(const std::vector<double>& s,
                                           const std::vector<DendriteSpec>& specs) {
    if (s.size() != specs.size()) throw ValidationError("dendrite_energy: length mismatch");
    std::vector<double> e(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i])) throw InvariantViolation("dendrite_energy: non-finite state");
        e[i] = 0.5 * specs[i].beta * s[i] * s[i];
    }
    return e;
}

}  // namespace soen::analysis
