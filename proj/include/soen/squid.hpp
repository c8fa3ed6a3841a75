#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "soen/errors.hpp"
#include "soen/flux_drive.hpp"

namespace soen::squid {

/// Symmetric two-junction SQUID with an L/r integration-loop load, in
/// dimensionless junction units (time in 1/omega_c, currents in I_c).
///
///   beta_C * d2phi_k/dt2 + dphi_k/dt + sin(phi_k) = i_k
///   i_{1,2} = (bias - s)/2 +/- j,  j = (phi_2 - phi_1 - 2*pi*phi_a) / beta_L
///   loop_beta * ds/dt = (v_1 + v_2)/2 - (loop_beta/loop_tau) * s
struct SquidCircuitParams {
    double beta_L = 1.0;        // SQUID loop inductance parameter
    double beta_C = 0.3;        // Stewart-McCumber damping parameter
    double bias = 1.7;          // total bias, split across both junctions
    double applied_flux = 0.0;  // phi_a
    double dt_jj = 0.01;        // integration step
    double loop_beta = 2.0 * M_PI * 1e3;
    double loop_tau = 1e4;

    void validate() const {
        if (!(dt_jj > 0.0)) throw InvariantViolation("squid: dt_jj must be > 0");
        if (beta_C < 0.0) throw InvariantViolation("squid: beta_C must be >= 0");
        if (!(bias > 0.0)) throw InvariantViolation("squid: bias must be > 0");
        if (!(beta_L > 0.0)) throw InvariantViolation("squid: beta_L must be > 0");
        if (!(loop_beta > 0.0) || !(loop_tau > 0.0))
            throw InvariantViolation("squid: loop parameters must be > 0");
    }
};

struct SquidTrajectory {
    double dt = 0.0;
    std::vector<double> phi1, phi2, s;  // one sample per step, including t=0
};

namespace detail {

/// Circuit state and one RK4 step. s can be pinned (controlled variable) or
/// evolve with the loop equation.
struct CircuitState {
    double phi1 = 0.0, v1 = 0.0, phi2 = 0.0, v2 = 0.0, s = 0.0;
};

struct Derivs {
    double dphi1, dv1, dphi2, dv2, ds;
};

inline Derivs rhs(const SquidCircuitParams& p, const CircuitState& x, double phi_a, bool pin_s) {
    const double j = (x.phi2 - x.phi1 - 2.0 * M_PI * phi_a) / p.beta_L;
    const double half_bias = 0.5 * (p.bias - x.s);
    Derivs d;
    if (p.beta_C > 0.0) {
        d.dphi1 = x.v1;
        d.dphi2 = x.v2;
        d.dv1 = (half_bias + j - x.v1 - std::sin(x.phi1)) / p.beta_C;
        d.dv2 = (half_bias - j - x.v2 - std::sin(x.phi2)) / p.beta_C;
    } else {
        d.dphi1 = half_bias + j - std::sin(x.phi1);
        d.dphi2 = half_bias - j - std::sin(x.phi2);
        d.dv1 = d.dv2 = 0.0;
    }
    const double v_mean = p.beta_C > 0.0 ? 0.5 * (x.v1 + x.v2) : 0.5 * (d.dphi1 + d.dphi2);
    d.ds = pin_s ? 0.0 : (v_mean - (p.loop_beta / p.loop_tau) * x.s) / p.loop_beta;
    return d;
}

inline CircuitState advance(const CircuitState& x, const Derivs& d, double h) {
    return {x.phi1 + h * d.dphi1, x.v1 + h * d.dv1, x.phi2 + h * d.dphi2, x.v2 + h * d.dv2,
            x.s + h * d.ds};
}

inline CircuitState rk4_step(const SquidCircuitParams& p, const CircuitState& x, double phi_a,
                             bool pin_s) {
    const double h = p.dt_jj;
    const Derivs k1 = rhs(p, x, phi_a, pin_s);
    const Derivs k2 = rhs(p, advance(x, k1, 0.5 * h), phi_a, pin_s);
    const Derivs k3 = rhs(p, advance(x, k2, 0.5 * h), phi_a, pin_s);
    const Derivs k4 = rhs(p, advance(x, k3, h), phi_a, pin_s);
    CircuitState y = x;
    y.phi1 += h / 6.0 * (k1.dphi1 + 2.0 * k2.dphi1 + 2.0 * k3.dphi1 + k4.dphi1);
    y.v1 += h / 6.0 * (k1.dv1 + 2.0 * k2.dv1 + 2.0 * k3.dv1 + k4.dv1);
    y.phi2 += h / 6.0 * (k1.dphi2 + 2.0 * k2.dphi2 + 2.0 * k3.dphi2 + k4.dphi2);
    y.v2 += h / 6.0 * (k1.dv2 + 2.0 * k2.dv2 + 2.0 * k3.dv2 + k4.dv2);
    y.s += h / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
    return y;
}

inline void check_finite(const CircuitState& x, double t) {
    if (!std::isfinite(x.phi1) || !std::isfinite(x.phi2) || !std::isfinite(x.v1) ||
        !std::isfinite(x.v2) || !std::isfinite(x.s))
        throw NonFiniteState("squid integration diverged at t=" + std::to_string(t) +
                             " (dt_jj too large?)");
}

}  // namespace detail

/// Integrate the full circuit at constant applied flux with the loop evolving.
inline SquidTrajectory integrate_squid(const SquidCircuitParams& params, double duration,
                                       std::size_t record_stride = 1) {
    params.validate();
    if (!(duration > 0.0)) throw InvariantViolation("integrate_squid: duration must be > 0");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(duration / params.dt_jj));
    detail::CircuitState x;
    SquidTrajectory traj;
    traj.dt = params.dt_jj * static_cast<double>(record_stride);
    traj.phi1.push_back(x.phi1);
    traj.phi2.push_back(x.phi2);
    traj.s.push_back(x.s);
    for (std::size_t p = 0; p < n_steps; ++p) {
        x = detail::rk4_step(params, x, params.applied_flux, /*pin_s=*/false);
        if ((p & 1023u) == 0) detail::check_finite(x, (p + 1) * params.dt_jj);
        if ((p + 1) % record_stride == 0) {
            traj.phi1.push_back(x.phi1);
            traj.phi2.push_back(x.phi2);
            traj.s.push_back(x.s);
        }
    }
    detail::check_finite(x, duration);
    return traj;
}

/// Integrate the full circuit under a time-varying external flux drive,
/// recording the loop current s at every record_stride-th circuit step.
/// Used as the first-principles reference for the low-pass equivalence check.
inline SquidTrajectory integrate_squid_driven(const SquidCircuitParams& params,
                                              const DriveSeries& flux, double duration,
                                              std::size_t record_stride) {
    params.validate();
    flux.validate();
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(duration / params.dt_jj));
    detail::CircuitState x;
    std::size_t cursor = 0;
    SquidTrajectory traj;
    traj.dt = params.dt_jj * static_cast<double>(record_stride);
    traj.phi1.push_back(x.phi1);
    traj.phi2.push_back(x.phi2);
    traj.s.push_back(x.s);
    for (std::size_t p = 0; p < n_steps; ++p) {
        const double t_next = static_cast<double>(p + 1) * params.dt_jj;
        const double phi_a = flux.sample(t_next, cursor);
        x = detail::rk4_step(params, x, phi_a, /*pin_s=*/false);
        if ((p & 1023u) == 0) detail::check_finite(x, t_next);
        if ((p + 1) % record_stride == 0) {
            traj.phi1.push_back(x.phi1);
            traj.phi2.push_back(x.phi2);
            traj.s.push_back(x.s);
        }
    }
    detail::check_finite(x, duration);
    return traj;
}

/// Count of full 2*pi advances of the mean junction phase in a trajectory.
inline std::uint64_t count_phase_slips(const SquidTrajectory& traj) {
    if (traj.phi1.empty()) return 0;
    const double theta0 = 0.5 * (traj.phi1.front() + traj.phi2.front());
    const double thetaN = 0.5 * (traj.phi1.back() + traj.phi2.back());
    const double adv = thetaN - theta0;
    return adv <= 0.0 ? 0 : static_cast<std::uint64_t>(adv / (2.0 * M_PI));
}

struct RateMeasurement {
    double phi = 0.0;
    double s = 0.0;
    double bias = 0.0;
    double g_measured = 0.0;  // flux quanta per unit time / (omega_c / 2 pi)
    double wall_seconds = 0.0;
    std::uint64_t slips = 0;
};

/// Steady-state flux-quantum production rate with the loop current pinned at
/// params' s (the controlled variable; loop decay disabled). The rate is taken
/// between the first and last 2*pi crossing of the mean phase inside the
/// window that follows the transient discard.
inline RateMeasurement measure_rate(const SquidCircuitParams& params, double s_pinned,
                                    double window = 800.0) {
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();

    RateMeasurement out;
    out.phi = params.applied_flux;
    out.s = s_pinned;
    out.bias = params.bias;

    for (int attempt = 0; attempt < 2; ++attempt) {
        const double total = window * (attempt == 0 ? 1.0 : 2.0);
        const double transient = 0.2 * total;
        const std::size_t n_steps = static_cast<std::size_t>(std::llround(total / params.dt_jj));
        const std::size_t skip = static_cast<std::size_t>(std::llround(transient / params.dt_jj));

        detail::CircuitState x;
        x.s = s_pinned;
        std::vector<double> crossings;  // interpolated times of 2*pi marks
        double mark = 0.0;
        bool mark_set = false;
        double theta_prev = 0.5 * (x.phi1 + x.phi2);
        for (std::size_t p = 0; p < n_steps; ++p) {
            x = detail::rk4_step(params, x, params.applied_flux, /*pin_s=*/true);
            if ((p & 1023u) == 0) detail::check_finite(x, (p + 1) * params.dt_jj);
            const double theta = 0.5 * (x.phi1 + x.phi2);
            const double t_next = static_cast<double>(p + 1) * params.dt_jj;
            if (p + 1 > skip) {
                if (!mark_set) {
                    mark = 2.0 * M_PI * std::ceil(theta / (2.0 * M_PI) + 1e-12);
                    mark_set = true;
                }
                while (theta >= mark) {
                    const double f = (mark - theta_prev) / (theta - theta_prev);
                    crossings.push_back(t_next - params.dt_jj + f * params.dt_jj);
                    mark += 2.0 * M_PI;
                }
            }
            theta_prev = theta;
        }

        if (crossings.size() < 4) {
            // Below (or at) the flux threshold: no sustained slipping.
            out.g_measured = 0.0;
            out.slips = crossings.size();
            break;
        }
        const std::size_t n = crossings.size();
        const std::size_t mid = n / 2;
        const double rate_a = static_cast<double>(mid - 1) / (crossings[mid - 1] - crossings[0]);
        const double rate_b = static_cast<double>(n - mid - 1) / (crossings[n - 1] - crossings[mid]);
        const double rate = static_cast<double>(n - 1) / (crossings[n - 1] - crossings[0]);
        const double drift = std::abs(rate_a - rate_b) / rate;
        const double tol = std::max(0.01, 2.0 / static_cast<double>(mid));
        if (drift <= tol) {
            out.g_measured = 2.0 * M_PI * rate;
            out.slips = n;
            break;
        }
        if (attempt == 1)
            throw NoSteadyState("slip rate did not converge (phi=" + std::to_string(params.applied_flux) +
                                ", s=" + std::to_string(s_pinned) + ", bias=" +
                                std::to_string(params.bias) + ", drift=" + std::to_string(drift) + ")");
    }

    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace soen::squid
