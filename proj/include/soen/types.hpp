#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "soen/errors.hpp"

namespace soen {

enum class DendriteKind { FirstOrder, SecondOrder, Soma, Refractory };

inline const char* to_string(DendriteKind k) {
    switch (k) {
        case DendriteKind::FirstOrder: return "first_order";
        case DendriteKind::SecondOrder: return "second_order";
        case DendriteKind::Soma: return "soma";
        case DendriteKind::Refractory: return "refractory";
    }
    return "?";
}

/// Per-dendrite loop parameters, all dimensionless.
/// beta = 2*pi*L*Ic/Phi0, tau = beta/alpha, gamma = 1/beta.
struct DendriteSpec {
    int id = -1;
    DendriteKind kind = DendriteKind::FirstOrder;
    double beta = 0.0;
    double tau = 0.0;
    double gamma = 0.0;
    double bias = 0.0;
    double omega_lc_ratio = 0.0;  // used only for SecondOrder
    int source_id = -1;
    double s_threshold = 0.0;     // used only for Soma
    bool has_threshold = false;

    void validate() const {
        if (!(beta > 0.0)) throw InvariantViolation("dendrite " + std::to_string(id) + ": beta must be > 0");
        if (!(tau > 0.0)) throw InvariantViolation("dendrite " + std::to_string(id) + ": tau must be > 0");
        if (!(bias > 0.0)) throw InvariantViolation("dendrite " + std::to_string(id) + ": bias must be > 0");
        if (std::abs(gamma * beta - 1.0) > 1e-12)
            throw InvariantViolation("dendrite " + std::to_string(id) + ": gamma*beta != 1");
        if (omega_lc_ratio < 0.0)
            throw InvariantViolation("dendrite " + std::to_string(id) + ": omega_lc_ratio must be >= 0");
        if (has_threshold != (kind == DendriteKind::Soma))
            throw InvariantViolation("dendrite " + std::to_string(id) +
                                     ": s_threshold is present iff kind is soma");
    }
};

/// Helper keeping gamma*beta = 1 exact by construction.
inline DendriteSpec make_dendrite(int id, DendriteKind kind, double beta, double tau, double bias,
                                  int source_id) {
    DendriteSpec d;
    d.id = id;
    d.kind = kind;
    d.beta = beta;
    d.tau = tau;
    d.gamma = 1.0 / beta;
    d.bias = bias;
    d.source_id = source_id;
    return d;
}

}  // namespace soen
