#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "soen/errors.hpp"

namespace soen {

enum class SourceKind { Dendrite, Neuron };

inline const char* to_string(SourceKind k) {
    return k == SourceKind::Dendrite ? "dendrite" : "neuron";
}

/// Counts fail-soft clamps applied during source evaluation.
struct ClampStats {
    std::uint64_t flux_clamped = 0;   // queries with |phi| > 0.5
    std::uint64_t signal_clamped = 0; // queries with s outside the grid hull

    ClampStats& operator+=(const ClampStats& o) {
        flux_clamped += o.flux_clamped;
        signal_clamped += o.signal_clamped;
        return *this;
    }
};

/// Tabulated flux-quantum production rate g(phi, s; i_b).
/// values are stored row-major as (bias, phi, s).
struct SourceFunction {
    SourceKind kind = SourceKind::Dendrite;
    std::vector<double> bias_grid;
    std::vector<double> phi_grid;
    std::vector<double> s_grid;
    std::vector<double> values;

    std::size_t n_bias() const { return bias_grid.size(); }
    std::size_t n_phi() const { return phi_grid.size(); }
    std::size_t n_s() const { return s_grid.size(); }

    double at(std::size_t b, std::size_t p, std::size_t s) const {
        return values[(b * phi_grid.size() + p) * s_grid.size() + s];
    }
    double& at(std::size_t b, std::size_t p, std::size_t s) {
        return values[(b * phi_grid.size() + p) * s_grid.size() + s];
    }

    void validate() const;
};

namespace detail {

inline bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] < v[i + 1])) return false;
    return !v.empty();
}

/// Index i such that grid[i] <= x <= grid[i+1], with x already inside the hull.
inline std::size_t bracket(const std::vector<double>& grid, double x) {
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    if (i > 0) --i;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    return i;
}

inline double lerp_frac(const std::vector<double>& grid, std::size_t i, double x) {
    const double lo = grid[i], hi = grid[i + 1];
    return (x - lo) / (hi - lo);
}

}  // namespace detail

inline void SourceFunction::validate() const {
    if (bias_grid.empty() || phi_grid.size() < 2 || s_grid.size() < 2)
        throw InvariantViolation("source function: grids must be non-empty (phi and s need >= 2 nodes)");
    if (!detail::strictly_increasing(bias_grid) || !detail::strictly_increasing(phi_grid) ||
        !detail::strictly_increasing(s_grid))
        throw InvariantViolation("source function: grids must be strictly increasing");
    if (phi_grid.front() > 0.0 || phi_grid.back() < 0.5)
        throw InvariantViolation("source function: phi grid must span [0, 0.5]");
    if (s_grid.front() > 0.0)
        throw InvariantViolation("source function: s grid must start at 0");
    if (values.size() != bias_grid.size() * phi_grid.size() * s_grid.size())
        throw InvariantViolation("source function: value count does not match grid dimensions");

    double scale = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw InvariantViolation("source function: non-finite rate entry");
        if (v < 0.0) throw InvariantViolation("source function: negative rate entry");
        scale = std::max(scale, v);
    }
    const double tol = 1e-12 * std::max(scale, 1.0);

    // g nondecreasing in phi for every fixed (bias, s).
    for (std::size_t b = 0; b < n_bias(); ++b)
        for (std::size_t si = 0; si < n_s(); ++si)
            for (std::size_t p = 0; p + 1 < n_phi(); ++p)
                if (at(b, p + 1, si) < at(b, p, si) - tol)
                    throw InvariantViolation("source function: g not nondecreasing in phi");

    // Dendrite tables additionally: g nonincreasing in s for every fixed (bias, phi).
    if (kind == SourceKind::Dendrite) {
        for (std::size_t b = 0; b < n_bias(); ++b)
            for (std::size_t p = 0; p < n_phi(); ++p)
                for (std::size_t si = 0; si + 1 < n_s(); ++si)
                    if (at(b, p, si + 1) > at(b, p, si) + tol)
                        throw InvariantViolation("source function: g not nonincreasing in s");
    }
}

/// Trilinear lookup of g. phi is folded by symmetry to |phi| and clamped to 0.5;
/// s is clamped to the grid hull. bias outside the hull is refused.
inline double evaluate_source(const SourceFunction& sf, double bias, double phi, double s,
                              ClampStats* stats = nullptr) {
    if (bias < sf.bias_grid.front() || bias > sf.bias_grid.back())
        throw BiasOutOfRange("bias " + std::to_string(bias) + " outside table hull [" +
                             std::to_string(sf.bias_grid.front()) + ", " +
                             std::to_string(sf.bias_grid.back()) + "]");

    phi = std::abs(phi);
    if (phi > 0.5) {
        phi = 0.5;
        if (stats) ++stats->flux_clamped;
    }
    if (s < sf.s_grid.front() || s > sf.s_grid.back()) {
        s = std::clamp(s, sf.s_grid.front(), sf.s_grid.back());
        if (stats) ++stats->signal_clamped;
    }

    const std::size_t p = detail::bracket(sf.phi_grid, phi);
    const std::size_t q = detail::bracket(sf.s_grid, s);
    const double fp = detail::lerp_frac(sf.phi_grid, p, phi);
    const double fq = detail::lerp_frac(sf.s_grid, q, s);

    auto plane = [&](std::size_t b) {
        const double g00 = sf.at(b, p, q), g01 = sf.at(b, p, q + 1);
        const double g10 = sf.at(b, p + 1, q), g11 = sf.at(b, p + 1, q + 1);
        return (1.0 - fp) * ((1.0 - fq) * g00 + fq * g01) + fp * ((1.0 - fq) * g10 + fq * g11);
    };

    if (sf.bias_grid.size() == 1) return plane(0);
    const std::size_t b = detail::bracket(sf.bias_grid, bias);
    const double fb = detail::lerp_frac(sf.bias_grid, b, bias);
    return (1.0 - fb) * plane(b) + fb * plane(b + 1);
}

// ---------------------------------------------------------------------------
// Table file I/O.
//
// UTF-8 text, '#' starts a comment:
//   soen-sf v1 <dendrite|neuron>
//   bias <k> v1 ... vk
//   phi <m> v1 ... vm
//   s <n> v1 ... vn
// then k*m lines of n whitespace-separated rates, row-major (bias, phi).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
}

inline std::vector<double> parse_grid_line(const std::string& line, const std::string& name) {
    std::istringstream ss(line);
    std::string key;
    std::size_t count = 0;
    if (!(ss >> key >> count) || key != name)
        throw ParseError("source file: expected '" + name + " <count> ...' line");
    std::vector<double> grid(count);
    for (auto& v : grid)
        if (!(ss >> v)) throw ParseError("source file: short " + name + " grid");
    double trailing;
    if (ss >> trailing) throw ParseError("source file: extra values on " + name + " grid line");
    if (!strictly_increasing(grid))
        throw ParseError("source file: " + name + " grid not strictly increasing");
    return grid;
}

}  // namespace detail

inline SourceFunction load_source_function(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open source file: " + path);

    std::string line;
    if (!detail::next_data_line(in, line)) throw ParseError("source file: empty: " + path);
    {
        std::istringstream ss(line);
        std::string magic, ver, kind;
        ss >> magic >> ver >> kind;
        if (magic != "soen-sf" || ver != "v1") throw ParseError("source file: bad header: " + path);
        SourceFunction sf;
        if (kind == "dendrite")
            sf.kind = SourceKind::Dendrite;
        else if (kind == "neuron")
            sf.kind = SourceKind::Neuron;
        else
            throw ParseError("source file: unknown kind '" + kind + "'");

        if (!detail::next_data_line(in, line)) throw ParseError("source file: missing bias grid");
        sf.bias_grid = detail::parse_grid_line(line, "bias");
        if (!detail::next_data_line(in, line)) throw ParseError("source file: missing phi grid");
        sf.phi_grid = detail::parse_grid_line(line, "phi");
        if (!detail::next_data_line(in, line)) throw ParseError("source file: missing s grid");
        sf.s_grid = detail::parse_grid_line(line, "s");

        const std::size_t rows = sf.bias_grid.size() * sf.phi_grid.size();
        const std::size_t cols = sf.s_grid.size();
        sf.values.reserve(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!detail::next_data_line(in, line))
                throw ParseError("source file: expected " + std::to_string(rows) + " data rows, got " +
                                 std::to_string(r));
            std::istringstream ss2(line);
            double v;
            std::size_t c = 0;
            while (ss2 >> v) {
                sf.values.push_back(v);
                ++c;
            }
            if (c != cols)
                throw ParseError("source file: row " + std::to_string(r) + " has " + std::to_string(c) +
                                 " values, expected " + std::to_string(cols));
        }
        sf.validate();
        return sf;
    }
}

inline void save_source_function(const SourceFunction& sf, const std::string& path) {
    sf.validate();
    std::ofstream out(path);
    if (!out) throw Error("cannot write source file: " + path);

    out << "soen-sf v1 " << to_string(sf.kind) << "\n";
    auto grid_line = [&](const char* name, const std::vector<double>& g) {
        out << name << ' ' << g.size();
        for (double v : g) out << ' ' << detail::fmt17(v);
        out << "\n";
    };
    grid_line("bias", sf.bias_grid);
    grid_line("phi", sf.phi_grid);
    grid_line("s", sf.s_grid);

    const std::size_t rows = sf.bias_grid.size() * sf.phi_grid.size();
    const std::size_t cols = sf.s_grid.size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ' ';
            out << detail::fmt17(sf.values[r * cols + c]);
        }
        out << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// CompiledSource: a source function with the bias interpolation resolved once.
// The engine evaluates one of these per dendrite per step, so the hot path is
// a bilinear lookup with an O(1) index for uniform grids.
// ---------------------------------------------------------------------------

class CompiledSource {
  public:
    CompiledSource() = default;

    CompiledSource(const SourceFunction& sf, double bias) {
        if (bias < sf.bias_grid.front() || bias > sf.bias_grid.back())
            throw BiasOutOfRange("bias " + std::to_string(bias) + " outside table hull");
        phi_grid_ = sf.phi_grid;
        s_grid_ = sf.s_grid;
        const std::size_t np = phi_grid_.size(), ns = s_grid_.size();
        slice_.resize(np * ns);
        if (sf.bias_grid.size() == 1) {
            std::copy(sf.values.begin(), sf.values.end(), slice_.begin());
        } else {
            const std::size_t b = detail::bracket(sf.bias_grid, bias);
            const double fb = detail::lerp_frac(sf.bias_grid, b, bias);
            for (std::size_t i = 0; i < np * ns; ++i)
                slice_[i] = (1.0 - fb) * sf.values[b * np * ns + i] + fb * sf.values[(b + 1) * np * ns + i];
        }
        phi_uniform_ = uniform_step(phi_grid_, dphi_inv_);
        s_uniform_ = uniform_step(s_grid_, ds_inv_);
    }

    double operator()(double phi, double s, ClampStats& stats) const {
        phi = std::abs(phi);
        if (phi > 0.5) {
            phi = 0.5;
            ++stats.flux_clamped;
        }
        if (s < s_grid_.front() || s > s_grid_.back()) {
            s = std::clamp(s, s_grid_.front(), s_grid_.back());
            ++stats.signal_clamped;
        }
        std::size_t p, q;
        double fp, fq;
        locate(phi_grid_, phi_uniform_, dphi_inv_, phi, p, fp);
        locate(s_grid_, s_uniform_, ds_inv_, s, q, fq);
        const std::size_t ns = s_grid_.size();
        const double* row0 = &slice_[p * ns + q];
        const double* row1 = row0 + ns;
        return (1.0 - fp) * ((1.0 - fq) * row0[0] + fq * row0[1]) +
               fp * ((1.0 - fq) * row1[0] + fq * row1[1]);
    }

  private:
    static bool uniform_step(const std::vector<double>& g, double& inv) {
        const double h = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
        for (std::size_t i = 0; i + 1 < g.size(); ++i)
            if (std::abs((g[i + 1] - g[i]) - h) > 1e-12 * std::max(1.0, std::abs(h))) return false;
        inv = 1.0 / h;
        return true;
    }

    static void locate(const std::vector<double>& g, bool uniform, double inv, double x,
                       std::size_t& i, double& f) {
        if (uniform) {
            double u = (x - g.front()) * inv;
            i = static_cast<std::size_t>(u);
            if (i + 1 >= g.size()) i = g.size() - 2;
            f = (x - g[i]) * inv;
        } else {
            i = detail::bracket(g, x);
            f = detail::lerp_frac(g, i, x);
        }
    }

    std::vector<double> phi_grid_, s_grid_, slice_;
    double dphi_inv_ = 0.0, ds_inv_ = 0.0;
    bool phi_uniform_ = false, s_uniform_ = false;
};

}  // namespace soen
