#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "soen/engine.hpp"
#include "soen/spiking.hpp"

namespace soen::config {

/// Grammar: '#' starts a comment; '[section]' or '[section <id>]' headers;
/// 'key = value' entries. Times carry an _ns suffix and are converted to
/// dimensionless units with omega_c (rad/ns) when the network is built.
/// The manifest is the same grammar with every default resolved, so a manifest
/// re-parses to an identical configuration.
struct RunConfig {
    enum class Engine { Phenomenological, Spiking, Both };

    Engine engine = Engine::Phenomenological;
    double omega_c = 1.0;  // rad/ns
    double dt_ns = 0.0;
    double t_end_ns = 0.0;
    double s_cap = 2.0;
    bool has_seed = false;
    std::uint64_t seed = 0;
    int trace_stride = 1;
    std::vector<int> trace_ids;  // empty = all

    struct SourceCfg {
        int id = -1;
        std::string file;
    };
    struct DendriteCfg {
        int id = -1;
        std::string kind = "first_order";
        double beta = 2.0 * M_PI * 1e3;
        double tau_ns = 50.0;
        double bias = 1.7;
        int source = 0;
        double threshold = 0.0;
        bool has_threshold = false;
        double omega_ratio = 0.0;
    };
    struct SomaCfg {
        int soma = -1;
        int refractory = -1;
        double j_ref = -0.35;
        double t_tx_ns = 5.0;
    };
    struct SynapseCfg {
        int from_soma = 0;
        int target = -1;
        double phi_spd = 0.25;
        double tau_spd_ns = 50.0;
    };
    struct EdgeCfg {
        int row = -1, col = -1;
        double weight = 0.0;
    };
    struct DriveCfg {
        int target = -1;
        std::string mode = "step";  // step | linear
        std::vector<double> times_ns, values;
    };
    struct PulseCfg {
        int target = -1;
        double amplitude = 0.0;
        double tau_ns = 50.0;
        std::vector<double> times_ns;
    };

    std::vector<SourceCfg> sources;
    std::vector<DendriteCfg> dendrites;
    std::vector<SomaCfg> somas;
    std::vector<SynapseCfg> synapses;
    std::vector<EdgeCfg> edges;
    std::vector<DriveCfg> drives;
    std::vector<PulseCfg> pulses;

    // Experiment parameters pass through uninterpreted; the experiment driver
    // owns their meaning, the manifest still echoes them.
    std::vector<std::pair<std::string, std::string>> experiment_kv;

    double to_dimensionless(double t_ns) const { return t_ns * omega_c; }

    /// Resolve files and units into a ready-to-run network. Phenomenological
    /// runs use .base; spiking runs use the whole structure.
    SpikingNetwork build() const {
        SpikingNetwork snet;
        Network& net = snet.base;

        if (sources.empty()) throw ValidationError("config: no [source] sections");
        for (std::size_t k = 0; k < sources.size(); ++k) {
            if (sources[k].id != static_cast<int>(k))
                throw ValidationError("config: source ids must be dense, 0..n-1");
            std::ifstream probe(sources[k].file);
            if (!probe)
                throw ValidationError("config: source " + std::to_string(k) +
                                      ": cannot open file '" + sources[k].file + "'");
            net.sources.push_back(load_source_function(sources[k].file));
        }

        if (dendrites.empty()) throw ValidationError("config: no [dendrite] sections");
        for (std::size_t k = 0; k < dendrites.size(); ++k) {
            const auto& d = dendrites[k];
            if (d.id != static_cast<int>(k))
                throw ValidationError("config: dendrite ids must be dense, 0..n-1");
            DendriteKind kind;
            if (d.kind == "first_order") kind = DendriteKind::FirstOrder;
            else if (d.kind == "second_order") kind = DendriteKind::SecondOrder;
            else if (d.kind == "soma") kind = DendriteKind::Soma;
            else if (d.kind == "refractory") kind = DendriteKind::Refractory;
            else throw ValidationError("config: dendrite " + std::to_string(k) +
                                       ": unknown kind '" + d.kind + "'");
            auto spec = make_dendrite(d.id, kind, d.beta, to_dimensionless(d.tau_ns), d.bias, d.source);
            spec.s_threshold = d.threshold;
            spec.has_threshold = d.has_threshold;
            spec.omega_lc_ratio = d.omega_ratio;
            net.specs.push_back(spec);
        }

        std::vector<CouplingMatrix::Entry> entries;
        for (const auto& e : edges) entries.push_back({e.row, e.col, e.weight});
        net.coupling = CouplingMatrix(static_cast<int>(net.specs.size()), entries);

        for (const auto& dv : drives) {
            DriveSeries series;
            if (dv.mode == "step") series.mode = DriveSeries::Mode::PiecewiseConstant;
            else if (dv.mode == "linear") series.mode = DriveSeries::Mode::PiecewiseLinear;
            else throw ValidationError("config: drive: unknown mode '" + dv.mode + "'");
            for (double t : dv.times_ns) series.times.push_back(to_dimensionless(t));
            series.values = dv.values;
            if (net.drive.series.count(dv.target))
                throw ValidationError("config: duplicate [drive] for dendrite " +
                                      std::to_string(dv.target));
            net.drive.series[dv.target] = std::move(series);
        }
        for (const auto& pc : pulses) {
            ExpPulseTrain train;
            train.amplitude = pc.amplitude;
            train.tau = to_dimensionless(pc.tau_ns);
            for (double t : pc.times_ns) train.times.push_back(to_dimensionless(t));
            net.drive.pulses[pc.target].push_back(std::move(train));
        }

        net.dt = to_dimensionless(dt_ns);
        net.t_end = to_dimensionless(t_end_ns);
        net.s_cap = s_cap;

        for (const auto& m : somas) snet.somas.push_back({m.soma, m.refractory, m.j_ref,
                                                          to_dimensionless(m.t_tx_ns)});
        for (const auto& sy : synapses)
            snet.synapses.push_back({sy.from_soma, sy.target, sy.phi_spd,
                                     to_dimensionless(sy.tau_spd_ns)});
        return snet;
    }

    TraceConfig trace_config() const { return {trace_ids, trace_stride}; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, const std::string& where) {
    std::istringstream ss(v);
    double x;
    if (!(ss >> x)) throw ParseError("config: " + where + ": expected a number, got '" + v + "'");
    return x;
}

inline long parse_int(const std::string& v, const std::string& where) {
    std::istringstream ss(v);
    long x;
    if (!(ss >> x)) throw ParseError("config: " + where + ": expected an integer, got '" + v + "'");
    return x;
}

inline std::vector<double> parse_list(const std::string& v, const std::string& where) {
    std::istringstream ss(v);
    std::vector<double> out;
    double x;
    while (ss >> x) out.push_back(x);
    std::string rest;
    if (ss.bad() || (ss >> rest && !rest.empty()))
        throw ParseError("config: " + where + ": malformed number list '" + v + "'");
    return out;
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& where) {
    std::istringstream ss(v);
    std::vector<int> out;
    long x;
    while (ss >> x) out.push_back(static_cast<int>(x));
    std::string rest;
    if (ss.bad() || (ss >> rest && !rest.empty()))
        throw ParseError("config: " + where + ": malformed integer list '" + v + "'");
    return out;
}

}  // namespace detail

inline RunConfig parse_config_text(std::istream& in, const std::string& origin = "<stream>") {
    RunConfig cfg;
    std::string line, section, section_arg;
    int line_no = 0;

    auto where = [&](const std::string& key) {
        return origin + ":" + std::to_string(line_no) + " [" + section +
               (section_arg.empty() ? "" : " " + section_arg) + "] " + key;
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("config: " + origin + ":" + std::to_string(line_no) +
                                 ": unterminated section header");
            std::istringstream ss(line.substr(1, line.size() - 2));
            ss >> section;
            section_arg.clear();
            ss >> section_arg;
            if (section == "dendrite") {
                RunConfig::DendriteCfg d;
                d.id = static_cast<int>(detail::parse_int(section_arg, where("id")));
                cfg.dendrites.push_back(d);
            } else if (section == "source") {
                RunConfig::SourceCfg s;
                s.id = static_cast<int>(detail::parse_int(section_arg, where("id")));
                cfg.sources.push_back(s);
            } else if (section == "drive") {
                RunConfig::DriveCfg d;
                d.target = static_cast<int>(detail::parse_int(section_arg, where("target")));
                cfg.drives.push_back(d);
            } else if (section == "pulses") {
                RunConfig::PulseCfg p;
                p.target = static_cast<int>(detail::parse_int(section_arg, where("target")));
                cfg.pulses.push_back(p);
            } else if (section == "soma") {
                cfg.somas.push_back({});
            } else if (section == "synapse") {
                cfg.synapses.push_back({});
            } else if (section == "run" || section == "coupling" || section == "experiment") {
                // no per-section state
            } else {
                throw ParseError("config: " + origin + ":" + std::to_string(line_no) +
                                 ": unknown section '" + section + "'");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: " + origin + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));

        if (section == "run") {
            if (key == "engine") {
                if (val == "phenomenological") cfg.engine = RunConfig::Engine::Phenomenological;
                else if (val == "spiking") cfg.engine = RunConfig::Engine::Spiking;
                else if (val == "both") cfg.engine = RunConfig::Engine::Both;
                else throw ParseError("config: " + where(key) + ": unknown engine '" + val + "'");
            } else if (key == "omega_c") cfg.omega_c = detail::parse_double(val, where(key));
            else if (key == "dt_ns") cfg.dt_ns = detail::parse_double(val, where(key));
            else if (key == "t_end_ns") cfg.t_end_ns = detail::parse_double(val, where(key));
            else if (key == "s_cap") cfg.s_cap = detail::parse_double(val, where(key));
            else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, where(key)));
                cfg.has_seed = true;
            } else if (key == "trace_stride") cfg.trace_stride = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "trace_ids") cfg.trace_ids = detail::parse_int_list(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "source") {
            if (cfg.sources.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& s = cfg.sources.back();
            if (key == "file") s.file = val;
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "dendrite") {
            if (cfg.dendrites.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& d = cfg.dendrites.back();
            if (key == "kind") d.kind = val;
            else if (key == "beta") d.beta = detail::parse_double(val, where(key));
            else if (key == "tau_ns") d.tau_ns = detail::parse_double(val, where(key));
            else if (key == "bias") d.bias = detail::parse_double(val, where(key));
            else if (key == "source") d.source = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "threshold") {
                d.threshold = detail::parse_double(val, where(key));
                d.has_threshold = true;
            } else if (key == "omega_ratio") d.omega_ratio = detail::parse_double(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "soma") {
            if (cfg.somas.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& m = cfg.somas.back();
            if (key == "soma") m.soma = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "refractory") m.refractory = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "j_ref") m.j_ref = detail::parse_double(val, where(key));
            else if (key == "t_tx_ns") m.t_tx_ns = detail::parse_double(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "synapse") {
            if (cfg.synapses.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& sy = cfg.synapses.back();
            if (key == "from_soma") sy.from_soma = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "target") sy.target = static_cast<int>(detail::parse_int(val, where(key)));
            else if (key == "phi_spd") sy.phi_spd = detail::parse_double(val, where(key));
            else if (key == "tau_spd_ns") sy.tau_spd_ns = detail::parse_double(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "coupling") {
            if (key != "edge") throw ParseError("config: " + where(key) + ": unknown key");
            std::istringstream ss(val);
            RunConfig::EdgeCfg e;
            if (!(ss >> e.row >> e.col >> e.weight))
                throw ParseError("config: " + where(key) + ": expected 'edge = row col weight'");
            cfg.edges.push_back(e);
        } else if (section == "drive") {
            if (cfg.drives.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& dv = cfg.drives.back();
            if (key == "mode") dv.mode = val;
            else if (key == "times_ns") dv.times_ns = detail::parse_list(val, where(key));
            else if (key == "values") dv.values = detail::parse_list(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "pulses") {
            if (cfg.pulses.empty()) throw ParseError("config: " + where(key) + ": key before section");
            auto& pc = cfg.pulses.back();
            if (key == "amplitude") pc.amplitude = detail::parse_double(val, where(key));
            else if (key == "tau_ns") pc.tau_ns = detail::parse_double(val, where(key));
            else if (key == "times_ns") pc.times_ns = detail::parse_list(val, where(key));
            else throw ParseError("config: " + where(key) + ": unknown key");
        } else if (section == "experiment") {
            cfg.experiment_kv.emplace_back(key, val);
        } else {
            throw ParseError("config: " + origin + ":" + std::to_string(line_no) +
                             ": key/value outside any section");
        }
    }
    return cfg;
}

/// Parse and fully validate: every reference is resolved and the network is
/// built once so unit/stability errors surface at parse time.
inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    RunConfig cfg = parse_config_text(in, path);
    auto snet = cfg.build();
    if (cfg.engine == RunConfig::Engine::Phenomenological)
        snet.base.validate(false);
    else
        snet.validate();
    if (cfg.trace_stride < 1) throw ValidationError("config: trace_stride must be >= 1");
    for (int id : cfg.trace_ids)
        if (id < 0 || id >= snet.base.n())
            throw ValidationError("config: trace_ids references unknown dendrite " + std::to_string(id));
    return cfg;
}

/// Complete echo of a configuration, defaults resolved, %.17g numbers.
/// Re-parsing the manifest reproduces the configuration (and hence all runs)
/// bit-identically.
inline void emit_manifest(const RunConfig& cfg, std::ostream& out) {
    using soen::detail::fmt17;
    auto list17 = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt17(v[i]);
        return s;
    };

    out << "[run]\n";
    out << "engine = " << (cfg.engine == RunConfig::Engine::Phenomenological ? "phenomenological"
                           : cfg.engine == RunConfig::Engine::Spiking        ? "spiking"
                                                                             : "both")
        << "\n";
    out << "omega_c = " << fmt17(cfg.omega_c) << "\n";
    out << "dt_ns = " << fmt17(cfg.dt_ns) << "\n";
    out << "t_end_ns = " << fmt17(cfg.t_end_ns) << "\n";
    out << "s_cap = " << fmt17(cfg.s_cap) << "\n";
    if (cfg.has_seed) out << "seed = " << cfg.seed << "\n";
    out << "trace_stride = " << cfg.trace_stride << "\n";
    if (!cfg.trace_ids.empty()) {
        out << "trace_ids =";
        for (int id : cfg.trace_ids) out << " " << id;
        out << "\n";
    }
    for (const auto& s : cfg.sources)
        out << "\n[source " << s.id << "]\nfile = " << s.file << "\n";
    for (const auto& d : cfg.dendrites) {
        out << "\n[dendrite " << d.id << "]\n";
        out << "kind = " << d.kind << "\n";
        out << "beta = " << fmt17(d.beta) << "\n";
        out << "tau_ns = " << fmt17(d.tau_ns) << "\n";
        out << "bias = " << fmt17(d.bias) << "\n";
        out << "source = " << d.source << "\n";
        if (d.has_threshold) out << "threshold = " << fmt17(d.threshold) << "\n";
        if (d.omega_ratio != 0.0) out << "omega_ratio = " << fmt17(d.omega_ratio) << "\n";
    }
    for (const auto& m : cfg.somas) {
        out << "\n[soma]\n";
        out << "soma = " << m.soma << "\n";
        out << "refractory = " << m.refractory << "\n";
        out << "j_ref = " << fmt17(m.j_ref) << "\n";
        out << "t_tx_ns = " << fmt17(m.t_tx_ns) << "\n";
    }
    for (const auto& sy : cfg.synapses) {
        out << "\n[synapse]\n";
        out << "from_soma = " << sy.from_soma << "\n";
        out << "target = " << sy.target << "\n";
        out << "phi_spd = " << fmt17(sy.phi_spd) << "\n";
        out << "tau_spd_ns = " << fmt17(sy.tau_spd_ns) << "\n";
    }
    if (!cfg.edges.empty()) {
        out << "\n[coupling]\n";
        for (const auto& e : cfg.edges)
            out << "edge = " << e.row << " " << e.col << " " << fmt17(e.weight) << "\n";
    }
    for (const auto& dv : cfg.drives) {
        out << "\n[drive " << dv.target << "]\n";
        out << "mode = " << dv.mode << "\n";
        out << "times_ns = " << list17(dv.times_ns) << "\n";
        out << "values = " << list17(dv.values) << "\n";
    }
    for (const auto& pc : cfg.pulses) {
        out << "\n[pulses " << pc.target << "]\n";
        out << "amplitude = " << fmt17(pc.amplitude) << "\n";
        out << "tau_ns = " << fmt17(pc.tau_ns) << "\n";
        out << "times_ns = " << list17(pc.times_ns) << "\n";
    }
    if (!cfg.experiment_kv.empty()) {
        out << "\n[experiment]\n";
        for (const auto& [k, v] : cfg.experiment_kv) out << k << " = " << v << "\n";
    }
}

inline std::string manifest_text(const RunConfig& cfg) {
    std::ostringstream ss;
    emit_manifest(cfg, ss);
    return ss.str();
}

/// FNV-1a over the manifest text: a stable per-run directory name.
inline std::string config_hash(const RunConfig& cfg) {
    const std::string text = manifest_text(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace soen::config
