#pragma once

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "soen/config.hpp"
#include "soen/csv.hpp"
#include "soen/experiments.hpp"

namespace soen::artifacts {

/// One run's complete output set: the per-run directory name (config hash)
/// and the named file bodies, fully rendered. Writing them to disk is the
/// caller's concern, so reruns can be compared byte-for-byte in memory.
struct Artifacts {
    std::string dir_name;
    std::vector<std::pair<std::string, std::string>> files;

    const std::string* find(const std::string& name) const {
        for (const auto& [n, body] : files)
            if (n == name) return &body;
        return nullptr;
    }
};

namespace detail {

inline void add(Artifacts& a, std::string name, std::string body) {
    a.files.emplace_back(std::move(name), std::move(body));
}

}  // namespace detail

/// Simulate the configured network and render manifest + trace (+ spike) CSVs.
inline Artifacts run_artifacts(const config::RunConfig& cfg, int workers = default_workers()) {
    Artifacts out;
    out.dir_name = config::config_hash(cfg);
    detail::add(out, "manifest.ini", config::manifest_text(cfg));

    auto snet = cfg.build();
    bool second_order = false;
    for (const auto& spec : snet.base.specs)
        if (spec.kind == DendriteKind::SecondOrder) second_order = true;
    const auto s0 = NetworkState::zeros(snet.base.n(), second_order);
    const auto tc = cfg.trace_config();

    auto render_trace = [&](const TraceBuffer& tb) {
        std::ostringstream ss;
        csv::write_trace(ss, tb, cfg.omega_c);
        return ss.str();
    };

    if (cfg.engine == config::RunConfig::Engine::Phenomenological) {
        detail::add(out, "trace.csv", render_trace(run(snet.base, s0, tc, workers)));
        return out;
    }

    const auto res = run_spiking(snet, s0, tc);
    std::ostringstream spikes;
    csv::write_spikes(spikes, res.spikes, cfg.omega_c);
    if (cfg.engine == config::RunConfig::Engine::Spiking) {
        detail::add(out, "trace.csv", render_trace(res.trace));
        detail::add(out, "spikes.csv", spikes.str());
        return out;
    }

    // Both: the spiking run and a plain phenomenological run of the same base.
    detail::add(out, "trace_spiking.csv", render_trace(res.trace));
    detail::add(out, "spikes.csv", spikes.str());
    detail::add(out, "trace_phenomenological.csv", render_trace(run(snet.base, s0, tc, workers)));
    return out;
}

/// Resolve the [experiment] key/value section (plus [run] timing/seed keys)
/// into an ExperimentConfig. Table files are loaded from the paths given by
/// the g_d / g_n keys. The experiment kind comes from the "kind" key.
struct ResolvedExperiment {
    experiments::ExperimentKind kind = experiments::ExperimentKind::StepResponse;
    experiments::ExperimentConfig cfg;
    std::string g_d_file, g_n_file;
};

inline ResolvedExperiment resolve_experiment(const config::RunConfig& rc) {
    ResolvedExperiment r;
    auto& e = r.cfg;
    e.omega_c = rc.omega_c;
    if (rc.dt_ns > 0.0) e.dt_ns = rc.dt_ns;
    if (rc.t_end_ns > 0.0) e.t_end_ns = rc.t_end_ns;
    e.trace_stride = rc.trace_stride;
    e.has_seed = rc.has_seed;
    e.seed = rc.seed;

    bool have_kind = false;
    for (const auto& [key, val] : rc.experiment_kv) {
        const std::string where = "[experiment] " + key;
        auto num = [&] { return config::detail::parse_double(val, where); };
        auto list = [&] { return config::detail::parse_list(val, where); };
        if (key == "kind") {
            r.kind = experiments::experiment_kind_from_string(val);
            have_kind = true;
        } else if (key == "g_d") r.g_d_file = val;
        else if (key == "g_n") r.g_n_file = val;
        else if (key == "bias_in") e.bias_in = num();
        else if (key == "beta_in") e.beta_in = num();
        else if (key == "tau_in_ns") e.tau_in_ns = num();
        else if (key == "tau_in2_ns") e.tau_in2_ns = num();
        else if (key == "w_in") e.w_in = num();
        else if (key == "w_in2") e.w_in2 = num();
        else if (key == "bias_n") e.bias_n = num();
        else if (key == "beta_ni") e.beta_ni = num();
        else if (key == "tau_ni_ns") e.tau_ni_ns = num();
        else if (key == "s_th") e.s_th = num();
        else if (key == "j_ref") e.j_ref = num();
        else if (key == "t_tx_ns") e.t_tx_ns = num();
        else if (key == "phi_spd") e.phi_spd = num();
        else if (key == "tau_spd_ns") e.tau_spd_ns = num();
        else if (key == "bias_d") e.bias_d = num();
        else if (key == "beta_out") e.beta_out = num();
        else if (key == "tau_out_ns") e.tau_out_ns = num();
        else if (key == "step_flux") e.step_flux = num();
        else if (key == "t_on_ns") e.t_on_ns = num();
        else if (key == "n_events")
            e.n_events = static_cast<std::size_t>(config::detail::parse_int(val, where));
        else if (key == "isi_ns") e.isi_ns = num();
        else if (key == "isi_min_ns") e.isi_min_ns = num();
        else if (key == "isi_max_ns") e.isi_max_ns = num();
        else if (key == "tau_out_sweep_ns") e.tau_out_sweep_ns = list();
        else if (key == "bias_sweep") e.bias_sweep = list();
        else if (key == "delay_sweep_ns") e.delay_sweep_ns = list();
        else throw ParseError("config: [experiment] unknown key '" + key + "'");
    }
    if (!have_kind) throw ValidationError("experiment: missing 'kind' in [experiment] section");
    if (r.g_d_file.empty() || r.g_n_file.empty())
        throw ValidationError("experiment: [experiment] must name g_d and g_n table files");
    e.g_d = load_source_function(r.g_d_file);
    e.g_n = load_source_function(r.g_n_file);
    return r;
}

/// Echo every experiment parameter (defaults resolved) so the manifest fully
/// determines the run.
inline config::RunConfig normalized_experiment_config(const ResolvedExperiment& r) {
    using soen::detail::fmt17;
    const auto& e = r.cfg;
    config::RunConfig rc;
    rc.omega_c = e.omega_c;
    rc.dt_ns = e.dt_ns;
    rc.t_end_ns = e.t_end_ns;
    rc.trace_stride = e.trace_stride;
    rc.has_seed = e.has_seed;
    rc.seed = e.seed;

    auto list17 = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + soen::detail::fmt17(v[i]);
        return s;
    };
    auto& kv = rc.experiment_kv;
    kv.emplace_back("kind", experiments::to_string(r.kind));
    kv.emplace_back("g_d", r.g_d_file);
    kv.emplace_back("g_n", r.g_n_file);
    kv.emplace_back("bias_in", fmt17(e.bias_in));
    kv.emplace_back("beta_in", fmt17(e.beta_in));
    kv.emplace_back("tau_in_ns", fmt17(e.tau_in_ns));
    kv.emplace_back("tau_in2_ns", fmt17(e.tau_in2_ns));
    kv.emplace_back("w_in", fmt17(e.w_in));
    kv.emplace_back("w_in2", fmt17(e.w_in2));
    kv.emplace_back("bias_n", fmt17(e.bias_n));
    kv.emplace_back("beta_ni", fmt17(e.beta_ni));
    kv.emplace_back("tau_ni_ns", fmt17(e.tau_ni_ns));
    kv.emplace_back("s_th", fmt17(e.s_th));
    kv.emplace_back("j_ref", fmt17(e.j_ref));
    kv.emplace_back("t_tx_ns", fmt17(e.t_tx_ns));
    kv.emplace_back("phi_spd", fmt17(e.phi_spd));
    kv.emplace_back("tau_spd_ns", fmt17(e.tau_spd_ns));
    kv.emplace_back("bias_d", fmt17(e.bias_d));
    kv.emplace_back("beta_out", fmt17(e.beta_out));
    kv.emplace_back("tau_out_ns", fmt17(e.tau_out_ns));
    kv.emplace_back("step_flux", fmt17(e.step_flux));
    kv.emplace_back("t_on_ns", fmt17(e.t_on_ns));
    kv.emplace_back("n_events", std::to_string(e.n_events));
    kv.emplace_back("isi_ns", fmt17(e.isi_ns));
    kv.emplace_back("isi_min_ns", fmt17(e.isi_min_ns));
    kv.emplace_back("isi_max_ns", fmt17(e.isi_max_ns));
    if (!e.tau_out_sweep_ns.empty()) kv.emplace_back("tau_out_sweep_ns", list17(e.tau_out_sweep_ns));
    if (!e.bias_sweep.empty()) kv.emplace_back("bias_sweep", list17(e.bias_sweep));
    if (!e.delay_sweep_ns.empty()) kv.emplace_back("delay_sweep_ns", list17(e.delay_sweep_ns));
    return rc;
}

/// Run a comparison experiment and render manifest, sweep report, and
/// per-point trace/spike CSVs.
inline Artifacts experiment_artifacts(const config::RunConfig& rc) {
    const auto resolved = resolve_experiment(rc);
    const auto normalized = normalized_experiment_config(resolved);
    Artifacts out;
    out.dir_name = config::config_hash(normalized);
    detail::add(out, "manifest.ini", config::manifest_text(normalized));

    const auto rep = experiments::run_comparison_experiment(resolved.kind, resolved.cfg);

    std::vector<double> spikes_as_double(rep.n_spikes.begin(), rep.n_spikes.end());
    std::ostringstream report;
    csv::write_report(report, rep.param_name,
                      {"chi2", "peak_spiking", "peak_phenom", "n_spikes"}, rep.param,
                      {rep.chi2, rep.peak_spiking, rep.peak_phenom, spikes_as_double});
    detail::add(out, "report.csv", report.str());

    for (std::size_t k = 0; k < rep.pairs.size(); ++k) {
        const auto& pair = rep.pairs[k];
        const std::string tag = "pair_" + std::to_string(k);
        std::ostringstream sp, ph, sk;
        csv::write_trace(sp, pair.spiking, resolved.cfg.omega_c);
        csv::write_trace(ph, pair.phenom, resolved.cfg.omega_c);
        csv::write_spikes(sk, pair.spikes, resolved.cfg.omega_c);
        detail::add(out, tag + "_spiking.csv", sp.str());
        detail::add(out, tag + "_phenom.csv", ph.str());
        detail::add(out, tag + "_spikes.csv", sk.str());
    }
    return out;
}

}  // namespace soen::artifacts
