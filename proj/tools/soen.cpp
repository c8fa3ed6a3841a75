// soen: superconducting-optoelectronic-network simulator CLI.
//
// Subcommands:
//   run         simulate a configured network, write manifest + trace CSVs
//   gen-sf      generate a dendrite rate table from the SQUID circuit
//   gen-nsf     generate a neuron rate table from a spiking soma
//   experiment  run a matched spiking/phenomenological comparison sweep
//   validate    check a config or table file without writing anything
//
// All run outputs land in a per-run directory named by the config hash, so
// identical configurations map to identical paths. Worker count defaults to
// the SOEN_WORKERS environment variable.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "soen/artifacts.hpp"
#include "soen/tablegen.hpp"

namespace fs = std::filesystem;

namespace {

std::string write_artifacts(const soen::artifacts::Artifacts& a, const std::string& out_root) {
    const fs::path dir = fs::path(out_root) / a.dir_name;
    fs::create_directories(dir);
    for (const auto& [name, body] : a.files) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw soen::ValidationError("cannot write '" + (dir / name).string() + "'");
        f << body;
    }
    return dir.string();
}

soen::config::RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw soen::ValidationError("config: cannot open '" + path + "'");
    return soen::config::parse_config_text(in, path);
}

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"superconducting optoelectronic network simulator"};
    app.require_subcommand(1);

    std::string config_path, out_root = "runs", output_file, g_d_path, kind_name, target_path;
    int workers = soen::default_workers();

    // --- run ---
    auto* cmd_run = app.add_subcommand("run", "simulate a configured network");
    cmd_run->add_option("config", config_path, "configuration file")->required();
    cmd_run->add_option("-o,--out", out_root, "output root directory");
    cmd_run->add_option("-w,--workers", workers, "engine worker threads");

    // --- gen-sf ---
    auto* cmd_sf = app.add_subcommand("gen-sf", "generate a dendrite rate table");
    soen::tablegen::DendriteGridSpec grid;
    soen::squid::SquidCircuitParams circuit;
    double window = 800.0;
    cmd_sf->add_option("-o,--out", output_file, "output .sf file")->required();
    cmd_sf->add_option("--bias", grid.bias_grid, "bias grid (one table plane per value)");
    cmd_sf->add_option("--n-phi", grid.n_phi, "flux grid points on [0, 0.5]");
    cmd_sf->add_option("--n-s", grid.n_s, "signal grid points on [0, s-max]");
    cmd_sf->add_option("--s-max", grid.s_max, "signal grid upper edge");
    cmd_sf->add_option("--window", window, "rate measurement window (dimensionless)");
    cmd_sf->add_option("--beta-L", circuit.beta_L, "SQUID loop inductance parameter");
    cmd_sf->add_option("--beta-C", circuit.beta_C, "junction damping parameter");
    cmd_sf->add_option("--dt-jj", circuit.dt_jj, "junction integration step");
    cmd_sf->add_option("-w,--workers", workers, "parallel grid-node workers");

    // --- gen-nsf ---
    auto* cmd_nsf = app.add_subcommand("gen-nsf", "generate a neuron rate table");
    soen::tablegen::NeuronGenConfig ncfg;
    double omega_c = 100.0;
    double soma_tau_ns = 50.0, t_tx_ns = 5.0, tau_spd_ns = 50.0;
    double dt_ns = 0.5, transient_ns = 300.0, window_ns = 2000.0;
    cmd_nsf->add_option("-o,--out", output_file, "output .sf file")->required();
    cmd_nsf->add_option("--g-d", g_d_path, "dendrite table driven by the soma's synapse")->required();
    cmd_nsf->add_option("--bias", ncfg.neuron_bias_grid, "neuron bias grid (one plane per value)");
    cmd_nsf->add_option("--dendrite-bias", ncfg.dendrite_bias, "receiving dendrite bias");
    cmd_nsf->add_option("--n-phi", ncfg.n_phi, "flux grid points on [0, 0.5]");
    cmd_nsf->add_option("--n-s", ncfg.n_s, "signal grid points on [0, s-max]");
    cmd_nsf->add_option("--s-max", ncfg.s_max, "signal grid upper edge");
    cmd_nsf->add_option("--omega-c", omega_c, "rad/ns time conversion");
    cmd_nsf->add_option("--soma-beta", ncfg.soma_beta, "soma loop inductance (dimensionless)");
    cmd_nsf->add_option("--soma-tau-ns", soma_tau_ns, "soma integration time constant");
    cmd_nsf->add_option("--threshold", ncfg.s_threshold, "soma firing threshold");
    cmd_nsf->add_option("--j-ref", ncfg.j_ref, "refractory coupling weight");
    cmd_nsf->add_option("--t-tx-ns", t_tx_ns, "transmitter delay");
    cmd_nsf->add_option("--phi-spd", ncfg.phi_spd, "synapse pulse amplitude");
    cmd_nsf->add_option("--tau-spd-ns", tau_spd_ns, "synapse pulse decay");
    cmd_nsf->add_option("--dt-ns", dt_ns, "spiking integration step");
    cmd_nsf->add_option("--transient-ns", transient_ns, "settle time before measuring");
    cmd_nsf->add_option("--window-ns", window_ns, "rate measurement window");
    cmd_nsf->add_option("-w,--workers", workers, "parallel grid-column workers");

    // --- experiment ---
    auto* cmd_exp = app.add_subcommand("experiment", "run a spiking-vs-phenomenological comparison");
    cmd_exp->add_option("kind", kind_name,
                        "step_response | single_event | bias_sweep | pulse_train_periodic | "
                        "pulse_train_aperiodic | coincidence | sequence")
        ->required();
    cmd_exp->add_option("config", config_path, "configuration file with an [experiment] section")
        ->required();
    cmd_exp->add_option("-o,--out", out_root, "output root directory");

    // --- validate ---
    auto* cmd_val = app.add_subcommand("validate", "validate a config or .sf table file");
    cmd_val->add_option("path", target_path, "configuration or table file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_run) {
            const auto cfg = soen::config::parse_config(config_path);
            std::cout << write_artifacts(soen::artifacts::run_artifacts(cfg, workers), out_root)
                      << "\n";
        } else if (*cmd_sf) {
            const auto sf = soen::tablegen::generate_dendrite_source(grid, circuit, window, workers);
            soen::save_source_function(sf, output_file);
            std::cout << output_file << "\n";
        } else if (*cmd_nsf) {
            ncfg.soma_tau = soma_tau_ns * omega_c;
            ncfg.t_tx = t_tx_ns * omega_c;
            ncfg.tau_spd = tau_spd_ns * omega_c;
            ncfg.dt = dt_ns * omega_c;
            ncfg.transient = transient_ns * omega_c;
            ncfg.window = window_ns * omega_c;
            const auto g_d = soen::load_source_function(g_d_path);
            const auto g_n = soen::tablegen::generate_neuron_source(ncfg, g_d, workers);
            soen::save_source_function(g_n, output_file);
            std::cout << output_file << "\n";
        } else if (*cmd_exp) {
            auto cfg = parse_config_file(config_path);
            // The positional kind wins over (or supplies) the config's kind key.
            std::erase_if(cfg.experiment_kv, [](const auto& kv) { return kv.first == "kind"; });
            cfg.experiment_kv.emplace_back("kind", kind_name);
            soen::experiments::experiment_kind_from_string(kind_name);
            std::cout << write_artifacts(soen::artifacts::experiment_artifacts(cfg), out_root)
                      << "\n";
        } else if (*cmd_val) {
            if (has_suffix(target_path, ".sf")) {
                const auto sf = soen::load_source_function(target_path);
                std::cout << "OK: " << (sf.kind == soen::SourceKind::Dendrite ? "dendrite" : "neuron")
                          << " table, " << sf.n_bias() << " bias plane(s), " << sf.n_phi() << "x"
                          << sf.n_s() << " grid\n";
            } else {
                auto cfg = parse_config_file(target_path);
                if (cfg.dendrites.empty() && !cfg.experiment_kv.empty()) {
                    soen::artifacts::resolve_experiment(cfg);
                    std::cout << "OK: experiment config\n";
                } else {
                    soen::config::parse_config(target_path);
                    std::cout << "OK: run config\n";
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
