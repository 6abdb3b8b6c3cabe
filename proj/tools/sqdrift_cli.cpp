#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sqdrift/bounds.hpp"
#include "sqdrift/determinant.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/oracle.hpp"
#include "sqdrift/pipeline.hpp"
#include "sqdrift/rng.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

// A config file may be a plain RunConfig or a manifest from a previous run;
// a manifest replays the run that produced it.
sqdrift::RunConfig load_config(const std::string& path) {
    const std::string text = slurp(path);
    const json j = json::parse(text);
    if (j.is_object() && j.contains("config")) return sqdrift::config_from_manifest(text);
    return sqdrift::config_from_json(text);
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;

    void apply(sqdrift::RunConfig& cfg) const {
        if (seed) cfg.master_seed = *seed;
        if (workers) cfg.workers = *workers;
        if (out) cfg.output_dir = *out;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "override master_seed");
    cmd->add_option("--workers", ov.workers, "override worker count (0: hardware threads)");
    cmd->add_option("--out", ov.out, "override output directory");
}

sqdrift::BoundParams params_from_json(const json& j) {
    sqdrift::BoundParams p;
    p.d = j.at("d").get<int>();
    p.n_steps = j.at("n_steps").get<long>();
    p.n_rand = j.at("n_rand").get<long>();
    p.shots = j.at("shots").get<long>();
    if (j.contains("delta_conf")) p.delta_conf = j.at("delta_conf").get<double>();
    if (j.contains("eps_reg")) p.eps_reg = j.at("eps_reg").get<double>();
    p.n_qubits = j.at("n_qubits").get<int>();
    p.l_important = j.at("l_important").get<long>();
    p.alpha0 = j.at("alpha0").get<double>();
    p.beta0 = j.at("beta0").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.t = j.at("t").get<double>();
    return p;
}

sqdrift::SpectralData spectral_from_json(const json& j) {
    sqdrift::SpectralData s;
    s.e0 = j.at("e0").get<double>();
    s.e1 = j.at("e1").get<double>();
    s.e_max = j.at("e_max").get<double>();
    s.h_norm = j.at("h_norm").get<double>();
    s.gamma0_sq = j.at("gamma0_sq").get<double>();
    s.delta = j.at("delta").get<double>();
    return s;
}

json spectral_to_json(const sqdrift::SpectralData& s) {
    return {{"e0", s.e0},         {"e1", s.e1},
            {"e_max", s.e_max},   {"h_norm", s.h_norm},
            {"gamma0_sq", s.gamma0_sq}, {"delta", s.delta}};
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
    sqdrift::RunConfig cfg = load_config(config_path);
    ov.apply(cfg);
    const sqdrift::RunManifest manifest = sqdrift::run_pipeline(cfg);
    std::cout << "energy " << std::setprecision(12) << manifest.energy << "\n"
              << "dimension " << manifest.dimension << "\n";
    if (manifest.oracle) {
        std::cout << "fci_energy " << manifest.oracle->fci_energy << "\n"
                  << "error " << manifest.oracle->error << "\n";
    }
    std::cout << "manifest " << cfg.output_dir << "/manifest.json\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::vector<double>& values, const Overrides& ov) {
    sqdrift::RunConfig cfg = load_config(config_path);
    ov.apply(cfg);
    const sqdrift::SweepAxis axis = sqdrift::sweep_axis_from_name(axis_name);
    const sqdrift::SweepResult result = sqdrift::sweep(cfg, axis, values);
    std::cout << result.csv;
    std::cerr << "wrote " << result.csv_path << "\n";
    return 0;
}

int cmd_bounds(const std::string& params_path, const std::string& input, int d, long n_steps,
               long n_rand, long shots, double delta_conf, double eps_reg,
               std::optional<long> l_important, std::optional<double> t,
               const std::string& out_path) {
    sqdrift::BoundParams params;
    sqdrift::SpectralData spectral;
    if (!params_path.empty()) {
        const json j = json::parse(slurp(params_path));
        params = params_from_json(j.at("params"));
        spectral = spectral_from_json(j.at("spectral"));
    } else if (!input.empty()) {
        const sqdrift::MolecularHamiltonian h = sqdrift::load_input(input);
        const sqdrift::TermDistribution dist = sqdrift::enumerate_terms(h);
        const sqdrift::FciResult fci = sqdrift::fci_solve(h);
        const sqdrift::ConcentrationProfile profile =
            sqdrift::concentration_profile(fci.ground_vector);
        spectral = fci.spectral;
        params.d = d;
        params.n_steps = n_steps;
        params.n_rand = n_rand;
        params.shots = shots;
        params.delta_conf = delta_conf;
        params.eps_reg = eps_reg;
        params.n_qubits = h.n_modes();
        params.l_important =
            l_important ? *l_important : static_cast<long>(profile.sorted_weights.size());
        params.alpha0 = profile.alpha(static_cast<std::size_t>(params.l_important));
        params.beta0 = profile.beta(static_cast<std::size_t>(params.l_important));
        params.lambda = dist.lambda;
        params.t = t ? *t : sqdrift::lemma_time(spectral);
    } else {
        throw std::runtime_error("bounds: pass --params or --input");
    }
    const sqdrift::BoundReport report = sqdrift::full_report(params, spectral);
    json j = json::parse(sqdrift::report_to_json(report));
    j["spectral"] = spectral_to_json(spectral);
    j["energy_error_bound_at_alpha0"] =
        sqdrift::energy_error_bound(spectral.h_norm, params.alpha0);
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        spill(out_path, text);
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_oracle(const std::string& input, int channel_steps, double channel_t, int channel_trials,
               std::uint64_t channel_seed, const std::string& out_path) {
    const sqdrift::MolecularHamiltonian h = sqdrift::load_input(input);
    const sqdrift::TermDistribution dist = sqdrift::enumerate_terms(h);
    const sqdrift::FciResult fci = sqdrift::fci_solve(h);
    json j;
    j["n_orb"] = h.n_orb;
    j["n_alpha"] = h.n_alpha;
    j["n_beta"] = h.n_beta;
    j["sector_dimension"] = fci.dets.size();
    j["n_terms"] = dist.terms.size();
    j["lambda"] = dist.lambda;
    j["fci_energy"] = fci.energy;
    j["spectral"] = spectral_to_json(fci.spectral);
    if (channel_steps > 0) {
        sqdrift::SectorOracle oracle(h);
        sqdrift::RngStream rng(channel_seed);
        const double t_eff = channel_t > 0.0 ? channel_t : sqdrift::lemma_time(fci.spectral);
        const sqdrift::ChannelErrorReport rep =
            sqdrift::channel_error(oracle, dist, channel_steps, t_eff, channel_trials, rng);
        j["channel"] = {{"t", t_eff},
                        {"n_steps", channel_steps},
                        {"trials", rep.trials},
                        {"empirical_error", rep.empirical_error},
                        {"deterministic_bound", rep.deterministic_bound},
                        {"analytic_bound", rep.analytic_bound},
                        {"realization_mean", rep.realization_mean},
                        {"realization_std", rep.realization_std},
                        {"single_bound", rep.single_bound},
                        {"fraction_within", rep.fraction_within}};
    }
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        spill(out_path, text);
        std::cerr << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_inspect(const std::string& manifest_path) {
    const json j = json::parse(slurp(manifest_path));
    std::cout << "generator    " << j.value("generator", std::string("?")) << "\n";
    if (j.contains("config")) {
        const json& c = j.at("config");
        std::cout << "input        " << c.value("input", std::string("?")) << "\n"
                  << "master_seed  " << c.value("master_seed", 0ull) << "\n"
                  << "n_steps      " << c.value("n_steps", 0) << "\n"
                  << "n_rand       " << c.value("n_rand", 0) << "\n"
                  << "shots        " << c.value("shots", 0) << "\n";
    }
    if (j.contains("result")) {
        const json& r = j.at("result");
        std::cout << "dimension    " << r.value("dimension", 0ull) << "\n"
                  << "energy       " << std::setprecision(12) << r.value("energy", 0.0) << "\n";
    }
    if (j.contains("oracle") && !j.at("oracle").is_null()) {
        const json& o = j.at("oracle");
        std::cout << "fci_energy   " << o.value("fci_energy", 0.0) << "\n"
                  << "error        " << o.value("error", 0.0) << "\n";
    }
    if (j.contains("artifacts")) {
        std::cout << "artifacts\n";
        for (const auto& a : j.at("artifacts")) std::cout << "  " << a.get<std::string>() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized-compilation sample-based diagonalization pipeline"};
    app.require_subcommand(1);

    std::string run_config;
    Overrides run_ov;
    CLI::App* run = app.add_subcommand("run", "execute the full pipeline from a config file");
    run->add_option("config", run_config, "RunConfig JSON (or a manifest to replay)")->required();
    add_override_flags(run, run_ov);

    std::string sweep_config;
    std::string sweep_axis;
    std::vector<double> sweep_values;
    Overrides sweep_ov;
    CLI::App* swp = app.add_subcommand("sweep", "run the pipeline along one parameter axis");
    swp->add_option("config", sweep_config, "RunConfig JSON (or a manifest)")->required();
    swp->add_option("--axis", sweep_axis, "n_steps | n_rand | subsample_fraction")->required();
    swp->add_option("--values", sweep_values, "axis values")->required()->expected(-1);
    add_override_flags(swp, sweep_ov);

    std::string bounds_params;
    std::string bounds_input;
    int bounds_d = 3;
    long bounds_n_steps = 100;
    long bounds_n_rand = 100;
    long bounds_shots = 512;
    double bounds_delta_conf = 0.1;
    double bounds_eps_reg = 0.0;
    std::optional<long> bounds_l;
    std::optional<double> bounds_t;
    std::string bounds_out;
    CLI::App* bnd = app.add_subcommand("bounds", "evaluate the convergence-bound formulas");
    bnd->add_option("--params", bounds_params, "JSON file with {params, spectral}");
    bnd->add_option("--input", bounds_input, "derive spectral data from this system instead");
    bnd->add_option("--d", bounds_d, "Krylov dimension (odd)");
    bnd->add_option("--n-steps", bounds_n_steps, "compilation steps per unitary");
    bnd->add_option("--n-rand", bounds_n_rand, "randomizations per unitary");
    bnd->add_option("--shots", bounds_shots, "samples per circuit");
    bnd->add_option("--delta-conf", bounds_delta_conf, "confidence parameter in (0,1)");
    bnd->add_option("--eps-reg", bounds_eps_reg, "overlap regularization threshold");
    bnd->add_option("--l", bounds_l, "number of important configurations");
    bnd->add_option("--t", bounds_t, "evolution time (default: pi over the spectral range)");
    bnd->add_option("--out", bounds_out, "write the report here instead of stdout");

    std::string oracle_input;
    int oracle_channel_steps = 0;
    double oracle_channel_t = 0.0;
    int oracle_channel_trials = 200;
    std::uint64_t oracle_channel_seed = 1;
    std::string oracle_out;
    CLI::App* orc = app.add_subcommand("oracle", "exact-diagonalization reference data");
    orc->add_option("--input", oracle_input, "FCIDUMP path or builtin model spec")->required();
    orc->add_option("--channel-steps", oracle_channel_steps,
                    "also measure the compilation channel error with this many steps");
    orc->add_option("--channel-t", oracle_channel_t, "channel evolution time (default: lemma time)");
    orc->add_option("--channel-trials", oracle_channel_trials, "channel realizations");
    orc->add_option("--channel-seed", oracle_channel_seed, "channel RNG seed");
    orc->add_option("--out", oracle_out, "write the report here instead of stdout");

    std::string inspect_path;
    CLI::App* ins = app.add_subcommand("inspect", "print a run manifest");
    ins->add_option("manifest", inspect_path, "manifest.json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config, run_ov);
        if (swp->parsed()) return cmd_sweep(sweep_config, sweep_axis, sweep_values, sweep_ov);
        if (bnd->parsed()) {
            return cmd_bounds(bounds_params, bounds_input, bounds_d, bounds_n_steps,
                              bounds_n_rand, bounds_shots, bounds_delta_conf, bounds_eps_reg,
                              bounds_l, bounds_t, bounds_out);
        }
        if (orc->parsed()) {
            return cmd_oracle(oracle_input, oracle_channel_steps, oracle_channel_t,
                              oracle_channel_trials, oracle_channel_seed, oracle_out);
        }
        if (ins->parsed()) return cmd_inspect(inspect_path);
    } catch (const sqdrift::PipelineError& e) {
        std::cerr << "error [" << e.stage << "]: " << e.what() << "\n";
        for (const std::string& a : e.artifacts) std::cerr << "  written: " << a << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
