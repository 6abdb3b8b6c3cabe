#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqdrift/bounds.hpp"
#include "sqdrift/hamiltonian.hpp"

namespace sqdrift {

inline constexpr const char* kVersion = "0.1.0";

/// One end-to-end run: compile, simulate, sample, and diagonalize.
struct RunConfig {
    std::string input; // FCIDUMP path or "hubbard:<sites>:<u>[:<n_alpha>:<n_beta>]"
    int n_steps = 25;
    int n_rand = 500;
    int shots = 512;
    std::vector<int> k_values = {1, 2, 3};
    double t = 1.0;
    bool layout_optimization = true;
    bool recombine = false;
    std::vector<double> subsample_fractions; // empty: skip the subsample stage
    std::optional<std::size_t> truncate_to;
    std::uint64_t master_seed = 1;
    double solver_tol = 1e-8;
    std::string output_dir = "run_out";
    int workers = 1; // 0: one per hardware thread

    void validate() const;
};

std::string config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const std::string& text);

struct PipelineError : std::runtime_error {
    PipelineError(std::string stage_, const std::string& what, std::vector<std::string> artifacts_)
        : std::runtime_error(stage_ + ": " + what),
          stage(std::move(stage_)),
          artifacts(std::move(artifacts_)) {}
    std::string stage;
    std::vector<std::string> artifacts; // files completed before the failure
};

/// Exact-diagonalization cross-check attached when the sector is small
/// enough to solve outright.
struct OracleComparison {
    double fci_energy = 0.0;
    double error = 0.0;             // subspace energy minus FCI energy
    double alpha0_at_l = 0.0;       // ground-state weight of the best L configurations
    double energy_error_bound = 0.0;
    SpectralData spectral;
};

struct RunManifest {
    RunConfig config;
    std::string version;
    int n_orb = 0;
    int n_alpha = 0;
    int n_beta = 0;
    double e_core = 0.0;
    double lambda = 0.0;
    std::size_t n_terms = 0;
    std::vector<int> layout; // mode -> qubit

    struct TaskSeeds {
        int k = 0;
        int rid = 0;
        std::uint64_t sequence_seed = 0;
        std::uint64_t shot_seed = 0;
    };
    std::vector<TaskSeeds> seeds;
    std::vector<std::string> artifacts;

    std::size_t dimension = 0;
    double energy = 0.0;
    int solver_iterations = 0;
    double residual_norm = 0.0;

    struct SubsampleRow {
        double fraction = 0.0;
        std::size_t dimension = 0;
        double energy = 0.0;
    };
    std::vector<SubsampleRow> subsample;
    std::optional<OracleComparison> oracle;
};

std::string manifest_to_json(const RunManifest& m);
/// Extract the embedded config so a run can be replayed from its manifest.
RunConfig config_from_manifest(const std::string& manifest_json);

/// FCIDUMP path (optionally "fcidump:<path>") or builtin
/// "hubbard:<sites>:<u>[:<n_alpha>:<n_beta>]" (open chain, hopping 1, half
/// filling by default).
MolecularHamiltonian load_input(const std::string& input);

/// Full workflow. Writes hamiltonian.json, sequences.jsonl, circuits.jsonl,
/// batches.jsonl, result.json, manifest.json into cfg.output_dir, plus a
/// run.log timing sidecar (kept out of the manifest so reruns are
/// bit-identical). Stage failures surface as PipelineError.
RunManifest run_pipeline(const RunConfig& cfg);

enum class SweepAxis { n_steps, n_rand, subsample_fraction };
SweepAxis sweep_axis_from_name(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

struct SweepRow {
    double value = 0.0;
    std::size_t dimension = 0;
    double energy = 0.0;
    std::optional<double> error; // vs exact diagonalization, when available
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv;
    std::string csv_path;
};

/// One run per value for the circuit axes; a single run plus
/// post-processing-only subsampling for subsample_fraction.
SweepResult sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values);

} // namespace sqdrift
