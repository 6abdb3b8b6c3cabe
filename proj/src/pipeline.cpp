#include "sqdrift/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "sqdrift/determinant.hpp"
#include "sqdrift/f2q.hpp"
#include "sqdrift/oracle.hpp"
#include "sqdrift/qdrift.hpp"
#include "sqdrift/rng.hpp"
#include "sqdrift/simulator.hpp"
#include "sqdrift/sqd.hpp"

namespace sqdrift {

namespace {

using nlohmann::json;

// Derivation tags for per-task streams.
constexpr std::uint64_t kTagSequence = 1;
constexpr std::uint64_t kTagShots = 2;
constexpr std::uint64_t kTagSubsample = 3;

template <typename F>
auto run_stage(const char* name, const std::vector<std::string>& artifacts, F&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what(), artifacts);
    }
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string number_repr(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

json config_json(const RunConfig& cfg) {
    json j;
    j["input"] = cfg.input;
    j["n_steps"] = cfg.n_steps;
    j["n_rand"] = cfg.n_rand;
    j["shots"] = cfg.shots;
    j["k_values"] = cfg.k_values;
    j["t"] = cfg.t;
    j["layout_optimization"] = cfg.layout_optimization;
    j["recombine"] = cfg.recombine;
    j["subsample_fractions"] = cfg.subsample_fractions;
    if (cfg.truncate_to) {
        j["truncate_to"] = *cfg.truncate_to;
    } else {
        j["truncate_to"] = nullptr;
    }
    j["master_seed"] = cfg.master_seed;
    j["solver_tol"] = cfg.solver_tol;
    j["output_dir"] = cfg.output_dir;
    j["workers"] = cfg.workers;
    return j;
}

Subspace with_reference(Subspace s, const Determinant& reference) {
    if (std::find(s.determinants.begin(), s.determinants.end(), reference) ==
        s.determinants.end()) {
        s.determinants.push_back(reference);
    }
    return s;
}

} // namespace

void RunConfig::validate() const {
    if (input.empty()) throw std::invalid_argument("config: input is required");
    if (n_steps < 1) throw std::invalid_argument("config: n_steps must be positive");
    if (n_rand < 1) throw std::invalid_argument("config: n_rand must be positive");
    if (shots < 1) throw std::invalid_argument("config: shots must be positive");
    if (k_values.empty()) throw std::invalid_argument("config: k_values must be non-empty");
    for (std::size_t i = 0; i < k_values.size(); ++i) {
        if (k_values[i] < 1) throw std::invalid_argument("config: k_values must be positive");
        if (i > 0 && k_values[i] <= k_values[i - 1]) {
            throw std::invalid_argument("config: k_values must be strictly increasing");
        }
    }
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("config: t must be positive");
    for (double f : subsample_fractions) {
        if (!(f > 0.0) || f > 1.0) {
            throw std::invalid_argument("config: subsample fractions must lie in (0, 1]");
        }
    }
    if (truncate_to && *truncate_to < 1) {
        throw std::invalid_argument("config: truncate_to must be positive");
    }
    if (!(solver_tol > 0.0)) throw std::invalid_argument("config: solver_tol must be positive");
    if (workers < 0) throw std::invalid_argument("config: workers must be non-negative");
    if (output_dir.empty()) throw std::invalid_argument("config: output_dir is required");
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

RunConfig config_from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    static const std::vector<std::string> known = {
        "input",     "n_steps",   "n_rand",      "shots",       "k_values",
        "t",         "layout_optimization",      "recombine",   "subsample_fractions",
        "truncate_to", "master_seed", "solver_tol", "output_dir", "workers"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    RunConfig cfg;
    cfg.input = j.at("input").get<std::string>();
    if (j.contains("n_steps")) cfg.n_steps = j.at("n_steps").get<int>();
    if (j.contains("n_rand")) cfg.n_rand = j.at("n_rand").get<int>();
    if (j.contains("shots")) cfg.shots = j.at("shots").get<int>();
    if (j.contains("k_values")) cfg.k_values = j.at("k_values").get<std::vector<int>>();
    if (j.contains("t")) cfg.t = j.at("t").get<double>();
    if (j.contains("layout_optimization")) {
        cfg.layout_optimization = j.at("layout_optimization").get<bool>();
    }
    if (j.contains("recombine")) cfg.recombine = j.at("recombine").get<bool>();
    if (j.contains("subsample_fractions")) {
        cfg.subsample_fractions = j.at("subsample_fractions").get<std::vector<double>>();
    }
    if (j.contains("truncate_to") && !j.at("truncate_to").is_null()) {
        cfg.truncate_to = j.at("truncate_to").get<std::size_t>();
    }
    if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("solver_tol")) cfg.solver_tol = j.at("solver_tol").get<double>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    cfg.validate();
    return cfg;
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["generator"] = std::string("sqdrift ") + m.version;
    j["config"] = config_json(m.config);
    j["system"] = {{"n_orb", m.n_orb},   {"n_alpha", m.n_alpha}, {"n_beta", m.n_beta},
                   {"e_core", m.e_core}, {"lambda", m.lambda},   {"n_terms", m.n_terms}};
    j["layout"] = m.layout;
    json seeds = json::array();
    for (const auto& s : m.seeds) {
        seeds.push_back({{"k", s.k},
                         {"rid", s.rid},
                         {"sequence_seed", s.sequence_seed},
                         {"shot_seed", s.shot_seed}});
    }
    j["seeds"] = std::move(seeds);
    j["artifacts"] = m.artifacts;
    j["result"] = {{"dimension", m.dimension},
                   {"energy", m.energy},
                   {"solver_iterations", m.solver_iterations},
                   {"residual_norm", m.residual_norm}};
    json rows = json::array();
    for (const auto& row : m.subsample) {
        rows.push_back(
            {{"fraction", row.fraction}, {"dimension", row.dimension}, {"energy", row.energy}});
    }
    j["subsample"] = std::move(rows);
    if (m.oracle) {
        j["oracle"] = {{"fci_energy", m.oracle->fci_energy},
                       {"error", m.oracle->error},
                       {"alpha0_at_l", m.oracle->alpha0_at_l},
                       {"energy_error_bound", m.oracle->energy_error_bound},
                       {"e0", m.oracle->spectral.e0},
                       {"e1", m.oracle->spectral.e1},
                       {"e_max", m.oracle->spectral.e_max},
                       {"h_norm", m.oracle->spectral.h_norm},
                       {"gamma0_sq", m.oracle->spectral.gamma0_sq},
                       {"delta", m.oracle->spectral.delta}};
    } else {
        j["oracle"] = nullptr;
    }
    return j.dump(2);
}

RunConfig config_from_manifest(const std::string& manifest_json) {
    json j = json::parse(manifest_json);
    if (!j.is_object() || !j.contains("config")) {
        throw std::invalid_argument("manifest: missing embedded config");
    }
    return config_from_json(j.at("config").dump());
}

MolecularHamiltonian load_input(const std::string& input) {
    std::string spec = input;
    if (spec.rfind("fcidump:", 0) == 0) {
        return parse_fcidump_file(spec.substr(8));
    }
    if (spec.rfind("hubbard:", 0) == 0) {
        std::vector<std::string> fields;
        std::stringstream ss(spec);
        std::string field;
        while (std::getline(ss, field, ':')) fields.push_back(field);
        if (fields.size() != 3 && fields.size() != 5) {
            throw std::invalid_argument(
                "builtin model spec must be hubbard:<sites>:<u>[:<n_alpha>:<n_beta>]");
        }
        const auto to_int = [](const std::string& s) {
            std::size_t pos = 0;
            const int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("bad integer '" + s + "'");
            return v;
        };
        const auto to_double = [](const std::string& s) {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
            return v;
        };
        const int sites = to_int(fields[1]);
        const double u = to_double(fields[2]);
        int na = (sites + 1) / 2;
        int nb = sites / 2;
        if (fields.size() == 5) {
            na = to_int(fields[3]);
            nb = to_int(fields[4]);
        }
        return build_hubbard(sites, 1.0, u, na, nb);
    }
    return parse_fcidump_file(spec);
}

RunManifest run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    using clock = std::chrono::steady_clock;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, double>> timings;
    const auto timed = [&](const char* name, auto&& fn) {
        const auto begin = clock::now();
        auto result = run_stage(name, artifacts, fn);
        const std::chrono::duration<double, std::milli> ms = clock::now() - begin;
        timings.emplace_back(name, ms.count());
        return result;
    };

    run_stage("config", artifacts, [&] {
        cfg.validate();
        fs::create_directories(cfg.output_dir);
        return 0;
    });
    const auto path_of = [&](const char* name) {
        return (fs::path(cfg.output_dir) / name).string();
    };
    const auto emit = [&](const char* name, const std::string& content) {
        write_file(path_of(name), content);
        artifacts.push_back(path_of(name));
    };

    const MolecularHamiltonian h = timed("hamiltonian", [&] { return load_input(cfg.input); });
    const TermDistribution dist =
        run_stage("hamiltonian", artifacts, [&] { return enumerate_terms(h); });
    run_stage("hamiltonian", artifacts, [&] {
        emit("hamiltonian.json", hamiltonian_to_json(h));
        return 0;
    });

    const Determinant reference = select_reference(h);
    const std::size_t n_tasks = cfg.k_values.size() * static_cast<std::size_t>(cfg.n_rand);
    RunManifest manifest;
    manifest.config = cfg;
    manifest.version = kVersion;
    manifest.n_orb = h.n_orb;
    manifest.n_alpha = h.n_alpha;
    manifest.n_beta = h.n_beta;
    manifest.e_core = h.e_core;
    manifest.lambda = dist.lambda;
    manifest.n_terms = dist.terms.size();

    const std::vector<QDriftSequence> sequences = timed("qdrift", [&] {
        std::vector<QDriftSequence> out;
        out.reserve(n_tasks);
        for (int k : cfg.k_values) {
            for (int rid = 0; rid < cfg.n_rand; ++rid) {
                RngStream rng = derive_stream(
                    cfg.master_seed,
                    {kTagSequence, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(rid)});
                out.push_back(sample_sequence(dist, cfg.n_steps, k * cfg.t, rng, k));
            }
        }
        std::ostringstream lines;
        for (const QDriftSequence& seq : out) lines << sequence_to_json(seq) << '\n';
        emit("sequences.jsonl", lines.str());
        return out;
    });

    struct Task {
        int k = 0;
        int rid = 0;
    };
    std::vector<Task> tasks;
    tasks.reserve(n_tasks);
    for (int k : cfg.k_values) {
        for (int rid = 0; rid < cfg.n_rand; ++rid) tasks.push_back({k, rid});
    }

    const IndexMap layout = timed("f2q", [&] {
        if (!cfg.layout_optimization) return IndexMap::identity(h.n_modes());
        std::vector<const ExcitationTerm*> batch;
        for (const QDriftSequence& seq : sequences) {
            for (int idx : seq.term_indices) {
                batch.push_back(&dist.terms[static_cast<std::size_t>(idx)]);
            }
        }
        return optimize_layout(batch, h.n_modes());
    });
    manifest.layout = layout.mode_to_qubit;

    const std::vector<CompiledCircuit> circuits = timed("f2q", [&] {
        std::vector<CompiledCircuit> out;
        out.reserve(n_tasks);
        for (const QDriftSequence& seq : sequences) {
            out.push_back(compile_sequence(seq, dist, layout, reference, h.n_orb));
        }
        std::ostringstream lines;
        for (const CompiledCircuit& c : out) lines << circuit_to_json(c, h.n_orb) << '\n';
        emit("circuits.jsonl", lines.str());
        return out;
    });

    const std::vector<SampleBatch> batches = timed("simulator", [&] {
        std::vector<SampleBatch> out(n_tasks);
        const int workers = cfg.workers == 0
                                ? std::max(1u, std::thread::hardware_concurrency())
                                : cfg.workers;
        parallel_for(n_tasks, workers, [&](std::size_t i) {
            const Task& task = tasks[i];
            const Statevector state = run_circuit(circuits[i], h.n_orb);
            RngStream rng = derive_stream(cfg.master_seed,
                                          {kTagShots, static_cast<std::uint64_t>(task.k),
                                           static_cast<std::uint64_t>(task.rid)});
            out[i] = sample_bitstrings(state, cfg.shots, rng, layout, h.n_orb, h.n_alpha,
                                       h.n_beta, task.k, task.rid);
        });
        std::ostringstream lines;
        for (const SampleBatch& b : out) lines << batch_to_json(b, h.n_orb) << '\n';
        emit("batches.jsonl", lines.str());
        return out;
    });

    for (std::size_t i = 0; i < n_tasks; ++i) {
        RunManifest::TaskSeeds seeds;
        seeds.k = tasks[i].k;
        seeds.rid = tasks[i].rid;
        seeds.sequence_seed = sequences[i].seed;
        seeds.shot_seed =
            derive_seed(cfg.master_seed, {kTagShots, static_cast<std::uint64_t>(tasks[i].k),
                                          static_cast<std::uint64_t>(tasks[i].rid)});
        manifest.seeds.push_back(seeds);
    }

    const Subspace subspace = timed("sqd_solver", [&] {
        return with_reference(
            collect_subspace(batches, h.n_alpha, h.n_beta, cfg.recombine, cfg.truncate_to),
            reference);
    });
    const SubspaceResult result =
        timed("sqd_solver", [&] { return diagonalize(subspace, h, cfg.solver_tol); });
    run_stage("sqd_solver", artifacts, [&] {
        emit("result.json", result_to_json(result, subspace, h.n_orb));
        return 0;
    });
    manifest.dimension = result.dimension;
    manifest.energy = result.energy;
    manifest.solver_iterations = result.solver_iterations;
    manifest.residual_norm = result.residual_norm;

    for (std::size_t fi = 0; fi < cfg.subsample_fractions.size(); ++fi) {
        const double fraction = cfg.subsample_fractions[fi];
        const auto row = timed("sqd_solver", [&] {
            RngStream rng = derive_stream(cfg.master_seed,
                                          {kTagSubsample, static_cast<std::uint64_t>(fi)});
            const std::vector<SampleBatch> thinned = subsample_batches(batches, fraction, rng);
            Subspace sub{{}, {}};
            if (thinned.empty()) {
                sub.determinants.push_back(reference);
            } else {
                sub = with_reference(
                    collect_subspace(thinned, h.n_alpha, h.n_beta, cfg.recombine, cfg.truncate_to),
                    reference);
            }
            const SubspaceResult r = diagonalize(sub, h, cfg.solver_tol);
            return RunManifest::SubsampleRow{fraction, static_cast<std::size_t>(r.dimension),
                                             r.energy};
        });
        manifest.subsample.push_back(row);
    }

    const std::size_t sector_dim =
        binomial(h.n_orb, h.n_alpha) * binomial(h.n_orb, h.n_beta);
    if (sector_dim <= 4000) {
        manifest.oracle = timed("oracle", [&] {
            const FciResult fci = fci_solve(h);
            OracleComparison cmp;
            cmp.fci_energy = fci.energy;
            cmp.error = result.energy - fci.energy;
            cmp.spectral = fci.spectral;
            const ConcentrationProfile profile = concentration_profile(fci.ground_vector);
            cmp.alpha0_at_l = profile.alpha(result.dimension);
            cmp.energy_error_bound = energy_error_bound(fci.spectral.h_norm, cmp.alpha0_at_l);
            return cmp;
        });
    }

    run_stage("manifest", artifacts, [&] {
        manifest.artifacts = artifacts; // everything completed before the manifest itself
        emit("manifest.json", manifest_to_json(manifest));
        std::ostringstream log;
        log << "sqdrift " << kVersion << " run log (timings excluded from the manifest)\n";
        for (const auto& [name, ms] : timings) {
            log << name << ' ' << number_repr(ms) << " ms\n";
        }
        write_file(path_of("run.log"), log.str());
        return 0;
    });
    return manifest;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "n_steps") return SweepAxis::n_steps;
    if (name == "n_rand") return SweepAxis::n_rand;
    if (name == "subsample_fraction") return SweepAxis::subsample_fraction;
    throw std::invalid_argument("unknown sweep axis '" + name +
                                "' (expected n_steps, n_rand, or subsample_fraction)");
}

std::string sweep_axis_name(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::n_steps:
        return "n_steps";
    case SweepAxis::n_rand:
        return "n_rand";
    case SweepAxis::subsample_fraction:
        return "subsample_fraction";
    }
    throw std::logic_error("unreachable");
}

SweepResult sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
    namespace fs = std::filesystem;
    if (values.empty()) throw std::invalid_argument("sweep: values must be non-empty");
    SweepResult out;
    const std::string axis_name = sweep_axis_name(axis);
    if (axis == SweepAxis::subsample_fraction) {
        RunConfig run_cfg = cfg;
        run_cfg.subsample_fractions = values;
        const RunManifest manifest = run_pipeline(run_cfg);
        for (const auto& row : manifest.subsample) {
            SweepRow r;
            r.value = row.fraction;
            r.dimension = row.dimension;
            r.energy = row.energy;
            if (manifest.oracle) r.error = row.energy - manifest.oracle->fci_energy;
            out.rows.push_back(r);
        }
    } else {
        for (double value : values) {
            const int iv = static_cast<int>(std::llround(value));
            if (iv < 1 || std::abs(value - iv) > 1e-9) {
                throw std::invalid_argument("sweep: " + axis_name +
                                            " values must be positive integers");
            }
            RunConfig run_cfg = cfg;
            if (axis == SweepAxis::n_steps) {
                run_cfg.n_steps = iv;
            } else {
                run_cfg.n_rand = iv;
            }
            run_cfg.output_dir =
                (fs::path(cfg.output_dir) / (axis_name + "_" + std::to_string(iv))).string();
            const RunManifest manifest = run_pipeline(run_cfg);
            SweepRow r;
            r.value = value;
            r.dimension = manifest.dimension;
            r.energy = manifest.energy;
            if (manifest.oracle) r.error = manifest.energy - manifest.oracle->fci_energy;
            out.rows.push_back(r);
        }
    }
    std::ostringstream csv;
    csv << axis_name << ",dimension,energy,error\n";
    for (const SweepRow& r : out.rows) {
        csv << number_repr(r.value) << ',' << r.dimension << ',' << number_repr(r.energy) << ',';
        if (r.error) {
            csv << number_repr(*r.error);
        } else {
            csv << "nan";
        }
        csv << '\n';
    }
    out.csv = csv.str();
    fs::create_directories(cfg.output_dir);
    out.csv_path = (fs::path(cfg.output_dir) / ("sweep_" + axis_name + ".csv")).string();
    write_file(out.csv_path, out.csv);
    return out;
}

} // namespace sqdrift
