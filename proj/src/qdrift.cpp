#include "sqdrift/qdrift.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace sqdrift {

namespace {

void check_k_values(const std::vector<int>& k_values, int d) {
    if (k_values.empty()) throw std::invalid_argument("schedule: k_values must be non-empty");
    for (int k : k_values)
        if (k < 0 || k >= d)
            throw std::invalid_argument("schedule: k value " + std::to_string(k) +
                                        " outside {0, ..., " + std::to_string(d - 1) + "}");
}

} // namespace

KrylovSchedule make_schedule(double t, const std::vector<int>& k_values) {
    if (!(t > 0.0)) throw std::invalid_argument("schedule: t must be positive");
    if (k_values.empty()) throw std::invalid_argument("schedule: k_values must be non-empty");
    const int kmax = *std::max_element(k_values.begin(), k_values.end());
    const int kmin = *std::min_element(k_values.begin(), k_values.end());
    if (kmin < 0) throw std::invalid_argument("schedule: k values must be non-negative");
    KrylovSchedule s;
    s.d = kmax + 1;
    s.t = t;
    s.k_values = k_values;
    return s;
}

KrylovSchedule make_schedule(int d, double t, const std::vector<int>& k_values) {
    if (d < 1) throw std::invalid_argument("schedule: d must be >= 1");
    if (!(t > 0.0)) throw std::invalid_argument("schedule: t must be positive");
    check_k_values(k_values, d);
    KrylovSchedule s;
    s.d = d;
    s.t = t;
    s.k_values = k_values;
    return s;
}

QDriftSequence sample_sequence(const TermDistribution& dist, int n_steps, double t_total,
                               RngStream& rng, int krylov_index) {
    if (n_steps < 1) throw std::invalid_argument("sample_sequence: n_steps must be >= 1");
    if (dist.terms.empty() || !(dist.lambda > 0.0))
        throw std::invalid_argument("sample_sequence: empty term distribution");
    QDriftSequence seq;
    seq.seed = rng.seed();
    seq.krylov_index = krylov_index;
    seq.step_angle = t_total * dist.lambda / static_cast<double>(n_steps);
    seq.term_indices.resize(static_cast<std::size_t>(n_steps));
    for (auto& idx : seq.term_indices) {
        const double u = rng.next_double();
        const auto it = std::upper_bound(dist.cumulative.begin(), dist.cumulative.end(), u);
        idx = static_cast<int>(std::min<std::ptrdiff_t>(it - dist.cumulative.begin(),
                                                        static_cast<std::ptrdiff_t>(dist.terms.size()) - 1));
    }
    return seq;
}

std::string sequence_to_json(const QDriftSequence& seq) {
    nlohmann::json j;
    j["krylov_index"] = seq.krylov_index;
    j["seed"] = seq.seed;
    j["n_steps"] = seq.term_indices.size();
    j["step_angle"] = seq.step_angle;
    j["term_indices"] = seq.term_indices;
    return j.dump();
}

QDriftSequence sequence_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    QDriftSequence seq;
    seq.krylov_index = j.at("krylov_index").get<int>();
    seq.seed = j.at("seed").get<std::uint64_t>();
    seq.step_angle = j.at("step_angle").get<double>();
    seq.term_indices = j.at("term_indices").get<std::vector<int>>();
    if (j.contains("n_steps") && j["n_steps"].get<std::size_t>() != seq.term_indices.size())
        throw std::runtime_error("sequence json: n_steps disagrees with term_indices length");
    return seq;
}

} // namespace sqdrift
