#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/rng.hpp"

namespace sqdrift {

/// One randomized product-formula compilation: an ordered tuple of term
/// indices drawn i.i.d. with probability c_i / lambda, each applied for the
/// per-step angle t_total * lambda / n_steps.
struct QDriftSequence {
    std::vector<int> term_indices;
    double step_angle = 0.0;
    int krylov_index = 0;
    std::uint64_t seed = 0;

    std::size_t n_steps() const { return term_indices.size(); }
};

/// Which evolution-time multiples to sample, on top of a reference step t.
struct KrylovSchedule {
    int d = 1;                  // subspace dimension the multipliers live in
    double t = 0.0;             // reference time step
    std::vector<int> k_values;  // evolution-time multipliers, total time k*t
};

/// Raw-multiplier form: d is inferred as max(k)+1.
KrylovSchedule make_schedule(double t, const std::vector<int>& k_values);

/// Bounded form: every k must lie in {0, ..., d-1}.
KrylovSchedule make_schedule(int d, double t, const std::vector<int>& k_values);

/// Draw one sequence of n_steps i.i.d. term indices for total evolution time
/// t_total. The stream's seed is recorded on the sequence.
QDriftSequence sample_sequence(const TermDistribution& dist, int n_steps, double t_total,
                               RngStream& rng, int krylov_index = 0);

std::string sequence_to_json(const QDriftSequence& seq);
QDriftSequence sequence_from_json(const std::string& text);

} // namespace sqdrift
