#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sqdrift/determinant.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/rng.hpp"
#include "sqdrift/simulator.hpp"

namespace sqdrift {

/// Ordered unique determinant list with per-determinant sample provenance.
struct Subspace {
    std::vector<Determinant> determinants;
    // parallel to determinants: sorted unique (krylov_index, randomization_id)
    // sources; empty for determinants synthesized by recombination
    std::vector<std::vector<std::pair<int, int>>> provenance;
};

struct SubspaceResult {
    double energy = 0.0; // includes e_core
    std::vector<double> ground_vector;
    int dimension = 0;
    int solver_iterations = 0;
    double residual_norm = 0.0;
};

struct DavidsonError : std::runtime_error {
    double best_residual;
    DavidsonError(const std::string& what, double residual)
        : std::runtime_error(what), best_residual(residual) {}
};

/// Union of sampled determinants, restricted to the (n_alpha, n_beta) sector
/// (the particle-number filter). `recombine` closes the set to all pairs of
/// observed alpha-strings x observed beta-strings. `truncate_to` keeps the
/// most-sampled determinants (ties: lexicographically smaller bitstring).
Subspace collect_subspace(const std::vector<SampleBatch>& batches, int n_alpha, int n_beta,
                          bool recombine = false, std::optional<std::size_t> truncate_to = {});

/// Bernoulli-thinned copy of each batch keeping every individual shot with
/// probability `fraction` (deterministic in determinant order).
std::vector<SampleBatch> subsample_batches(const std::vector<SampleBatch>& batches, double fraction,
                                           RngStream& rng);

/// Slater-Condon matrix element <bra|H|ket> (without e_core).
double hamiltonian_element(const Determinant& bra, const Determinant& ket,
                           const MolecularHamiltonian& h);

/// Reference configuration for time evolution: the sector determinant with the
/// lowest mean-field diagonal <b|H|b>. Near-degenerate diagonals (within 1e-9)
/// are broken toward the determinant with the largest total squared
/// single-excitation coupling, then toward the smaller packed key. Sectors
/// larger than scan_cap fall back to lowest-index filling.
Determinant select_reference(const MolecularHamiltonian& h,
                             std::size_t scan_cap = std::size_t{1} << 20);

/// Matrix-free y = H x over an explicit determinant basis: connections are
/// generated as single/double excitations of each column determinant and
/// looked up, so no matrix is stored.
class SubspaceOperator {
public:
    SubspaceOperator(std::vector<Determinant> dets, const MolecularHamiltonian& h);

    std::size_t dim() const { return dets_.size(); }
    const std::vector<Determinant>& dets() const { return dets_; }
    double diagonal(std::size_t i) const { return diag_[i]; }
    void apply(const double* x, double* y) const;

private:
    std::vector<Determinant> dets_;
    const MolecularHamiltonian* h_;
    std::vector<double> diag_;
    std::unordered_map<std::uint64_t, int> index_;
};

/// Lowest eigenpair of H projected onto the subspace: dense solve up to
/// dimension 2000, Davidson with the diagonal preconditioner above that.
SubspaceResult diagonalize(const Subspace& subspace, const MolecularHamiltonian& h,
                           double tol = 1e-8);

std::string result_to_json(const SubspaceResult& r, const Subspace& subspace, int n_orb,
                           std::size_t top_k = 10);

} // namespace sqdrift
