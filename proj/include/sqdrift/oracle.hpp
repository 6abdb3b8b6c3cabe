#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "sqdrift/bounds.hpp"
#include "sqdrift/determinant.hpp"
#include "sqdrift/f2q.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/pauli.hpp"
#include "sqdrift/qdrift.hpp"
#include "sqdrift/rng.hpp"

namespace sqdrift {

// Brute-force references built straight from ladder operators on the full
// register (basis index bit q = qubit q; fermionic chains run in qubit
// order). Independent of the grouped-term and mapping code they check.

/// Full second-quantized Hamiltonian (no e_core), modes placed by `layout`.
Eigen::MatrixXd dense_hamiltonian(const MolecularHamiltonian& h, const IndexMap& layout);
Eigen::MatrixXd dense_hamiltonian(const MolecularHamiltonian& h);

/// One normalized grouped term (coefficient not applied) as a dense operator
/// on the full register.
Eigen::MatrixXd dense_term(const ExcitationTerm& term, const IndexMap& layout, int n_qubits);

/// The word of `p` as a dense matrix (coefficient not applied).
Eigen::MatrixXcd dense_pauli(const PauliString& p, int n_qubits);

/// exp(-i angle P) for the word of `p`.
Eigen::MatrixXcd dense_rotation(const PauliString& p, double angle, int n_qubits);

/// exp(-i angle M) of a real symmetric matrix, via spectral decomposition.
Eigen::MatrixXcd dense_exponential(const Eigen::MatrixXd& m, double angle);

/// Ordered product of a circuit's rotation unitaries (state prep excluded).
Eigen::MatrixXcd dense_circuit_unitary(const CompiledCircuit& c);

/// Exact diagonalization of the (n_alpha, n_beta) sector, cached: FCI
/// energies, spectra, propagators, and sector restrictions of grouped terms.
class SectorOracle {
public:
    explicit SectorOracle(const MolecularHamiltonian& h, std::size_t dense_cap = 4000);

    const MolecularHamiltonian& hamiltonian() const { return h_; }
    const std::vector<Determinant>& dets() const { return dets_; }
    std::size_t dim() const { return dets_.size(); }
    const Eigen::MatrixXd& matrix() const { return mat_; } // no e_core

    double fci_energy() const; // includes e_core
    const Eigen::VectorXd& ground_vector() const { return ground_; }
    const Eigen::VectorXd& eigenvalues() const { return evals_; } // no e_core

    /// Sector spectrum plus the overlap of `reference` with the ground state.
    SpectralData spectral(const Determinant& reference) const;

    int index_of(const Determinant& det) const; // -1 when absent
    Eigen::VectorXcd basis_state(const Determinant& det) const;

    Eigen::VectorXcd propagate(const Eigen::VectorXcd& v, double t) const;
    Eigen::MatrixXcd propagator(double t) const; // exp(-i t H_sector)

    /// Sector restriction of one normalized grouped term (identity layout).
    Eigen::MatrixXd sector_term(const ExcitationTerm& term) const;

private:
    MolecularHamiltonian h_;
    std::vector<Determinant> dets_;
    std::unordered_map<std::uint64_t, int> index_;
    Eigen::MatrixXd mat_;
    Eigen::MatrixXd evecs_;
    Eigen::VectorXd evals_;
    Eigen::VectorXd ground_;
};

struct FciResult {
    double energy = 0.0; // includes e_core
    std::vector<double> ground_vector;
    std::vector<Determinant> dets;
    SpectralData spectral; // gamma0_sq taken against the Hartree-Fock reference
};

/// Exact sector ground state: dense eigensolve up to `dense_cap`, Lanczos
/// (full reorthogonalization, matrix-free) above it up to `lanczos_cap`.
FciResult fci_solve(const MolecularHamiltonian& h, std::size_t dense_cap = 4000,
                    std::size_t lanczos_cap = 1000000);

/// Empirical qDRIFT channel error on the reference sector.
struct ChannelErrorReport {
    double empirical_error = 0.0;     // ||U - mean(V)||
    double deterministic_bound = 0.0; // t^2 lambda^2 / N for the exact mean
    double analytic_bound = 0.0;      // + fluctuation of the empirical mean
    double realization_mean = 0.0;    // stats of per-realization ||U - V||
    double realization_std = 0.0;
    double single_bound = 0.0;   // per-realization bound at delta_conf
    double fraction_within = 0.0; // empirical coverage of single_bound
    int trials = 0;
};

ChannelErrorReport channel_error(const SectorOracle& oracle, const TermDistribution& dist,
                                 int n_steps, double t, int trials, RngStream& rng,
                                 double delta_conf = 0.01);

enum class KrylovVariant { ideal, qdrift_ideal, qdrift_finite };

/// d x d overlap and Hamiltonian matrices over the Krylov vectors, built from
/// the upper triangle (entries depend only on the index difference) and
/// completed by conjugate transposition.
struct KrylovMatrices {
    Eigen::MatrixXcd h_mat;
    Eigen::MatrixXcd s_mat;
    KrylovVariant variant = KrylovVariant::ideal;
};

KrylovMatrices krylov_matrices(const SectorOracle& oracle, const Eigen::VectorXcd& psi0, int d,
                               double t, KrylovVariant variant, const TermDistribution& dist,
                               int n_steps, int n_rand, RngStream& rng);

/// Lowest eigenvalue after projecting onto overlap eigendirections above
/// eps_r and solving the reduced ordinary problem.
double regularized_geig(const KrylovMatrices& m, double eps_r);

} // namespace sqdrift
