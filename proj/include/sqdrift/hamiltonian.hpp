#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sqdrift {

// Second-quantized electronic Hamiltonian in a restricted spatial-orbital
// basis, chemist-notation two-electron integrals:
//
//   H = E_core + sum_{pq,s} h_pq a+_ps a_qs
//            + 1/2 sum_{pqrs,ss'} (pq|rs) a+_ps a+_rs' a_ss' a_qs
//
// The ERI tensor is stored dense with the full 8-fold permutation symmetry
// expanded, so g(p,q,r,s) is valid for any index order.
struct MolecularHamiltonian {
    int n_orb = 0;
    int n_alpha = 0;
    int n_beta = 0;
    double e_core = 0.0;
    std::vector<double> h_one; // n_orb^2, row-major
    std::vector<double> eri;   // n_orb^4, chemist (pq|rs)

    double h1(int p, int q) const { return h_one[static_cast<std::size_t>(p * n_orb + q)]; }
    double g(int p, int q, int r, int s) const {
        const auto n = static_cast<std::size_t>(n_orb);
        return eri[((static_cast<std::size_t>(p) * n + static_cast<std::size_t>(q)) * n +
                    static_cast<std::size_t>(r)) * n + static_cast<std::size_t>(s)];
    }

    void allocate(int norb);
    void set_h1(int p, int q, double v); // symmetrizes h_pq = h_qp
    void set_eri(int p, int q, int r, int s, double v); // expands 8-fold symmetry

    int n_modes() const { return 2 * n_orb; } // spin orbitals, alpha block first
};

// Spin-orbital mode convention: alpha p -> mode p, beta p -> mode n_orb + p.
inline int alpha_mode(int p, int /*n_orb*/) { return p; }
inline int beta_mode(int p, int n_orb) { return n_orb + p; }

// ---------------------------------------------------------------------------
// Grouped Hermitian excitation terms
//
// Each term is a sum of "parts". A part is
//     weight * prod(hop factors) * prod(density factors)
// where a hop factor on modes (a, b) is  a+_a a_b + a+_b a_a  and a density
// factor on mode m is n_m. Factors inside one part act on disjoint modes, and
// the parts of one term are arranged so that all Jordan-Wigner images commute
// pairwise; the compiled sequence of Pauli rotations therefore exponentiates
// the whole term exactly.
// ---------------------------------------------------------------------------

struct HopFactor {
    int a = 0; // spin-orbital modes, a < b
    int b = 0;
};

struct TermPart {
    double weight = 0.0;
    std::vector<HopFactor> hops; // 0..2 factors
    std::vector<int> dens;       // modes carrying a number operator
};

enum class TermKind { one_body, two_body };

struct ExcitationTerm {
    TermKind kind = TermKind::one_body;
    std::vector<int> support;  // sorted distinct spatial orbitals (1..4)
    std::string signature;     // canonical index tuple + role, e.g. "g(0,1|2,3)"
    double coefficient = 0.0;  // c_i > 0; spectral radius of the raw grouped operator
    std::vector<TermPart> parts; // normalized: operator of the term h_i has spectral radius 1
};

// Sampling distribution over grouped terms: probabilities c_i / lambda.
struct TermDistribution {
    std::vector<ExcitationTerm> terms;
    double lambda = 0.0;            // sum of coefficients
    std::vector<double> cumulative; // prefix sums of c_i / lambda; back() == 1
};

// Decomposes the Hamiltonian into grouped Hermitian excitation terms,
// normalizing each so its spectral radius is exactly 1 (computed by dense
// diagonalization on the term's local mode space). Terms with coefficient
// below `threshold` are dropped. Result ordering is deterministic:
// lexicographic in (kind, support, signature).
TermDistribution enumerate_terms(const MolecularHamiltonian& h, double threshold = 1e-12);

// ---------------------------------------------------------------------------
// Model builders and serialization
// ---------------------------------------------------------------------------

// 1-D single-band Hubbard chain with open boundaries: hopping -t_hop between
// neighboring sites, on-site repulsion u, (na, nb) electrons.
MolecularHamiltonian build_hubbard(int sites, double t_hop, double u, int na, int nb);

// FCIDUMP reader (Molpro-style): namelist header with NORB/NELEC/MS2, then
// "value i j k l" records, 1-based chemist indices, i=j=k=l=0 for the core
// energy and k=l=0 for one-body records. Throws std::runtime_error with the
// offending record number on malformed input.
MolecularHamiltonian parse_fcidump(std::istream& in);
MolecularHamiltonian parse_fcidump_file(const std::string& path);

// JSON round trip of the Hamiltonian (schema: n_orb, n_alpha, n_beta, e_core,
// h_one row-major, eri_unique as [p, q, r, s, value] canonical records).
std::string hamiltonian_to_json(const MolecularHamiltonian& h);
MolecularHamiltonian hamiltonian_from_json(const std::string& text);

} // namespace sqdrift
