#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sqdrift/determinant.hpp"
#include "sqdrift/hamiltonian.hpp"
#include "sqdrift/pauli.hpp"
#include "sqdrift/qdrift.hpp"

namespace sqdrift {

/// Bijection between fermionic modes and qubit positions on the
/// Jordan-Wigner line.
struct IndexMap {
    std::vector<int> mode_to_qubit;
    std::vector<int> qubit_to_mode;

    static IndexMap identity(int n_modes);
    static IndexMap from_mode_to_qubit(std::vector<int> m2q);

    int n_modes() const { return static_cast<int>(mode_to_qubit.size()); }
    bool is_identity() const;
    bool operator==(const IndexMap&) const = default;
};

/// Jordan-Wigner expansion of a single spin-resolved part; strings carry the
/// part weight folded into their coefficients. The identity string (from
/// density factors) is kept so products of the rotations reproduce the exact
/// exponential including its phase.
std::vector<PauliString> map_part_jw(const TermPart& part, const IndexMap& layout);

/// Expansion of a whole grouped term: parts merged, equal words combined,
/// exact cancellations dropped. All returned strings mutually commute.
std::vector<PauliString> map_excitation_jw(const ExcitationTerm& term, const IndexMap& layout);

/// Mode pairs whose images' distance the layout optimizer penalizes: the
/// distinct hop pairs of the term. Density factors contribute none.
std::vector<std::pair<int, int>> penalized_pairs(const ExcitationTerm& term);

/// Sum of |qubit(a) - qubit(b)| over the penalized pairs of every term in the
/// batch (terms count with multiplicity).
long layout_objective(const std::vector<const ExcitationTerm*>& batch, const IndexMap& layout);

/// Sum of mapped string weights over the batch; the quantity the layout is
/// meant to reduce.
long total_mapped_weight(const std::vector<const ExcitationTerm*>& batch, const IndexMap& layout);

/// Minimize the layout objective for the batch: exhaustive over the penalized
/// modes' placements when there are at most 8 of them, otherwise a greedy
/// chain construction refined by 2-opt swaps. Never returns a layout whose
/// objective or total mapped weight exceeds the identity layout's.
IndexMap optimize_layout(const std::vector<const ExcitationTerm*>& batch, int n_modes);

/// A sequence realized as ordered Pauli rotations exp(-i * angle * P).
struct CompiledCircuit {
    int n_qubits = 0;
    Determinant initial_occupation; // fermionic-mode occupation, pre-layout
    IndexMap layout;
    std::vector<std::pair<PauliString, double>> rotations;
};

CompiledCircuit compile_sequence(const QDriftSequence& seq, const TermDistribution& dist,
                                 const IndexMap& layout, const Determinant& hf_occupation,
                                 int n_orb);

std::string circuit_to_json(const CompiledCircuit& c, int n_orb);
CompiledCircuit circuit_from_json(const std::string& text, int* n_orb_out = nullptr);

} // namespace sqdrift
