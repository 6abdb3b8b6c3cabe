#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqdrift/determinant.hpp"
#include "sqdrift/f2q.hpp"
#include "sqdrift/pauli.hpp"
#include "sqdrift/rng.hpp"

namespace sqdrift {

/// Full 2^n statevector, basis index bit q = qubit q.
struct Statevector {
    int n_qubits = 0;
    std::vector<std::complex<double>> amplitudes;

    explicit Statevector(int n, int max_qubits = 26);
    double norm() const;
};

/// Histogram of sampled determinants from one circuit's output state.
struct SampleBatch {
    std::map<Determinant, int> counts;
    int krylov_index = 0;
    int randomization_id = 0;
    int shots = 0;
};

/// Basis state occupying qubit layout(m) for every occupied mode m.
Statevector prepare_reference(int n_qubits, const Determinant& occupation, int n_orb,
                              const IndexMap& layout, int max_qubits = 26);
Statevector prepare_reference(int n_qubits, const Determinant& occupation, int n_orb);

/// state <- exp(-i * angle * P) state, via the pairwise update over the
/// X/Y flip mask (diagonal words, identity included, become pure phases).
void apply_pauli_rotation(Statevector& state, const PauliString& p, double angle);

Statevector run_circuit(const CompiledCircuit& circuit, int n_orb, int max_qubits = 26);

/// Multinomial sampling of |amplitude|^2; raw bitstrings are mapped back
/// through the layout to canonical mode order. Every draw must show the
/// reference particle numbers: this engine is noiseless, so a violation is a
/// defect, not data.
SampleBatch sample_bitstrings(const Statevector& state, int shots, RngStream& rng,
                              const IndexMap& layout, int n_orb, int n_alpha, int n_beta,
                              int krylov_index = 0, int randomization_id = 0);

std::string batch_to_json(const SampleBatch& batch, int n_orb);
SampleBatch batch_from_json(const std::string& text, int n_orb);

} // namespace sqdrift
