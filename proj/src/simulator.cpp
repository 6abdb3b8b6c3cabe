#include "sqdrift/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace sqdrift {

Statevector::Statevector(int n, int max_qubits) : n_qubits(n) {
    if (n < 1) throw std::invalid_argument("statevector: need at least one qubit");
    if (n > max_qubits)
        throw std::invalid_argument("statevector: " + std::to_string(n) +
                                    " qubits exceeds the memory cap of " + std::to_string(max_qubits));
    amplitudes.assign(1ull << n, {0.0, 0.0});
}

double Statevector::norm() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return std::sqrt(s);
}

Statevector prepare_reference(int n_qubits, const Determinant& occupation, int n_orb,
                              const IndexMap& layout, int max_qubits) {
    if (layout.n_modes() != n_qubits)
        throw std::invalid_argument("prepare_reference: layout does not match register");
    if (2 * n_orb != n_qubits)
        throw std::invalid_argument("prepare_reference: register must hold 2*n_orb modes");
    if (n_orb < 64 && ((occupation.alpha >> n_orb) != 0 || (occupation.beta >> n_orb) != 0))
        throw std::invalid_argument("prepare_reference: occupation beyond register");
    const std::uint64_t key = occupation.key(n_orb);
    std::uint64_t index = 0;
    for (int m = 0; m < n_qubits; ++m)
        if ((key >> m) & 1) index |= 1ull << layout.mode_to_qubit[static_cast<std::size_t>(m)];
    Statevector state(n_qubits, max_qubits);
    state.amplitudes[index] = {1.0, 0.0};
    return state;
}

Statevector prepare_reference(int n_qubits, const Determinant& occupation, int n_orb) {
    return prepare_reference(n_qubits, occupation, n_orb, IndexMap::identity(n_qubits));
}

void apply_pauli_rotation(Statevector& state, const PauliString& p, double angle) {
    const std::uint64_t dim = state.amplitudes.size();
    if (state.n_qubits < 64 && ((p.x | p.z) >> state.n_qubits) != 0)
        throw std::invalid_argument("apply_pauli_rotation: word exceeds register");
    const std::complex<double> c = {std::cos(angle), 0.0};
    static constexpr std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int ny = std::popcount(p.x & p.z);
    // -i * sin(angle) * i^{#Y}; basis action P|i> = front * (-1)^{|i & z|} |i ^ x>
    const std::complex<double> front =
        std::complex<double>{0.0, -std::sin(angle)} * ipow[ny & 3];

    if (p.x == 0) {
        // diagonal word: pure phases, identity included
        for (std::uint64_t i = 0; i < dim; ++i) {
            const bool odd = std::popcount(i & p.z) & 1;
            state.amplitudes[i] *= c + (odd ? -front : front);
        }
        return;
    }
    const std::uint64_t pivot = p.x & (~p.x + 1);
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & pivot) continue;
        const std::uint64_t j = i ^ p.x;
        const std::complex<double> ai = state.amplitudes[i];
        const std::complex<double> aj = state.amplitudes[j];
        const std::complex<double> fi = (std::popcount(i & p.z) & 1) ? -front : front;
        const std::complex<double> fj = (std::popcount(j & p.z) & 1) ? -front : front;
        state.amplitudes[i] = c * ai + fj * aj; // <i|P|j> carries phi(j)
        state.amplitudes[j] = c * aj + fi * ai;
    }
}

Statevector run_circuit(const CompiledCircuit& circuit, int n_orb, int max_qubits) {
    Statevector state =
        prepare_reference(circuit.n_qubits, circuit.initial_occupation, n_orb, circuit.layout, max_qubits);
    for (const auto& [word, angle] : circuit.rotations) apply_pauli_rotation(state, word, angle);
    return state;
}

SampleBatch sample_bitstrings(const Statevector& state, int shots, RngStream& rng,
                              const IndexMap& layout, int n_orb, int n_alpha, int n_beta,
                              int krylov_index, int randomization_id) {
    if (shots < 1) throw std::invalid_argument("sample_bitstrings: shots must be >= 1");
    const double norm = state.norm();
    if (std::abs(norm - 1.0) > 1e-6)
        throw std::invalid_argument("sample_bitstrings: state is not normalized");
    if (layout.n_modes() != state.n_qubits)
        throw std::invalid_argument("sample_bitstrings: layout does not match register");

    // sorted uniforms swept once against the cumulative distribution
    std::vector<double> u(static_cast<std::size_t>(shots));
    for (auto& v : u) v = rng.next_double();
    std::sort(u.begin(), u.end());

    SampleBatch batch;
    batch.krylov_index = krylov_index;
    batch.randomization_id = randomization_id;
    batch.shots = shots;

    const double total = norm * norm;
    double acc = 0.0;
    std::size_t next = 0;
    const std::uint64_t dim = state.amplitudes.size();
    for (std::uint64_t idx = 0; idx < dim && next < u.size(); ++idx) {
        acc += std::norm(state.amplitudes[idx]) / total;
        int hits = 0;
        while (next < u.size() && u[next] < acc) {
            ++hits;
            ++next;
        }
        if (hits == 0) continue;
        std::uint64_t key = 0;
        for (int q = 0; q < state.n_qubits; ++q)
            if ((idx >> q) & 1) key |= 1ull << layout.qubit_to_mode[static_cast<std::size_t>(q)];
        const Determinant det = Determinant::from_key(key, n_orb);
        if (det.n_alpha() != n_alpha || det.n_beta() != n_beta)
            throw std::logic_error("sample_bitstrings: particle number violated; "
                                   "the noiseless engine must conserve it");
        batch.counts[det] += hits;
    }
    // numerical tail: assign any unplaced draws (u ~ 1 vs cumulative 1-eps)
    if (next < u.size()) {
        for (std::uint64_t idx = dim; idx-- > 0;) {
            if (std::norm(state.amplitudes[idx]) == 0.0) continue;
            std::uint64_t key = 0;
            for (int q = 0; q < state.n_qubits; ++q)
                if ((idx >> q) & 1) key |= 1ull << layout.qubit_to_mode[static_cast<std::size_t>(q)];
            const Determinant det = Determinant::from_key(key, n_orb);
            batch.counts[det] += static_cast<int>(u.size() - next);
            break;
        }
    }
    return batch;
}

std::string batch_to_json(const SampleBatch& batch, int n_orb) {
    nlohmann::json j;
    j["k"] = batch.krylov_index;
    j["rid"] = batch.randomization_id;
    j["shots"] = batch.shots;
    auto counts = nlohmann::json::object();
    for (const auto& [det, n] : batch.counts) counts[det.hex(n_orb)] = n;
    j["counts"] = std::move(counts);
    return j.dump();
}

SampleBatch batch_from_json(const std::string& text, int n_orb) {
    const auto j = nlohmann::json::parse(text);
    SampleBatch batch;
    batch.krylov_index = j.at("k").get<int>();
    batch.randomization_id = j.at("rid").get<int>();
    batch.shots = j.at("shots").get<int>();
    int total = 0;
    for (const auto& [hex, n] : j.at("counts").items()) {
        const int c = n.get<int>();
        batch.counts[Determinant::from_hex(hex, n_orb)] = c;
        total += c;
    }
    if (total != batch.shots) throw std::runtime_error("batch json: counts do not sum to shots");
    return batch;
}

} // namespace sqdrift
