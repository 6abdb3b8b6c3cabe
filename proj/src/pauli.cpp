#include "sqdrift/pauli.hpp"

#include <stdexcept>

namespace sqdrift {

PauliString PauliString::from_word(const std::string& w, double coeff) {
    if (w.size() > 64) throw std::invalid_argument("Pauli word longer than 64 qubits");
    PauliString p;
    p.n_qubits = static_cast<int>(w.size());
    p.coefficient = coeff;
    for (int q = 0; q < p.n_qubits; ++q) {
        switch (w[static_cast<std::size_t>(q)]) {
            case 'I': break;
            case 'X': p.x |= 1ULL << q; break;
            case 'Y': p.x |= 1ULL << q; p.z |= 1ULL << q; break;
            case 'Z': p.z |= 1ULL << q; break;
            default: throw std::invalid_argument("Pauli word may contain only IXYZ");
        }
    }
    return p;
}

} // namespace sqdrift
