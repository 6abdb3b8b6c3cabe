#include "sqdrift/f2q.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace sqdrift {

IndexMap IndexMap::identity(int n_modes) {
    IndexMap m;
    m.mode_to_qubit.resize(static_cast<std::size_t>(n_modes));
    std::iota(m.mode_to_qubit.begin(), m.mode_to_qubit.end(), 0);
    m.qubit_to_mode = m.mode_to_qubit;
    return m;
}

IndexMap IndexMap::from_mode_to_qubit(std::vector<int> m2q) {
    const int n = static_cast<int>(m2q.size());
    IndexMap m;
    m.qubit_to_mode.assign(static_cast<std::size_t>(n), -1);
    for (int mode = 0; mode < n; ++mode) {
        const int q = m2q[static_cast<std::size_t>(mode)];
        if (q < 0 || q >= n || m.qubit_to_mode[static_cast<std::size_t>(q)] != -1)
            throw std::invalid_argument("layout: mode_to_qubit is not a permutation");
        m.qubit_to_mode[static_cast<std::size_t>(q)] = mode;
    }
    m.mode_to_qubit = std::move(m2q);
    return m;
}

bool IndexMap::is_identity() const {
    for (int i = 0; i < n_modes(); ++i)
        if (mode_to_qubit[static_cast<std::size_t>(i)] != i) return false;
    return true;
}

namespace {

struct WeightedWord {
    PhasedPauli op;
};

// the two strings of one Jordan-Wigner factor, with coefficients folded into
// the phases
std::vector<PhasedPauli> hop_strings(const HopFactor& hop, const IndexMap& layout) {
    const int qa = layout.mode_to_qubit[static_cast<std::size_t>(hop.a)];
    const int qb = layout.mode_to_qubit[static_cast<std::size_t>(hop.b)];
    const int lo = std::min(qa, qb), hi = std::max(qa, qb);
    const std::uint64_t ends = (1ull << lo) | (1ull << hi);
    const std::uint64_t chain = (((1ull << hi) - 1) ^ ((1ull << (lo + 1)) - 1));
    PauliString xx{ends, chain, 64, 0.5};
    PauliString yy{ends, chain | ends, 64, 0.5};
    return {from_letters(xx), from_letters(yy)};
}

std::vector<PhasedPauli> density_strings(int mode, const IndexMap& layout) {
    const int q = layout.mode_to_qubit[static_cast<std::size_t>(mode)];
    return {PhasedPauli{0, 0, {0.5, 0.0}}, PhasedPauli{0, 1ull << q, {-0.5, 0.0}}};
}

void merge_into(std::map<std::pair<std::uint64_t, std::uint64_t>, double>& acc,
                const PhasedPauli& op, double extra) {
    PhasedPauli scaled = op;
    scaled.phase *= extra;
    const std::complex<double> c = letter_coefficient(scaled);
    // factor strings of one part commute pairwise, so products stay real
    if (std::abs(c.imag()) > 1e-12 * (std::abs(c.real()) + 1.0))
        throw std::logic_error("pauli expansion produced a non-real coefficient");
    if (c.real() == 0.0) return;
    acc[{scaled.x, scaled.z}] += c.real();
}

std::vector<PauliString> expand_part(const TermPart& part, const IndexMap& layout,
                                     std::map<std::pair<std::uint64_t, std::uint64_t>, double>* shared) {
    std::vector<PhasedPauli> cur = {PhasedPauli{0, 0, {1.0, 0.0}}};
    auto fold = [&](const std::vector<PhasedPauli>& factor) {
        std::vector<PhasedPauli> next;
        next.reserve(cur.size() * factor.size());
        for (const auto& a : cur)
            for (const auto& b : factor) next.push_back(mul(a, b));
        cur = std::move(next);
    };
    for (const auto& hop : part.hops) fold(hop_strings(hop, layout));
    for (int m : part.dens) fold(density_strings(m, layout));

    std::map<std::pair<std::uint64_t, std::uint64_t>, double> local;
    auto& acc = shared ? *shared : local;
    for (const auto& op : cur) merge_into(acc, op, part.weight);
    if (shared) return {};
    std::vector<PauliString> out;
    out.reserve(local.size());
    for (const auto& [key, coeff] : local) {
        if (coeff == 0.0) continue;
        out.push_back(PauliString{key.first, key.second, layout.n_modes(), coeff});
    }
    return out;
}

} // namespace

std::vector<PauliString> map_part_jw(const TermPart& part, const IndexMap& layout) {
    return expand_part(part, layout, nullptr);
}

std::vector<PauliString> map_excitation_jw(const ExcitationTerm& term, const IndexMap& layout) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> acc;
    for (const auto& part : term.parts) expand_part(part, layout, &acc);
    std::vector<PauliString> out;
    out.reserve(acc.size());
    for (const auto& [key, coeff] : acc) {
        if (coeff == 0.0) continue;
        out.push_back(PauliString{key.first, key.second, layout.n_modes(), coeff});
    }
    return out;
}

std::vector<std::pair<int, int>> penalized_pairs(const ExcitationTerm& term) {
    std::set<std::pair<int, int>> pairs;
    for (const auto& part : term.parts)
        for (const auto& hop : part.hops) pairs.insert({hop.a, hop.b});
    return {pairs.begin(), pairs.end()};
}

long layout_objective(const std::vector<const ExcitationTerm*>& batch, const IndexMap& layout) {
    long total = 0;
    for (const auto* term : batch)
        for (const auto& [a, b] : penalized_pairs(*term))
            total += std::abs(layout.mode_to_qubit[static_cast<std::size_t>(a)] -
                              layout.mode_to_qubit[static_cast<std::size_t>(b)]);
    return total;
}

long total_mapped_weight(const std::vector<const ExcitationTerm*>& batch, const IndexMap& layout) {
    long total = 0;
    for (const auto* term : batch)
        for (const auto& s : map_excitation_jw(*term, layout)) total += s.weight();
    return total;
}

namespace {

// objective restricted to the penalized modes, with positions given by their
// index in `order`
long window_objective(const std::vector<int>& order,
                      const std::vector<std::tuple<int, int, long>>& pair_weights,
                      const std::vector<int>& pos_of_mode) {
    long total = 0;
    for (const auto& [a, b, w] : pair_weights)
        total += w * std::abs(pos_of_mode[static_cast<std::size_t>(a)] -
                              pos_of_mode[static_cast<std::size_t>(b)]);
    (void)order;
    return total;
}

IndexMap layout_from_window(const std::vector<int>& order, int window_start, int n_modes) {
    std::vector<int> m2q(static_cast<std::size_t>(n_modes), -1);
    std::vector<bool> taken(static_cast<std::size_t>(n_modes), false);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const int q = window_start + static_cast<int>(i);
        m2q[static_cast<std::size_t>(order[i])] = q;
        taken[static_cast<std::size_t>(q)] = true;
    }
    int next_free = 0;
    for (int mode = 0; mode < n_modes; ++mode) {
        if (m2q[static_cast<std::size_t>(mode)] != -1) continue;
        while (taken[static_cast<std::size_t>(next_free)]) ++next_free;
        m2q[static_cast<std::size_t>(mode)] = next_free;
        taken[static_cast<std::size_t>(next_free)] = true;
    }
    return IndexMap::from_mode_to_qubit(std::move(m2q));
}

} // namespace

IndexMap optimize_layout(const std::vector<const ExcitationTerm*>& batch, int n_modes) {
    const IndexMap ident = IndexMap::identity(n_modes);
    if (batch.empty()) return ident;

    std::map<std::pair<int, int>, long> weight;
    for (const auto* term : batch)
        for (const auto& pr : penalized_pairs(*term)) weight[pr] += 1;
    if (weight.empty()) return ident;

    std::set<int> penalized_set;
    for (const auto& [pr, w] : weight) {
        penalized_set.insert(pr.first);
        penalized_set.insert(pr.second);
    }
    std::vector<int> penalized(penalized_set.begin(), penalized_set.end());
    const int window_start = penalized.front();

    std::vector<std::tuple<int, int, long>> pair_weights;
    pair_weights.reserve(weight.size());
    for (const auto& [pr, w] : weight) pair_weights.emplace_back(pr.first, pr.second, w);

    std::vector<int> pos_of_mode(static_cast<std::size_t>(n_modes), 0);
    auto fill_positions = [&](const std::vector<int>& order) {
        for (std::size_t i = 0; i < order.size(); ++i)
            pos_of_mode[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    };

    std::vector<int> best_order;
    long best_obj = 0;
    if (penalized.size() <= 8) {
        std::vector<int> order = penalized;
        bool first = true;
        do {
            fill_positions(order);
            const long obj = window_objective(order, pair_weights, pos_of_mode);
            if (first || obj < best_obj) {
                best_obj = obj;
                best_order = order;
                first = false;
            }
        } while (std::next_permutation(order.begin(), order.end()));
    } else {
        // greedy chain construction: start from the heaviest pair, then keep
        // attaching the mode most strongly coupled to the placed ones at
        // whichever end costs less
        auto w_of = [&](int a, int b) {
            const auto it = weight.find({std::min(a, b), std::max(a, b)});
            return it == weight.end() ? 0l : it->second;
        };
        auto heaviest = std::max_element(pair_weights.begin(), pair_weights.end(),
                                         [](const auto& l, const auto& r) {
                                             return std::get<2>(l) < std::get<2>(r);
                                         });
        std::vector<int> chain = {std::get<0>(*heaviest), std::get<1>(*heaviest)};
        std::set<int> placed(chain.begin(), chain.end());
        while (placed.size() < penalized.size()) {
            int pick = -1;
            long pick_mass = -1;
            for (int m : penalized) {
                if (placed.count(m)) continue;
                long mass = 0;
                for (int p : chain) mass += w_of(m, p);
                if (mass > pick_mass) {
                    pick_mass = mass;
                    pick = m;
                }
            }
            long cost_left = 0, cost_right = 0;
            const int len = static_cast<int>(chain.size());
            for (int i = 0; i < len; ++i) {
                const long w = w_of(pick, chain[static_cast<std::size_t>(i)]);
                cost_left += w * (i + 1);
                cost_right += w * (len - i);
            }
            if (cost_left < cost_right) chain.insert(chain.begin(), pick);
            else chain.push_back(pick);
            placed.insert(pick);
        }
        // 2-opt position swaps to a local minimum
        fill_positions(chain);
        long obj = window_objective(chain, pair_weights, pos_of_mode);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
                for (std::size_t j = i + 1; j < chain.size(); ++j) {
                    std::swap(chain[i], chain[j]);
                    fill_positions(chain);
                    const long trial = window_objective(chain, pair_weights, pos_of_mode);
                    if (trial < obj) {
                        obj = trial;
                        improved = true;
                    } else {
                        std::swap(chain[i], chain[j]);
                    }
                }
            }
            fill_positions(chain);
        }
        best_order = chain;
        best_obj = obj;
    }

    IndexMap candidate = layout_from_window(best_order, window_start, n_modes);
    if (layout_objective(batch, candidate) > layout_objective(batch, ident)) return ident;
    if (total_mapped_weight(batch, candidate) > total_mapped_weight(batch, ident)) return ident;
    (void)best_obj;
    return candidate;
}

CompiledCircuit compile_sequence(const QDriftSequence& seq, const TermDistribution& dist,
                                 const IndexMap& layout, const Determinant& hf_occupation,
                                 int n_orb) {
    if (layout.n_modes() != 2 * n_orb)
        throw std::invalid_argument("compile_sequence: layout size does not match mode count");
    CompiledCircuit circuit;
    circuit.n_qubits = layout.n_modes();
    circuit.initial_occupation = hf_occupation;
    circuit.layout = layout;

    std::vector<std::vector<PauliString>> cache(dist.terms.size());
    std::vector<bool> cached(dist.terms.size(), false);
    for (int idx : seq.term_indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= dist.terms.size())
            throw std::invalid_argument("compile_sequence: term index out of range");
        if (!cached[static_cast<std::size_t>(idx)]) {
            cache[static_cast<std::size_t>(idx)] =
                map_excitation_jw(dist.terms[static_cast<std::size_t>(idx)], layout);
            cached[static_cast<std::size_t>(idx)] = true;
        }
        for (const auto& s : cache[static_cast<std::size_t>(idx)])
            circuit.rotations.emplace_back(s, seq.step_angle * s.coefficient);
    }
    return circuit;
}

std::string circuit_to_json(const CompiledCircuit& c, int n_orb) {
    nlohmann::json j;
    j["n_qubits"] = c.n_qubits;
    j["n_orb"] = n_orb;
    j["initial_occupation"] = c.initial_occupation.hex(n_orb);
    j["layout"] = c.layout.mode_to_qubit;
    auto rot = nlohmann::json::array();
    for (const auto& [s, angle] : c.rotations) rot.push_back({s.word(), angle});
    j["rotations"] = std::move(rot);
    return j.dump();
}

CompiledCircuit circuit_from_json(const std::string& text, int* n_orb_out) {
    const auto j = nlohmann::json::parse(text);
    CompiledCircuit c;
    c.n_qubits = j.at("n_qubits").get<int>();
    const int n_orb = j.at("n_orb").get<int>();
    if (n_orb_out) *n_orb_out = n_orb;
    c.initial_occupation = Determinant::from_hex(j.at("initial_occupation").get<std::string>(), n_orb);
    c.layout = IndexMap::from_mode_to_qubit(j.at("layout").get<std::vector<int>>());
    for (const auto& rec : j.at("rotations")) {
        if (!rec.is_array() || rec.size() != 2) throw std::runtime_error("circuit json: bad rotation record");
        auto s = PauliString::from_word(rec[0].get<std::string>(), 1.0);
        c.rotations.emplace_back(s, rec[1].get<double>());
    }
    return c;
}

} // namespace sqdrift
