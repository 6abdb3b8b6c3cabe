#include "sqdrift/sqd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "json.hpp"

namespace sqdrift {

Subspace collect_subspace(const std::vector<SampleBatch>& batches, int n_alpha, int n_beta,
                          bool recombine, std::optional<std::size_t> truncate_to) {
    std::map<Determinant, long> multiplicity;
    std::map<Determinant, std::set<std::pair<int, int>>> sources;
    for (const auto& batch : batches) {
        for (const auto& [det, count] : batch.counts) {
            if (det.n_alpha() != n_alpha || det.n_beta() != n_beta) continue; // sector filter
            multiplicity[det] += count;
            sources[det].insert({batch.krylov_index, batch.randomization_id});
        }
    }
    if (multiplicity.empty())
        throw std::invalid_argument("collect_subspace: no sampled determinant lies in the requested sector");

    std::vector<Determinant> kept;
    if (truncate_to && multiplicity.size() > *truncate_to) {
        std::vector<std::pair<Determinant, long>> ranked(multiplicity.begin(), multiplicity.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) {
            if (l.second != r.second) return l.second > r.second;
            return l.first < r.first;
        });
        ranked.resize(*truncate_to);
        for (const auto& [det, count] : ranked) kept.push_back(det);
        std::sort(kept.begin(), kept.end());
    } else {
        for (const auto& [det, count] : multiplicity) kept.push_back(det);
    }

    Subspace out;
    if (recombine) {
        std::set<std::uint64_t> alphas, betas;
        for (const auto& det : kept) {
            alphas.insert(det.alpha);
            betas.insert(det.beta);
        }
        for (std::uint64_t a : alphas)
            for (std::uint64_t b : betas) out.determinants.push_back({a, b});
        std::sort(out.determinants.begin(), out.determinants.end());
    } else {
        out.determinants = std::move(kept);
    }
    out.provenance.reserve(out.determinants.size());
    for (const auto& det : out.determinants) {
        const auto it = sources.find(det);
        if (it == sources.end()) out.provenance.emplace_back();
        else out.provenance.emplace_back(it->second.begin(), it->second.end());
    }
    return out;
}

std::vector<SampleBatch> subsample_batches(const std::vector<SampleBatch>& batches, double fraction,
                                           RngStream& rng) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw std::invalid_argument("subsample_batches: fraction must lie in [0, 1]");
    std::vector<SampleBatch> out;
    out.reserve(batches.size());
    for (const auto& batch : batches) {
        SampleBatch thinned;
        thinned.krylov_index = batch.krylov_index;
        thinned.randomization_id = batch.randomization_id;
        int total = 0;
        for (const auto& [det, count] : batch.counts) {
            int keep = 0;
            for (int s = 0; s < count; ++s)
                if (rng.next_double() < fraction) ++keep;
            if (keep > 0) thinned.counts[det] = keep;
            total += keep;
        }
        thinned.shots = total;
        if (total > 0) out.push_back(std::move(thinned));
    }
    return out;
}

namespace {

// +/-1 ladder parity, 0 when the occupancy forbids the move
int ladder(std::uint64_t& mask, int mode, bool create) {
    const std::uint64_t bit = 1ull << mode;
    if (create == static_cast<bool>(mask & bit)) return 0;
    const int sign = (popcount_below(mask, mode) & 1) ? -1 : 1;
    mask ^= bit;
    return sign;
}

std::vector<int> bits_of(std::uint64_t mask) {
    std::vector<int> out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

} // namespace

double hamiltonian_element(const Determinant& bra, const Determinant& ket,
                           const MolecularHamiltonian& h) {
    if (bra.n_alpha() != ket.n_alpha() || bra.n_beta() != ket.n_beta())
        throw std::invalid_argument("hamiltonian_element: determinants from different sectors");
    const int n = h.n_orb;
    const std::uint64_t bk = bra.key(n), kk = ket.key(n);
    const std::uint64_t diff = bk ^ kk;
    const int degree = std::popcount(diff) / 2;
    if (degree > 2) return 0.0;

    auto orb = [n](int mode) { return mode < n ? mode : mode - n; };
    auto spin = [n](int mode) { return mode < n ? 0 : 1; };

    if (degree == 0) {
        double e = 0.0;
        const auto occ = bits_of(kk);
        for (int m : occ) e += h.h1(orb(m), orb(m));
        for (std::size_t i = 0; i < occ.size(); ++i) {
            for (std::size_t j = i + 1; j < occ.size(); ++j) {
                const int p = orb(occ[i]), q = orb(occ[j]);
                e += h.g(p, p, q, q);
                if (spin(occ[i]) == spin(occ[j])) e -= h.g(p, q, p, q);
            }
        }
        return e;
    }

    if (degree == 1) {
        const int rm = std::countr_zero(diff & kk);  // occupied only in ket
        const int ad = std::countr_zero(diff & bk);  // occupied only in bra
        std::uint64_t m = kk;
        int sign = ladder(m, rm, false);
        sign *= ladder(m, ad, true);
        const int a = orb(rm), b = orb(ad);
        double e = h.h1(b, a);
        for (int r : bits_of(kk & ~(1ull << rm))) {
            const int ro = orb(r);
            e += h.g(b, a, ro, ro);
            if (spin(r) == spin(rm)) e -= h.g(b, ro, ro, a);
        }
        return sign * e;
    }

    // degree == 2
    const auto removed = bits_of(diff & kk);
    const auto added = bits_of(diff & bk);
    const int a1 = removed[0], a2 = removed[1];
    // pair each removed mode with the added mode of the same spin; for
    // same-spin doubles the ascending-order pairing is canonical
    int b1 = added[0], b2 = added[1];
    if (spin(a1) != spin(a2)) {
        if (spin(b1) != spin(a1)) std::swap(b1, b2);
    }
    std::uint64_t m = kk;
    int sign = ladder(m, a1, false);
    sign *= ladder(m, a2, false);
    sign *= ladder(m, b2, true);
    sign *= ladder(m, b1, true);
    const int p = orb(b1), q = orb(a1), r = orb(b2), s = orb(a2);
    double e = h.g(p, q, r, s);
    if (spin(a1) == spin(a2)) e -= h.g(p, orb(a2), r, orb(a1));
    return sign * e;
}

namespace {

// total squared Slater-Condon coupling of d into its single excitations
double coupling_strength(const Determinant& d, const MolecularHamiltonian& h) {
    double sum = 0.0;
    const auto hops = [&](std::uint64_t occ, bool beta_channel) {
        for (int p : bits_of(occ)) {
            for (int q = 0; q < h.n_orb; ++q) {
                if (occ & (1ull << q)) continue;
                Determinant ex = d;
                (beta_channel ? ex.beta : ex.alpha) ^= (1ull << p) | (1ull << q);
                const double e = hamiltonian_element(ex, d, h);
                sum += e * e;
            }
        }
    };
    hops(d.alpha, false);
    hops(d.beta, true);
    return sum;
}

} // namespace

Determinant select_reference(const MolecularHamiltonian& h, std::size_t scan_cap) {
    const Determinant aufbau = hf_determinant(h.n_orb, h.n_alpha, h.n_beta);
    const std::uint64_t ca = binomial(h.n_orb, h.n_alpha);
    const std::uint64_t cb = binomial(h.n_orb, h.n_beta);
    if (ca > scan_cap || cb > scan_cap || ca * cb > scan_cap) return aufbau;

    const std::vector<Determinant> sector = enumerate_sector(h.n_orb, h.n_alpha, h.n_beta);
    std::vector<double> diags(sector.size());
    double best_diag = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sector.size(); ++i) {
        diags[i] = hamiltonian_element(sector[i], sector[i], h);
        best_diag = std::min(best_diag, diags[i]);
    }
    Determinant best = aufbau;
    double best_coupling = -1.0;
    std::uint64_t best_key = ~std::uint64_t{0};
    std::size_t considered = 0;
    for (std::size_t i = 0; i < sector.size(); ++i) {
        if (diags[i] > best_diag + 1e-9) continue;
        if (++considered > 10000) break; // keep pathological tie plateaus bounded
        const double c = coupling_strength(sector[i], h);
        const std::uint64_t key = sector[i].key(h.n_orb);
        if (c > best_coupling + 1e-9 ||
            (std::abs(c - best_coupling) <= 1e-9 && key < best_key)) {
            best = sector[i];
            best_coupling = c;
            best_key = key;
        }
    }
    return best;
}

SubspaceOperator::SubspaceOperator(std::vector<Determinant> dets, const MolecularHamiltonian& h)
    : dets_(std::move(dets)), h_(&h) {
    diag_.resize(dets_.size());
    index_.reserve(dets_.size() * 2);
    for (std::size_t i = 0; i < dets_.size(); ++i) {
        diag_[i] = hamiltonian_element(dets_[i], dets_[i], h);
        index_[dets_[i].key(h.n_orb)] = static_cast<int>(i);
    }
}

void SubspaceOperator::apply(const double* x, double* y) const {
    const int n = h_->n_orb;
    std::fill(y, y + dets_.size(), 0.0);
    for (std::size_t col = 0; col < dets_.size(); ++col) {
        const double xc = x[col];
        if (xc == 0.0) continue;
        const Determinant& ket = dets_[col];
        y[col] += diag_[col] * xc;

        const std::uint64_t kk = ket.key(n);
        const auto occ = bits_of(kk);
        std::vector<int> vir;
        vir.reserve(static_cast<std::size_t>(2 * n) - occ.size());
        for (int m = 0; m < 2 * n; ++m)
            if (!((kk >> m) & 1)) vir.push_back(m);
        auto spin = [n](int mode) { return mode < n ? 0 : 1; };

        auto touch = [&](std::uint64_t key2) {
            const auto it = index_.find(key2);
            if (it == index_.end()) return;
            const Determinant bra = Determinant::from_key(key2, n);
            y[static_cast<std::size_t>(it->second)] += hamiltonian_element(bra, ket, *h_) * xc;
        };

        for (int a : occ)
            for (int b : vir)
                if (spin(a) == spin(b)) touch(kk ^ (1ull << a) ^ (1ull << b));
        for (std::size_t i = 0; i < occ.size(); ++i) {
            for (std::size_t j = i + 1; j < occ.size(); ++j) {
                for (std::size_t u = 0; u < vir.size(); ++u) {
                    for (std::size_t v = u + 1; v < vir.size(); ++v) {
                        const int sa = spin(occ[i]) + spin(occ[j]);
                        const int sb = spin(vir[u]) + spin(vir[v]);
                        if (sa != sb) continue;
                        touch(kk ^ (1ull << occ[i]) ^ (1ull << occ[j]) ^ (1ull << vir[u]) ^
                              (1ull << vir[v]));
                    }
                }
            }
        }
    }
}

namespace {

SubspaceResult davidson(const Subspace& sub, const MolecularHamiltonian& h, double tol) {
    const int dim = static_cast<int>(sub.determinants.size());
    const SubspaceOperator op(sub.determinants, h);
    const auto& diag = [&]() -> std::vector<double> {
        std::vector<double> d(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) d[static_cast<std::size_t>(i)] = op.diagonal(static_cast<std::size_t>(i));
        return d;
    }();

    const int guess =
        static_cast<int>(std::min_element(diag.begin(), diag.end()) - diag.begin());

    constexpr int kMaxIter = 200;
    constexpr int kMaxBasis = 24;
    Eigen::MatrixXd V(dim, kMaxBasis), W(dim, kMaxBasis);
    int n_basis = 0;
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(dim);
    v0[guess] = 1.0;

    Eigen::VectorXd ritz = v0, residual(dim), work(dim);
    double theta = diag[static_cast<std::size_t>(guess)];
    double best_residual = std::numeric_limits<double>::infinity();

    auto matvec = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        op.apply(x.data(), y.data());
    };
    auto append = [&](Eigen::VectorXd vec) -> bool {
        for (int pass = 0; pass < 2; ++pass)
            for (int c = 0; c < n_basis; ++c) vec -= V.col(c).dot(vec) * V.col(c);
        const double nrm = vec.norm();
        if (nrm < 1e-10) return false;
        V.col(n_basis) = vec / nrm;
        Eigen::VectorXd col = V.col(n_basis);
        matvec(col, work);
        W.col(n_basis) = work;
        ++n_basis;
        return true;
    };
    append(v0);

    for (int iter = 1; iter <= kMaxIter; ++iter) {
        Eigen::MatrixXd t = V.leftCols(n_basis).transpose() * W.leftCols(n_basis);
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues()[0];
        const Eigen::VectorXd s = es.eigenvectors().col(0);
        ritz = V.leftCols(n_basis) * s;
        residual = W.leftCols(n_basis) * s - theta * ritz;
        const double rnorm = residual.norm();
        best_residual = std::min(best_residual, rnorm);
        if (rnorm < tol) {
            SubspaceResult out;
            out.energy = theta + h.e_core;
            out.ground_vector.assign(ritz.data(), ritz.data() + dim);
            if (out.ground_vector[static_cast<std::size_t>(guess)] < 0.0)
                for (auto& c : out.ground_vector) c = -c;
            out.dimension = dim;
            out.solver_iterations = iter;
            out.residual_norm = rnorm;
            return out;
        }
        if (n_basis == kMaxBasis) {
            // restart from the current best ritz vector
            V.col(0) = ritz.normalized();
            Eigen::VectorXd col = V.col(0);
            matvec(col, work);
            W.col(0) = work;
            n_basis = 1;
        }
        Eigen::VectorXd t_dir(dim);
        for (int i = 0; i < dim; ++i) {
            double denom = theta - diag[static_cast<std::size_t>(i)];
            if (std::abs(denom) < 1e-8) denom = denom < 0.0 ? -1e-8 : 1e-8;
            t_dir[i] = residual[i] / denom;
        }
        if (!append(std::move(t_dir)) && !append(residual))
            throw DavidsonError("davidson: stagnated with residual " + std::to_string(rnorm),
                                rnorm);
    }
    throw DavidsonError("davidson: no convergence after 200 iterations; best residual " +
                            std::to_string(best_residual),
                        best_residual);
}

} // namespace

SubspaceResult diagonalize(const Subspace& subspace, const MolecularHamiltonian& h, double tol) {
    const std::size_t dim = subspace.determinants.size();
    if (dim == 0) throw std::invalid_argument("diagonalize: empty subspace");
    if (dim > 2000) return davidson(subspace, h, tol);

    Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            const double v = hamiltonian_element(subspace.determinants[i], subspace.determinants[j], h);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    SubspaceResult out;
    out.energy = es.eigenvalues()[0] + h.e_core;
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    out.ground_vector.assign(v.data(), v.data() + static_cast<Eigen::Index>(dim));
    // deterministic overall sign: largest-|c| entry positive
    std::size_t imax = 0;
    for (std::size_t i = 1; i < dim; ++i)
        if (std::abs(out.ground_vector[i]) > std::abs(out.ground_vector[imax])) imax = i;
    if (out.ground_vector[imax] < 0.0)
        for (auto& c : out.ground_vector) c = -c;
    out.dimension = static_cast<int>(dim);
    out.solver_iterations = 1;
    out.residual_norm = (m * v - es.eigenvalues()[0] * v).norm();
    return out;
}

std::string result_to_json(const SubspaceResult& r, const Subspace& subspace, int n_orb,
                           std::size_t top_k) {
    nlohmann::json j;
    j["energy"] = r.energy;
    j["dimension"] = r.dimension;
    j["n_iterations"] = r.solver_iterations;
    j["residual"] = r.residual_norm;
    std::vector<std::size_t> order(r.ground_vector.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = std::abs(r.ground_vector[a]), vb = std::abs(r.ground_vector[b]);
        if (va != vb) return va > vb;
        return subspace.determinants[a] < subspace.determinants[b];
    });
    auto top = nlohmann::json::array();
    for (std::size_t i = 0; i < order.size() && i < top_k; ++i)
        top.push_back({subspace.determinants[order[i]].hex(n_orb), r.ground_vector[order[i]]});
    j["top_coefficients"] = std::move(top);
    return j.dump();
}

} // namespace sqdrift
