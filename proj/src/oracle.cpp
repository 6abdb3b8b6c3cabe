#include "sqdrift/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sqdrift/sqd.hpp"

namespace sqdrift {

namespace {

using cd = std::complex<double>;

constexpr int kMaxDenseQubits = 12;

void check_dense_size(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxDenseQubits) {
        throw std::invalid_argument("dense reference builders support 1..12 qubits");
    }
}

struct Ket {
    std::uint64_t state = 0;
    double sign = 1.0;
};

// a_q / a^dag_q on a computational basis state, parity counted in qubit
// order. Returns false when the operator annihilates the ket.
bool apply_ladder(Ket& k, int qubit, bool create) {
    const std::uint64_t bit = 1ull << qubit;
    const bool occupied = (k.state & bit) != 0;
    if (create == occupied) return false;
    if (std::popcount(k.state & (bit - 1)) & 1) k.sign = -k.sign;
    k.state ^= bit;
    return true;
}

// All (state, amplitude) branches of one normalized grouped term applied to
// a basis state, with modes placed by `layout`.
void term_branches(const ExcitationTerm& term, const IndexMap& layout, std::uint64_t state,
                   std::vector<std::pair<std::uint64_t, double>>& out) {
    out.clear();
    for (const TermPart& part : term.parts) {
        // Density factors are diagonal; check them first.
        bool alive = true;
        for (int mode : part.dens) {
            const int q = layout.mode_to_qubit[static_cast<std::size_t>(mode)];
            if (!((state >> q) & 1ull)) {
                alive = false;
                break;
            }
        }
        if (!alive) continue;
        // Each hop factor contributes two directions; walk the Cartesian
        // product of choices. Hop supports are disjoint even operators, so
        // the application order is immaterial.
        const std::size_t n_hops = part.hops.size();
        const std::size_t n_branches = std::size_t{1} << n_hops;
        for (std::size_t branch = 0; branch < n_branches; ++branch) {
            Ket k{state, part.weight};
            bool ok = true;
            for (std::size_t f = 0; f < n_hops && ok; ++f) {
                const HopFactor& hop = part.hops[f];
                const bool forward = ((branch >> f) & 1u) == 0;
                const int src = forward ? hop.b : hop.a;
                const int dst = forward ? hop.a : hop.b;
                ok = apply_ladder(k, layout.mode_to_qubit[static_cast<std::size_t>(src)], false) &&
                     apply_ladder(k, layout.mode_to_qubit[static_cast<std::size_t>(dst)], true);
            }
            if (ok) out.emplace_back(k.state, k.sign);
        }
    }
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Eigen::Matrix2cd letter_matrix(char letter) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    switch (letter) {
    case 'I':
        m(0, 0) = 1.0;
        m(1, 1) = 1.0;
        break;
    case 'X':
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        break;
    case 'Y':
        m(0, 1) = cd(0.0, -1.0);
        m(1, 0) = cd(0.0, 1.0);
        break;
    case 'Z':
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
        break;
    default:
        throw std::logic_error("unknown pauli letter");
    }
    return m;
}

double operator_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

} // namespace

Eigen::MatrixXd dense_hamiltonian(const MolecularHamiltonian& h, const IndexMap& layout) {
    const int n = h.n_orb;
    const int n_qubits = 2 * n;
    check_dense_size(n_qubits);
    if (static_cast<int>(layout.mode_to_qubit.size()) != n_qubits) {
        throw std::invalid_argument("layout size does not match the mode count");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
    const auto qubit = [&](int orb, int spin) {
        const int mode = spin == 0 ? alpha_mode(orb, n) : beta_mode(orb, n);
        return layout.mode_to_qubit[static_cast<std::size_t>(mode)];
    };
    for (std::size_t col = 0; col < dim; ++col) {
        for (int sigma = 0; sigma < 2; ++sigma) {
            for (int p = 0; p < n; ++p) {
                for (int q = 0; q < n; ++q) {
                    const double v = h.h1(p, q);
                    if (v == 0.0) continue;
                    Ket k{col, 1.0};
                    if (!apply_ladder(k, qubit(q, sigma), false)) continue;
                    if (!apply_ladder(k, qubit(p, sigma), true)) continue;
                    mat(static_cast<Eigen::Index>(k.state), static_cast<Eigen::Index>(col)) +=
                        k.sign * v;
                }
            }
        }
        for (int sigma = 0; sigma < 2; ++sigma) {
            for (int tau = 0; tau < 2; ++tau) {
                for (int p = 0; p < n; ++p) {
                    for (int q = 0; q < n; ++q) {
                        for (int r = 0; r < n; ++r) {
                            for (int s = 0; s < n; ++s) {
                                const double v = 0.5 * h.g(p, q, r, s);
                                if (v == 0.0) continue;
                                Ket k{col, 1.0};
                                if (!apply_ladder(k, qubit(q, sigma), false)) continue;
                                if (!apply_ladder(k, qubit(s, tau), false)) continue;
                                if (!apply_ladder(k, qubit(r, tau), true)) continue;
                                if (!apply_ladder(k, qubit(p, sigma), true)) continue;
                                mat(static_cast<Eigen::Index>(k.state),
                                    static_cast<Eigen::Index>(col)) += k.sign * v;
                            }
                        }
                    }
                }
            }
        }
    }
    return mat;
}

Eigen::MatrixXd dense_hamiltonian(const MolecularHamiltonian& h) {
    return dense_hamiltonian(h, IndexMap::identity(2 * h.n_orb));
}

Eigen::MatrixXd dense_term(const ExcitationTerm& term, const IndexMap& layout, int n_qubits) {
    check_dense_size(n_qubits);
    if (static_cast<int>(layout.mode_to_qubit.size()) != n_qubits) {
        throw std::invalid_argument("layout size does not match the qubit count");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                static_cast<Eigen::Index>(dim));
    std::vector<std::pair<std::uint64_t, double>> branches;
    for (std::size_t col = 0; col < dim; ++col) {
        term_branches(term, layout, col, branches);
        for (const auto& [row, amp] : branches) {
            mat(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += amp;
        }
    }
    return mat;
}

Eigen::MatrixXcd dense_pauli(const PauliString& p, int n_qubits) {
    check_dense_size(n_qubits);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q) {
        out = kron(letter_matrix(p.letter(q)), out);
    }
    return out;
}

Eigen::MatrixXcd dense_rotation(const PauliString& p, double angle, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    const Eigen::MatrixXcd word = dense_pauli(p, n_qubits);
    return std::cos(angle) *
               Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim)) -
           cd(0.0, 1.0) * std::sin(angle) * word;
}

Eigen::MatrixXcd dense_exponential(const Eigen::MatrixXd& m, double angle) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix exponential needs a square input");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        phases(i) = std::exp(cd(0.0, -angle * lam(i)));
    }
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cd>();
    return v * phases.asDiagonal() * v.adjoint();
}

Eigen::MatrixXcd dense_circuit_unitary(const CompiledCircuit& c) {
    check_dense_size(c.n_qubits);
    const std::size_t dim = std::size_t{1} << c.n_qubits;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim),
                                                    static_cast<Eigen::Index>(dim));
    for (const auto& [word, angle] : c.rotations) {
        u = dense_rotation(word, angle, c.n_qubits) * u;
    }
    return u;
}

SectorOracle::SectorOracle(const MolecularHamiltonian& h, std::size_t dense_cap) : h_(h) {
    dets_ = enumerate_sector(h.n_orb, h.n_alpha, h.n_beta);
    if (dets_.size() > dense_cap) {
        throw std::invalid_argument("sector dimension exceeds the dense oracle cap");
    }
    const Eigen::Index dim = static_cast<Eigen::Index>(dets_.size());
    index_.reserve(dets_.size());
    for (std::size_t i = 0; i < dets_.size(); ++i) {
        index_.emplace(dets_[i].key(h.n_orb), static_cast<int>(i));
    }
    mat_.resize(dim, dim);
    if (2 * h.n_orb <= kMaxDenseQubits) {
        // Project the brute-force full-register matrix onto the sector; the
        // identity layout makes the basis index of a determinant its key.
        const Eigen::MatrixXd full = dense_hamiltonian(h);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const auto cj = static_cast<Eigen::Index>(dets_[static_cast<std::size_t>(j)].key(h.n_orb));
            for (Eigen::Index i = 0; i < dim; ++i) {
                const auto ri =
                    static_cast<Eigen::Index>(dets_[static_cast<std::size_t>(i)].key(h.n_orb));
                mat_(i, j) = full(ri, cj);
            }
        }
    } else {
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index i = 0; i < dim; ++i) {
                mat_(i, j) = hamiltonian_element(dets_[static_cast<std::size_t>(i)],
                                                 dets_[static_cast<std::size_t>(j)], h_);
            }
        }
    }
    mat_ = 0.5 * (mat_ + mat_.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat_);
    if (es.info() != Eigen::Success) throw std::runtime_error("sector eigendecomposition failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
    ground_ = evecs_.col(0);
    Eigen::Index top = 0;
    ground_.cwiseAbs().maxCoeff(&top);
    if (ground_(top) < 0.0) ground_ = -ground_;
}

double SectorOracle::fci_energy() const { return evals_(0) + h_.e_core; }

SpectralData SectorOracle::spectral(const Determinant& reference) const {
    SpectralData s;
    s.e0 = evals_(0);
    s.e1 = evals_.size() > 1 ? evals_(1) : evals_(0);
    s.e_max = evals_(evals_.size() - 1);
    s.h_norm = std::max(std::abs(s.e0), std::abs(s.e_max));
    s.delta = s.e1 - s.e0;
    const int idx = index_of(reference);
    if (idx < 0) throw std::invalid_argument("reference determinant lies outside the sector");
    s.gamma0_sq = ground_(idx) * ground_(idx);
    return s;
}

int SectorOracle::index_of(const Determinant& det) const {
    const auto it = index_.find(det.key(h_.n_orb));
    return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXcd SectorOracle::basis_state(const Determinant& det) const {
    const int idx = index_of(det);
    if (idx < 0) throw std::invalid_argument("determinant lies outside the sector");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dets_.size()));
    v(idx) = 1.0;
    return v;
}

Eigen::VectorXcd SectorOracle::propagate(const Eigen::VectorXcd& v, double t) const {
    if (v.size() != static_cast<Eigen::Index>(dets_.size())) {
        throw std::invalid_argument("state dimension does not match the sector");
    }
    const Eigen::VectorXcd coeffs = evecs_.transpose().cast<cd>() * v;
    Eigen::VectorXcd rotated(coeffs.size());
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        rotated(i) = std::exp(cd(0.0, -t * evals_(i))) * coeffs(i);
    }
    return evecs_.cast<cd>() * rotated;
}

Eigen::MatrixXcd SectorOracle::propagator(double t) const {
    Eigen::VectorXcd phases(evals_.size());
    for (Eigen::Index i = 0; i < evals_.size(); ++i) {
        phases(i) = std::exp(cd(0.0, -t * evals_(i)));
    }
    const Eigen::MatrixXcd v = evecs_.cast<cd>();
    return v * phases.asDiagonal() * v.adjoint();
}

Eigen::MatrixXd SectorOracle::sector_term(const ExcitationTerm& term) const {
    const Eigen::Index dim = static_cast<Eigen::Index>(dets_.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
    const IndexMap ident = IndexMap::identity(h_.n_modes());
    std::vector<std::pair<std::uint64_t, double>> branches;
    for (Eigen::Index j = 0; j < dim; ++j) {
        term_branches(term, ident, dets_[static_cast<std::size_t>(j)].key(h_.n_orb), branches);
        for (const auto& [state, amp] : branches) {
            const auto it = index_.find(state);
            if (it == index_.end()) {
                throw std::logic_error("grouped term left the particle-number sector");
            }
            out(it->second, j) += amp;
        }
    }
    return out;
}

namespace {

struct LanczosOut {
    double e0 = 0.0;
    double e1 = 0.0;
    Eigen::VectorXd ground;
};

// Lanczos with full reorthogonalization; `sign` of +1 targets the bottom of
// the spectrum, -1 the top (of sign*H, reported for sign*H).
LanczosOut lanczos_lowest(const SubspaceOperator& op, double sign, const Eigen::VectorXd& start,
                          int max_basis, double tol) {
    const Eigen::Index dim = static_cast<Eigen::Index>(op.dim());
    max_basis = std::min<int>(max_basis, static_cast<int>(dim));
    Eigen::MatrixXd basis(dim, max_basis);
    std::vector<double> alphas;
    std::vector<double> betas; // betas[k] couples column k to k+1
    basis.col(0) = start.normalized();
    Eigen::VectorXd w(dim);
    double prev_e0 = std::numeric_limits<double>::infinity();
    int stable = 0;
    int n_basis = 0;
    LanczosOut out;
    const auto tridiag_eigs = [&](int k) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            t(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < k) {
                t(i, i + 1) = betas[static_cast<std::size_t>(i)];
                t(i + 1, i) = betas[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        return es;
    };
    for (int k = 0; k < max_basis; ++k) {
        const Eigen::VectorXd vk = basis.col(k);
        op.apply(vk.data(), w.data());
        if (sign < 0) w = -w;
        const double alpha = vk.dot(w);
        alphas.push_back(alpha);
        n_basis = k + 1;
        w -= alpha * vk;
        if (k > 0) w -= betas[static_cast<std::size_t>(k - 1)] * basis.col(k - 1);
        for (int pass = 0; pass < 2; ++pass) {
            w -= basis.leftCols(n_basis) * (basis.leftCols(n_basis).transpose() * w);
        }
        const auto es = tridiag_eigs(n_basis);
        const double e0 = es.eigenvalues()(0);
        if (std::abs(e0 - prev_e0) < tol * std::max(1.0, std::abs(e0))) {
            ++stable;
        } else {
            stable = 0;
        }
        prev_e0 = e0;
        const double beta = w.norm();
        const bool exhausted = beta < 1e-12 || k + 1 == max_basis;
        if ((stable >= 3 && n_basis >= 2) || exhausted) {
            out.e0 = sign * es.eigenvalues()(0);
            out.e1 = sign * (n_basis > 1 ? es.eigenvalues()(1) : es.eigenvalues()(0));
            out.ground = basis.leftCols(n_basis) * es.eigenvectors().col(0);
            out.ground.normalize();
            return out;
        }
        betas.push_back(beta);
        basis.col(k + 1) = w / beta;
    }
    throw std::runtime_error("lanczos failed to converge");
}

} // namespace

FciResult fci_solve(const MolecularHamiltonian& h, std::size_t dense_cap, std::size_t lanczos_cap) {
    const Determinant hf = select_reference(h);
    FciResult out;
    if (binomial(h.n_orb, h.n_alpha) * binomial(h.n_orb, h.n_beta) <= dense_cap) {
        SectorOracle oracle(h, dense_cap);
        out.dets = oracle.dets();
        out.energy = oracle.fci_energy();
        out.ground_vector.assign(oracle.ground_vector().data(),
                                 oracle.ground_vector().data() + oracle.ground_vector().size());
        out.spectral = oracle.spectral(hf);
        return out;
    }
    std::vector<Determinant> dets = enumerate_sector(h.n_orb, h.n_alpha, h.n_beta);
    if (dets.size() > lanczos_cap) {
        throw std::invalid_argument("sector dimension exceeds the iterative solver cap");
    }
    const SubspaceOperator op(dets, h);
    const Eigen::Index dim = static_cast<Eigen::Index>(dets.size());
    int hf_idx = -1;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i] == hf) {
            hf_idx = static_cast<int>(i);
            break;
        }
    }
    if (hf_idx < 0) throw std::logic_error("reference determinant missing from its own sector");
    RngStream rng(0x5eedfc1u);
    Eigen::VectorXd start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = 1e-3 * (rng.next_double() - 0.5);
    start(hf_idx) += 1.0;
    const LanczosOut low = lanczos_lowest(op, 1.0, start, 250, 1e-13);
    const LanczosOut high = lanczos_lowest(op, -1.0, start, 250, 1e-11);
    out.dets = std::move(dets);
    out.energy = low.e0 + h.e_core;
    Eigen::VectorXd ground = low.ground;
    Eigen::Index top = 0;
    ground.cwiseAbs().maxCoeff(&top);
    if (ground(top) < 0.0) ground = -ground;
    out.ground_vector.assign(ground.data(), ground.data() + ground.size());
    out.spectral.e0 = low.e0;
    out.spectral.e1 = low.e1;
    out.spectral.e_max = high.e0;
    out.spectral.h_norm = std::max(std::abs(out.spectral.e0), std::abs(out.spectral.e_max));
    out.spectral.delta = out.spectral.e1 - out.spectral.e0;
    out.spectral.gamma0_sq = ground(hf_idx) * ground(hf_idx);
    return out;
}

ChannelErrorReport channel_error(const SectorOracle& oracle, const TermDistribution& dist,
                                 int n_steps, double t, int trials, RngStream& rng,
                                 double delta_conf) {
    if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    if (delta_conf <= 0.0 || delta_conf >= 1.0) {
        throw std::invalid_argument("delta_conf must lie in (0, 1)");
    }
    const Eigen::Index dim = static_cast<Eigen::Index>(oracle.dim());
    const double lambda = dist.lambda;
    const double step_angle = t * lambda / n_steps;
    std::vector<Eigen::MatrixXcd> steps;
    steps.reserve(dist.terms.size());
    for (const ExcitationTerm& term : dist.terms) {
        steps.push_back(dense_exponential(oracle.sector_term(term), step_angle));
    }
    const Eigen::MatrixXcd u = oracle.propagator(t);
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(dim, dim);
    std::vector<double> errors;
    errors.reserve(static_cast<std::size_t>(trials));
    for (int r = 0; r < trials; ++r) {
        const QDriftSequence seq = sample_sequence(dist, n_steps, t, rng);
        Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(dim, dim);
        for (int idx : seq.term_indices) {
            v = steps[static_cast<std::size_t>(idx)] * v;
        }
        mean += v;
        errors.push_back(operator_norm(u - v));
    }
    mean /= static_cast<double>(trials);
    ChannelErrorReport rep;
    rep.trials = trials;
    rep.empirical_error = operator_norm(u - mean);
    rep.deterministic_bound = t * t * lambda * lambda / n_steps;
    const int n_qubits = oracle.hamiltonian().n_modes();
    const double log_term = (n_qubits + 1) * std::log(2.0) - std::log(delta_conf);
    rep.single_bound = t * lambda * std::sqrt(11.0 * log_term / n_steps);
    rep.analytic_bound =
        rep.deterministic_bound +
        t * lambda * std::sqrt(11.0 * log_term / (static_cast<double>(n_steps) * trials));
    double sum = 0.0;
    double sq = 0.0;
    int within = 0;
    for (double e : errors) {
        sum += e;
        sq += e * e;
        if (e < rep.single_bound) ++within;
    }
    rep.realization_mean = sum / trials;
    rep.realization_std =
        trials > 1 ? std::sqrt(std::max(0.0, (sq - sum * sum / trials) / (trials - 1))) : 0.0;
    rep.fraction_within = static_cast<double>(within) / trials;
    return rep;
}

KrylovMatrices krylov_matrices(const SectorOracle& oracle, const Eigen::VectorXcd& psi0, int d,
                               double t, KrylovVariant variant, const TermDistribution& dist,
                               int n_steps, int n_rand, RngStream& rng) {
    if (d < 1 || d % 2 == 0) throw std::invalid_argument("the subspace dimension must be odd");
    const Eigen::Index dim = static_cast<Eigen::Index>(oracle.dim());
    if (psi0.size() != dim) throw std::invalid_argument("psi0 does not match the sector dimension");
    if (variant != KrylovVariant::ideal) {
        if (n_steps < 1) throw std::invalid_argument("n_steps must be positive");
        if (variant == KrylovVariant::qdrift_finite && n_rand < 1) {
            throw std::invalid_argument("n_rand must be positive");
        }
    }
    const Eigen::VectorXcd h_psi0 = oracle.matrix().cast<cd>() * psi0;
    Eigen::VectorXcd s_elems(d);
    Eigen::VectorXcd h_elems(d);
    if (variant == KrylovVariant::ideal) {
        for (int m = 0; m < d; ++m) {
            s_elems(m) = psi0.dot(oracle.propagate(psi0, m * t));
            h_elems(m) = psi0.dot(oracle.propagate(h_psi0, m * t));
        }
    } else if (variant == KrylovVariant::qdrift_ideal) {
        for (int m = 0; m < d; ++m) {
            const double angle = m * t * dist.lambda / n_steps;
            Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(dim, dim);
            for (std::size_t i = 0; i < dist.terms.size(); ++i) {
                mix += (dist.terms[i].coefficient / dist.lambda) *
                       dense_exponential(oracle.sector_term(dist.terms[i]), angle);
            }
            // mix^n_steps by binary exponentiation.
            Eigen::MatrixXcd accum = Eigen::MatrixXcd::Identity(dim, dim);
            Eigen::MatrixXcd base = mix;
            int e = n_steps;
            while (e > 0) {
                if (e & 1) accum = accum * base;
                base = base * base;
                e >>= 1;
            }
            s_elems(m) = psi0.dot(accum * psi0);
            h_elems(m) = psi0.dot(accum * h_psi0);
        }
    } else {
        std::vector<Eigen::MatrixXd> sector_terms;
        sector_terms.reserve(dist.terms.size());
        for (const ExcitationTerm& term : dist.terms) {
            sector_terms.push_back(oracle.sector_term(term));
        }
        for (int m = 0; m < d; ++m) {
            const double angle = m * t * dist.lambda / n_steps;
            std::vector<Eigen::MatrixXcd> steps;
            steps.reserve(dist.terms.size());
            for (const Eigen::MatrixXd& st : sector_terms) {
                steps.push_back(dense_exponential(st, angle));
            }
            cd s_sum = 0.0;
            cd h_sum = 0.0;
            for (int r = 0; r < n_rand; ++r) {
                const QDriftSequence seq = sample_sequence(dist, n_steps, m * t, rng, m);
                Eigen::VectorXcd v = psi0;
                Eigen::VectorXcd w = h_psi0;
                for (int idx : seq.term_indices) {
                    v = steps[static_cast<std::size_t>(idx)] * v;
                    w = steps[static_cast<std::size_t>(idx)] * w;
                }
                s_sum += psi0.dot(v);
                h_sum += psi0.dot(w);
            }
            s_elems(m) = s_sum / static_cast<double>(n_rand);
            h_elems(m) = h_sum / static_cast<double>(n_rand);
        }
    }
    KrylovMatrices out;
    out.variant = variant;
    out.s_mat.resize(d, d);
    out.h_mat.resize(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            out.s_mat(i, j) = s_elems(j - i);
            out.h_mat(i, j) = h_elems(j - i);
            out.s_mat(j, i) = std::conj(s_elems(j - i));
            out.h_mat(j, i) = std::conj(h_elems(j - i));
        }
    }
    out.s_mat = 0.5 * (out.s_mat + out.s_mat.adjoint().eval());
    out.h_mat = 0.5 * (out.h_mat + out.h_mat.adjoint().eval());
    return out;
}

double regularized_geig(const KrylovMatrices& m, double eps_r) {
    if (m.s_mat.rows() != m.h_mat.rows() || m.s_mat.rows() == 0) {
        throw std::invalid_argument("matrix dimensions disagree");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.s_mat);
    if (es.info() != Eigen::Success) throw std::runtime_error("overlap eigendecomposition failed");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) > eps_r) keep.push_back(i);
    }
    if (keep.empty()) throw std::runtime_error("all overlap eigenvalues fall below the threshold");
    Eigen::MatrixXcd b(m.s_mat.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        b.col(static_cast<Eigen::Index>(k)) =
            es.eigenvectors().col(keep[k]) / std::sqrt(es.eigenvalues()(keep[k]));
    }
    Eigen::MatrixXcd reduced = b.adjoint() * m.h_mat * b;
    reduced = 0.5 * (reduced + reduced.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(reduced);
    if (hs.info() != Eigen::Success) throw std::runtime_error("reduced eigendecomposition failed");
    return hs.eigenvalues()(0);
}

} // namespace sqdrift
