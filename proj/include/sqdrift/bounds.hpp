#pragma once

#include <string>
#include <vector>

namespace sqdrift {

/// Spectral quantities of the evolved operator sum(c_i h_i) restricted to the
/// particle sector of the reference state. e_core is excluded: every formula
/// downstream is shift-invariant except the norm, which must belong to the
/// operator actually evolved.
struct SpectralData {
    double e0 = 0.0;
    double e1 = 0.0;
    double e_max = 0.0;
    double h_norm = 0.0;     // max |eigenvalue| over the sector
    double gamma0_sq = 0.0;  // |<reference|ground>|^2
    double delta = 0.0;      // e1 - e0
};

struct BoundParams {
    int d = 1;             // Krylov dimension (odd)
    long n_steps = 1;      // N
    long n_rand = 1;       // N_r
    long shots = 1;        // S
    double delta_conf = 0.1;
    double eps_reg = 0.0;  // regularization threshold
    int n_qubits = 1;
    long l_important = 1;
    double alpha0 = 1.0;
    double beta0 = 1.0;
    double lambda = 0.0;
    double t = 0.0;

    void validate() const; // throws on out-of-range fields
};

struct BoundReport {
    double eps_q = 0.0;
    double eps_q_loose = 0.0; // variant with 2*t*lambda/N inside the bracket
    double chi = 0.0;
    double zeta = 0.0;
    double gamma0_prime_sq = 0.0;
    double delta_prime = 0.0;
    double xi = 0.0;
    double xi_tilde = 0.0;
    double alpha_l = 0.0;
    double beta_l = 0.0;       // beta0 - 2*sqrt(xi_tilde)
    double beta_l_sqrt2 = 0.0; // beta0 - 2*sqrt(2)*sqrt(1 - sqrt(1 - xi/delta))
    double eps = 0.0;
    double p = 0.0;
    double p_fail = 0.0;

    bool vacuous = false;
    std::string vacuity; // which precondition failed, empty when none
    // the proof gives only an order bound ||psi - phi0||^2 = O(xi / gap);
    // we evaluate it with constant 1 and the gap read as Delta
    std::string xi_tilde_model = "xi/delta, constant 1";
};

/// eps_Q = d(d-1) t lambda ( t(d-1)lambda/N + sqrt(11 ln(2^{n+1}/delta) / (N N_r)) ).
double epsilon_q(const BoundParams& p);
/// Variant with 2 t lambda / N as the first addend.
double epsilon_q_loose(const BoundParams& p);

/// chi, zeta, gamma0', delta', xi. A violated precondition (|gamma0'|^2 <= 0
/// or delta' <= 0) marks the report vacuous instead of throwing.
BoundReport xi_bound(const BoundParams& p, const SpectralData& s);

/// Completes a report with eps, alpha_l, beta_l (both variants), p, p_fail.
/// p clamps to 0 (and p_fail to the vacuous value L) when beta_l <= 0 or the
/// amplitude margin is negative.
BoundReport failure_probability(const BoundParams& p, const SpectralData& s, double xi_tilde,
                                BoundReport partial = {});

/// xi_bound + xi_tilde = xi/delta + failure_probability in one call.
BoundReport full_report(const BoundParams& p, const SpectralData& s);

/// sqrt(8) * h_norm * sqrt(1 - sqrt(alpha0)).
double energy_error_bound(double h_norm, double alpha0);

/// Evolution time pinned by the spectral range: pi / (e_max - e0).
double lemma_time(const SpectralData& s);

/// Descending squared amplitudes of a normalized vector with the prefix-sum
/// alpha_L and per-element beta_L accessors.
struct ConcentrationProfile {
    std::vector<double> sorted_weights;

    double alpha(std::size_t l) const; // sum of the l largest weights
    double beta(std::size_t l) const;  // l-th largest weight
};

ConcentrationProfile concentration_profile(const std::vector<double>& amplitudes);

std::string report_to_json(const BoundReport& r);

} // namespace sqdrift
