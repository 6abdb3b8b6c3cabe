#include "sqdrift/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace sqdrift {

void BoundParams::validate() const {
    if (d < 1 || d % 2 == 0) throw std::invalid_argument("bounds: d must be odd and >= 1");
    if (n_steps < 1) throw std::invalid_argument("bounds: n_steps must be >= 1");
    if (n_rand < 1) throw std::invalid_argument("bounds: n_rand must be >= 1");
    if (shots < 1) throw std::invalid_argument("bounds: shots must be >= 1");
    if (!(delta_conf > 0.0 && delta_conf < 1.0))
        throw std::invalid_argument("bounds: delta_conf must lie in (0, 1)");
    if (eps_reg < 0.0) throw std::invalid_argument("bounds: eps_reg must be >= 0");
    if (n_qubits < 1) throw std::invalid_argument("bounds: n_qubits must be >= 1");
    if (l_important < 1) throw std::invalid_argument("bounds: l_important must be >= 1");
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0) || !(beta0 >= 0.0 && beta0 <= 1.0))
        throw std::invalid_argument("bounds: concentration parameters must lie in [0, 1]");
    if (lambda < 0.0) throw std::invalid_argument("bounds: lambda must be >= 0");
    if (t < 0.0) throw std::invalid_argument("bounds: t must be >= 0");
}

namespace {

double log_term(const BoundParams& p) {
    // ln(2^{n+1} / delta)
    return (p.n_qubits + 1) * std::log(2.0) - std::log(p.delta_conf);
}

} // namespace

double epsilon_q(const BoundParams& p) {
    p.validate();
    const double n = static_cast<double>(p.n_steps);
    const double nr = static_cast<double>(p.n_rand);
    const double drift = p.t * (p.d - 1) * p.lambda / n;
    const double fluct = std::sqrt(11.0 * log_term(p) / (n * nr));
    return p.d * (p.d - 1) * p.t * p.lambda * (drift + fluct);
}

double epsilon_q_loose(const BoundParams& p) {
    p.validate();
    const double n = static_cast<double>(p.n_steps);
    const double nr = static_cast<double>(p.n_rand);
    const double drift = 2.0 * p.t * p.lambda / n;
    const double fluct = std::sqrt(11.0 * log_term(p) / (n * nr));
    return p.d * (p.d - 1) * p.t * p.lambda * (drift + fluct);
}

BoundReport xi_bound(const BoundParams& p, const SpectralData& s) {
    p.validate();
    BoundReport r;
    r.eps_q = epsilon_q(p);
    r.eps_q_loose = epsilon_q_loose(p);
    r.chi = 2.0 * r.eps_q * s.h_norm;
    r.zeta = 2.0 * p.d * (p.eps_reg + r.eps_q);
    r.gamma0_prime_sq = s.gamma0_sq - 2.0 * p.eps_reg - 2.0 * r.eps_q;
    if (!(r.gamma0_prime_sq > 0.0)) {
        r.vacuous = true;
        r.vacuity = "gamma0_prime_sq <= 0";
        return r;
    }
    r.delta_prime = s.delta - r.chi / r.gamma0_prime_sq;
    if (!(r.delta_prime > 0.0)) {
        r.vacuous = true;
        r.vacuity = "delta_prime <= 0";
        return r;
    }
    const double decay = std::pow(1.0 + M_PI * r.delta_prime / (4.0 * s.h_norm),
                                  static_cast<double>(-2 * p.d + 1));
    r.xi = r.chi / r.gamma0_prime_sq +
           (6.0 * s.h_norm / r.gamma0_prime_sq) *
               (2.0 * r.chi / r.delta_prime + r.zeta + 8.0 * decay);
    return r;
}

BoundReport failure_probability(const BoundParams& p, const SpectralData& s, double xi_tilde,
                                BoundReport partial) {
    p.validate();
    BoundReport r = std::move(partial);
    r.xi_tilde = xi_tilde;
    const double shrink = 2.0 * std::sqrt(std::max(xi_tilde, 0.0));
    r.alpha_l = p.alpha0 - shrink;
    r.beta_l = p.beta0 - shrink;
    if (r.xi > 0.0 && s.delta > 0.0 && r.xi / s.delta <= 1.0)
        r.beta_l_sqrt2 =
            p.beta0 - 2.0 * std::sqrt(2.0) * std::sqrt(1.0 - std::sqrt(1.0 - r.xi / s.delta));
    else
        r.beta_l_sqrt2 = p.beta0; // xi not computed or the inner root leaves the real line

    const double n = static_cast<double>(p.n_steps);
    const double tl = p.t * p.lambda;
    r.eps = tl * tl / n + tl * std::sqrt(11.0 * log_term(p) / n);

    double margin = 0.0;
    if (r.beta_l > 0.0)
        margin = std::sqrt(s.gamma0_sq) * std::sqrt(r.beta_l) / static_cast<double>(p.d) - r.eps;
    if (margin > 0.0) {
        r.p = margin * margin;
    } else {
        r.p = 0.0;
        if (!r.vacuous) {
            r.vacuous = true;
            r.vacuity = r.beta_l > 0.0 ? "amplitude margin <= 0" : "beta_l <= 0";
        }
    }
    // exp(S log1p(-p)) instead of pow(1-p, S): the rounding of 1-p would be
    // amplified by S (and again by n_rand below) past the 1e-12 pin tolerance.
    const double miss_all =
        r.p >= 1.0 ? 0.0 : std::exp(static_cast<double>(p.shots) * std::log1p(-r.p));
    const double base = (1.0 - p.delta_conf) * miss_all + p.delta_conf;
    r.p_fail = static_cast<double>(p.l_important) * std::pow(base, static_cast<double>(p.n_rand));
    if (r.p_fail >= 1.0 && !r.vacuous) {
        r.vacuous = true;
        r.vacuity = "p_fail >= 1";
    }
    return r;
}

BoundReport full_report(const BoundParams& p, const SpectralData& s) {
    BoundReport r = xi_bound(p, s);
    const double xi_tilde = (!r.vacuous && s.delta > 0.0) ? r.xi / s.delta : 0.0;
    if (r.vacuous) {
        // chain is already dead; still report the sampling-only quantities
        BoundReport done = failure_probability(p, s, xi_tilde, r);
        done.vacuous = true;
        done.vacuity = r.vacuity;
        return done;
    }
    return failure_probability(p, s, xi_tilde, r);
}

double energy_error_bound(double h_norm, double alpha0) {
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0))
        throw std::invalid_argument("energy_error_bound: alpha0 must lie in [0, 1]");
    if (h_norm < 0.0) throw std::invalid_argument("energy_error_bound: h_norm must be >= 0");
    return std::sqrt(8.0) * h_norm * std::sqrt(1.0 - std::sqrt(alpha0));
}

double lemma_time(const SpectralData& s) {
    const double range = s.e_max - s.e0;
    if (!(range > 0.0)) throw std::invalid_argument("lemma_time: spectral range must be positive");
    return M_PI / range;
}

double ConcentrationProfile::alpha(std::size_t l) const {
    l = std::min(l, sorted_weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < l; ++i) acc += sorted_weights[i];
    return std::min(acc, 1.0);
}

double ConcentrationProfile::beta(std::size_t l) const {
    if (l == 0 || l > sorted_weights.size())
        throw std::invalid_argument("concentration: L out of range");
    return sorted_weights[l - 1];
}

ConcentrationProfile concentration_profile(const std::vector<double>& amplitudes) {
    ConcentrationProfile prof;
    prof.sorted_weights.reserve(amplitudes.size());
    double norm = 0.0;
    for (double a : amplitudes) {
        prof.sorted_weights.push_back(a * a);
        norm += a * a;
    }
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("concentration_profile: vector is not normalized");
    std::sort(prof.sorted_weights.begin(), prof.sorted_weights.end(), std::greater<>());
    return prof;
}

std::string report_to_json(const BoundReport& r) {
    nlohmann::json j;
    j["eps_q"] = r.eps_q;
    j["eps_q_loose"] = r.eps_q_loose;
    j["chi"] = r.chi;
    j["zeta"] = r.zeta;
    j["gamma0_prime_sq"] = r.gamma0_prime_sq;
    j["delta_prime"] = r.delta_prime;
    j["xi"] = r.xi;
    j["xi_tilde"] = r.xi_tilde;
    j["xi_tilde_model"] = r.xi_tilde_model;
    j["alpha_l"] = r.alpha_l;
    j["beta_l"] = r.beta_l;
    j["beta_l_sqrt2"] = r.beta_l_sqrt2;
    j["eps"] = r.eps;
    j["p"] = r.p;
    j["p_fail"] = r.p_fail;
    j["vacuous"] = r.vacuous;
    j["vacuity"] = r.vacuity;
    return j.dump(2);
}

} // namespace sqdrift
