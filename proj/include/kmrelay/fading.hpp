#pragma once

// The kappa-mu power distribution (the squared envelope): density, the
// Poisson-mixture distribution function, an exact sampler, and the
// Rice / Nakagami-m / Rayleigh parameter limits.
//
// A kappa-mu power variable with mean Omega is the noncentral-chi-square
// style mixture
//   Z | J ~ Gamma(shape mu + J, scale Omega/(mu(1+kappa))),  J ~ Poisson(kappa mu),
// which gives the distribution function as a Poisson-weighted sum of
// regularized incomplete gammas and an exact sampler valid at any real
// mu > 0. The kappa -> 0 limit is represented by kappa = 0 with a dedicated
// gamma-distribution branch, never by a small positive epsilon: the general
// density carries a kappa^{-(mu-1)/2} factor that is singular there.

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "kmrelay/common.hpp"
#include "kmrelay/mathkern.hpp"

namespace kmrelay::fading {

/// One link's fading parameters. kappa is the ratio of dominant-component
/// to scattered power, mu the number of multipath clusters (real-valued
/// extensions allowed), omega the mean power E[Z] in linear units.
struct KappaMuParams {
    double kappa = 0.0;
    double mu = 1.0;
    double omega = 1.0;

    void validate() const {
        if (!std::isfinite(kappa) || kappa < 0.0)
            throw std::invalid_argument("KappaMuParams: kappa must be >= 0");
        if (!std::isfinite(mu) || !(mu > 0.0))
            throw std::invalid_argument("KappaMuParams: mu must be > 0");
        if (!std::isfinite(omega) || !(omega > 0.0))
            throw std::invalid_argument("KappaMuParams: omega must be > 0");
    }

    /// phi = mu (1 + kappa), the rate of the mixture's gamma components
    /// (per unit omega).
    double phi() const { return mu * (1.0 + kappa); }
};

enum class FadingFamily { GeneralKappaMu, Rice, Nakagami, Rayleigh };

/// A named special case and its exact kappa-mu embedding.
struct FadingKind {
    FadingFamily family = FadingFamily::Rayleigh;
    double shape = 1.0;  // Rice K-factor or Nakagami m; unused otherwise

    static FadingKind general() { return {FadingFamily::GeneralKappaMu, 0.0}; }
    static FadingKind rice(double k_factor) { return {FadingFamily::Rice, k_factor}; }
    static FadingKind nakagami(double m) { return {FadingFamily::Nakagami, m}; }
    static FadingKind rayleigh() { return {FadingFamily::Rayleigh, 0.0}; }

    KappaMuParams to_params(double omega = 1.0) const {
        switch (family) {
            case FadingFamily::Rice:
                return {shape, 1.0, omega};
            case FadingFamily::Nakagami:
                return {0.0, shape, omega};
            case FadingFamily::Rayleigh:
                return {0.0, 1.0, omega};
            default:
                throw std::invalid_argument(
                    "FadingKind: general kappa-mu has no single-parameter embedding");
        }
    }
};

/// ln of the power density at z >= 0. -inf where the density vanishes.
inline double log_pdf(const KappaMuParams& p, double z) {
    p.validate();
    if (!std::isfinite(z) || z < 0.0)
        throw std::domain_error("fading::pdf: z must be >= 0 and finite");
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (z == 0.0) {
        // z^{mu-1} prefactor after the small-argument Bessel limit
        if (p.mu > 1.0) return neg_inf;
        if (p.mu < 1.0) return std::numeric_limits<double>::infinity();
        // mu == 1: only the q = 0 mixture component is nonzero at the origin
        return std::log(p.phi() / p.omega) - p.kappa * p.mu;
    }
    if (p.kappa == 0.0) {
        const double rate = p.mu / p.omega;
        return p.mu * std::log(rate) + (p.mu - 1.0) * std::log(z) - rate * z -
               mathkern::log_gamma(p.mu);
    }
    const double log_norm = std::log(p.mu) + 0.5 * (p.mu + 1.0) * std::log1p(p.kappa) -
                            p.mu * p.kappa - 0.5 * (p.mu - 1.0) * std::log(p.kappa) -
                            0.5 * (p.mu + 1.0) * std::log(p.omega);
    const double arg = 2.0 * p.mu * std::sqrt(p.kappa * (1.0 + p.kappa) * z / p.omega);
    return log_norm + 0.5 * (p.mu - 1.0) * std::log(z) - p.phi() * z / p.omega +
           mathkern::log_bessel_i(p.mu - 1.0, arg);
}

inline double pdf(const KappaMuParams& p, double z) { return std::exp(log_pdf(p, z)); }

namespace detail {

struct MixtureResult {
    double value = 0.0;
    int terms = 0;
    bool converged = true;
};

/// Sum_{q>=0} Poisson(lambda; q) * factor(q) for a factor bounded in [0,1].
/// Adaptive stopping uses two rules: the remaining Poisson mass bounds the
/// tail (scaled by the last factor seen when the factor is known to be
/// nonincreasing), and the guard of three consecutive terms below rel_tol
/// times the running total -- terms rise and fall with the Poisson weights,
/// so a single small term is not trusted. fixed_terms truncates at exactly
/// that count.
template <class FactorFn>
MixtureResult poisson_mixture(double lambda, const SeriesPolicy& pol, int max_terms,
                              bool factor_nonincreasing, FactorFn&& factor) {
    if (lambda == 0.0) return {factor(0), 1, true};
    const int limit = pol.fixed_terms ? *pol.fixed_terms : max_terms;
    const bool fixed = pol.fixed_terms.has_value();
    const double log_lambda = std::log(lambda);
    double sum = 0.0, cum_w = 0.0;
    int small_run = 0;
    for (int q = 0; q < limit; ++q) {
        const double w =
            std::exp(q * log_lambda - mathkern::log_gamma(q + 1.0) - lambda);
        const double f = factor(q);
        sum += w * f;
        cum_w += w;
        if (fixed) continue;
        const double t = w * f;
        const double tail = (1.0 - cum_w) * (factor_nonincreasing ? f : 1.0);
        if (tail <= pol.rel_tol * sum + 1e-300) return {sum, q + 1, true};
        if (t > 0.0 && t <= pol.rel_tol * sum) {
            if (++small_run >= 3) return {sum, q + 1, true};
        } else if (t > 0.0) {
            small_run = 0;
        }
    }
    return {sum, limit, fixed};
}

}  // namespace detail

/// Distribution function F(z) as the Poisson mixture of regularized lower
/// incomplete gammas. Throws NonConvergenceError if the adaptive budget is
/// exhausted first.
inline double cdf(const KappaMuParams& p, double z, const SeriesPolicy& pol = {}) {
    p.validate();
    pol.validate();
    if (!std::isfinite(z) || z < 0.0)
        throw std::domain_error("fading::cdf: z must be >= 0 and finite");
    if (z == 0.0) return 0.0;
    const double t = p.phi() * z / p.omega;
    const auto r = detail::poisson_mixture(
        p.kappa * p.mu, pol, pol.max_terms_outer, /*factor_nonincreasing=*/true,
        [&](int q) { return mathkern::gamma_lower_reg(p.mu + q, t); });
    if (!r.converged)
        throw NonConvergenceError("fading::cdf: series did not reach rel_tol within " +
                                  std::to_string(pol.max_terms_outer) + " terms");
    return std::min(r.value, 1.0);
}

/// Complementary distribution function, summed on the upper-tail side
/// (regularized upper gammas) so that small tail probabilities keep relative
/// accuracy instead of cancelling against 1.
inline double ccdf(const KappaMuParams& p, double z, const SeriesPolicy& pol = {}) {
    p.validate();
    pol.validate();
    if (!std::isfinite(z) || z < 0.0)
        throw std::domain_error("fading::ccdf: z must be >= 0 and finite");
    if (z == 0.0) return 1.0;
    const double t = p.phi() * z / p.omega;
    const auto r = detail::poisson_mixture(
        p.kappa * p.mu, pol, pol.max_terms_outer, /*factor_nonincreasing=*/false,
        [&](int q) { return mathkern::gamma_upper_reg(p.mu + q, t); });
    if (!r.converged)
        throw NonConvergenceError("fading::ccdf: series did not reach rel_tol within " +
                                  std::to_string(pol.max_terms_outer) + " terms");
    return std::min(r.value, 1.0);
}

/// One exact draw of the power variable: J ~ Poisson(kappa mu), then
/// Gamma(mu + J) rescaled to mean omega. Valid for any real mu > 0.
template <class URBG>
double sample(const KappaMuParams& p, URBG& rng) {
    p.validate();
    long long j = 0;
    if (p.kappa > 0.0) {
        std::poisson_distribution<long long> pois(p.kappa * p.mu);
        j = pois(rng);
    }
    std::gamma_distribution<double> gamma(p.mu + static_cast<double>(j), 1.0);
    return gamma(rng) * p.omega / p.phi();
}

}  // namespace kmrelay::fading
