#pragma once

// Closed-form ergodic outage probability of the harvesting full-duplex DF
// link over kappa-mu fading, with the Rice / Nakagami-m / Rayleigh
// reductions and the high-SNR Rayleigh approximation.
//
// The outage factors into two independent pieces,
//
//   P_out = 1 - F_Z(b/upsilon) * Pr[X Y > upsilon/a],
//
// where Z is the loop-back power (the relay SNR 1/(zeta Z) must clear
// upsilon), and X Y is the product of the S->R and R->D powers (the
// destination SNR is a X Y). F_Z is the kappa-mu distribution function --
// a Poisson mixture of regularized lower gammas. The product tail is
// evaluated as a double Poisson mixture of the gamma-product kernel
//
//   T(m1, m2) = 2/Gamma(m2) sum_{k=0}^{m1-1} (s/2)^{m2+k}/k! K_{m2-k}(s),
//   s = 2 sqrt(phi1 phi2 r),
//
// which is the exact Pr[G1 G2 > r] for gamma variables with integer shape
// m1 = mu1+n and real shape m2 = mu2+l (rates phi_i). This is the same
// triple series as the expanded closed form -- the mixture arrangement just
// keeps every term positive and bounded, so nothing cancels. Every
// factorial, gamma, power, and Bessel factor of a term is combined in the
// log domain and exponentiated once.
//
// The finite k-sum requires integer mu1. Non-integer mu1 falls back to
// direct numerical integration of Pr[XY > r] = E_Y[ccdf_X(r/Y)].
//
// All expressions here take the link mean powers as unity (the derivation
// absorbs any scaling into ps and the path loss); a non-unit omega is
// rejected rather than silently mishandled.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kmrelay/common.hpp"
#include "kmrelay/fading.hpp"
#include "kmrelay/mathkern.hpp"
#include "kmrelay/quadrature.hpp"
#include "kmrelay/sysmodel.hpp"

namespace kmrelay::analytic {

using sysmodel::SystemParams;

enum class Method { UnifiedKappaMu, Rice, Nakagami, Rayleigh, RayleighHighSnr };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::UnifiedKappaMu: return "unified";
        case Method::Rice: return "rice";
        case Method::Nakagami: return "nakagami";
        case Method::Rayleigh: return "rayleigh";
        case Method::RayleighHighSnr: return "rayleigh_highsnr";
    }
    return "?";
}

/// Series terms actually evaluated, per sum.
struct SeriesCounts {
    int loopback = 0;       // q-series of F_Z
    int product_outer = 0;  // n-series (link-1 Poisson mixture)
    int product_inner = 0;  // largest l-series (link-2 mixture) over n
};

/// A probability plus evaluation diagnostics. value is clamped to [0,1];
/// raw_value keeps the unclamped series result.
struct OutageResult {
    double value = 0.0;
    double raw_value = 0.0;
    Method method = Method::UnifiedKappaMu;
    SeriesCounts terms_used{};
    bool converged = true;
};

/// Intermediate CDF evaluation result.
struct SeriesEval {
    double value = 0.0;
    int terms_outer = 0;
    int terms_inner = 0;
    bool converged = true;
};

namespace detail {

inline void check_analytic(const SystemParams& sys) {
    sys.validate();
    if (sys.link1.omega != 1.0 || sys.link2.omega != 1.0 || sys.link3.omega != 1.0)
        throw std::domain_error(
            "analytic: link omega must be 1 (mean channel powers are normalized; "
            "fold any scaling into ps or the path loss)");
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline std::optional<int> as_integer(double mu) {
    const double r = std::round(mu);
    if (std::abs(mu - r) <= 1e-9 && r >= 1.0) return static_cast<int>(r);
    return std::nullopt;
}

// ln K_{|frac + m|}(x) for integer offsets m of either sign around a
// fractional base, backed by two recurrence ladders.
class KOrderTable {
  public:
    KOrderTable(double mu2, double x, int max_pos_offset, int max_neg_offset) {
        const double i0f = std::floor(mu2);
        i0_ = static_cast<int>(i0f);
        frac_ = mu2 - i0f;
        pos_ = mathkern::log_bessel_k_sequence(frac_, x, i0_ + max_pos_offset + 1);
        if (frac_ > 0.0 && max_neg_offset > 0)
            neg_ = mathkern::log_bessel_k_sequence(1.0 - frac_, x, max_neg_offset);
    }

    // ln K_{|mu2 + l - k|}(x)
    double operator()(int l, int k) const {
        const int m = i0_ + l - k;
        if (m >= 0) return pos_[static_cast<std::size_t>(m)];
        if (frac_ == 0.0) return pos_[static_cast<std::size_t>(-m)];
        return neg_[static_cast<std::size_t>(-m - 1)];
    }

  private:
    int i0_ = 0;
    double frac_ = 0.0;
    std::vector<double> pos_;
    std::vector<double> neg_;
};

// Pr[G1 G2 > r] for G1 ~ Gamma(m1n integer, rate phi1), G2 ~ Gamma(mu2l real,
// rate phi2), expressed through K-Bessel values at s = 2 sqrt(phi1 phi2 r).
// log_half_s = ln(s/2); logk(l,k) supplies ln K_{|mu2 + l - k|}(s).
inline double product_tail_kernel(int m1n, double mu2, int l, double log_half_s,
                                  const KOrderTable& logk,
                                  const std::vector<double>& log_factorial) {
    const double lg2 = mathkern::log_gamma(mu2 + l);
    double t = 0.0;
    for (int k = 0; k < m1n; ++k) {
        t += std::exp(M_LN2 - lg2 + (mu2 + l + k) * log_half_s - log_factorial[k] +
                      logk(l, k));
    }
    return t;
}

// Pr[X Y > upsilon/a] for integer mu1, as the double Poisson mixture of the
// gamma-product kernel.
inline SeriesEval product_ccdf_series(const SystemParams& sys, double upsilon,
                                      const SeriesPolicy& pol, int m1) {
    const double r = upsilon / sys.dest_snr_scale();
    const double phi1 = sys.link1.phi();
    const double phi2 = sys.link2.phi();
    const double mu2 = sys.link2.mu;
    const double s = 2.0 * std::sqrt(phi1 * phi2 * r);
    const double log_half_s = 0.5 * std::log(phi1 * phi2 * r);

    const int n_limit = pol.fixed_terms.value_or(pol.max_terms_outer);
    const int l_limit = pol.fixed_terms.value_or(pol.max_terms_inner);
    const int k_max = m1 + n_limit - 1;  // largest shape the k-sum reaches

    KOrderTable logk(mu2, s, l_limit, std::max(0, k_max - static_cast<int>(std::floor(mu2))));
    std::vector<double> log_factorial(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) log_factorial[k] = mathkern::log_gamma(k + 1.0);

    SeriesEval out;
    bool inner_ok = true;
    int inner_terms = 0;
    const auto outer = fading::detail::poisson_mixture(
        sys.link1.kappa * sys.link1.mu, pol, pol.max_terms_outer, false, [&](int n) {
            const auto inner = fading::detail::poisson_mixture(
                sys.link2.kappa * sys.link2.mu, pol, pol.max_terms_inner, false,
                [&](int l) {
                    return product_tail_kernel(m1 + n, mu2, l, log_half_s, logk,
                                               log_factorial);
                });
            inner_ok = inner_ok && inner.converged;
            inner_terms = std::max(inner_terms, inner.terms);
            return inner.value;
        });
    out.value = outer.value;
    out.terms_outer = outer.terms;
    out.terms_inner = inner_terms;
    out.converged = outer.converged && inner_ok;
    return out;
}

// Non-integer mu1: Pr[X Y > r] = integral of ccdf_X(r/u) f_Y(u) du over
// u > 0. The ccdf factor kills both endpoint singularities.
inline SeriesEval product_ccdf_quadrature(const SystemParams& sys, double upsilon,
                                          const SeriesPolicy& pol) {
    const double r = upsilon / sys.dest_snr_scale();
    bool series_ok = true;
    const double t_scale = sys.link1.phi();
    auto ccdf_x = [&](double x) {
        const auto m = fading::detail::poisson_mixture(
            sys.link1.kappa * sys.link1.mu, pol, pol.max_terms_outer, false,
            [&](int q) {
                return mathkern::gamma_upper_reg(sys.link1.mu + q, t_scale * x);
            });
        series_ok = series_ok && m.converged;
        return m.value;
    };
    auto integrand = [&](double u) {
        if (!(u > 0.0)) return 0.0;
        const double x = r / u;
        if (!std::isfinite(x) || !std::isfinite(t_scale * x)) return 0.0;  // tail is 0
        const double lf = fading::log_pdf(sys.link2, u);
        if (lf == -std::numeric_limits<double>::infinity()) return 0.0;
        const double cc = ccdf_x(x);
        return cc <= 0.0 ? 0.0 : cc * std::exp(lf);
    };
    const double rel = std::min(pol.rel_tol, 1e-9);
    const auto lo = quad::integrate(integrand, 0.0, 8.0, rel, 1e-14);
    const auto hi = quad::integrate_to_inf(integrand, 8.0, rel, 1e-14);
    SeriesEval out;
    out.value = lo.value + hi.value;
    out.converged = series_ok && lo.converged && hi.converged;
    out.terms_outer = 0;
    out.terms_inner = 0;
    return out;
}

inline SeriesEval product_ccdf(const SystemParams& sys, double upsilon,
                               const SeriesPolicy& pol) {
    if (const auto m1 = as_integer(sys.link1.mu))
        return product_ccdf_series(sys, upsilon, pol, *m1);
    return product_ccdf_quadrature(sys, upsilon, pol);
}

}  // namespace detail

/// F_Z evaluated at the loop-back threshold b/upsilon: the probability that
/// the relay SNR 1/(zeta Z) clears upsilon. Decreasing in upsilon.
inline SeriesEval cdf_loopback(const SystemParams& sys, double upsilon,
                               const SeriesPolicy& pol = {}) {
    detail::check_analytic(sys);
    pol.validate();
    if (!(upsilon > 0.0))
        throw std::domain_error("cdf_loopback: upsilon must be > 0");
    const double t = sys.link3.phi() * sys.inv_zeta() / upsilon;
    const auto m = fading::detail::poisson_mixture(
        sys.link3.kappa * sys.link3.mu, pol, pol.max_terms_outer, true,
        [&](int q) { return mathkern::gamma_lower_reg(sys.link3.mu + q, t); });
    return {std::min(m.value, 1.0), m.terms, 0, m.converged};
}

/// Pr[X Y <= upsilon/a], the destination-side product CDF. Integer mu1 uses
/// the finite-sum series; any other mu1 the quadrature route.
inline SeriesEval cdf_product(const SystemParams& sys, double upsilon,
                              const SeriesPolicy& pol = {}) {
    detail::check_analytic(sys);
    pol.validate();
    if (!(upsilon > 0.0))
        throw std::domain_error("cdf_product: upsilon must be > 0");
    auto tail = detail::product_ccdf(sys, upsilon, pol);
    tail.value = detail::clamp01(1.0 - tail.value);
    return tail;
}

/// Unified ergodic outage probability over generalized kappa-mu links.
inline OutageResult outage_unified(const SystemParams& sys, const SeriesPolicy& pol = {}) {
    detail::check_analytic(sys);
    pol.validate();
    OutageResult res;
    res.method = Method::UnifiedKappaMu;
    if (sys.c_th == 0.0) return res;  // min capacity is nonnegative
    const double ups = sys.snr_threshold();
    const auto fz = cdf_loopback(sys, ups, pol);
    const auto fw_tail = detail::product_ccdf(sys, ups, pol);
    res.raw_value = 1.0 - fz.value * fw_tail.value;
    res.value = detail::clamp01(res.raw_value);
    res.terms_used = {fz.terms_outer, fw_tail.terms_outer, fw_tail.terms_inner};
    res.converged = fz.converged && fw_tail.converged;
    return res;
}

/// Rice reduction: all mu_i = 1, kappa_i the Rice K-factors. This is the
/// unified expression specialized by hand at mu = 1 (integer-order Bessel
/// ladder, factorial gammas); it must agree with outage_unified to within
/// series tolerance.
inline OutageResult outage_rice(const SystemParams& sys, const SeriesPolicy& pol = {}) {
    detail::check_analytic(sys);
    pol.validate();
    if (sys.link1.mu != 1.0 || sys.link2.mu != 1.0 || sys.link3.mu != 1.0)
        throw std::domain_error("outage_rice: all links must have mu = 1");
    OutageResult res;
    res.method = Method::Rice;
    if (sys.c_th == 0.0) return res;
    const double ups = sys.snr_threshold();

    const double t3 = (1.0 + sys.link3.kappa) * sys.inv_zeta() / ups;
    const auto fz = fading::detail::poisson_mixture(
        sys.link3.kappa, pol, pol.max_terms_outer, true,
        [&](int q) { return mathkern::gamma_lower_reg(1.0 + q, t3); });

    const double r = ups / sys.dest_snr_scale();
    const double phi1 = 1.0 + sys.link1.kappa;
    const double phi2 = 1.0 + sys.link2.kappa;
    const double s = 2.0 * std::sqrt(phi1 * phi2 * r);
    const double log_half_s = 0.5 * std::log(phi1 * phi2 * r);

    const int n_limit = pol.fixed_terms.value_or(pol.max_terms_outer);
    const int l_limit = pol.fixed_terms.value_or(pol.max_terms_inner);
    const int order_max = std::max(l_limit + 1, n_limit);
    const auto logk = mathkern::log_bessel_k_sequence(0.0, s, order_max + 2);
    std::vector<double> log_factorial(static_cast<std::size_t>(std::max(n_limit, l_limit)) + 2);
    for (std::size_t k = 0; k < log_factorial.size(); ++k)
        log_factorial[k] = mathkern::log_gamma(static_cast<double>(k) + 1.0);

    bool inner_ok = true;
    int inner_terms = 0;
    const auto outer = fading::detail::poisson_mixture(
        sys.link1.kappa, pol, pol.max_terms_outer, false, [&](int n) {
            const auto inner = fading::detail::poisson_mixture(
                sys.link2.kappa, pol, pol.max_terms_inner, false, [&](int l) {
                    double t = 0.0;
                    for (int k = 0; k <= n; ++k) {
                        const int ord = std::abs(1 + l - k);
                        t += std::exp(M_LN2 - log_factorial[l] +
                                      (1.0 + l + k) * log_half_s - log_factorial[k] +
                                      logk[static_cast<std::size_t>(ord)]);
                    }
                    return t;
                });
            inner_ok = inner_ok && inner.converged;
            inner_terms = std::max(inner_terms, inner.terms);
            return inner.value;
        });

    res.raw_value = 1.0 - std::min(fz.value, 1.0) * outer.value;
    res.value = detail::clamp01(res.raw_value);
    res.terms_used = {fz.terms, outer.terms, inner_terms};
    res.converged = fz.converged && outer.converged && inner_ok;
    return res;
}

/// Nakagami-m reduction (kappa_i = 0): a genuinely finite closed form --
/// the only truncation left is inside the special functions. m1 must be a
/// positive integer; m2, m3 may be any positive reals.
inline OutageResult outage_nakagami(const SystemParams& sys, const SeriesPolicy& pol = {}) {
    detail::check_analytic(sys);
    pol.validate();
    if (sys.link1.kappa != 0.0 || sys.link2.kappa != 0.0 || sys.link3.kappa != 0.0)
        throw std::domain_error("outage_nakagami: all links must have kappa = 0");
    const auto m1 = detail::as_integer(sys.link1.mu);
    if (!m1)
        throw std::domain_error("outage_nakagami: m1 (link1.mu) must be a positive integer");
    OutageResult res;
    res.method = Method::Nakagami;
    if (sys.c_th == 0.0) return res;
    const double ups = sys.snr_threshold();
    const double m2 = sys.link2.mu, m3 = sys.link3.mu;

    const double fz = mathkern::gamma_lower_reg(m3, m3 * sys.inv_zeta() / ups);
    const double r = ups / sys.dest_snr_scale();
    const double s = 2.0 * std::sqrt(*m1 * m2 * r);
    const double log_half_s = 0.5 * std::log(*m1 * m2 * r);
    const double lg2 = mathkern::log_gamma(m2);
    double tail = 0.0;
    for (int k = 0; k < *m1; ++k) {
        tail += std::exp(M_LN2 - lg2 + (m2 + k) * log_half_s -
                         mathkern::log_gamma(k + 1.0) + mathkern::log_bessel_k(m2 - k, s));
    }
    res.raw_value = 1.0 - fz * tail;
    res.value = detail::clamp01(res.raw_value);
    res.terms_used = {1, 1, 1};
    return res;
}

/// Rayleigh closed form: 1 - 2 sqrt(ups/a) (1 - e^{-b/ups}) K_1(2 sqrt(ups/a)).
inline OutageResult outage_rayleigh(const SystemParams& sys) {
    detail::check_analytic(sys);
    if (sys.link1.kappa != 0.0 || sys.link2.kappa != 0.0 || sys.link3.kappa != 0.0 ||
        sys.link1.mu != 1.0 || sys.link2.mu != 1.0 || sys.link3.mu != 1.0)
        throw std::domain_error("outage_rayleigh: all links must be Rayleigh "
                                "(kappa = 0, mu = 1)");
    OutageResult res;
    res.method = Method::Rayleigh;
    if (sys.c_th == 0.0) return res;
    const double ups = sys.snr_threshold();
    const double x = 2.0 * std::sqrt(ups / sys.dest_snr_scale());
    const double fz = -std::expm1(-sys.inv_zeta() / ups);
    res.raw_value = 1.0 - fz * std::exp(std::log(x) + mathkern::log_bessel_k(1.0, x));
    res.value = detail::clamp01(res.raw_value);
    res.terms_used = {1, 1, 1};
    return res;
}

/// High-SNR Rayleigh approximation exp(-b/upsilon), from K_1(z) ~ 1/z for
/// z << 1. Quality degrades once 2 sqrt(ups/a) is not small.
inline OutageResult outage_rayleigh_highsnr(const SystemParams& sys) {
    sys.validate();
    OutageResult res;
    res.method = Method::RayleighHighSnr;
    if (sys.c_th == 0.0) return res;
    const double ups = sys.snr_threshold();
    res.raw_value = std::exp(-sys.inv_zeta() / ups);
    res.value = detail::clamp01(res.raw_value);
    res.terms_used = {1, 1, 1};
    return res;
}

}  // namespace kmrelay::analytic
