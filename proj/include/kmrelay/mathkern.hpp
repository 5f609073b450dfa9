#pragma once

// Scalar special functions backing the outage expressions: modified Bessel
// functions of the first and second kind with real (non-integer) order, the
// incomplete gamma functions, and log Gamma. Linear-domain and log-domain
// variants are provided; the log variants exist because the outage series
// multiply exp(kappa*mu) factors against Bessel terms whose magnitudes leave
// double range long before the final result does.
//
// Methods are classical: Lanczos for log Gamma, power series / Hankel
// asymptotics for I_v, Temme's series and Steed's continued fraction for
// K_v with upward recurrence in the order (Temme, J. Comput. Phys. 19,
// 1975; Press et al., Numerical Recipes ch. 6), and the standard series /
// Lentz continued fraction pair for the regularized incomplete gammas.
// Everything here is a pure function of its arguments.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmrelay::mathkern {

/// Tolerance and iteration budget for the internal series and continued
/// fractions. rel_tol is clamped below 1e-3 by contract; the defaults give
/// close to full double precision.
struct Accuracy {
    double rel_tol = 1e-14;
    int max_iter = 5000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(rel_tol < 1e-3))
            throw std::invalid_argument("Accuracy: rel_tol must lie in (0, 1e-3)");
        if (max_iter < 1)
            throw std::invalid_argument("Accuracy: max_iter must be >= 1");
    }
};

namespace detail {

inline constexpr double kLn2Pi = 1.8378770664093454836;  // ln(2*pi)
inline constexpr double kEuler = 0.57721566490153286061;

inline void require_finite(double x, const char* fn, const char* arg) {
    if (!std::isfinite(x))
        throw std::domain_error(std::string(fn) + ": " + arg + " must be finite");
}

}  // namespace detail

/// ln Gamma(s) for s > 0 via the g=7, n=9 Lanczos approximation, with
/// reflection below 0.5. Relative error is at machine level over the range
/// used here (s up to ~1e4 appears in the series indices).
inline double log_gamma(double s) {
    detail::require_finite(s, "log_gamma", "s");
    if (!(s > 0.0)) throw std::domain_error("log_gamma: s must be > 0");
    static constexpr double cof[9] = {
        0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,    12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};
    if (s < 0.5) {
        // Gamma(s) Gamma(1-s) = pi / sin(pi s)
        return std::log(M_PI / std::sin(M_PI * s)) - log_gamma(1.0 - s);
    }
    const double z = s - 1.0;
    double a = cof[0];
    for (int i = 1; i < 9; ++i) a += cof[i] / (z + i);
    const double t = z + 7.5;
    return 0.5 * detail::kLn2Pi + (z + 0.5) * std::log(t) - t + std::log(a);
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the first kind, real order v >= 0.
// ---------------------------------------------------------------------------

namespace detail {

// Ascending series with periodic rescaling of the partial sum, so the result
// is usable far past the linear-domain overflow point. Returns ln I_v(x).
inline double bessel_i_series_log(double v, double x, const Accuracy& acc) {
    const double log_pref = v * std::log(0.5 * x) - log_gamma(v + 1.0);
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0, log_scale = 0.0;
    // terms peak near m* = (sqrt(v^2 + x^2) - v)/2; only trust smallness
    // after the peak
    const int m_peak = static_cast<int>(0.5 * (std::sqrt(v * v + x * x) - v)) + 1;
    const double eps = std::min(acc.rel_tol, 1e-15);
    for (int m = 1; m <= acc.max_iter; ++m) {
        term *= q / (m * (v + m));
        sum += term;
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            log_scale += 280.0 * std::log(10.0);
        }
        if (m >= m_peak && term < eps * sum) break;
    }
    return log_pref + std::log(sum) + log_scale;
}

// Hankel asymptotic expansion, valid for x >> v^2. Returns ln I_v(x).
inline double bessel_i_asymptotic_log(double v, double x) {
    const double mu4 = 4.0 * v * v;
    double sum = 1.0, term = 1.0, prev = std::numeric_limits<double>::max();
    for (int k = 1; k <= 60; ++k) {
        const double f = 2.0 * k - 1.0;
        term *= -(mu4 - f * f) / (8.0 * x * k);
        if (std::abs(term) >= prev) break;  // asymptotic tail started growing
        sum += term;
        prev = std::abs(term);
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    }
    return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(sum);
}

}  // namespace detail

/// ln I_v(x) for v >= 0, x >= 0. Safe for arguments where I_v(x) itself
/// overflows double precision.
inline double log_bessel_i(double v, double x, const Accuracy& acc = {}) {
    detail::require_finite(v, "bessel_i", "order v");
    detail::require_finite(x, "bessel_i", "argument x");
    if (v < 0.0) throw std::domain_error("bessel_i: order v must be >= 0");
    if (x < 0.0) throw std::domain_error("bessel_i: argument x must be >= 0");
    if (x == 0.0) return v == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x >= 700.0 && 2.0 * v * v <= x) return detail::bessel_i_asymptotic_log(v, x);
    return detail::bessel_i_series_log(v, x, acc);
}

/// I_v(x); returns +inf once the value exceeds double range (use
/// log_bessel_i there).
inline double bessel_i(double v, double x, const Accuracy& acc = {}) {
    return std::exp(log_bessel_i(v, x, acc));
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the second kind, real order.
// ---------------------------------------------------------------------------

namespace detail {

// Coefficients 1/Gamma(1 +- mu) and the combinations Temme's series needs,
// for |mu| <= 1/2. Built from the expansion
//   ln 1/Gamma(1 + z) = euler*z - zeta(2) z^2/2 + zeta(3) z^3/3 - ...
// near zero (direct evaluation of (1/Gamma(1-mu) - 1/Gamma(1+mu)) cancels
// catastrophically there) and from exp(-log_gamma) elsewhere.
struct TemmeGamma {
    double gam1;   // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
    double gam2;   // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
    double gampl;  // 1/Gamma(1+mu)
    double gammi;  // 1/Gamma(1-mu)
};

inline TemmeGamma temme_gamma(double mu) {
    TemmeGamma g;
    if (std::abs(mu) < 0.01) {
        constexpr double z2 = 1.6449340668482264365, z3 = 1.2020569031595942854,
                         z4 = 1.0823232337111381916, z5 = 1.0369277551433699263,
                         z6 = 1.0173430619844491397;
        const double m2 = mu * mu;
        const double even = std::exp(-m2 * (z2 / 2 + m2 * (z4 / 4 + m2 * z6 / 6)));
        const double odd_over_mu = kEuler + m2 * (z3 / 3 + m2 * z5 / 5);
        const double odd = mu * odd_over_mu;
        g.gampl = even * std::exp(odd);
        g.gammi = even * std::exp(-odd);
        g.gam2 = even * std::cosh(odd);
        g.gam1 = -even * odd_over_mu * (odd == 0.0 ? 1.0 : std::sinh(odd) / odd);
    } else {
        g.gampl = std::exp(-log_gamma(1.0 + mu));
        g.gammi = std::exp(-log_gamma(1.0 - mu));
        g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
        g.gam2 = (g.gammi + g.gampl) / 2.0;
    }
    return g;
}

// ln of the exponentially scaled pair e^x K_mu(x), e^x K_{mu+1}(x) for
// |mu| <= 1/2. Temme's series below x = 2, Steed's continued fraction CF2
// above.
struct ScaledKPair {
    double log_kmu;
    double log_kmu1;
};

inline ScaledKPair bessel_k_pair_scaled(double mu, double x, const Accuracy& acc) {
    const double eps = std::min(acc.rel_tol, 1e-15);
    if (x <= 2.0) {
        const double x1 = 0.5 * x;
        const double d = -std::log(x1);
        const double e = mu * d;
        const double pimu = M_PI * mu;
        const double fact = std::abs(pimu) < 1e-30 ? 1.0 : pimu / std::sin(pimu);
        const double fact2 = std::abs(e) < 1e-30 ? 1.0 : std::sinh(e) / e;
        const TemmeGamma g = temme_gamma(mu);
        double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
        double sum = ff;
        const double ee = std::exp(e);
        double p = 0.5 * ee / g.gampl;
        double q = 0.5 / (ee * g.gammi);
        double c = 1.0;
        const double d2 = x1 * x1;
        double sum1 = p;
        int i = 1;
        for (; i <= acc.max_iter; ++i) {
            ff = (i * ff + p + q) / (i * i - mu * mu);
            c *= d2 / i;
            p /= (i - mu);
            q /= (i + mu);
            const double del = c * ff;
            sum += del;
            const double del1 = c * (p - i * ff);
            sum1 += del1;
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        if (i > acc.max_iter)
            throw std::runtime_error("bessel_k: series failed to converge");
        return {std::log(sum) + x, std::log(sum1) + std::log(2.0 / x) + x};
    }
    // CF2, evaluated with the Lentz/Thompson-Barnett style recurrences
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu * mu;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    int i = 2;
    for (; i <= acc.max_iter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) <= eps) break;
    }
    if (i > acc.max_iter)
        throw std::runtime_error("bessel_k: continued fraction failed to converge");
    h = a1 * h;
    const double log_kmu = 0.5 * std::log(M_PI / (2.0 * x)) - std::log(s);
    const double kmu1_over_kmu = (mu + x + 0.5 - h) / x;
    return {log_kmu, log_kmu + std::log(kmu1_over_kmu)};
}

}  // namespace detail

/// ln K_{v0 + j}(x) for j = 0 .. count-1 in one pass: the whole ladder of
/// orders is produced by the (stable) upward three-term recurrence
/// K_{u+1} = K_{u-1} + (2u/x) K_u with rescaling, starting from Temme/CF2
/// seeds at the fractional part of v0. The outage series need many orders
/// spaced by one at a fixed argument, which this serves in O(count).
inline std::vector<double> log_bessel_k_sequence(double v0, double x, int count,
                                                 const Accuracy& acc = {}) {
    detail::require_finite(v0, "bessel_k", "order v");
    detail::require_finite(x, "bessel_k", "argument x");
    if (!(x > 0.0)) throw std::domain_error("bessel_k: argument x must be > 0");
    if (v0 < 0.0) throw std::domain_error("log_bessel_k_sequence: start order must be >= 0");
    if (count < 1) return {};

    const int nl = static_cast<int>(std::floor(v0 + 0.5));
    const double mu = v0 - nl;  // in [-0.5, 0.5)
    const auto pair = detail::bessel_k_pair_scaled(mu, x, acc);

    std::vector<double> out;
    out.reserve(count);
    // scaled mantissas with a shared log offset; values here are e^x K
    double off = pair.log_kmu;
    double k0 = 1.0;
    double k1 = std::exp(pair.log_kmu1 - pair.log_kmu);
    auto record = [&](int j, double mant) {
        if (j >= nl && static_cast<int>(out.size()) < count)
            out.push_back(off + std::log(mant) - x);
    };
    record(0, k0);
    record(1, k1);
    double u = mu + 1.0;
    for (int j = 2; static_cast<int>(out.size()) < count; ++j, u += 1.0) {
        double k2 = k0 + (2.0 * u / x) * k1;
        if (k2 > 1e270) {
            const double scale = k2;
            k1 /= scale;
            k2 = k0 / scale + (2.0 * u / x) * k1;  // recompute at the new scale
            off += std::log(scale);
        }
        k0 = k1;
        k1 = k2;
        record(j, k1);
    }
    return out;
}

/// ln K_v(x), any finite real v (K is even in the order), x > 0.
inline double log_bessel_k(double v, double x, const Accuracy& acc = {}) {
    return log_bessel_k_sequence(std::abs(v), x, 1, acc)[0];
}

/// K_v(x); overflows to +inf for small x and large |v| (use log_bessel_k).
inline double bessel_k(double v, double x, const Accuracy& acc = {}) {
    return std::exp(log_bessel_k(v, x, acc));
}

// ---------------------------------------------------------------------------
// Incomplete gamma functions.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_gamma_args(double s, double x, const char* fn) {
    require_finite(s, fn, "s");
    require_finite(x, fn, "x");
    if (!(s > 0.0)) throw std::domain_error(std::string(fn) + ": s must be > 0");
    if (x < 0.0) throw std::domain_error(std::string(fn) + ": x must be >= 0");
}

// Series for P(s,x), good for x < s + 1.
inline double gamma_p_series(double s, double x, const Accuracy& acc) {
    double ap = s;
    double sum = 1.0 / s, del = sum;
    const double eps = std::min(acc.rel_tol, 1e-16);
    for (int i = 0; i < acc.max_iter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * eps)
            return sum * std::exp(s * std::log(x) - x - log_gamma(s));
    }
    throw std::runtime_error("gamma_lower_reg: series failed to converge");
}

// Lentz continued fraction for Q(s,x), good for x >= s + 1.
inline double gamma_q_cf(double s, double x, const Accuracy& acc) {
    constexpr double fpmin = 1e-300;
    const double eps = std::min(acc.rel_tol, 1e-16);
    double b = x + 1.0 - s;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= acc.max_iter; ++i) {
        const double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            return h * std::exp(s * std::log(x) - x - log_gamma(s));
    }
    throw std::runtime_error("gamma_upper_reg: continued fraction failed to converge");
}

}  // namespace detail

/// Regularized lower incomplete gamma P(s,x) = gamma(s,x)/Gamma(s), in [0,1]
/// and nondecreasing in x.
inline double gamma_lower_reg(double s, double x, const Accuracy& acc = {}) {
    detail::check_gamma_args(s, x, "gamma_lower_reg");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return detail::gamma_p_series(s, x, acc);
    return 1.0 - detail::gamma_q_cf(s, x, acc);
}

/// Regularized upper incomplete gamma Q(s,x) = Gamma(s,x)/Gamma(s). The
/// x >= s+1 branch evaluates the continued fraction directly, so the far
/// tail keeps full relative accuracy.
inline double gamma_upper_reg(double s, double x, const Accuracy& acc = {}) {
    detail::check_gamma_args(s, x, "gamma_upper_reg");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - detail::gamma_p_series(s, x, acc);
    return detail::gamma_q_cf(s, x, acc);
}

/// Lower incomplete gamma(s, x). Overflows with Gamma(s) for s beyond ~171;
/// the regularized form is what the series code uses internally.
inline double gamma_lower(double s, double x, const Accuracy& acc = {}) {
    return gamma_lower_reg(s, x, acc) * std::exp(log_gamma(s));
}

/// Upper incomplete Gamma(s, x) = Gamma(s) - gamma(s, x).
inline double gamma_upper(double s, double x, const Accuracy& acc = {}) {
    return gamma_upper_reg(s, x, acc) * std::exp(log_gamma(s));
}

}  // namespace kmrelay::mathkern
