#pragma once

// The dual-hop full-duplex decode-and-forward link with a time-switching
// energy harvester at the relay. The relay has no supply of its own: a
// fraction alpha of each frame charges it from the source signal, the rest
// carries data, so the relay transmit power is proportional to the harvested
// energy and the relay-side SNR ends up interference-limited by the
// loop-back channel alone. This header holds the scenario parameters, the
// per-hop SNRs and capacities, and the Monte Carlo ergodic-outage estimator
// that serves as the oracle for every closed form in analytic.hpp.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "kmrelay/fading.hpp"

namespace kmrelay::sysmodel {

/// Full scenario description. link1 is S->R, link2 R->D, link3 the relay's
/// loop-back self-interference channel. sigma_d2 is the destination noise
/// variance in watts. sigma_r2 and xi3 are accepted for config completeness
/// but enter no expression: the relay SNR is interference-limited and has no
/// loop-back path-loss term.
struct SystemParams {
    fading::KappaMuParams link1{};
    fading::KappaMuParams link2{};
    fading::KappaMuParams link3{};
    double ps = 0.5;        // source transmit power, W
    double eta = 1.0;       // energy-harvester efficiency
    double alpha = 0.06;    // EH time factor
    double d1 = 4.0;        // S->R distance, m
    double d2 = 4.0;        // R->D distance, m
    double xi1 = 2.7;       // S->R path-loss exponent
    double xi2 = 2.7;       // R->D path-loss exponent
    double sigma_d2 = 0.01; // destination noise variance, W
    double c_th = 0.2;      // threshold rate, bits/s/Hz
    double sigma_r2 = 0.01; // relay noise variance, W (unused, see above)
    double xi3 = 2.7;       // loop-back path-loss exponent (unused)

    void validate() const {
        link1.validate();
        link2.validate();
        link3.validate();
        auto positive = [](double v, const char* name) {
            if (!std::isfinite(v) || !(v > 0.0))
                throw std::invalid_argument(std::string("SystemParams: ") + name +
                                            " must be > 0");
        };
        positive(ps, "ps");
        positive(d1, "d1");
        positive(d2, "d2");
        positive(xi1, "xi1");
        positive(xi2, "xi2");
        positive(sigma_d2, "sigma_d2");
        if (!std::isfinite(eta) || !(eta > 0.0) || eta > 1.0)
            throw std::invalid_argument("SystemParams: eta must lie in (0, 1]");
        if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < 1.0))
            throw std::invalid_argument("SystemParams: alpha must lie in (0, 1)");
        if (!std::isfinite(c_th) || c_th < 0.0)
            throw std::invalid_argument("SystemParams: c_th must be >= 0");
    }

    /// zeta = eta alpha / (1 - alpha): harvested power per unit received
    /// power, and the loop-back interference gain.
    double zeta() const { return eta * alpha / (1.0 - alpha); }

    /// b = 1/zeta, the loop-back threshold scale.
    double inv_zeta() const { return (1.0 - alpha) / (eta * alpha); }

    /// upsilon = 2^{c_th/(1-alpha)} - 1, the SNR an instantaneous capacity
    /// of c_th requires.
    double snr_threshold() const { return std::exp2(c_th / (1.0 - alpha)) - 1.0; }

    /// a: destination SNR per unit h1^2 h2^2.
    double dest_snr_scale() const {
        return zeta() * ps / (std::pow(d1, xi1) * std::pow(d2, xi2) * sigma_d2);
    }
};

/// Outcome of a Monte Carlo outage estimation.
struct MonteCarloReport {
    double estimate = 0.0;
    double std_error = 0.0;
    long long trials = 0;
    std::uint64_t seed = 0;
};

/// Relay transmit power for a realized S->R power gain:
/// eta alpha Ps h1^2 / ((1-alpha) d1^xi1).
inline double relay_power(const SystemParams& sys, double h1_sq) {
    if (!std::isfinite(h1_sq) || h1_sq < 0.0)
        throw std::domain_error("relay_power: h1_sq must be >= 0");
    return sys.zeta() * sys.ps * h1_sq / std::pow(sys.d1, sys.xi1);
}

/// Relay SNR 1/(zeta h3^2). The h1^2 dependence cancels exactly between the
/// desired signal and the harvested (loop-back) interference, and the code
/// keeps that cancellation literal rather than dividing two powers. A zero
/// loop-back gain is reported as +inf, not a division.
inline double snr_relay(const SystemParams& sys, double h3_sq) {
    if (!std::isfinite(h3_sq) || h3_sq < 0.0)
        throw std::domain_error("snr_relay: h3_sq must be >= 0");
    if (h3_sq == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (sys.zeta() * h3_sq);
}

/// Destination SNR a * h1^2 h2^2.
inline double snr_dest(const SystemParams& sys, double h1_sq, double h2_sq) {
    if (!std::isfinite(h1_sq) || h1_sq < 0.0 || !std::isfinite(h2_sq) || h2_sq < 0.0)
        throw std::domain_error("snr_dest: channel gains must be >= 0");
    return sys.dest_snr_scale() * h1_sq * h2_sq;
}

/// Instantaneous capacity (1-alpha) log2(1+snr) of either hop.
inline double capacity(const SystemParams& sys, double snr) {
    if (std::isnan(snr) || snr < 0.0)
        throw std::domain_error("capacity: snr must be >= 0");
    return (1.0 - sys.alpha) * std::log2(1.0 + snr);
}

/// Ergodic outage probability Pr(min{C_r, C_d} < c_th) estimated by direct
/// simulation: each trial draws the three link powers independently and
/// tests the end-to-end capacity against the threshold (strict inequality;
/// ties have probability zero under continuous fading). Deterministic for a
/// given seed.
inline MonteCarloReport mc_outage(const SystemParams& sys, long long trials,
                                  std::uint64_t seed) {
    sys.validate();
    if (trials < 1) throw std::invalid_argument("mc_outage: trials must be >= 1");
    std::mt19937_64 rng(seed);
    long long outages = 0;
    for (long long t = 0; t < trials; ++t) {
        const double h1 = fading::sample(sys.link1, rng);
        const double h2 = fading::sample(sys.link2, rng);
        const double h3 = fading::sample(sys.link3, rng);
        const double c_r = capacity(sys, snr_relay(sys, h3));
        const double c_d = capacity(sys, snr_dest(sys, h1, h2));
        if (std::min(c_r, c_d) < sys.c_th) ++outages;
    }
    MonteCarloReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.estimate = static_cast<double>(outages) / static_cast<double>(trials);
    rep.std_error = std::sqrt(rep.estimate * (1.0 - rep.estimate) /
                              static_cast<double>(trials));
    return rep;
}

}  // namespace kmrelay::sysmodel
