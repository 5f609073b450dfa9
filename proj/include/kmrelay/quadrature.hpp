#pragma once

// Small adaptive Gauss-Kronrod (G7,K15) integrator. Used for the product-CDF
// fallback at non-integer shape and for normalization checks; not a general
// purpose quadrature package.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace kmrelay::quad {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
};

template <class F>
inline Segment gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kXgk[i];
        const double fsum = f(c - dx) + f(c + dx);
        kron += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Integrate f over the finite interval [a, b], splitting the worst segment
/// until the accumulated error estimate meets max(abs_tol, rel_tol*|I|).
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 1e-14, int max_segments = 2000) {
    QuadResult res;
    std::vector<detail::Segment> segs{detail::gk15(f, a, b)};
    res.evaluations = 15;
    while (static_cast<int>(segs.size()) < max_segments) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (err <= std::max(abs_tol, rel_tol * std::abs(total))) {
            res.value = total;
            res.abs_error = err;
            res.converged = true;
            return res;
        }
        const detail::Segment s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        segs[worst] = detail::gk15(f, s.a, mid);
        segs.push_back(detail::gk15(f, mid, s.b));
        res.evaluations += 30;
    }
    for (const auto& s : segs) {
        res.value += s.value;
        res.abs_error += s.error;
    }
    res.converged = res.abs_error <= std::max(abs_tol, rel_tol * std::abs(res.value));
    return res;
}

/// Integrate f over [a, inf) through the map x = a + t/(1-t).
template <class F>
QuadResult integrate_to_inf(F&& f, double a, double rel_tol = 1e-10,
                            double abs_tol = 1e-14, int max_segments = 2000) {
    auto g = [&f, a](double t) {
        const double om = 1.0 - t;
        const double x = a + t / om;
        const double v = f(x);
        return v == 0.0 ? 0.0 : v / (om * om);
    };
    return integrate(g, 0.0, 1.0, rel_tol, abs_tol, max_segments);
}

}  // namespace kmrelay::quad
