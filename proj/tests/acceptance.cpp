// Acceptance suite: one line per criterion, nonzero exit status if any
// criterion fails. Scenario constants follow the published curve setups
// (path-loss 2.7, 4 m hops, eta 1, 0.2 bits/s/Hz threshold, noise figure
// read as an amplitude of 0.01 -> variance 1e-4, which is the reading that
// reproduces the curves).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kmrelay/kmrelay.hpp"
#include "oracle.hpp"

using namespace kmrelay;
using sysmodel::SystemParams;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

SystemParams figure_sys() {
    SystemParams sys;
    sys.sigma_d2 = 1e-4;
    return sys;
}

SystemParams links(SystemParams sys, double k1, double m1, double k2, double m2,
                   double k3, double m3) {
    sys.link1 = {k1, m1, 1.0};
    sys.link2 = {k2, m2, 1.0};
    sys.link3 = {k3, m3, 1.0};
    return sys;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// --- criterion 1: analytic vs Monte Carlo on a randomized grid ------------

void criterion_oracle_agreement() {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> ukap(0.0, 5.0);
    std::uniform_int_distribution<int> umu(1, 3);
    std::uniform_real_distribution<double> ualpha(0.05, 0.9);
    std::uniform_real_distribution<double> ups_d(0.1, 2.0);

    const int points = 50;
    const long long trials = 1000000;
    int within = 0;
    double worst_sigma = 0.0;
    int evaluated = 0;
    int attempts = 0;
    while (evaluated < points && attempts < 600) {
        ++attempts;
        SystemParams sys = figure_sys();
        // a few forced special-case points, the rest random
        if (evaluated == 0) sys = links(sys, 0, 1, 0, 1, 0, 1);
        else if (evaluated == 1) sys = links(sys, 0, 2, 0, 3, 0, 1);
        else if (evaluated == 2) sys = links(sys, 5, 1, 0, 1, 2.5, 2);
        else
            sys = links(sys, ukap(rng), umu(rng), ukap(rng), umu(rng), ukap(rng),
                        umu(rng));
        sys.alpha = ualpha(rng);
        sys.ps = ups_d(rng);

        const auto an = analytic::outage_unified(sys);
        // keep points where a 1e6-trial estimator actually has resolving
        // power; probabilities within ~1e-4 of 0 or 1 cannot discriminate
        if (an.value < 1e-4 || an.value > 1.0 - 1e-4) continue;
        const auto mc = sysmodel::mc_outage(sys, trials, 1000 + evaluated);
        const double sigmas = std::abs(an.value - mc.estimate) /
                              std::max(mc.std_error, 1e-12);
        worst_sigma = std::max(worst_sigma, sigmas);
        if (sigmas <= 3.0) ++within;
        ++evaluated;
    }
    report(1, evaluated == points && within == points, "analytic equals the Monte Carlo oracle at 3 sigma on a 50-point randomized grid",
           std::to_string(within) + "/" + std::to_string(evaluated) +
               " points, worst " + fmt(worst_sigma) + " sigma, 1e6 trials each");
}

// --- criterion 2: reduction chain ------------------------------------------

void criterion_reductions() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ukap(0.0, 5.0);
    std::uniform_real_distribution<double> ualpha(0.1, 0.8);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        SystemParams rice = figure_sys();
        rice = links(rice, ukap(rng), 1, ukap(rng), 1, ukap(rng), 1);
        rice.alpha = ualpha(rng);
        rice.ps = 0.2 + 0.09 * i;
        worst = std::max(worst, std::abs(analytic::outage_unified(rice).value -
                                         analytic::outage_rice(rice).value));

        SystemParams nak = figure_sys();
        nak = links(nak, 0, 1 + i % 3, 0, 1 + (i + 1) % 3, 0, 1 + (i + 2) % 3);
        nak.alpha = ualpha(rng);
        worst = std::max(worst, std::abs(analytic::outage_unified(nak).value -
                                         analytic::outage_nakagami(nak).value));

        SystemParams ray = figure_sys();
        ray = links(ray, 0, 1, 0, 1, 0, 1);
        ray.alpha = ualpha(rng);
        worst = std::max(worst, std::abs(analytic::outage_nakagami(ray).value -
                                         analytic::outage_rayleigh(ray).value));
    }
    report(2, worst <= 1e-8, "mu=1, kappa=0, and (1,1,1) reductions agree across a 20-point grid",
           "max abs difference " + fmt(worst));
}

// --- criterion 3: distribution suite ----------------------------------------

void criterion_distributions() {
    bool pass = true;
    std::string detail;

    // normalization of the density over a (kappa, mu) grid
    double worst_norm = 0.0;
    for (auto [k, m] : std::vector<std::pair<double, double>>{
             {0.0, 0.5}, {0.0, 1.0}, {0.5, 0.8}, {2.0, 1.5}, {5.0, 3.0}, {10.0, 8.0}}) {
        fading::KappaMuParams p{k, m, 1.0};
        auto f = [&](double w) { return 2.0 * w * fading::pdf(p, w * w); };
        worst_norm = std::max(worst_norm,
                              std::abs(oracle::integrate(f, 0.0, 12.0, 1e-11) - 1.0));
    }
    pass = pass && worst_norm <= 1e-8;
    detail += "norm err " + fmt(worst_norm);

    // sample mean at 1e6 draws
    std::mt19937_64 rng(99);
    fading::KappaMuParams pm{1.0, 2.0, 3.0};
    double sum = 0.0;
    const int n_mean = 1000000;
    for (int i = 0; i < n_mean; ++i) sum += fading::sample(pm, rng);
    const double se = std::sqrt(9.0 * 3.0 / (2.0 * 4.0) / n_mean);
    const double mean_err = std::abs(sum / n_mean - 3.0);
    pass = pass && mean_err <= 3.0 * se;
    detail += ", mean err " + fmt(mean_err) + " (3se " + fmt(3.0 * se) + ")";

    // KS at the 1% level for ten parameter sets including kappa = 0
    const std::vector<fading::KappaMuParams> sets = {
        {0.0, 1.0, 1.0}, {0.0, 2.5, 1.0}, {0.0, 0.5, 2.0}, {1.0, 1.0, 1.0},
        {2.0, 1.5, 1.0}, {0.5, 0.8, 1.0}, {3.0, 2.0, 1.0}, {5.0, 3.0, 1.0},
        {1.5, 2.3, 0.8}, {4.0, 1.0, 1.0}};
    const std::size_t n_ks = 100000;
    int ks_ok = 0;
    double worst_ks_ratio = 0.0;
    for (const auto& p : sets) {
        std::vector<double> draws(n_ks);
        for (auto& d : draws) d = fading::sample(p, rng);
        const double d = oracle::ks_statistic(draws, [&](double z) { return fading::cdf(p, z); });
        const double crit = oracle::ks_critical_1pct(n_ks);
        worst_ks_ratio = std::max(worst_ks_ratio, d / crit);
        if (d < crit) ++ks_ok;
    }
    pass = pass && ks_ok == static_cast<int>(sets.size());
    detail += ", KS " + std::to_string(ks_ok) + "/" + std::to_string(sets.size()) +
              " (worst D/crit " + fmt(worst_ks_ratio) + ")";

    report(3, pass, "density normalizes, sampler mean and KS vs series cdf hold", detail);
}

// --- criteria 4 and 8: the kappa-mu surface grid ----------------------------

std::vector<double> surface_grid() { return experiments::linspace(0.5, 5.0, 10); }

SystemParams surface_sys(double k, double m) {
    SystemParams sys = figure_sys();
    sys.alpha = 0.06;
    sys.ps = 0.5;
    return links(sys, k, m, k, m, k, m);
}

void criterion_surface_shape() {
    const auto grid = surface_grid();
    std::vector<std::vector<double>> val(grid.size(), std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j)
            val[i][j] = analytic::outage_unified(surface_sys(grid[i], grid[j])).value;
    int violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (i > 0 && val[i][j] > val[i - 1][j] + 1e-10) {
                ++violations;
                worst = std::max(worst, val[i][j] - val[i - 1][j]);
            }
            if (j > 0 && val[i][j] > val[i][j - 1] + 1e-10) {
                ++violations;
                worst = std::max(worst, val[i][j] - val[i][j - 1]);
            }
        }
    report(4, violations == 0,
           "outage is monotone nonincreasing in kappa and mu on the 10x10 surface grid",
           violations == 0 ? "0 violations, corner values " + fmt(val[0][0]) + " -> " +
                                 fmt(val.back().back())
                           : std::to_string(violations) + " violations, worst " + fmt(worst));
}

void criterion_truncation_stability() {
    const auto grid = surface_grid();
    double worst = 0.0, worst_small = 0.0;
    double at_k = 0, at_m = 0;
    for (double k : grid)
        for (double m : grid) {
            const SystemParams sys = surface_sys(k, m);
            const double v20 = analytic::outage_unified(sys, SeriesPolicy::fixed(20)).value;
            const double v40 = analytic::outage_unified(sys, SeriesPolicy::fixed(40)).value;
            const double d = std::abs(v20 - v40);
            if (d > worst) {
                worst = d;
                at_k = k;
                at_m = m;
            }
            if (k * m <= 4.5) worst_small = std::max(worst_small, d);
        }
    const bool pass = worst < 1e-6;
    report(8, pass, "fixed 20-term and 40-term evaluations differ below 1e-6 on the surface grid",
           "max |P20-P40| = " + fmt(worst) + " at kappa=" + fmt(at_k) + ", mu=" + fmt(at_m) +
               "; restricted to kappa*mu <= 4.5 the max is " + fmt(worst_small));
    if (!pass)
        std::printf("       note: truncating the Poisson(kappa*mu) mixtures at 20 terms "
                    "discards 1 - CDF_Poisson(19) of their mass, which exceeds 1e-6 for "
                    "kappa*mu > ~5.3; at the grid corner (25) the first 20 terms hold "
                    "only ~14%% of the mass, so a 20-term evaluation cannot be stable "
                    "there for any implementation of these series.\n");
}

// --- criterion 5: outage vs alpha has an interior minimum -------------------

void criterion_alpha_ushape() {
    bool pass = true;
    std::string detail;
    auto check_curve = [&](SystemParams base, const std::string& name,
                           const std::function<double(const SystemParams&)>& eval) {
        std::vector<double> vals(99);
        int best = 0;
        for (int i = 0; i < 99; ++i) {
            SystemParams sys = base;
            sys.alpha = 0.01 + (0.99 - 0.01) * i / 98.0;
            vals[i] = eval(sys);
            if (vals[i] < vals[best]) best = i;
        }
        const bool ok = best > 0 && best < 98 && vals.front() > vals[best] &&
                        vals.back() > vals[best];
        pass = pass && ok;
        detail += name + (ok ? " ok" : " FAIL") + " (min " + fmt(vals[best]) + "); ";
    };
    for (double m : {1.0, 2.0, 3.0}) {
        SystemParams sys = figure_sys();
        sys.ps = 1.0;
        sys = links(sys, 0, m, 0, m, 0, m);
        check_curve(sys, "nak mu=" + fmt(m), [](const SystemParams& s) {
            return analytic::outage_nakagami(s).value;
        });
    }
    for (double k : {1.0, 3.0, 5.0}) {
        SystemParams sys = figure_sys();
        sys.ps = 1.0;
        sys = links(sys, k, 1, k, 1, k, 1);
        check_curve(sys, "rice k=" + fmt(k), [](const SystemParams& s) {
            return analytic::outage_rice(s).value;
        });
    }
    report(5, pass, "99-point outage-vs-alpha curves dip to an interior minimum", detail);
}

// --- criterion 6: loop-back severity and source power directions ------------

void criterion_loopback_direction() {
    const std::vector<double> ps_grid = {0.1, 0.5, 1.0, 2.0, 5.0};
    const std::vector<double> m3_grid = {1.0, 2.0, 3.0, 5.0};
    bool pass = true;
    std::vector<std::vector<double>> val(m3_grid.size(),
                                         std::vector<double>(ps_grid.size()));
    for (std::size_t i = 0; i < m3_grid.size(); ++i)
        for (std::size_t j = 0; j < ps_grid.size(); ++j) {
            SystemParams sys = figure_sys();
            sys.c_th = 0.3;
            sys.alpha = 0.6;
            sys.d1 = 8.0;
            sys.d2 = 4.0;
            sys.ps = ps_grid[j];
            sys = links(sys, 0, 5, 0, 5, 0, m3_grid[i]);
            val[i][j] = analytic::outage_nakagami(sys).value;
        }
    for (std::size_t i = 0; i < m3_grid.size(); ++i)
        for (std::size_t j = 0; j < ps_grid.size(); ++j) {
            if (i > 0 && val[i][j] < val[i - 1][j] - 1e-12) pass = false;  // m3 up, outage up
            if (j > 0 && val[i][j] > val[i][j - 1] + 1e-12) pass = false;  // ps up, outage down
        }
    report(6, pass, "outage grows with loop-back severity m3 and falls with source power",
           "m3=1 row " + fmt(val[0][0]) + "->" + fmt(val[0].back()) + ", m3=5 row " +
               fmt(val[3][0]) + "->" + fmt(val[3].back()));
}

// --- criterion 7: high-SNR approximation quality sweep ----------------------

void criterion_high_snr() {
    SystemParams base = figure_sys();
    base.alpha = 0.5;
    base.c_th = 0.5;  // upsilon = 1, b = 1
    base.d1 = base.d2 = 1.0;
    base = links(base, 0, 1, 0, 1, 0, 1);
    const double ups = base.snr_threshold();
    bool reached = false;
    double worst_past_threshold = 0.0;
    double first_ok_z = 0.0;
    for (double ps = 0.01; ps <= 2.0e4; ps *= 1.6) {
        SystemParams sys = base;
        sys.ps = ps;
        const double z = 2.0 * std::sqrt(ups / sys.dest_snr_scale());
        const double exact = analytic::outage_rayleigh(sys).value;
        const double approx = analytic::outage_rayleigh_highsnr(sys).value;
        const double rel = std::abs(approx - exact) / exact;
        if (z <= 0.01) {
            if (!reached) first_ok_z = z;
            reached = true;
            worst_past_threshold = std::max(worst_past_threshold, rel);
        }
    }
    report(7, reached && worst_past_threshold < 0.05,
           "exp(-b/upsilon) is within 5% of the exact Rayleigh form once 2 sqrt(ups/a) <= 0.01",
           "worst rel err past threshold " + fmt(worst_past_threshold) + " (first z " +
               fmt(first_ok_z) + ")");
}

// --- criterion 9: byte-identical sweeps --------------------------------------

void criterion_determinism() {
    auto spec = experiments::fig3_scenario();
    spec.mc_trials = 2000;
    spec.seed = 12345;
    std::stringstream a, b;
    experiments::emit_csv(spec, experiments::run_sweep(spec), a);
    experiments::emit_csv(spec, experiments::run_sweep(spec), b);
    const bool pass = a.str() == b.str() && !a.str().empty();
    report(9, pass, "re-running a seeded sweep reproduces the CSV byte for byte",
           std::to_string(a.str().size()) + " bytes");
}

}  // namespace

int main() {
    criterion_oracle_agreement();
    criterion_reductions();
    criterion_distributions();
    criterion_surface_shape();
    criterion_alpha_ushape();
    criterion_loopback_direction();
    criterion_high_snr();
    criterion_truncation_stability();
    criterion_determinism();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criterion(s) failed\n", g_failures);
    return g_failures;
}
