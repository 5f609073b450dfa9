#pragma once

// Command-line front end: argument parsing into a RunConfig and the
// subcommand drivers. Process-level concerns only; all computation lives in
// the other headers.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kmrelay/experiments.hpp"
#include "kmrelay/version.hpp"

namespace kmrelay::cli {

using experiments::MethodTag;
using sysmodel::SystemParams;

/// Raised for anything that should end the process with a usage error.
class UsageError : public std::runtime_error {
  public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by --help / --version: print the text and exit cleanly.
struct ExitRequest {
    std::string text;
};

struct RunConfig {
    enum class Command { Outage, Sweep, OptimalAlpha, Validate };

    Command command = Command::Outage;
    SystemParams params{};
    SeriesPolicy policy{};
    std::string spec_path;      // sweep: key=value spec file
    std::string scenario;       // sweep: canned scenario name
    std::string output = "-";   // sweep: CSV destination ("-" = stdout)
    long long trials = 0;       // outage/validate Monte Carlo trials
    std::uint64_t seed = 1;
    std::string method = "unified";  // optimal-alpha method tag
    int opt_grid = 99;
    double opt_tol = 1e-6;
    int verbosity = 0;

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        auto link_eq = [](const fading::KappaMuParams& x, const fading::KappaMuParams& y) {
            return x.kappa == y.kappa && x.mu == y.mu && x.omega == y.omega;
        };
        return a.command == b.command && link_eq(a.params.link1, b.params.link1) &&
               link_eq(a.params.link2, b.params.link2) &&
               link_eq(a.params.link3, b.params.link3) && a.params.ps == b.params.ps &&
               a.params.eta == b.params.eta && a.params.alpha == b.params.alpha &&
               a.params.d1 == b.params.d1 && a.params.d2 == b.params.d2 &&
               a.params.xi1 == b.params.xi1 && a.params.xi2 == b.params.xi2 &&
               a.params.sigma_d2 == b.params.sigma_d2 && a.params.c_th == b.params.c_th &&
               a.policy.rel_tol == b.policy.rel_tol &&
               a.policy.max_terms_outer == b.policy.max_terms_outer &&
               a.policy.max_terms_inner == b.policy.max_terms_inner &&
               a.policy.fixed_terms == b.policy.fixed_terms && a.spec_path == b.spec_path &&
               a.scenario == b.scenario && a.output == b.output && a.trials == b.trials &&
               a.seed == b.seed && a.method == b.method && a.opt_grid == b.opt_grid &&
               a.opt_tol == b.opt_tol && a.verbosity == b.verbosity;
    }
};

namespace detail {

struct ParamFlags {
    std::optional<double> kappa, mu, omega;
    std::optional<double> k1, k2, k3, m1, m2, m3, o1, o2, o3;
    std::optional<double> ps, eta, alpha, d1, d2, xi1, xi2, sigma_d2, sigma_d, c_th;
    std::optional<int> fixed_terms;
    std::optional<double> rel_tol;
    std::optional<int> max_terms;
};

inline void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--kappa", f.kappa, "kappa for all three links");
    cmd->add_option("--mu", f.mu, "mu for all three links");
    cmd->add_option("--omega", f.omega, "mean power for all three links");
    cmd->add_option("--kappa1", f.k1, "S->R kappa");
    cmd->add_option("--kappa2", f.k2, "R->D kappa");
    cmd->add_option("--kappa3", f.k3, "loop-back kappa");
    cmd->add_option("--mu1", f.m1, "S->R mu");
    cmd->add_option("--mu2", f.m2, "R->D mu");
    cmd->add_option("--mu3", f.m3, "loop-back mu");
    cmd->add_option("--omega1", f.o1, "S->R mean power");
    cmd->add_option("--omega2", f.o2, "R->D mean power");
    cmd->add_option("--omega3", f.o3, "loop-back mean power");
    cmd->add_option("--ps", f.ps, "source power, W");
    cmd->add_option("--eta", f.eta, "harvester efficiency");
    cmd->add_option("--alpha", f.alpha, "EH time factor");
    cmd->add_option("--d1", f.d1, "S->R distance, m");
    cmd->add_option("--d2", f.d2, "R->D distance, m");
    cmd->add_option("--xi1", f.xi1, "S->R path-loss exponent");
    cmd->add_option("--xi2", f.xi2, "R->D path-loss exponent");
    cmd->add_option("--sigma-d2", f.sigma_d2, "destination noise variance, W");
    cmd->add_option("--sigma-d", f.sigma_d, "destination noise amplitude (sets sigma_d2 = value^2)");
    cmd->add_option("--c-th", f.c_th, "threshold rate, bits/s/Hz");
    cmd->add_option("--fixed-terms", f.fixed_terms, "truncate every series at exactly N terms");
    cmd->add_option("--rel-tol", f.rel_tol, "adaptive series tolerance");
    cmd->add_option("--max-terms", f.max_terms, "adaptive series term budget");
}

inline void apply_param_flags(const ParamFlags& f, RunConfig& cfg) {
    auto set = [&](const std::optional<double>& v, const char* name) {
        if (v) experiments::set_param(cfg.params, name, *v);
    };
    set(f.kappa, "kappa");
    set(f.mu, "mu");
    set(f.omega, "omega");
    set(f.k1, "link1.kappa");
    set(f.k2, "link2.kappa");
    set(f.k3, "link3.kappa");
    set(f.m1, "link1.mu");
    set(f.m2, "link2.mu");
    set(f.m3, "link3.mu");
    set(f.o1, "link1.omega");
    set(f.o2, "link2.omega");
    set(f.o3, "link3.omega");
    set(f.ps, "ps");
    set(f.eta, "eta");
    set(f.alpha, "alpha");
    set(f.d1, "d1");
    set(f.d2, "d2");
    set(f.xi1, "xi1");
    set(f.xi2, "xi2");
    set(f.sigma_d2, "sigma_d2");
    set(f.sigma_d, "sigma_d");
    set(f.c_th, "c_th");
    if (f.fixed_terms) cfg.policy.fixed_terms = *f.fixed_terms;
    if (f.rel_tol) cfg.policy.rel_tol = *f.rel_tol;
    if (f.max_terms)
        cfg.policy.max_terms_outer = cfg.policy.max_terms_inner = *f.max_terms;
}

}  // namespace detail

/// Parse a full argument vector (excluding argv[0]) into a RunConfig, or
/// throw UsageError with a message naming the problem. --help/--version
/// throw CLI::Success-style early exits mapped to UsageError with empty
/// payloads handled by run_main.
inline RunConfig parse_args(const std::vector<std::string>& args) {
    CLI::App app{"ergodic outage of a full-duplex energy-harvesting DF relay over "
                 "kappa-mu fading"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    RunConfig cfg;
    detail::ParamFlags outage_f, opt_f, val_f;

    auto* outage = app.add_subcommand("outage", "single point, every applicable method");
    detail::add_param_flags(outage, outage_f);
    outage->add_option("--trials", cfg.trials, "append a Monte Carlo estimate with this many trials");
    outage->add_option("--seed", cfg.seed, "Monte Carlo seed");

    auto* sweep = app.add_subcommand("sweep", "parameter grid -> CSV");
    sweep->add_option("--spec", cfg.spec_path, "sweep spec file (key = value lines)");
    sweep->add_option("--scenario", cfg.scenario, "canned scenario: fig1, fig2a, fig2b, fig3");
    sweep->add_option("--out", cfg.output, "CSV destination path, or - for stdout");
    std::optional<long long> sweep_trials;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<int> sweep_fixed;
    std::optional<double> sweep_rtol;
    sweep->add_option("--trials", sweep_trials, "override Monte Carlo trials");
    sweep->add_option("--seed", sweep_seed, "override sweep seed");
    sweep->add_option("--fixed-terms", sweep_fixed, "override series truncation");
    sweep->add_option("--rel-tol", sweep_rtol, "override series tolerance");

    auto* opt = app.add_subcommand("optimal-alpha", "minimize outage over the EH time factor");
    detail::add_param_flags(opt, opt_f);
    opt->add_option("--method", cfg.method, "analytic method tag")
        ->check(CLI::IsMember({"unified", "rice", "nakagami", "rayleigh", "rayleigh_highsnr"}));
    opt->add_option("--grid", cfg.opt_grid, "coarse scan points")->check(CLI::PositiveNumber);
    opt->add_option("--tol", cfg.opt_tol, "alpha refinement tolerance");

    auto* val = app.add_subcommand("validate", "Monte Carlo vs analytic agreement report");
    detail::add_param_flags(val, val_f);
    val->add_option("--trials", cfg.trials, "Monte Carlo trials");
    val->add_option("--seed", cfg.seed, "Monte Carlo seed");

    app.add_flag("-v,--verbose", cfg.verbosity, "log progress to standard error");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw ExitRequest{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw ExitRequest{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::CallForVersion&) {
        throw ExitRequest{std::string(kVersion)};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    try {
        if (outage->parsed()) {
            cfg.command = RunConfig::Command::Outage;
            detail::apply_param_flags(outage_f, cfg);
        } else if (sweep->parsed()) {
            cfg.command = RunConfig::Command::Sweep;
            if (cfg.spec_path.empty() == cfg.scenario.empty())
                throw UsageError("sweep: exactly one of --spec or --scenario is required");
            if (sweep_trials) cfg.trials = *sweep_trials;
            if (sweep_seed) cfg.seed = *sweep_seed;
            if (sweep_fixed) cfg.policy.fixed_terms = *sweep_fixed;
            if (sweep_rtol) cfg.policy.rel_tol = *sweep_rtol;
        } else if (opt->parsed()) {
            cfg.command = RunConfig::Command::OptimalAlpha;
            detail::apply_param_flags(opt_f, cfg);
        } else if (val->parsed()) {
            cfg.command = RunConfig::Command::Validate;
            detail::apply_param_flags(val_f, cfg);
            if (cfg.trials == 0) cfg.trials = 1000000;
        }
        cfg.policy.validate();
        if (cfg.command != RunConfig::Command::Sweep) cfg.params.validate();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

/// Serialize a RunConfig back into an equivalent flag vector; parse_args of
/// the result reproduces the config.
inline std::vector<std::string> to_args(const RunConfig& cfg) {
    std::vector<std::string> args;
    auto num = [](double v) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v;
        return ss.str();
    };
    switch (cfg.command) {
        case RunConfig::Command::Outage: args.push_back("outage"); break;
        case RunConfig::Command::Sweep: args.push_back("sweep"); break;
        case RunConfig::Command::OptimalAlpha: args.push_back("optimal-alpha"); break;
        case RunConfig::Command::Validate: args.push_back("validate"); break;
    }
    if (cfg.command == RunConfig::Command::Sweep) {
        if (!cfg.spec_path.empty()) { args.push_back("--spec"); args.push_back(cfg.spec_path); }
        if (!cfg.scenario.empty()) { args.push_back("--scenario"); args.push_back(cfg.scenario); }
        args.push_back("--out"); args.push_back(cfg.output);
        args.push_back("--trials"); args.push_back(std::to_string(cfg.trials));
        args.push_back("--seed"); args.push_back(std::to_string(cfg.seed));
    } else {
        auto link = [&](const char* suffix, const fading::KappaMuParams& p) {
            args.push_back(std::string("--kappa") + suffix); args.push_back(num(p.kappa));
            args.push_back(std::string("--mu") + suffix); args.push_back(num(p.mu));
            args.push_back(std::string("--omega") + suffix); args.push_back(num(p.omega));
        };
        link("1", cfg.params.link1);
        link("2", cfg.params.link2);
        link("3", cfg.params.link3);
        auto opt = [&](const char* flag, double v) { args.push_back(flag); args.push_back(num(v)); };
        opt("--ps", cfg.params.ps);
        opt("--eta", cfg.params.eta);
        opt("--alpha", cfg.params.alpha);
        opt("--d1", cfg.params.d1);
        opt("--d2", cfg.params.d2);
        opt("--xi1", cfg.params.xi1);
        opt("--xi2", cfg.params.xi2);
        opt("--sigma-d2", cfg.params.sigma_d2);
        opt("--c-th", cfg.params.c_th);
        opt("--rel-tol", cfg.policy.rel_tol);
        args.push_back("--max-terms");
        args.push_back(std::to_string(cfg.policy.max_terms_outer));
        if (cfg.policy.fixed_terms) {
            args.push_back("--fixed-terms");
            args.push_back(std::to_string(*cfg.policy.fixed_terms));
        }
        if (cfg.command != RunConfig::Command::OptimalAlpha) {
            args.push_back("--trials"); args.push_back(std::to_string(cfg.trials));
            args.push_back("--seed"); args.push_back(std::to_string(cfg.seed));
        } else {
            args.push_back("--method"); args.push_back(cfg.method);
            args.push_back("--grid"); args.push_back(std::to_string(cfg.opt_grid));
            args.push_back("--tol"); args.push_back(num(cfg.opt_tol));
        }
    }
    for (int i = 0; i < cfg.verbosity; ++i) args.push_back("-v");
    return args;
}

namespace detail {

inline void log_line(const RunConfig& cfg, std::ostream& err, const std::string& msg) {
    if (cfg.verbosity > 0) err << "info: " << msg << '\n';
}

inline bool links_are(const SystemParams& p, double kappa_max, bool mu_one,
                      bool kappa_zero) {
    auto ok = [&](const fading::KappaMuParams& l) {
        if (kappa_zero && l.kappa != 0.0) return false;
        if (mu_one && l.mu != 1.0) return false;
        return l.kappa <= kappa_max;
    };
    return ok(p.link1) && ok(p.link2) && ok(p.link3);
}

inline int run_outage(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& p = cfg.params;
    out << "# upsilon=" << p.snr_threshold() << " a=" << p.dest_snr_scale()
        << " b=" << p.inv_zeta() << '\n';
    out << "method,outage,raw,converged,terms\n";
    auto print = [&](const analytic::OutageResult& r) {
        out << analytic::method_name(r.method) << ',' << r.value << ',' << r.raw_value
            << ',' << (r.converged ? 1 : 0) << ','
            << std::max({r.terms_used.loopback, r.terms_used.product_outer,
                         r.terms_used.product_inner})
            << '\n';
    };
    print(analytic::outage_unified(p, cfg.policy));
    const bool mu_one = p.link1.mu == 1.0 && p.link2.mu == 1.0 && p.link3.mu == 1.0;
    const bool kappa_zero =
        p.link1.kappa == 0.0 && p.link2.kappa == 0.0 && p.link3.kappa == 0.0;
    if (mu_one) print(analytic::outage_rice(p, cfg.policy));
    if (kappa_zero && std::abs(p.link1.mu - std::round(p.link1.mu)) <= 1e-9)
        print(analytic::outage_nakagami(p, cfg.policy));
    if (mu_one && kappa_zero) {
        print(analytic::outage_rayleigh(p));
        print(analytic::outage_rayleigh_highsnr(p));
    }
    if (cfg.trials > 0) {
        log_line(cfg, err, "running " + std::to_string(cfg.trials) + " Monte Carlo trials");
        const auto rep = sysmodel::mc_outage(p, cfg.trials, cfg.seed);
        out << "mc," << rep.estimate << ',' << rep.estimate << ",1," << rep.trials
            << " (std_error " << rep.std_error << ")\n";
    }
    return 0;
}

inline int run_sweep_cmd(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    experiments::SweepSpec spec = cfg.scenario.empty()
                                      ? experiments::parse_spec_file(cfg.spec_path)
                                      : experiments::scenario(cfg.scenario);
    if (cfg.trials > 0) {
        spec.mc_trials = cfg.trials;
        if (std::find(spec.methods.begin(), spec.methods.end(), MethodTag::MonteCarlo) ==
            spec.methods.end())
            spec.methods.push_back(MethodTag::MonteCarlo);
    }
    spec.seed = cfg.seed;
    if (cfg.policy.fixed_terms) spec.policy.fixed_terms = cfg.policy.fixed_terms;
    if (cfg.policy.rel_tol != SeriesPolicy{}.rel_tol) spec.policy.rel_tol = cfg.policy.rel_tol;
    log_line(cfg, err, "sweeping " + std::to_string(spec.axes.size()) + " axes");
    const auto rows = experiments::run_sweep(spec);
    log_line(cfg, err, std::to_string(rows.size()) + " rows");
    if (cfg.output == "-") {
        experiments::emit_csv(spec, rows, out);
    } else {
        experiments::emit_csv(spec, rows, cfg.output);
        log_line(cfg, err, "wrote " + cfg.output);
    }
    return 0;
}

inline int run_optimal_alpha(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto tag = experiments::method_tag_from_name(cfg.method);
    if (!tag || *tag == MethodTag::MonteCarlo)
        throw UsageError("optimal-alpha: --method must be an analytic method tag");
    const auto res =
        experiments::optimal_alpha(cfg.params, *tag, cfg.opt_grid, cfg.opt_tol, cfg.policy);
    if (!res.unimodal)
        err << "warning: outage-vs-alpha scan is not unimodal; reporting the global "
               "grid minimum\n";
    log_line(cfg, err, std::to_string(res.evaluations) + " evaluations");
    out << "alpha_star," << res.alpha_star << '\n';
    out << "outage_star," << res.outage_star << '\n';
    out << "unimodal," << (res.unimodal ? 1 : 0) << '\n';
    return 0;
}

inline int run_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto& p = cfg.params;
    log_line(cfg, err, "validate: " + std::to_string(cfg.trials) + " trials");
    const auto rep = sysmodel::mc_outage(p, cfg.trials, cfg.seed);
    const auto an = analytic::outage_unified(p, cfg.policy);
    const double diff = std::abs(an.value - rep.estimate);
    const double sigmas = rep.std_error > 0 ? diff / rep.std_error
                                            : (diff == 0 ? 0 : std::numeric_limits<double>::infinity());
    out << "analytic," << an.value << '\n';
    out << "mc_estimate," << rep.estimate << '\n';
    out << "mc_std_error," << rep.std_error << '\n';
    out << "abs_diff," << diff << '\n';
    out << "sigmas," << sigmas << '\n';
    out << "within_3_sigma," << (diff <= 3.0 * rep.std_error ? 1 : 0) << '\n';
    return 0;
}

}  // namespace detail

/// Execute a parsed config. Returns the process exit code; non-convergence
/// is reported in the output, never via the exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    switch (cfg.command) {
        case RunConfig::Command::Outage: return detail::run_outage(cfg, out, err);
        case RunConfig::Command::Sweep: return detail::run_sweep_cmd(cfg, out, err);
        case RunConfig::Command::OptimalAlpha:
            return detail::run_optimal_alpha(cfg, out, err);
        case RunConfig::Command::Validate: return detail::run_validate(cfg, out, err);
    }
    return 2;
}

}  // namespace kmrelay::cli
