#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace kmrelay {

/// Thrown when an adaptive series hits its term budget before reaching the
/// requested relative tolerance.
class NonConvergenceError : public std::runtime_error {
  public:
    explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Truncation control for the infinite series in the distribution and outage
/// expressions. In adaptive mode a sum stops once three consecutive terms
/// fall below rel_tol times the running total (the terms are not monotone,
/// so a single small term is not trusted), or once the remaining Poisson
/// mass bounds the tail below tolerance. If fixed_terms is set, every
/// infinite sum is truncated at exactly that many terms instead.
struct SeriesPolicy {
    double rel_tol = 1e-10;
    int max_terms_outer = 200;
    int max_terms_inner = 200;
    std::optional<int> fixed_terms{};

    void validate() const {
        if (!(rel_tol > 0.0))
            throw std::invalid_argument("SeriesPolicy: rel_tol must be > 0");
        if (max_terms_outer < 1 || max_terms_inner < 1)
            throw std::invalid_argument("SeriesPolicy: max terms must be >= 1");
        if (fixed_terms && *fixed_terms < 1)
            throw std::invalid_argument("SeriesPolicy: fixed_terms must be >= 1");
    }

    /// The paper-reproduction setting: truncate every series at 20 terms.
    static SeriesPolicy fixed(int terms) {
        SeriesPolicy p;
        p.fixed_terms = terms;
        return p;
    }
};

}  // namespace kmrelay
