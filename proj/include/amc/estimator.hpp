#pragma once

// Monte-Carlo driver: n independent randomized trials, the experimental
// average of T_W, and a Chernoff-Hoeffding upper bound on E[t_W].
//
// With probability at least 1 - epsilon the true probability lies below
//     p' = p_hat + sqrt(ln(1/epsilon) / (2 n)).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "amc/choice.hpp"
#include "amc/interp.hpp"
#include "amc/lang.hpp"

namespace amc {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// sqrt(ln(1/epsilon) / (2n)); requires n >= 1 and 0 < epsilon <= 1.
double chernoff_margin(std::uint64_t n, double epsilon);

/// min(1, p_hat + chernoff_margin(n, epsilon)).
double upper_bound(double p_hat, std::uint64_t n, double epsilon);

/// Smallest n with chernoff_margin(n, epsilon) <= t, at least 1.
std::uint64_t plan_trials(double t, double epsilon);

/// Probability bound exp(-2 n t^2) that the average undershoots the
/// expectation by t or more.
double exceed_probability(std::uint64_t n, double t);

struct SiteRestriction {
    /// 1-based position of the generator among all generator occurrences.
    std::size_t ordinal;
    Interval range;
};

/// Sub-ranges of straight-line generator sites R, under the user's
/// assertion that every random input reaching the outcome lies in R.
struct RestrictionSpec {
    std::vector<SiteRestriction> sites;
    bool assert_containment = false;
};

/// Pr(R) and the per-site map used for sampling. Throws DomainError for
/// unknown ordinals, sites inside loops, ranges outside the support, or a
/// missing containment assertion.
struct ResolvedRestriction {
    SiteRestrictions by_site;
    double probability = 1.0;
};
ResolvedRestriction resolve(const RestrictionSpec& spec, const Program& program);

/// Reads {"assert_containment": bool, "sites": [{"generator": k, "lo": a, "hi": b}, ...]}.
RestrictionSpec parse_restriction_json(const std::string& text);

struct RunOptions {
    std::uint64_t trials = 10000;
    double epsilon = 0.01;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    AnalysisConfig config;
};

struct Report {
    std::string program;
    std::uint64_t n = 0;
    std::uint64_t hits = 0;
    double p_hat = 0.0;
    double epsilon = 0.0;
    double margin = 0.0;
    double p_prime = 0.0;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    double elapsed_ms = 0.0;
    AnalysisConfig config;
    std::vector<std::string> warnings;

    /// Trials aborted by the step budget (counted as hits).
    std::uint64_t aborted_trials = 0;
    /// Loop executions analyzed by widening, summed over trials.
    std::uint64_t fixpoint_loops = 0;
    /// Set for restricted runs: Pr(R).
    std::optional<double> restriction_probability;
};

/// Everything except elapsed_ms.
bool same_result(const Report& a, const Report& b);

/// Trial i uses seed derive_seed(options.seed, i); the report does not
/// depend on options.jobs.
Report run(const Program& program, const RunOptions& options);

/// Samples the restricted sites conditionally on R and rescales:
/// p_hat = Pr(R) * hits/n, p' = min(1, Pr(R) * (hits/n + margin)). Sound only
/// under the containment assertion.
Report run_restricted(const Program& program, const RestrictionSpec& spec, const RunOptions& options);

/// Report JSON with the stable field names documented in the README.
std::string to_json(const Report& report);
std::string to_text(const Report& report);

}  // namespace amc
