#include "amc/estimator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "amc/parallel.hpp"

namespace amc {

namespace {

void check_epsilon(double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw DomainError("epsilon must lie in (0, 1], got " + format_double(epsilon));
}

}  // namespace

double chernoff_margin(std::uint64_t n, double epsilon)
{
    if (n == 0)
        throw DomainError("the trial count must be at least 1");
    check_epsilon(epsilon);
    return std::sqrt(std::log(1.0 / epsilon) / (2.0 * static_cast<double>(n)));
}

double upper_bound(double p_hat, std::uint64_t n, double epsilon)
{
    if (!(p_hat >= 0.0 && p_hat <= 1.0))
        throw DomainError("p_hat must lie in [0, 1], got " + format_double(p_hat));
    return std::min(1.0, p_hat + chernoff_margin(n, epsilon));
}

std::uint64_t plan_trials(double t, double epsilon)
{
    if (!(t > 0.0 && t <= 1.0))
        throw DomainError("the margin t must lie in (0, 1], got " + format_double(t));
    check_epsilon(epsilon);
    double exact = std::log(1.0 / epsilon) / (2.0 * t * t);
    auto n = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(exact)));
    // guard against the ceiling landing one short after rounding
    while (chernoff_margin(n, epsilon) > t)
        ++n;
    return n;
}

double exceed_probability(std::uint64_t n, double t)
{
    return std::exp(-2.0 * static_cast<double>(n) * t * t);
}

ResolvedRestriction resolve(const RestrictionSpec& spec, const Program& program)
{
    if (!spec.assert_containment)
        throw DomainError("a restriction requires \"assert_containment\": true, the user's assertion that "
                          "every random input reaching the outcome lies in the restricted set");
    ResolvedRestriction out;
    for (const auto& r : spec.sites) {
        const GeneratorSite* g = program.generator_by_ordinal(r.ordinal);
        if (!g)
            throw DomainError("restriction names generator #" + std::to_string(r.ordinal) + " but the program has "
                              + std::to_string(program.generators.size()) + " generator occurrences");
        if (g->loop_depth > 0)
            throw DomainError("generator #" + std::to_string(r.ordinal)
                              + " is inside a loop; only straight-line sites can be restricted");
        if (out.by_site.count(g->site))
            throw DomainError("generator #" + std::to_string(r.ordinal) + " restricted twice");
        Interval range = r.range;
        if (range.kind() != generator_kind(g->gen))
            range = Interval::range(generator_kind(g->gen), range.lower(), range.upper());
        Interval support = Interval::generator_range(g->gen);
        if (range.is_bottom() || !range.leq(support))
            throw DomainError("restriction " + to_string(r.range) + " of generator #" + std::to_string(r.ordinal)
                              + " is not a non-empty sub-range of " + to_string(support));
        double mass = restriction_mass(g->gen, range);
        if (!(mass > 0.0))
            throw DomainError("restriction of generator #" + std::to_string(r.ordinal) + " has probability 0");
        out.by_site.emplace(g->site, range);
        out.probability *= mass;
    }
    return out;
}

RestrictionSpec parse_restriction_json(const std::string& text)
{
    RestrictionSpec spec;
    try {
        auto j = nlohmann::json::parse(text);
        spec.assert_containment = j.value("assert_containment", false);
        for (const auto& s : j.at("sites")) {
            auto ordinal = s.at("generator").get<std::size_t>();
            double lo = s.at("lo").get<double>();
            double hi = s.at("hi").get<double>();
            spec.sites.push_back({ordinal, Interval::range(Kind::real, lo, hi)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed restriction file: ") + e.what());
    }
    return spec;
}

bool same_result(const Report& a, const Report& b)
{
    return a.program == b.program && a.n == b.n && a.hits == b.hits && a.p_hat == b.p_hat
           && a.epsilon == b.epsilon && a.margin == b.margin && a.p_prime == b.p_prime && a.seed == b.seed
           && a.warnings == b.warnings && a.aborted_trials == b.aborted_trials
           && a.fixpoint_loops == b.fixpoint_loops && a.restriction_probability == b.restriction_probability
           && a.config.unroll_limit == b.config.unroll_limit && a.config.widening_delay == b.config.widening_delay
           && a.config.narrowing_passes == b.config.narrowing_passes
           && a.config.step_budget == b.config.step_budget
           && a.config.widening_thresholds == b.config.widening_thresholds;
}

namespace {

Report run_trials(const Program& program, const RunOptions& options, const SiteRestrictions* restrictions)
{
    if (options.trials == 0)
        throw DomainError("the trial count must be at least 1");
    check_epsilon(options.epsilon);

    auto start = std::chrono::steady_clock::now();
    std::atomic<std::uint64_t> hits{0};
    std::atomic<std::uint64_t> aborted{0};
    std::atomic<std::uint64_t> fixpoints{0};
    parallel_for(options.trials, options.jobs, [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t h = 0, a = 0, f = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            auto outcome = analyze_trial(program, derive_seed(options.seed, i), options.config, restrictions);
            h += outcome.hit;
            a += outcome.aborted;
            f += outcome.fixpoint_loops;
        }
        hits += h;
        aborted += a;
        fixpoints += f;
    });
    auto stop = std::chrono::steady_clock::now();

    Report r;
    r.n = options.trials;
    r.hits = hits.load();
    r.p_hat = static_cast<double>(r.hits) / static_cast<double>(r.n);
    r.epsilon = options.epsilon;
    r.margin = chernoff_margin(r.n, r.epsilon);
    r.p_prime = std::min(1.0, r.p_hat + r.margin);
    r.seed = options.seed;
    r.jobs = std::max(1u, options.jobs);
    r.elapsed_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    r.config = options.config;
    r.aborted_trials = aborted.load();
    r.fixpoint_loops = fixpoints.load();
    if (r.aborted_trials > 0)
        r.warnings.push_back(std::to_string(r.aborted_trials)
                             + " trial(s) exceeded the step budget and were counted as hits");
    return r;
}

}  // namespace

Report run(const Program& program, const RunOptions& options)
{
    return run_trials(program, options, nullptr);
}

Report run_restricted(const Program& program, const RestrictionSpec& spec, const RunOptions& options)
{
    ResolvedRestriction resolved = resolve(spec, program);
    Report r = run_trials(program, options, &resolved.by_site);
    double conditional = r.p_hat;
    r.p_hat = resolved.probability * conditional;
    r.margin = resolved.probability * chernoff_margin(r.n, r.epsilon);
    r.p_prime = std::min(1.0, r.p_hat + r.margin);
    r.restriction_probability = resolved.probability;
    r.warnings.push_back("conditionally sound: assumes every random input reaching the outcome lies in the "
                         "restricted set");
    return r;
}

std::string to_json(const Report& r)
{
    nlohmann::ordered_json config = {
        {"unroll", r.config.unroll_limit},
        {"widening_delay", r.config.widening_delay},
        {"narrowing_passes", r.config.narrowing_passes},
        {"step_budget", r.config.step_budget},
        {"widening_thresholds", r.config.widening_thresholds},
    };
    nlohmann::ordered_json j = {
        {"program", r.program},
        {"n", r.n},
        {"hits", r.hits},
        {"p_hat", r.p_hat},
        {"epsilon", r.epsilon},
        {"margin", r.margin},
        {"p_prime", r.p_prime},
        {"seed", r.seed},
        {"jobs", r.jobs},
        {"elapsed_ms", r.elapsed_ms},
        {"config", config},
        {"warnings", r.warnings},
        {"diagnostics", {{"aborted_trials", r.aborted_trials}, {"fixpoint_loops", r.fixpoint_loops}}},
    };
    if (r.restriction_probability)
        j["restriction"] = {{"probability", *r.restriction_probability}, {"conditionally_sound", true}};
    return j.dump(2);
}

std::string to_text(const Report& r)
{
    std::ostringstream os;
    os << "program:        " << r.program << "\n"
       << "trials:         " << r.n << "\n"
       << "hits:           " << r.hits << "\n"
       << "p_hat:          " << format_double(r.p_hat) << "\n"
       << "epsilon:        " << format_double(r.epsilon) << "\n"
       << "margin:         " << format_double(r.margin) << "\n"
       << "p_prime:        " << format_double(r.p_prime) << "\n"
       << "seed:           " << r.seed << "\n"
       << "jobs:           " << r.jobs << "\n"
       << "elapsed_ms:     " << format_double(std::round(r.elapsed_ms * 1000) / 1000) << "\n"
       << "fixpoint_loops: " << r.fixpoint_loops << "\n";
    if (r.restriction_probability)
        os << "restriction:    Pr(R) = " << format_double(*r.restriction_probability) << "\n";
    for (const auto& w : r.warnings)
        os << "warning: " << w << "\n";
    os << "With probability at least " << format_double(1 - r.epsilon) << ", Pr(outcome) <= "
       << format_double(r.p_prime) << "\n";
    return os.str();
}

}  // namespace amc
