#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "amc/concrete.hpp"
#include "amc/estimator.hpp"
#include "amc/interp.hpp"
#include "amc/lang.hpp"
#include "amc/parallel.hpp"

namespace amc::cli {

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_input = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

unsigned jobs_default()
{
    if (const char* env = std::getenv("AMC_JOBS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    return default_jobs();
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program load_program(const std::string& path, const std::string& query)
{
    ParseOptions options;
    if (!query.empty())
        options.query = query;
    std::string source = read_file(path);
    try {
        return parse(source, options);
    } catch (const ParseError& e) {
        std::string msg;
        for (const auto& d : e.diagnostics())
            msg += path + ":" + to_string(d) + "\n";
        if (!msg.empty())
            msg.pop_back();
        throw InputError(msg);
    }
}

std::vector<double> log_space(double lo, double hi, std::size_t points)
{
    std::vector<double> out;
    if (points == 1) {
        out.push_back(lo);
        return out;
    }
    double a = std::log(lo);
    double b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(i == 0 ? lo : i + 1 == points ? hi : std::exp(a + (b - a) * t));
    }
    return out;
}

struct AnalyzeArgs {
    std::string input;
    std::uint64_t trials = 10000;
    double epsilon = 0.01;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::size_t unroll = 64;
    std::size_t widening_delay = 2;
    std::size_t narrowing_passes = 2;
    std::uint64_t step_budget = 1'000'000;
    std::vector<double> thresholds;
    std::string format = "text";
    std::string query;
    std::string restrict_path;
    bool trace = false;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err)
{
    Program program = load_program(a.input, a.query);

    RunOptions options;
    options.trials = a.trials;
    options.epsilon = a.epsilon;
    options.seed = a.seed;
    options.jobs = a.jobs;
    options.config.unroll_limit = a.unroll;
    options.config.widening_delay = a.widening_delay;
    options.config.narrowing_passes = a.narrowing_passes;
    options.config.step_budget = a.step_budget;
    options.config.widening_thresholds = a.thresholds;
    std::sort(options.config.widening_thresholds.begin(), options.config.widening_thresholds.end());

    if (a.trace) {
        err << "trace of trial 0 (seed " << derive_seed(a.seed, 0) << "):\n";
        analyze_trial(program, derive_seed(a.seed, 0), options.config, nullptr, &err);
    }

    Report report;
    if (!a.restrict_path.empty()) {
        RestrictionSpec spec = parse_restriction_json(read_file(a.restrict_path));
        report = run_restricted(program, spec, options);
    } else {
        report = run(program, options);
    }
    report.program = a.input;
    out << (a.format == "json" ? to_json(report) + "\n" : to_text(report));
    return exit_ok;
}

struct OracleArgs {
    std::string input;
    std::string mode = "sampled";
    std::uint64_t n = 1'000'000;
    std::size_t grid = 64;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::uint64_t path_budget = 1'000'000;
    std::string query;
    std::string format = "text";
};

int cmd_oracle(const OracleArgs& a, std::ostream& out)
{
    Program program = load_program(a.input, a.query);
    OracleOptions options;
    options.mode = a.mode == "exact" ? OracleMode::exact_discrete : OracleMode::sampled;
    options.samples = a.n;
    options.grid_points = a.grid;
    options.seed = a.seed;
    options.jobs = a.jobs;
    options.path_budget = a.path_budget;
    OracleReport report = oracle_estimate(program, options);
    if (a.format == "json") {
        out << to_json(report) << "\n";
        return exit_ok;
    }
    out << "mode:             " << to_string(report.mode) << "\n"
        << "estimate:         " << format_double(report.estimate) << "\n"
        << "paths_or_samples: " << report.paths_or_samples << "\n"
        << "seed:             " << report.seed << "\n";
    for (const auto& v : report.grid.vars)
        out << "grid:             " << v.name << " in " << to_string(v.range) << ", " << v.grid.size()
            << " points\n";
    if (report.nonterminating_runs)
        out << "warning: " << report.nonterminating_runs << " run(s) hit the step budget\n";
    return exit_ok;
}

struct CurvesArgs {
    std::string figure = "speed";
    double alpha = 1.0;
    double t_min = 0.001;
    double t_max = 0.1;
    double t = 0.01;
    std::uint64_t n_min = 1;
    std::uint64_t n_max = 50000;
    std::size_t points = 50;
};

int cmd_curves(const CurvesArgs& a, std::ostream& out)
{
    if (a.points == 0)
        throw DomainError("--points must be positive");
    if (a.figure == "speed") {
        if (!(a.t_min > 0 && a.t_min <= a.t_max))
            throw DomainError("need 0 < --t-min <= --t-max");
        std::ostringstream rows;
        rows << "t,epsilon,n\n";
        for (double t : log_space(a.t_min, a.t_max, a.points)) {
            double eps = a.alpha * t;
            rows << format_double(t) << ',' << format_double(eps) << ',' << plan_trials(t, eps) << '\n';
        }
        out << rows.str();
        return exit_ok;
    }
    if (!(a.t > 0 && a.t <= 1))
        throw DomainError("--t must lie in (0, 1]");
    if (!(a.n_min >= 1 && a.n_min <= a.n_max))
        throw DomainError("need 1 <= --n-min <= --n-max");
    out << "n,bound\n";
    std::uint64_t last = 0;
    for (double x : log_space(static_cast<double>(a.n_min), static_cast<double>(a.n_max), a.points)) {
        auto n = static_cast<std::uint64_t>(std::llround(x));
        if (n == last)
            continue;
        last = n;
        out << n << ',' << format_double(exceed_probability(n, a.t)) << '\n';
    }
    return exit_ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Probabilistic abstract Monte-Carlo analyzer"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    analyze.jobs = jobs_default();
    auto* analyze_cmd = app.add_subcommand("analyze", "bound the probability of a program's outcome");
    analyze_cmd->add_option("input", analyze.input, "program source")->required();
    analyze_cmd->add_option("--trials,-n", analyze.trials, "number of randomized trials")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--epsilon", analyze.epsilon, "failure probability of the bound")->capture_default_str();
    analyze_cmd->add_option("--seed", analyze.seed, "master seed")->capture_default_str();
    analyze_cmd->add_option("--jobs,-j", analyze.jobs, "worker threads (default: $AMC_JOBS or all cores)")
        ->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--unroll", analyze.unroll, "max loop unrollings with random draws")
        ->capture_default_str();
    analyze_cmd->add_option("--widening-delay", analyze.widening_delay, "joins before widening")
        ->capture_default_str();
    analyze_cmd->add_option("--narrowing-passes", analyze.narrowing_passes, "descending iterations")
        ->capture_default_str();
    analyze_cmd->add_option("--step-budget", analyze.step_budget, "abstract steps per trial")
        ->capture_default_str();
    analyze_cmd->add_option("--thresholds", analyze.thresholds, "widening thresholds");
    analyze_cmd->add_option("--format", analyze.format, "text or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"text", "json"}));
    analyze_cmd->add_option("--query", analyze.query, "outcome condition replacing the trailing know");
    analyze_cmd->add_option("--restrict", analyze.restrict_path, "restriction spec (JSON)");
    analyze_cmd->add_flag("--trace", analyze.trace, "trace the first trial on stderr");

    OracleArgs oracle;
    oracle.jobs = jobs_default();
    auto* oracle_cmd = app.add_subcommand("oracle", "concrete reference estimate");
    oracle_cmd->add_option("input", oracle.input, "program source")->required();
    oracle_cmd->add_option("--mode", oracle.mode, "exact or sampled")
        ->capture_default_str()
        ->check(CLI::IsMember({"exact", "sampled"}));
    oracle_cmd->add_option("--n", oracle.n, "samples (sampled mode)")->capture_default_str()->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--grid", oracle.grid, "grid points per nondeterministic input")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--seed", oracle.seed, "seed")->capture_default_str();
    oracle_cmd->add_option("--jobs,-j", oracle.jobs, "worker threads")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--path-budget", oracle.path_budget, "exact mode node budget")->capture_default_str();
    oracle_cmd->add_option("--query", oracle.query, "outcome condition replacing the trailing know");
    oracle_cmd->add_option("--format", oracle.format, "text or json")
        ->capture_default_str()
        ->check(CLI::IsMember({"text", "json"}));

    double plan_t = 0.0;
    double plan_epsilon = 0.01;
    auto* plan_cmd = app.add_subcommand("plan", "trials needed for margin t at failure probability epsilon");
    plan_cmd->add_option("--t", plan_t, "margin")->required();
    plan_cmd->add_option("--epsilon", plan_epsilon, "failure probability")->capture_default_str();

    CurvesArgs curves;
    auto* curves_cmd = app.add_subcommand("curves", "CSV tables of trial counts and failure bounds");
    curves_cmd->add_option("--figure", curves.figure, "speed: n against t with epsilon = alpha*t; "
                                                      "exceed: exp(-2 n t^2) against n")
        ->capture_default_str()
        ->check(CLI::IsMember({"speed", "exceed"}));
    curves_cmd->add_option("--alpha", curves.alpha, "epsilon / t ratio")->capture_default_str();
    curves_cmd->add_option("--t-min", curves.t_min)->capture_default_str();
    curves_cmd->add_option("--t-max", curves.t_max)->capture_default_str();
    curves_cmd->add_option("--t", curves.t, "margin for the exceed table")->capture_default_str();
    curves_cmd->add_option("--n-min", curves.n_min)->capture_default_str();
    curves_cmd->add_option("--n-max", curves.n_max)->capture_default_str();
    curves_cmd->add_option("--points", curves.points)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (*analyze_cmd)
            return cmd_analyze(analyze, out, err);
        if (*oracle_cmd)
            return cmd_oracle(oracle, out);
        if (*plan_cmd) {
            out << plan_trials(plan_t, plan_epsilon) << "\n";
            return exit_ok;
        }
        if (*curves_cmd)
            return cmd_curves(curves, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return exit_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace amc::cli
