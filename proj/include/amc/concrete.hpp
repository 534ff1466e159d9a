#pragma once

// Reference concrete semantics and the brute-force oracle used to check the
// analyzer.
//
// run_concrete executes a program on concrete values, taking generator
// results from a ChoiceSource keyed exactly like the abstract interpreter's
// choice table. oracle_estimate computes E[max over a grid of
// nondeterministic inputs of t_W], either exactly (coin flips only, by
// enumerating the tree of draws) or by sampling. The grid maximum is a lower
// bound on the supremum over all nondeterministic inputs, so the oracle
// under-approximates the quantity the analyzer over-approximates.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "amc/choice.hpp"
#include "amc/interval.hpp"
#include "amc/lang.hpp"

namespace amc {

using Scalar = std::variant<std::int64_t, double>;
/// One value per declared variable, of the declared kind.
using ConcreteEnv = std::vector<Scalar>;

/// Zero of the right kind for every variable.
ConcreteEnv zero_env(const Program& program);

class ChoiceSource {
public:
    virtual ~ChoiceSource() = default;
    virtual double value(const ChoiceKey& key, Generator gen) = 0;
};

/// Recorded values first, then a seeded fallback stream. Fallback draws are
/// memoized so repeated runs over the same source agree on every key.
class ReplayChoices final : public ChoiceSource {
public:
    ReplayChoices(const ChoiceTable* recorded, std::uint64_t fallback_seed,
                  const SiteRestrictions* restrictions = nullptr);
    double value(const ChoiceKey& key, Generator gen) override;
    const ChoiceTable& fallback_draws() const { return drawn_; }

private:
    const ChoiceTable* recorded_;
    RandomStream stream_;
    const SiteRestrictions* restrictions_;
    ChoiceTable drawn_;
};

/// Thrown by sources that refuse to invent a value.
class MissingChoice : public std::exception {
public:
    MissingChoice(ChoiceKey key, Generator gen) : key(std::move(key)), gen(gen) {}
    const char* what() const noexcept override { return "missing choice"; }

    ChoiceKey key;
    Generator gen;
};

/// Only the given values; anything else throws MissingChoice.
class FixedChoices final : public ChoiceSource {
public:
    explicit FixedChoices(const ChoiceTable& table) : table_(table) {}
    double value(const ChoiceKey& key, Generator gen) override;

private:
    const ChoiceTable& table_;
};

enum class RunStatus {
    completed,
    /// A `know` evaluated false; the path is vacuous.
    assumption_failed,
    /// Step budget exhausted; the final state is never reached.
    diverged,
    integer_overflow,
};

std::string_view to_string(RunStatus status);

struct ConcreteResult {
    /// t_W for this input: completed and the outcome holds.
    bool hit = false;
    RunStatus status = RunStatus::completed;
    ConcreteEnv final_env;
    std::uint64_t steps = 0;
};

ConcreteResult run_concrete(const Program& program, const ConcreteEnv& init, ChoiceSource& choices,
                            std::uint64_t step_budget = 1'000'000);

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Slots of variables that may be read before being assigned: the
/// nondeterministic inputs.
std::vector<std::size_t> nondet_variables(const Program& program);

struct NondetVar {
    std::size_t slot;
    std::string name;
    Interval range;
    std::vector<double> grid;
};

struct NondetSpec {
    std::vector<NondetVar> vars;
    std::size_t grid_points = 64;

    /// Size of the Cartesian product of the per-variable grids.
    std::size_t combinations() const;
    /// Writes the `index`-th grid combination into `env`.
    void assign(std::size_t index, ConcreteEnv& env) const;
};

/// Grid with both endpoints; every integer when the range is small enough.
std::vector<double> make_grid(const Interval& range, std::size_t points);

/// Ranges come from the top-level `know`s that precede each input's first
/// other use; strict real bounds step inward so grid endpoints satisfy them.
/// Throws OracleError for an input without a finite range.
NondetSpec extract_nondet_spec(const Program& program, std::size_t grid_points = 64);

enum class OracleMode { exact_discrete, sampled };

std::string_view to_string(OracleMode mode);

struct OracleOptions {
    OracleMode mode = OracleMode::sampled;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    std::size_t grid_points = 64;
    unsigned jobs = 1;
    /// Exact mode: maximum number of tree nodes explored.
    std::uint64_t path_budget = 1'000'000;
    std::uint64_t step_budget = 1'000'000;
};

struct OracleReport {
    OracleMode mode = OracleMode::sampled;
    double estimate = 0.0;
    /// Leaves of the draw tree (exact) or samples (sampled).
    std::uint64_t paths_or_samples = 0;
    NondetSpec grid;
    std::uint64_t seed = 0;
    /// Runs stopped by the step budget.
    std::uint64_t nonterminating_runs = 0;
};

OracleReport oracle_estimate(const Program& program, const OracleOptions& options);

/// {"mode", "estimate", "paths_or_samples", "grid", "seed"} as JSON text.
std::string to_json(const OracleReport& report);

}  // namespace amc
