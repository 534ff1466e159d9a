#pragma once

// One randomized abstract-interpretation trial.
//
// Outside fixpoint computations every generator call is replaced by a value
// drawn from its distribution and recorded in the trial's choice table under
// <site, iteration word>. Inside fixpoint computations generators denote
// their whole range and nothing is recorded. Loops are unrolled while their
// guard is definitely true (at most `unroll_limit` times); otherwise their
// least fixpoint is computed with widening then narrowing.
//
// The trial reports T_W = 1 unless the final abstract state provably misses
// the outcome, so T_W bounds from above the indicator "some nondeterministic
// input leads to the outcome" for every completion of the unrecorded draws.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "amc/abstract_env.hpp"
#include "amc/choice.hpp"
#include "amc/lang.hpp"

namespace amc {

struct AnalysisConfig {
    std::size_t unroll_limit = 64;
    /// Plain joins before widening kicks in.
    std::size_t widening_delay = 2;
    std::size_t narrowing_passes = 2;
    /// Abstract operations allowed per trial.
    std::uint64_t step_budget = 1'000'000;
    /// Sorted widening thresholds; empty widens straight to infinity.
    std::vector<double> widening_thresholds;
};

class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where randomized generator values come from.
class DrawSource {
public:
    virtual ~DrawSource() = default;
    virtual double draw(Generator gen, SiteId site) = 0;
};

/// Draws from a seeded stream, optionally conditioned per site.
class StreamDrawSource final : public DrawSource {
public:
    explicit StreamDrawSource(std::uint64_t seed, const SiteRestrictions* restrictions = nullptr)
        : stream_(seed), restrictions_(restrictions)
    {
    }
    double draw(Generator gen, SiteId site) override;

private:
    RandomStream stream_;
    const SiteRestrictions* restrictions_;
};

/// Evaluation state of one trial. Not shareable between threads.
class TrialContext {
public:
    TrialContext(const Program& program, const AnalysisConfig& config, DrawSource& draws,
                 std::ostream* trace = nullptr);

    bool randomize() const { return randomize_; }
    void set_randomize(bool on) { randomize_ = on; }
    const IterationWord& word() const { return word_; }
    void push_iteration(std::uint32_t counter = 0) { word_.push_back(counter); }
    void set_iteration(std::uint32_t counter) { word_.back() = counter; }
    void pop_iteration() { word_.pop_back(); }

    const ChoiceTable& choices() const { return choices_; }
    ChoiceTable take_choices() { return std::move(choices_); }
    std::size_t fixpoint_loops() const { return fixpoint_loops_; }
    std::uint64_t steps() const { return steps_; }

    /// Singleton of a fresh recorded draw when randomizing, else the full
    /// generator range.
    Interval eval_generator(const GeneratorCall& call);

    AbstractEnv eval_stmt(const Stmt& stmt, const AbstractEnv& env);
    AbstractEnv eval_block(const Block& block, AbstractEnv env);
    AbstractEnv eval_loop(const While& loop, const AbstractEnv& env);

    /// True unless `env` provably misses `cond`.
    bool may_satisfy(const AbstractEnv& env, const BoolExpr& cond);

private:
    void step();

    const Program& program_;
    const AnalysisConfig& config_;
    DrawSource& draws_;
    std::ostream* trace_;

    bool randomize_ = true;
    IterationWord word_;
    ChoiceTable choices_;
    std::size_t fixpoint_loops_ = 0;
    std::uint64_t steps_ = 0;
};

struct TrialOutcome {
    /// T_W.
    bool hit = true;
    AbstractEnv final_env = AbstractEnv::bottom();
    ChoiceTable choices;
    /// Loop executions that fell back to a widening fixpoint.
    std::size_t fixpoint_loops = 0;
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;
    /// Budget exhausted; hit is forced to true.
    bool aborted = false;
    std::string diagnostic;
};

TrialOutcome analyze_trial(const Program& program, std::uint64_t seed, const AnalysisConfig& config,
                           const SiteRestrictions* restrictions = nullptr, std::ostream* trace = nullptr);

/// Same, with an explicit draw source; `seed` is echoed only.
TrialOutcome analyze_trial(const Program& program, DrawSource& draws, const AnalysisConfig& config,
                           std::ostream* trace = nullptr, std::uint64_t seed = 0);

}  // namespace amc
