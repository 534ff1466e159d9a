#pragma once

// Abstract environments over intervals, expression evaluation and guard
// filtering.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amc/interval.hpp"
#include "amc/lang.hpp"

namespace amc {

/// Bottom (unreachable) or one interval per declared variable. Any variable
/// becoming bottom makes the whole environment bottom.
class AbstractEnv {
public:
    static AbstractEnv bottom() { return AbstractEnv(); }
    /// Every declared variable unconstrained.
    static AbstractEnv top(const Program& program);
    explicit AbstractEnv(std::vector<Interval> values);

    bool is_bottom() const { return bottom_; }
    std::size_t size() const { return values_.size(); }

    /// Throws std::out_of_range for unknown slots and std::logic_error on
    /// bottom.
    const Interval& operator[](std::size_t slot) const;
    void set(std::size_t slot, const Interval& value);

    bool leq(const AbstractEnv& other) const;
    friend bool operator==(const AbstractEnv& a, const AbstractEnv& b);

private:
    AbstractEnv() = default;

    bool bottom_ = true;
    std::vector<Interval> values_;
};

AbstractEnv join(const AbstractEnv& a, const AbstractEnv& b);
AbstractEnv widen(const AbstractEnv& a, const AbstractEnv& b, std::span<const double> thresholds = {});
AbstractEnv narrow(const AbstractEnv& a, const AbstractEnv& b);

/// Supplies the interval for a generator occurrence.
using GeneratorValues = std::function<Interval(const GeneratorCall&)>;

/// The generator's whole range; what a generator denotes inside a fixpoint.
Interval full_range(const GeneratorCall& call);

Interval eval(const Expr& expr, const AbstractEnv& env, const GeneratorValues& gens = full_range);

enum class StrictMode {
    /// Strict real comparisons keep the closed bound.
    closed,
    /// Strict real comparisons step one ulp inward. Sound for
    /// double-valued executions only; used to pick concrete sample points.
    float_open,
};

/// Sound refinement of `env` by `cond` (or its negation when `polarity` is
/// false). Atoms `var op e` and `e op var` refine `var`; any atom that
/// cannot hold yields bottom; everything else is left unrefined.
AbstractEnv filter(const AbstractEnv& env, const BoolExpr& cond, bool polarity,
                   const GeneratorValues& gens = full_range, StrictMode mode = StrictMode::closed);

enum class Truth { definitely_false, definitely_true, unknown };

/// Three-valued truth of `cond` over every state of `env`. A bottom
/// environment reports definitely_false.
Truth eval_condition(const AbstractEnv& env, const BoolExpr& cond, const GeneratorValues& gens = full_range);

/// "{x: [0, 2], i: [0, 0]}" or "bottom".
std::string to_string(const AbstractEnv& env, const Program& program);

}  // namespace amc
