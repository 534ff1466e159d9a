#include "amc/interp.hpp"

#include <map>
#include <ostream>

namespace amc {

double StreamDrawSource::draw(Generator gen, SiteId site)
{
    if (restrictions_) {
        auto it = restrictions_->find(site);
        if (it != restrictions_->end())
            return stream_.draw_within(gen, it->second);
    }
    return stream_.draw(gen);
}

TrialContext::TrialContext(const Program& program, const AnalysisConfig& config, DrawSource& draws,
                           std::ostream* trace)
    : program_(program), config_(config), draws_(draws), trace_(trace)
{
}

void TrialContext::step()
{
    if (++steps_ > config_.step_budget)
        throw BudgetExceeded("step budget of " + std::to_string(config_.step_budget) + " exceeded");
}

namespace {

std::string word_string(const IterationWord& word)
{
    std::string out = "(";
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(word[i]);
    }
    return out + ")";
}

// Generator values for one evaluation scope: every occurrence is asked for
// once, so a guard and its negation see the same draw.
class ScopedGenerators {
public:
    explicit ScopedGenerators(TrialContext& ctx) : ctx_(ctx) {}

    Interval operator()(const GeneratorCall& call)
    {
        auto it = memo_.find(call.site.value);
        if (it != memo_.end())
            return it->second;
        Interval v = ctx_.eval_generator(call);
        memo_.emplace(call.site.value, v);
        return v;
    }

    GeneratorValues fn()
    {
        return [this](const GeneratorCall& call) { return (*this)(call); };
    }

private:
    TrialContext& ctx_;
    std::map<std::uint32_t, Interval> memo_;
};

}  // namespace

Interval TrialContext::eval_generator(const GeneratorCall& call)
{
    if (!randomize_) {
        if (trace_)
            *trace_ << "  gen site=" << call.site.value << " " << to_string(call.gen) << " full-range\n";
        return Interval::generator_range(call.gen);
    }
    ChoiceKey key{call.site, word_};
    double value = draws_.draw(call.gen, call.site);
    choices_.record(key, value);
    if (trace_)
        *trace_ << "  gen site=" << call.site.value << " word=" << word_string(word_) << " " << to_string(call.gen)
                << " value=" << format_double(value) << "\n";
    return Interval::singleton(generator_kind(call.gen), value);
}

bool TrialContext::may_satisfy(const AbstractEnv& env, const BoolExpr& cond)
{
    ScopedGenerators gens(*this);
    return !filter(env, cond, true, gens.fn()).is_bottom();
}

AbstractEnv TrialContext::eval_block(const Block& block, AbstractEnv env)
{
    for (const auto& s : block) {
        if (env.is_bottom())
            break;
        env = eval_stmt(*s, env);
    }
    return env;
}

AbstractEnv TrialContext::eval_stmt(const Stmt& stmt, const AbstractEnv& env)
{
    step();
    if (env.is_bottom())
        return env;

    const char* label = "";
    AbstractEnv result = std::visit(
        [&](const auto& n) -> AbstractEnv {
            using T = std::decay_t<decltype(n)>;
            ScopedGenerators gens(*this);
            if constexpr (std::is_same_v<T, Assign>) {
                label = "assign";
                Interval value = eval(*n.value, env, gens.fn());
                const Interval& old = env[n.target.slot];
                AbstractEnv out = env;
                switch (n.op) {
                case AssignOp::set: out.set(n.target.slot, value); break;
                case AssignOp::add: out.set(n.target.slot, add(old, value)); break;
                case AssignOp::sub: out.set(n.target.slot, sub(old, value)); break;
                }
                return out;
            } else if constexpr (std::is_same_v<T, Know>) {
                label = "know";
                return filter(env, *n.cond, true, gens.fn());
            } else if constexpr (std::is_same_v<T, If>) {
                label = "if";
                auto g = gens.fn();
                AbstractEnv then_env = filter(env, *n.cond, true, g);
                AbstractEnv else_env = filter(env, *n.cond, false, g);
                if (!then_env.is_bottom())
                    then_env = eval_block(n.then_branch, then_env);
                if (!else_env.is_bottom())
                    else_env = eval_block(n.else_branch, else_env);
                return join(then_env, else_env);
            } else {
                label = "while";
                return eval_loop(n, env);
            }
        },
        stmt.node);

    if (trace_)
        *trace_ << "site=" << stmt.site.value << " " << label << " " << to_string(result, program_) << "\n";
    return result;
}

AbstractEnv TrialContext::eval_loop(const While& loop, const AbstractEnv& entry)
{
    if (entry.is_bottom())
        return entry;

    push_iteration();
    struct PopOnExit {
        TrialContext& ctx;
        ~PopOnExit() { ctx.pop_iteration(); }
    } pop_guard{*this};

    AbstractEnv env = entry;

    // Unroll while the guard is definitely true, drawing fresh values for
    // each iteration.
    if (randomize_) {
        for (std::uint32_t k = 1;; ++k) {
            set_iteration(k);
            ScopedGenerators gens(*this);
            auto g = gens.fn();
            Truth truth = eval_condition(env, *loop.cond, g);
            if (truth == Truth::definitely_false)
                return filter(env, *loop.cond, false, g);
            if (truth == Truth::unknown || k > config_.unroll_limit)
                break;
            step();
            env = eval_block(loop.body, filter(env, *loop.cond, true, g));
            if (env.is_bottom())
                return env;
        }
    }

    // Widening fixpoint with generators at full range.
    ++fixpoint_loops_;
    bool saved_randomize = randomize_;
    randomize_ = false;
    struct RestoreRandomize {
        TrialContext& ctx;
        bool value;
        ~RestoreRandomize() { ctx.set_randomize(value); }
    } restore{*this, saved_randomize};

    auto body_image = [&](const AbstractEnv& x) {
        return eval_block(loop.body, filter(x, *loop.cond, true));
    };

    AbstractEnv x = env;
    for (std::size_t joins = 0;; ++joins) {
        step();
        AbstractEnv next = join(x, body_image(x));
        if (next.leq(x))
            break;
        x = joins >= config_.widening_delay ? widen(x, next, config_.widening_thresholds) : next;
    }
    for (std::size_t pass = 0; pass < config_.narrowing_passes; ++pass) {
        step();
        AbstractEnv refined = narrow(x, join(env, body_image(x)));
        if (refined == x)
            break;
        x = std::move(refined);
    }
    return filter(x, *loop.cond, false);
}

TrialOutcome analyze_trial(const Program& program, DrawSource& draws, const AnalysisConfig& config,
                           std::ostream* trace, std::uint64_t seed)
{
    TrialOutcome outcome;
    outcome.seed = seed;
    TrialContext ctx(program, config, draws, trace);
    try {
        AbstractEnv env = ctx.eval_block(program.body, AbstractEnv::top(program));
        outcome.hit = !env.is_bottom() && ctx.may_satisfy(env, *program.outcome);
        outcome.final_env = std::move(env);
    } catch (const BudgetExceeded& e) {
        outcome.hit = true;
        outcome.aborted = true;
        outcome.diagnostic = e.what();
    }
    if (trace)
        *trace << "outcome T_W=" << (outcome.hit ? 1 : 0) << (outcome.aborted ? " (aborted)" : "") << "\n";
    outcome.fixpoint_loops = ctx.fixpoint_loops();
    outcome.steps = ctx.steps();
    outcome.choices = ctx.take_choices();
    return outcome;
}

TrialOutcome analyze_trial(const Program& program, std::uint64_t seed, const AnalysisConfig& config,
                           const SiteRestrictions* restrictions, std::ostream* trace)
{
    StreamDrawSource draws(seed, restrictions);
    return analyze_trial(program, draws, config, trace, seed);
}

}  // namespace amc
