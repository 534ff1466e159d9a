#include "amc/concrete.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include <json.hpp>

#include "amc/abstract_env.hpp"
#include "amc/parallel.hpp"

namespace amc {

ConcreteEnv zero_env(const Program& program)
{
    ConcreteEnv env;
    env.reserve(program.declarations.size());
    for (const auto& d : program.declarations) {
        if (d.kind == Kind::integer)
            env.emplace_back(std::int64_t{0});
        else
            env.emplace_back(0.0);
    }
    return env;
}

ReplayChoices::ReplayChoices(const ChoiceTable* recorded, std::uint64_t fallback_seed,
                             const SiteRestrictions* restrictions)
    : recorded_(recorded), stream_(fallback_seed), restrictions_(restrictions)
{
}

double ReplayChoices::value(const ChoiceKey& key, Generator gen)
{
    if (recorded_) {
        if (auto v = recorded_->find(key))
            return *v;
    }
    if (auto v = drawn_.find(key))
        return *v;
    double v;
    auto it = restrictions_ ? restrictions_->find(key.site) : SiteRestrictions::const_iterator{};
    if (restrictions_ && it != restrictions_->end())
        v = stream_.draw_within(gen, it->second);
    else
        v = stream_.draw(gen);
    drawn_.record(key, v);
    return v;
}

double FixedChoices::value(const ChoiceKey& key, Generator gen)
{
    if (auto v = table_.find(key))
        return *v;
    throw MissingChoice(key, gen);
}

std::string_view to_string(RunStatus status)
{
    switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::assumption_failed: return "assumption_failed";
    case RunStatus::diverged: return "diverged";
    case RunStatus::integer_overflow: return "integer_overflow";
    }
    return "?";
}

namespace {

struct AssumptionFailed {};
struct Diverged {};
struct Overflow {};

class ConcreteMachine {
public:
    ConcreteMachine(const Program& program, ChoiceSource& choices, std::uint64_t budget)
        : program_(program), choices_(choices), budget_(budget)
    {
    }

    std::uint64_t steps() const { return steps_; }

    void exec_block(const Block& block, ConcreteEnv& env)
    {
        for (const auto& s : block)
            exec(*s, env);
    }

    bool test(const BoolExpr& b, const ConcreteEnv& env)
    {
        if (auto* c = std::get_if<Comparison>(&b.node)) {
            Scalar l = eval(*c->lhs, env);
            Scalar r = eval(*c->rhs, env);
            return std::visit(
                [&](auto x, auto y) -> bool {
                    if constexpr (!std::is_same_v<decltype(x), decltype(y)>) {
                        throw std::logic_error("kind mismatch in comparison");
                    } else {
                        switch (c->op) {
                        case RelOp::lt: return x < y;
                        case RelOp::le: return x <= y;
                        case RelOp::gt: return x > y;
                        case RelOp::ge: return x >= y;
                        case RelOp::eq: return x == y;
                        case RelOp::ne: return x != y;
                        }
                        return false;
                    }
                },
                l, r);
        }
        const auto& lg = std::get<Logical>(b.node);
        if (lg.op == LogicOp::conj)
            return test(*lg.lhs, env) && test(*lg.rhs, env);
        return test(*lg.lhs, env) || test(*lg.rhs, env);
    }

private:
    void step()
    {
        if (++steps_ > budget_)
            throw Diverged{};
    }

    static std::int64_t checked_add(std::int64_t a, std::int64_t b)
    {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r))
            throw Overflow{};
        return r;
    }
    static std::int64_t checked_sub(std::int64_t a, std::int64_t b)
    {
        std::int64_t r;
        if (__builtin_sub_overflow(a, b, &r))
            throw Overflow{};
        return r;
    }
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b)
    {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r))
            throw Overflow{};
        return r;
    }

    static Scalar arith(ArithOp op, const Scalar& l, const Scalar& r)
    {
        if (auto* li = std::get_if<std::int64_t>(&l))
            return op == ArithOp::add ? checked_add(*li, std::get<std::int64_t>(r))
                                      : checked_sub(*li, std::get<std::int64_t>(r));
        double a = std::get<double>(l);
        double b = std::get<double>(r);
        return op == ArithOp::add ? a + b : a - b;
    }

    Scalar eval(const Expr& e, const ConcreteEnv& env)
    {
        return std::visit(
            [&](const auto& n) -> Scalar {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, IntLiteral>) {
                    return n.value;
                } else if constexpr (std::is_same_v<T, RealLiteral>) {
                    return n.value;
                } else if constexpr (std::is_same_v<T, VarRef>) {
                    return env[n.slot];
                } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                    return arith(n.op, eval(*n.lhs, env), eval(*n.rhs, env));
                } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                    Scalar v = eval(*n.operand, env);
                    if (auto* i = std::get_if<std::int64_t>(&v))
                        return checked_mul(static_cast<std::int64_t>(n.factor), *i);
                    return n.factor * std::get<double>(v);
                } else {
                    double v = choices_.value(ChoiceKey{n.site, word_}, n.gen);
                    if (n.gen == Generator::coin_flip)
                        return static_cast<std::int64_t>(v);
                    return v;
                }
            },
            e.node);
    }

    void exec(const Stmt& s, ConcreteEnv& env)
    {
        step();
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    Scalar v = eval(*n.value, env);
                    Scalar& target = env[n.target.slot];
                    switch (n.op) {
                    case AssignOp::set: target = v; break;
                    case AssignOp::add: target = arith(ArithOp::add, target, v); break;
                    case AssignOp::sub: target = arith(ArithOp::sub, target, v); break;
                    }
                } else if constexpr (std::is_same_v<T, Know>) {
                    if (!test(*n.cond, env))
                        throw AssumptionFailed{};
                } else if constexpr (std::is_same_v<T, If>) {
                    if (test(*n.cond, env))
                        exec_block(n.then_branch, env);
                    else
                        exec_block(n.else_branch, env);
                } else {
                    word_.push_back(0);
                    for (std::uint32_t k = 1;; ++k) {
                        word_.back() = k;
                        if (!test(*n.cond, env))
                            break;
                        step();
                        exec_block(n.body, env);
                    }
                    word_.pop_back();
                }
            },
            s.node);
    }

    const Program& program_;
    ChoiceSource& choices_;
    std::uint64_t budget_;
    std::uint64_t steps_ = 0;
    IterationWord word_;
};

}  // namespace

ConcreteResult run_concrete(const Program& program, const ConcreteEnv& init, ChoiceSource& choices,
                            std::uint64_t step_budget)
{
    ConcreteResult result;
    result.final_env = init;
    ConcreteMachine machine(program, choices, step_budget);
    try {
        machine.exec_block(program.body, result.final_env);
        result.hit = machine.test(*program.outcome, result.final_env);
    } catch (const AssumptionFailed&) {
        result.status = RunStatus::assumption_failed;
    } catch (const Diverged&) {
        result.status = RunStatus::diverged;
    } catch (const Overflow&) {
        result.status = RunStatus::integer_overflow;
    }
    if (result.status != RunStatus::completed)
        result.hit = false;
    result.steps = machine.steps();
    return result;
}

//---------------------------------------------------------------------------//
// Nondeterministic inputs
//---------------------------------------------------------------------------//

namespace {

using SlotSet = std::set<std::size_t>;

void reads_of(const Expr& e, SlotSet& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarRef>) {
                out.insert(n.slot);
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                reads_of(*n.lhs, out);
                reads_of(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                reads_of(*n.operand, out);
            }
        },
        e.node);
}

void reads_of(const BoolExpr& b, SlotSet& out)
{
    if (auto* c = std::get_if<Comparison>(&b.node)) {
        reads_of(*c->lhs, out);
        reads_of(*c->rhs, out);
    } else {
        const auto& lg = std::get<Logical>(b.node);
        reads_of(*lg.lhs, out);
        reads_of(*lg.rhs, out);
    }
}

void reads_of(const Block& block, SlotSet& out);

void reads_of(const Stmt& s, SlotSet& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Assign>) {
                reads_of(*n.value, out);
                if (n.op != AssignOp::set)
                    out.insert(n.target.slot);
            } else if constexpr (std::is_same_v<T, Know>) {
                reads_of(*n.cond, out);
            } else if constexpr (std::is_same_v<T, If>) {
                reads_of(*n.cond, out);
                reads_of(n.then_branch, out);
                reads_of(n.else_branch, out);
            } else {
                reads_of(*n.cond, out);
                reads_of(n.body, out);
            }
        },
        s.node);
}

void reads_of(const Block& block, SlotSet& out)
{
    for (const auto& s : block)
        reads_of(*s, out);
}

void writes_of(const Block& block, SlotSet& out)
{
    for (const auto& s : block) {
        if (auto* a = std::get_if<Assign>(&s->node)) {
            out.insert(a->target.slot);
        } else if (auto* i = std::get_if<If>(&s->node)) {
            writes_of(i->then_branch, out);
            writes_of(i->else_branch, out);
        } else if (auto* w = std::get_if<While>(&s->node)) {
            writes_of(w->body, out);
        }
    }
}

// Definite-assignment walk; records reads of possibly unassigned slots.
void scan_block(const Block& block, SlotSet& assigned, SlotSet& uninit_reads);

void note_reads(const SlotSet& reads, const SlotSet& assigned, SlotSet& uninit_reads)
{
    for (auto slot : reads)
        if (!assigned.count(slot))
            uninit_reads.insert(slot);
}

void scan_stmt(const Stmt& s, SlotSet& assigned, SlotSet& uninit_reads)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            SlotSet reads;
            if constexpr (std::is_same_v<T, Assign>) {
                reads_of(*n.value, reads);
                if (n.op != AssignOp::set)
                    reads.insert(n.target.slot);
                note_reads(reads, assigned, uninit_reads);
                assigned.insert(n.target.slot);
            } else if constexpr (std::is_same_v<T, Know>) {
                reads_of(*n.cond, reads);
                note_reads(reads, assigned, uninit_reads);
            } else if constexpr (std::is_same_v<T, If>) {
                reads_of(*n.cond, reads);
                note_reads(reads, assigned, uninit_reads);
                SlotSet then_assigned = assigned;
                SlotSet else_assigned = assigned;
                scan_block(n.then_branch, then_assigned, uninit_reads);
                scan_block(n.else_branch, else_assigned, uninit_reads);
                SlotSet both;
                std::set_intersection(then_assigned.begin(), then_assigned.end(), else_assigned.begin(),
                                      else_assigned.end(), std::inserter(both, both.end()));
                assigned = std::move(both);
            } else {
                reads_of(*n.cond, reads);
                note_reads(reads, assigned, uninit_reads);
                SlotSet body_assigned = assigned;
                scan_block(n.body, body_assigned, uninit_reads);
            }
        },
        s.node);
}

void scan_block(const Block& block, SlotSet& assigned, SlotSet& uninit_reads)
{
    for (const auto& s : block)
        scan_stmt(*s, assigned, uninit_reads);
}

}  // namespace

std::vector<std::size_t> nondet_variables(const Program& program)
{
    SlotSet assigned;
    SlotSet uninit;
    scan_block(program.body, assigned, uninit);
    if (program.outcome) {
        SlotSet reads;
        reads_of(*program.outcome, reads);
        note_reads(reads, assigned, uninit);
    }
    return {uninit.begin(), uninit.end()};
}

std::size_t NondetSpec::combinations() const
{
    std::size_t n = 1;
    for (const auto& v : vars)
        n *= v.grid.size();
    return n;
}

void NondetSpec::assign(std::size_t index, ConcreteEnv& env) const
{
    for (const auto& v : vars) {
        std::size_t k = index % v.grid.size();
        index /= v.grid.size();
        if (std::holds_alternative<std::int64_t>(env[v.slot]))
            env[v.slot] = static_cast<std::int64_t>(v.grid[k]);
        else
            env[v.slot] = v.grid[k];
    }
}

std::vector<double> make_grid(const Interval& range, std::size_t points)
{
    if (range.is_bottom() || points == 0)
        return {};
    double lo = range.lower();
    double hi = range.upper();
    if (lo == hi || points == 1)
        return {lo};
    std::vector<double> grid;
    if (range.kind() == Kind::integer && hi - lo + 1 <= static_cast<double>(points)) {
        for (double v = lo; v <= hi; v += 1)
            grid.push_back(v);
        return grid;
    }
    for (std::size_t i = 0; i < points; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(points - 1);
        double v = i + 1 == points ? hi : lo + (hi - lo) * t;
        if (range.kind() == Kind::integer)
            v = std::round(v);
        if (grid.empty() || grid.back() != v)
            grid.push_back(v);
    }
    return grid;
}

NondetSpec extract_nondet_spec(const Program& program, std::size_t grid_points)
{
    NondetSpec spec;
    spec.grid_points = grid_points;
    for (std::size_t slot : nondet_variables(program)) {
        // Other variables written before a know lose what earlier knows said
        // about them. Unsatisfiable assumptions prune every input, so the
        // last satisfiable range serves as well as any.
        AbstractEnv env = AbstractEnv::top(program);
        for (const auto& s : program.body) {
            if (auto* know = std::get_if<Know>(&s->node)) {
                AbstractEnv next = filter(env, *know->cond, true, full_range, StrictMode::float_open);
                if (next.is_bottom())
                    break;
                env = std::move(next);
                continue;
            }
            SlotSet touched;
            reads_of(*s, touched);
            SlotSet written;
            writes_of(Block{s}, written);
            if (touched.count(slot) || written.count(slot))
                break;
            for (auto w : written)
                env.set(w, Interval::top(program.declarations[w].kind));
        }
        const auto& decl = program.declarations[slot];
        Interval range = env[slot];
        if (range.lower() == -infinity || range.upper() == infinity)
            throw OracleError("nondeterministic input '" + decl.name
                              + "' needs a finite range from a know(...) before its first use; found "
                              + to_string(range));
        spec.vars.push_back({slot, decl.name, range, make_grid(range, grid_points)});
    }
    return spec;
}

//---------------------------------------------------------------------------//
// Oracle
//---------------------------------------------------------------------------//

std::string_view to_string(OracleMode mode)
{
    return mode == OracleMode::exact_discrete ? "exact" : "sampled";
}

namespace {

struct GridOutcome {
    bool hit = false;
    std::uint64_t nonterminating = 0;
};

// max over the grid of t_W under one assignment of random choices
GridOutcome max_over_grid(const Program& program, const NondetSpec& spec, ChoiceSource& choices,
                          const ConcreteEnv& base, std::uint64_t step_budget)
{
    GridOutcome out;
    ConcreteEnv env = base;
    std::size_t count = spec.combinations();
    for (std::size_t i = 0; i < count; ++i) {
        spec.assign(i, env);
        auto r = run_concrete(program, env, choices, step_budget);
        if (r.status == RunStatus::diverged)
            ++out.nonterminating;
        if (r.hit) {
            out.hit = true;
            break;
        }
    }
    return out;
}

class DrawTree {
public:
    DrawTree(const Program& program, const NondetSpec& spec, const OracleOptions& options)
        : program_(program), spec_(spec), options_(options), base_(zero_env(program))
    {
    }

    double explore(ChoiceTable& assigned, double weight)
    {
        if (++nodes_ > options_.path_budget)
            throw OracleError("exact enumeration exceeded the path budget of "
                              + std::to_string(options_.path_budget) + " nodes");
        std::optional<ChoiceKey> missing;
        ConcreteEnv env = base_;
        FixedChoices choices(assigned);
        std::size_t count = spec_.combinations();
        for (std::size_t i = 0; i < count; ++i) {
            spec_.assign(i, env);
            try {
                auto r = run_concrete(program_, env, choices, options_.step_budget);
                if (r.status == RunStatus::diverged)
                    ++nonterminating_;
                if (r.hit) {
                    ++leaves_;
                    return weight;
                }
            } catch (const MissingChoice& m) {
                if (!missing)
                    missing = m.key;
            }
        }
        if (!missing) {
            ++leaves_;
            return 0.0;
        }
        double total = 0.0;
        for (double v : {0.0, 1.0}) {
            ChoiceTable extended = assigned;
            extended.record(*missing, v);
            total += explore(extended, weight / 2);
        }
        return total;
    }

    std::uint64_t leaves() const { return leaves_; }
    std::uint64_t nonterminating() const { return nonterminating_; }

private:
    const Program& program_;
    const NondetSpec& spec_;
    const OracleOptions& options_;
    ConcreteEnv base_;
    std::uint64_t nodes_ = 0;
    std::uint64_t leaves_ = 0;
    std::uint64_t nonterminating_ = 0;
};

}  // namespace

OracleReport oracle_estimate(const Program& program, const OracleOptions& options)
{
    OracleReport report;
    report.mode = options.mode;
    report.seed = options.seed;
    report.grid = extract_nondet_spec(program, options.grid_points);

    if (options.mode == OracleMode::exact_discrete) {
        for (const auto& g : program.generators) {
            if (g.gen != Generator::coin_flip)
                throw OracleError("exact mode needs coin_flip generators only; site "
                                  + std::to_string(g.site.value) + " is a continuous uniform() generator");
        }
        DrawTree tree(program, report.grid, options);
        ChoiceTable empty;
        report.estimate = tree.explore(empty, 1.0);
        report.paths_or_samples = tree.leaves();
        report.nonterminating_runs = tree.nonterminating();
        return report;
    }

    if (options.samples == 0)
        throw OracleError("sampled mode needs at least one sample");
    std::atomic<std::uint64_t> hits{0};
    std::atomic<std::uint64_t> nonterminating{0};
    ConcreteEnv base = zero_env(program);
    parallel_for(options.samples, options.jobs, [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local_hits = 0;
        std::uint64_t local_nonterm = 0;
        for (std::uint64_t i = begin; i < end; ++i) {
            ReplayChoices choices(nullptr, derive_seed(options.seed, i));
            auto g = max_over_grid(program, report.grid, choices, base, options.step_budget);
            local_hits += g.hit;
            local_nonterm += g.nonterminating;
        }
        hits += local_hits;
        nonterminating += local_nonterm;
    });
    report.paths_or_samples = options.samples;
    report.estimate = static_cast<double>(hits.load()) / static_cast<double>(options.samples);
    report.nonterminating_runs = nonterminating.load();
    return report;
}

std::string to_json(const OracleReport& report)
{
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (const auto& v : report.grid.vars) {
        grid.push_back({{"variable", v.name},
                        {"lo", v.range.lower()},
                        {"hi", v.range.upper()},
                        {"points", v.grid.size()}});
    }
    nlohmann::ordered_json j = {
        {"mode", std::string(to_string(report.mode))},
        {"estimate", report.estimate},
        {"paths_or_samples", report.paths_or_samples},
        {"grid", grid},
        {"seed", report.seed},
        {"nonterminating_runs", report.nonterminating_runs},
    };
    return j.dump(2);
}

}  // namespace amc
