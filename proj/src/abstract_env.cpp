#include "amc/abstract_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amc {

AbstractEnv AbstractEnv::top(const Program& program)
{
    std::vector<Interval> values;
    values.reserve(program.declarations.size());
    for (const auto& d : program.declarations)
        values.push_back(Interval::top(d.kind));
    return AbstractEnv(std::move(values));
}

AbstractEnv::AbstractEnv(std::vector<Interval> values) : bottom_(false), values_(std::move(values))
{
    for (const auto& v : values_) {
        if (v.is_bottom()) {
            bottom_ = true;
            values_.clear();
            break;
        }
    }
}

const Interval& AbstractEnv::operator[](std::size_t slot) const
{
    if (bottom_)
        throw std::logic_error("lookup in bottom environment");
    return values_.at(slot);
}

void AbstractEnv::set(std::size_t slot, const Interval& value)
{
    if (bottom_)
        return;
    if (slot >= values_.size())
        throw std::out_of_range("assignment to undeclared variable slot");
    if (value.kind() != values_[slot].kind())
        throw KindError("assignment changes the kind of a variable");
    if (value.is_bottom()) {
        bottom_ = true;
        values_.clear();
        return;
    }
    values_[slot] = value;
}

bool AbstractEnv::leq(const AbstractEnv& other) const
{
    if (bottom_)
        return true;
    if (other.bottom_)
        return false;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!values_[i].leq(other.values_[i]))
            return false;
    return true;
}

bool operator==(const AbstractEnv& a, const AbstractEnv& b)
{
    return a.bottom_ == b.bottom_ && a.values_ == b.values_;
}

namespace {

template <typename Op>
AbstractEnv pointwise(const AbstractEnv& a, const AbstractEnv& b, Op op)
{
    std::vector<Interval> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.push_back(op(a[i], b[i]));
    return AbstractEnv(std::move(out));
}

}  // namespace

AbstractEnv join(const AbstractEnv& a, const AbstractEnv& b)
{
    if (a.is_bottom())
        return b;
    if (b.is_bottom())
        return a;
    return pointwise(a, b, [](const Interval& x, const Interval& y) { return join(x, y); });
}

AbstractEnv widen(const AbstractEnv& a, const AbstractEnv& b, std::span<const double> thresholds)
{
    if (a.is_bottom())
        return b;
    if (b.is_bottom())
        return a;
    return pointwise(a, b, [&](const Interval& x, const Interval& y) { return widen(x, y, thresholds); });
}

AbstractEnv narrow(const AbstractEnv& a, const AbstractEnv& b)
{
    if (a.is_bottom() || b.is_bottom())
        return AbstractEnv::bottom();
    return pointwise(a, b, [](const Interval& x, const Interval& y) { return narrow(x, y); });
}

Interval full_range(const GeneratorCall& call)
{
    return Interval::generator_range(call.gen);
}

Interval eval(const Expr& expr, const AbstractEnv& env, const GeneratorValues& gens)
{
    if (env.is_bottom())
        return Interval::bottom(expr.kind);
    return std::visit(
        [&](const auto& n) -> Interval {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, IntLiteral>) {
                return Interval::singleton(Kind::integer, static_cast<double>(n.value));
            } else if constexpr (std::is_same_v<T, RealLiteral>) {
                return Interval::singleton(Kind::real, n.value);
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return env[n.slot];
            } else if constexpr (std::is_same_v<T, BinaryExpr>) {
                auto l = eval(*n.lhs, env, gens);
                auto r = eval(*n.rhs, env, gens);
                return n.op == ArithOp::add ? add(l, r) : sub(l, r);
            } else if constexpr (std::is_same_v<T, ScaleExpr>) {
                return scale(n.factor, eval(*n.operand, env, gens));
            } else {
                return gens(n);
            }
        },
        expr.node);
}

namespace {

Truth compare(const Interval& a, RelOp op, const Interval& b)
{
    switch (op) {
    case RelOp::lt:
        if (a.upper() < b.lower())
            return Truth::definitely_true;
        if (a.lower() >= b.upper())
            return Truth::definitely_false;
        return Truth::unknown;
    case RelOp::le:
        if (a.upper() <= b.lower())
            return Truth::definitely_true;
        if (a.lower() > b.upper())
            return Truth::definitely_false;
        return Truth::unknown;
    case RelOp::gt:
        return compare(b, RelOp::lt, a);
    case RelOp::ge:
        return compare(b, RelOp::le, a);
    case RelOp::eq:
        if (a.is_singleton() && b.is_singleton() && a.lower() == b.lower())
            return Truth::definitely_true;
        if (a.upper() < b.lower() || b.upper() < a.lower())
            return Truth::definitely_false;
        return Truth::unknown;
    case RelOp::ne: {
        Truth t = compare(a, RelOp::eq, b);
        if (t == Truth::definitely_true)
            return Truth::definitely_false;
        if (t == Truth::definitely_false)
            return Truth::definitely_true;
        return Truth::unknown;
    }
    }
    return Truth::unknown;
}

// Refines x so that x op b may hold.
Interval refine(const Interval& x, RelOp op, const Interval& b, StrictMode mode)
{
    Kind kind = x.kind();
    bool open = mode == StrictMode::float_open && kind == Kind::real;
    switch (op) {
    case RelOp::lt: {
        double hi = kind == Kind::integer ? b.upper() - 1
                    : open               ? std::nextafter(b.upper(), -infinity)
                                         : b.upper();
        return Interval::range(kind, x.lower(), std::min(x.upper(), hi));
    }
    case RelOp::le:
        return Interval::range(kind, x.lower(), std::min(x.upper(), b.upper()));
    case RelOp::gt: {
        double lo = kind == Kind::integer ? b.lower() + 1
                    : open               ? std::nextafter(b.lower(), infinity)
                                         : b.lower();
        return Interval::range(kind, std::max(x.lower(), lo), x.upper());
    }
    case RelOp::ge:
        return Interval::range(kind, std::max(x.lower(), b.lower()), x.upper());
    case RelOp::eq:
        return meet(x, b);
    case RelOp::ne:
        if (!b.is_singleton())
            return x;
        if (x.is_singleton() && x.lower() == b.lower())
            return Interval::bottom(kind);
        if (kind == Kind::integer) {
            double lo = x.lower() == b.lower() ? x.lower() + 1 : x.lower();
            double hi = x.upper() == b.lower() ? x.upper() - 1 : x.upper();
            return Interval::range(kind, lo, hi);
        }
        return x;
    }
    return x;
}

AbstractEnv filter_atom(const AbstractEnv& env, const Comparison& cmp, RelOp op, const GeneratorValues& gens,
                        StrictMode mode)
{
    Interval a = eval(*cmp.lhs, env, gens);
    Interval b = eval(*cmp.rhs, env, gens);
    if (a.is_bottom() || b.is_bottom() || a.kind() != b.kind())
        return a.kind() != b.kind() ? env : AbstractEnv::bottom();
    if (compare(a, op, b) == Truth::definitely_false)
        return AbstractEnv::bottom();

    AbstractEnv out = env;
    if (auto* v = std::get_if<VarRef>(&cmp.lhs->node))
        out.set(v->slot, refine(out[v->slot], op, b, mode));
    if (out.is_bottom())
        return out;
    if (auto* v = std::get_if<VarRef>(&cmp.rhs->node))
        out.set(v->slot, refine(out[v->slot], flip(op), a, mode));
    return out;
}

}  // namespace

AbstractEnv filter(const AbstractEnv& env, const BoolExpr& cond, bool polarity, const GeneratorValues& gens,
                   StrictMode mode)
{
    if (env.is_bottom())
        return env;
    if (auto* cmp = std::get_if<Comparison>(&cond.node))
        return filter_atom(env, *cmp, polarity ? cmp->op : negate(cmp->op), gens, mode);

    const auto& lg = std::get<Logical>(cond.node);
    // De Morgan: a negated conjunction filters like a disjunction
    bool conjunctive = (lg.op == LogicOp::conj) == polarity;
    if (conjunctive)
        return filter(filter(env, *lg.lhs, polarity, gens, mode), *lg.rhs, polarity, gens, mode);
    return join(filter(env, *lg.lhs, polarity, gens, mode), filter(env, *lg.rhs, polarity, gens, mode));
}

Truth eval_condition(const AbstractEnv& env, const BoolExpr& cond, const GeneratorValues& gens)
{
    if (env.is_bottom())
        return Truth::definitely_false;
    if (filter(env, cond, true, gens).is_bottom())
        return Truth::definitely_false;
    if (filter(env, cond, false, gens).is_bottom())
        return Truth::definitely_true;
    return Truth::unknown;
}

std::string to_string(const AbstractEnv& env, const Program& program)
{
    if (env.is_bottom())
        return "bottom";
    std::string out = "{";
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (i)
            out += ", ";
        out += i < program.declarations.size() ? program.declarations[i].name : "?";
        out += ": ";
        out += to_string(env[i]);
    }
    return out + "}";
}

}  // namespace amc
