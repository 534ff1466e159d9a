#pragma once

// Exhaustive checks of the integer interval operations against explicit
// sets over a small window, plus widening-chain stabilization. Each function
// returns human-readable failures; an empty list means the property holds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "amc/abstract_env.hpp"
#include "amc/interval.hpp"
#include "amc/lang.hpp"

namespace amc::testing {

// Every integer interval inside [-radius, radius], plus bottom.
inline std::vector<Interval> small_intervals(int radius)
{
    std::vector<Interval> out{Interval::bottom(Kind::integer)};
    for (int lo = -radius; lo <= radius; ++lo)
        for (int hi = lo; hi <= radius; ++hi)
            out.push_back(Interval::range(Kind::integer, lo, hi));
    return out;
}

inline std::vector<long> members(const Interval& iv)
{
    std::vector<long> out;
    if (iv.is_bottom())
        return out;
    for (auto v = static_cast<long>(iv.lower()); v <= static_cast<long>(iv.upper()); ++v)
        out.push_back(v);
    return out;
}

// Smallest interval containing `values`.
inline Interval hull(const std::vector<long>& values)
{
    if (values.empty())
        return Interval::bottom(Kind::integer);
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return Interval::range(Kind::integer, static_cast<double>(*lo), static_cast<double>(*hi));
}

class FailureLog {
public:
    void add(const std::string& what)
    {
        ++count_;
        if (shown_.size() < 10)
            shown_.push_back(what);
    }
    std::size_t count() const { return count_; }
    std::vector<std::string> take()
    {
        if (count_ > shown_.size())
            shown_.push_back("... " + std::to_string(count_ - shown_.size()) + " more");
        return std::move(shown_);
    }

private:
    std::size_t count_ = 0;
    std::vector<std::string> shown_;
};

inline std::string show(const Interval& a) { return to_string(a); }

// join, meet, add, sub and scale agree exactly with the set operations.
inline std::vector<std::string> check_lattice_and_arith(int radius)
{
    FailureLog log;
    auto all = small_intervals(radius);
    for (const auto& a : all) {
        auto ma = members(a);
        for (long c = -3; c <= 3; ++c) {
            std::vector<long> img;
            for (long x : ma)
                img.push_back(c * x);
            Interval got = scale(static_cast<double>(c), a);
            if (!(got == hull(img)))
                log.add("scale(" + std::to_string(c) + ", " + show(a) + ") = " + show(got));
        }
        for (const auto& b : all) {
            auto mb = members(b);
            std::vector<long> uni = ma, inter, sums, diffs;
            uni.insert(uni.end(), mb.begin(), mb.end());
            for (long x : ma) {
                if (b.contains(static_cast<double>(x)))
                    inter.push_back(x);
                for (long y : mb) {
                    sums.push_back(x + y);
                    diffs.push_back(x - y);
                }
            }
            if (!(join(a, b) == hull(uni)))
                log.add("join(" + show(a) + ", " + show(b) + ") = " + show(join(a, b)));
            if (!(meet(a, b) == hull(inter)))
                log.add("meet(" + show(a) + ", " + show(b) + ") = " + show(meet(a, b)));
            if (!(add(a, b) == hull(sums)))
                log.add("add(" + show(a) + ", " + show(b) + ") = " + show(add(a, b)));
            if (!(sub(a, b) == hull(diffs)))
                log.add("sub(" + show(a) + ", " + show(b) + ") = " + show(sub(a, b)));
            bool subset = std::all_of(ma.begin(), ma.end(), [&](long x) { return b.contains(double(x)); });
            if (a.leq(b) != subset)
                log.add("leq(" + show(a) + ", " + show(b) + ") wrong");

            Interval w = widen(a, b);
            if (!a.leq(w) || !b.leq(w))
                log.add("widen(" + show(a) + ", " + show(b) + ") = " + show(w) + " loses a bound");
            if (b.leq(a)) {
                Interval n = narrow(a, b);
                if (!b.leq(n) || !n.leq(a))
                    log.add("narrow(" + show(a) + ", " + show(b) + ") = " + show(n) + " out of [b, a]");
            }
        }
    }
    return log.take();
}

inline bool holds(long x, RelOp op, long y)
{
    switch (op) {
    case RelOp::lt: return x < y;
    case RelOp::le: return x <= y;
    case RelOp::gt: return x > y;
    case RelOp::ge: return x >= y;
    case RelOp::eq: return x == y;
    case RelOp::ne: return x != y;
    }
    return false;
}

// filter is sound for atoms and compound guards over two integer variables,
// and for single atoms it is exact on every refined variable.
inline std::vector<std::string> check_filter(int radius)
{
    FailureLog log;
    auto all = small_intervals(radius);
    all.erase(all.begin());

    struct Case {
        std::string text;
        BoolExprPtr cond;
        bool refines_x;
        bool refines_y;
        // satisfied(x, y, polarity)
        std::function<bool(long, long)> sat;
    };
    std::vector<Case> cases;
    const RelOp ops[] = {RelOp::lt, RelOp::le, RelOp::gt, RelOp::ge, RelOp::eq, RelOp::ne};
    for (RelOp op : ops) {
        std::string o(to_string(op));
        auto atom = [&](const std::string& text, bool rx, bool ry, std::function<bool(long, long)> sat) {
            Program p = parse("int x, y;\nknow (" + text + ");\n");
            cases.push_back({text, p.outcome, rx, ry, std::move(sat)});
        };
        atom("x " + o + " y", true, true, [op](long x, long y) { return holds(x, op, y); });
        for (long k : {-2L, 1L}) {
            std::string ks = std::to_string(k);
            atom("x " + o + " " + ks, true, false, [op, k](long x, long) { return holds(x, op, k); });
            atom("x " + o + " y + " + ks, true, false, [op, k](long x, long y) { return holds(x, op, y + k); });
            atom(ks + " " + o + " y", false, true, [op, k](long, long y) { return holds(k, op, y); });
        }
    }
    for (const char* text : {"x < y && y <= 1", "x == 0 || y > x", "(x != 1 || y < 0) && x >= y - 1"}) {
        Program p = parse(std::string("int x, y;\nknow (") + text + ");\n");
        cases.push_back({text, p.outcome, false, false, {}});
    }

    Program decl = parse("int x, y;\nknow (x < 1);\n");
    for (const auto& c : cases) {
        for (const auto& X : all) {
            for (const auto& Y : all) {
                AbstractEnv env({X, Y});
                for (bool polarity : {true, false}) {
                    AbstractEnv got = filter(env, *c.cond, polarity);
                    std::vector<long> xs, ys;
                    for (long x : members(X)) {
                        for (long y : members(Y)) {
                            bool s;
                            if (c.sat) {
                                s = c.sat(x, y) == polarity;
                            } else {
                                // compound guard: evaluate through a singleton environment
                                AbstractEnv point({Interval::singleton(Kind::integer, double(x)),
                                                   Interval::singleton(Kind::integer, double(y))});
                                Truth t = eval_condition(point, *c.cond);
                                s = (t == Truth::definitely_true) == polarity;
                            }
                            if (s) {
                                xs.push_back(x);
                                ys.push_back(y);
                            }
                        }
                    }
                    std::string where = std::string(polarity ? "" : "not ") + "(" + c.text + ") on "
                                        + to_string(env, decl) + " gave " + to_string(got, decl);
                    if (xs.empty()) {
                        if (c.sat && !got.is_bottom())
                            log.add(where + ", expected bottom");
                        continue;
                    }
                    if (got.is_bottom() || !hull(xs).leq(got[0]) || !hull(ys).leq(got[1])) {
                        log.add(where + ", unsound");
                        continue;
                    }
                    if (c.refines_x && !(got[0] == hull(xs)))
                        log.add(where + ", x not exact");
                    if (c.refines_y && !(got[1] == hull(ys)))
                        log.add(where + ", y not exact");
                }
            }
        }
    }
    return log.take();
}

// Ascending chains x_{k+1} = widen(x_k, x_k join y_k) stabilize after at most
// one jump per bound and per threshold.
inline std::vector<std::string> check_widening_chains(std::uint64_t seed, int chains)
{
    FailureLog log;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> value(-1000, 1000);
    std::vector<double> thresholds = {-100, 0, 100};
    for (int c = 0; c < chains; ++c) {
        for (bool with_thresholds : {false, true}) {
            std::span<const double> ts;
            if (with_thresholds)
                ts = thresholds;
            int lo = value(rng);
            Interval x = Interval::range(Kind::integer, lo, lo + std::abs(value(rng)) % 20);
            std::size_t changes = 0;
            for (int step = 0; step < 200; ++step) {
                int a = value(rng), b = value(rng);
                Interval y = Interval::range(Kind::integer, std::min(a, b), std::max(a, b));
                Interval next = widen(x, join(x, y), ts);
                if (!x.leq(next) || !y.leq(next)) {
                    log.add("widen chain not ascending at " + show(x) + " with " + show(y));
                    break;
                }
                if (!(next == x))
                    ++changes;
                x = next;
            }
            std::size_t allowed = 2 + 2 * ts.size();
            if (changes > allowed)
                log.add("widen chain changed " + std::to_string(changes) + " times, allowed "
                        + std::to_string(allowed));
        }
    }
    return log.take();
}

}  // namespace amc::testing
