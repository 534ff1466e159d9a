#pragma once

// Integer and real intervals: the non-relational abstract domain.
//
// Bounds are doubles in both kinds. Integer intervals keep integral finite
// bounds; real intervals are closed. Real arithmetic rounds outward so that
// every result contains the exact real result and any round-to-nearest
// evaluation of it.

#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "amc/lang.hpp"

namespace amc {

class KindError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double infinity = std::numeric_limits<double>::infinity();

class Interval {
public:
    /// Top of the given kind.
    explicit Interval(Kind kind = Kind::integer) : kind_(kind), lo_(-infinity), hi_(infinity) {}

    static Interval top(Kind kind) { return Interval(kind); }
    static Interval bottom(Kind kind);
    /// [lo, hi]; integer bounds are rounded inward, empty ranges give bottom.
    static Interval range(Kind kind, double lo, double hi);
    static Interval singleton(Kind kind, double v) { return range(kind, v, v); }
    /// Value range of a generator: [0,1] in its kind.
    static Interval generator_range(Generator gen);

    Kind kind() const { return kind_; }
    bool is_bottom() const { return bottom_; }
    bool is_top() const { return !bottom_ && lo_ == -infinity && hi_ == infinity; }
    bool is_singleton() const { return !bottom_ && lo_ == hi_; }
    double lower() const { return lo_; }
    double upper() const { return hi_; }

    bool contains(double v) const { return !bottom_ && lo_ <= v && v <= hi_; }
    /// Inclusion order: γ(*this) ⊆ γ(other).
    bool leq(const Interval& other) const;

    friend bool operator==(const Interval& a, const Interval& b);

private:
    Kind kind_;
    bool bottom_ = false;
    double lo_;
    double hi_;
};

Interval join(const Interval& a, const Interval& b);
Interval meet(const Interval& a, const Interval& b);

/// Standard widening: unstable bounds jump to infinity, or to the nearest
/// enclosing threshold when `thresholds` (sorted ascending) is non-empty.
Interval widen(const Interval& a, const Interval& b, std::span<const double> thresholds = {});

/// Standard narrowing: only infinite bounds of `a` are refined.
Interval narrow(const Interval& a, const Interval& b);

Interval add(const Interval& a, const Interval& b);
Interval sub(const Interval& a, const Interval& b);
/// `factor * a`; the factor's kind must match `a`.
Interval scale(double factor, const Interval& a);

/// "[a, b]", "(-inf, b]", "[a, +inf)", "(-inf, +inf)" or "bottom". Real
/// bounds use the shortest decimal that round-trips.
std::string to_string(const Interval& iv);

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

namespace rounding {
// Directed rounding of a single operation, computed from the
// round-to-nearest result and its exact error term.
double add_down(double a, double b);
double add_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);
}  // namespace rounding

}  // namespace amc
