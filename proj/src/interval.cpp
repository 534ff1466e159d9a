#include "amc/interval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace amc {

namespace rounding {

namespace {

constexpr double max_finite = std::numeric_limits<double>::max();
constexpr double min_normal = std::numeric_limits<double>::min();

// Error-free transformation: a + b == s + err exactly (Knuth's TwoSum).
double two_sum_error(double a, double b, double s)
{
    double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

}  // namespace

double add_down(double a, double b)
{
    double s = a + b;
    if (std::isinf(a) || std::isinf(b))
        return s;
    if (std::isinf(s))
        return s > 0 ? max_finite : s;
    return two_sum_error(a, b, s) < 0 ? std::nextafter(s, -infinity) : s;
}

double add_up(double a, double b)
{
    double s = a + b;
    if (std::isinf(a) || std::isinf(b))
        return s;
    if (std::isinf(s))
        return s < 0 ? -max_finite : s;
    return two_sum_error(a, b, s) > 0 ? std::nextafter(s, infinity) : s;
}

double mul_down(double a, double b)
{
    if (a == 0 || b == 0)
        return 0.0;
    double p = a * b;
    if (std::isinf(a) || std::isinf(b))
        return p;
    if (std::isinf(p))
        return p > 0 ? max_finite : p;
    if (std::fabs(p) < min_normal)
        return std::nextafter(p, -infinity);
    return std::fma(a, b, -p) < 0 ? std::nextafter(p, -infinity) : p;
}

double mul_up(double a, double b)
{
    if (a == 0 || b == 0)
        return 0.0;
    double p = a * b;
    if (std::isinf(a) || std::isinf(b))
        return p;
    if (std::isinf(p))
        return p < 0 ? -max_finite : p;
    if (std::fabs(p) < min_normal)
        return std::nextafter(p, infinity);
    return std::fma(a, b, -p) > 0 ? std::nextafter(p, infinity) : p;
}

}  // namespace rounding

namespace {

void require_same_kind(const Interval& a, const Interval& b, const char* op)
{
    if (a.kind() != b.kind())
        throw KindError(std::string(op) + ": mixing integer and real intervals");
}

}  // namespace

Interval Interval::bottom(Kind kind)
{
    Interval iv(kind);
    iv.bottom_ = true;
    iv.lo_ = infinity;
    iv.hi_ = -infinity;
    return iv;
}

Interval Interval::range(Kind kind, double lo, double hi)
{
    if (std::isnan(lo) || std::isnan(hi))
        throw std::invalid_argument("interval bound is NaN");
    if (kind == Kind::integer) {
        lo = std::ceil(lo);
        hi = std::floor(hi);
    }
    if (lo > hi || lo == infinity || hi == -infinity)
        return bottom(kind);
    Interval iv(kind);
    iv.lo_ = lo;
    iv.hi_ = hi;
    return iv;
}

Interval Interval::generator_range(Generator gen)
{
    return range(generator_kind(gen), 0.0, 1.0);
}

bool Interval::leq(const Interval& other) const
{
    if (bottom_)
        return true;
    if (other.bottom_)
        return false;
    return other.lo_ <= lo_ && hi_ <= other.hi_;
}

bool operator==(const Interval& a, const Interval& b)
{
    if (a.kind_ != b.kind_ || a.bottom_ != b.bottom_)
        return false;
    return a.bottom_ || (a.lo_ == b.lo_ && a.hi_ == b.hi_);
}

Interval join(const Interval& a, const Interval& b)
{
    require_same_kind(a, b, "join");
    if (a.is_bottom())
        return b;
    if (b.is_bottom())
        return a;
    return Interval::range(a.kind(), std::min(a.lower(), b.lower()), std::max(a.upper(), b.upper()));
}

Interval meet(const Interval& a, const Interval& b)
{
    require_same_kind(a, b, "meet");
    if (a.is_bottom() || b.is_bottom())
        return Interval::bottom(a.kind());
    return Interval::range(a.kind(), std::max(a.lower(), b.lower()), std::min(a.upper(), b.upper()));
}

Interval widen(const Interval& a, const Interval& b, std::span<const double> thresholds)
{
    require_same_kind(a, b, "widen");
    if (a.is_bottom())
        return b;
    if (b.is_bottom())
        return a;
    double lo = a.lower();
    if (b.lower() < a.lower()) {
        lo = -infinity;
        for (auto it = thresholds.rbegin(); it != thresholds.rend(); ++it) {
            if (*it <= b.lower()) {
                lo = *it;
                break;
            }
        }
    }
    double hi = a.upper();
    if (b.upper() > a.upper()) {
        hi = infinity;
        for (double t : thresholds) {
            if (t >= b.upper()) {
                hi = t;
                break;
            }
        }
    }
    if (a.kind() == Kind::integer) {
        // keep thresholds outside the bound after integral rounding
        lo = std::floor(lo);
        hi = std::ceil(hi);
    }
    return Interval::range(a.kind(), lo, hi);
}

Interval narrow(const Interval& a, const Interval& b)
{
    require_same_kind(a, b, "narrow");
    if (a.is_bottom() || b.is_bottom())
        return Interval::bottom(a.kind());
    double lo = a.lower() == -infinity ? b.lower() : a.lower();
    double hi = a.upper() == infinity ? b.upper() : a.upper();
    return Interval::range(a.kind(), lo, hi);
}

Interval add(const Interval& a, const Interval& b)
{
    require_same_kind(a, b, "add");
    if (a.is_bottom() || b.is_bottom())
        return Interval::bottom(a.kind());
    return Interval::range(a.kind(), rounding::add_down(a.lower(), b.lower()),
                           rounding::add_up(a.upper(), b.upper()));
}

Interval sub(const Interval& a, const Interval& b)
{
    require_same_kind(a, b, "sub");
    if (a.is_bottom() || b.is_bottom())
        return Interval::bottom(a.kind());
    return Interval::range(a.kind(), rounding::add_down(a.lower(), -b.upper()),
                           rounding::add_up(a.upper(), -b.lower()));
}

Interval scale(double factor, const Interval& a)
{
    if (std::isnan(factor) || std::isinf(factor))
        throw std::invalid_argument("scale: factor must be finite");
    if (a.kind() == Kind::integer && factor != std::floor(factor))
        throw KindError("scale: non-integral factor on an integer interval");
    if (a.is_bottom())
        return a;
    if (factor == 0)
        return Interval::singleton(a.kind(), 0.0);
    if (factor > 0)
        return Interval::range(a.kind(), rounding::mul_down(factor, a.lower()),
                               rounding::mul_up(factor, a.upper()));
    return Interval::range(a.kind(), rounding::mul_down(factor, a.upper()),
                           rounding::mul_up(factor, a.lower()));
}

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "+inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string to_string(const Interval& iv)
{
    if (iv.is_bottom())
        return "bottom";
    std::string out = iv.lower() == -infinity ? "(-inf" : "[" + format_double(iv.lower());
    out += ", ";
    out += iv.upper() == infinity ? "+inf)" : format_double(iv.upper()) + "]";
    return out;
}

}  // namespace amc
