#pragma once

// Random choices indexed by program point and loop-iteration word, plus the
// seeded random streams that produce them.
//
// A choice key <p, n1 n2 ... nl> names the draw made at generator site p
// during the n1-th iteration of the outermost enclosing loop, ..., the nl-th
// iteration of the innermost one. Distinct keys are independent draws, so a
// table recorded by one execution can be replayed by another.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>

#include <boost/container/small_vector.hpp>

#include "amc/interval.hpp"
#include "amc/lang.hpp"

namespace amc {

/// Loop iteration counters, outermost loop first; counters start at 1.
using IterationWord = boost::container::small_vector<std::uint32_t, 4>;

struct ChoiceKey {
    SiteId site;
    IterationWord word;

    friend bool operator==(const ChoiceKey& a, const ChoiceKey& b)
    {
        return a.site == b.site && a.word == b.word;
    }
    friend bool operator<(const ChoiceKey& a, const ChoiceKey& b)
    {
        if (a.site != b.site)
            return a.site < b.site;
        return a.word < b.word;
    }
};

/// "<7,(2)>", "<3,()>"
std::string to_string(const ChoiceKey& key);

class DuplicateChoice : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Each key is written at most once.
class ChoiceTable {
public:
    using Map = std::map<ChoiceKey, double>;

    void record(const ChoiceKey& key, double value);
    std::optional<double> find(const ChoiceKey& key) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    Map::const_iterator begin() const { return entries_.begin(); }
    Map::const_iterator end() const { return entries_.end(); }

private:
    Map entries_;
};

/// Seed of the `index`-th trial under `master`. A pure function of both
/// arguments (SplitMix64 finalizer over master + (index+1)*golden ratio), so
/// work scheduling never changes which seed a trial receives.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Generator draws from a 64-bit Mersenne Twister. The integer-to-value
/// conversions are fixed here rather than left to <random> distributions so
/// streams are identical across standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    int coin() { return static_cast<int>(engine_() >> 63); }
    double draw(Generator gen) { return gen == Generator::coin_flip ? coin() : uniform01(); }
    /// Draw conditioned on `range`, a sub-range of the generator's support.
    double draw_within(Generator gen, const Interval& range);

private:
    std::mt19937_64 engine_;
};

/// Per-site sub-ranges that replace the generator's support when sampling.
using SiteRestrictions = std::map<SiteId, Interval>;

/// Probability mass of `range` under the generator's distribution.
double restriction_mass(Generator gen, const Interval& range);

}  // namespace amc
