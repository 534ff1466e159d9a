#include "amc/choice.hpp"

#include <algorithm>
#include <cmath>

namespace amc {

std::string to_string(const ChoiceKey& key)
{
    std::string out = "<" + std::to_string(key.site.value) + ",(";
    for (std::size_t i = 0; i < key.word.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(key.word[i]);
    }
    return out + ")>";
}

void ChoiceTable::record(const ChoiceKey& key, double value)
{
    if (!entries_.emplace(key, value).second)
        throw DuplicateChoice("choice " + to_string(key) + " recorded twice");
}

std::optional<double> ChoiceTable::find(const ChoiceKey& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double RandomStream::draw_within(Generator gen, const Interval& range)
{
    if (gen == Generator::coin_flip) {
        if (range.is_singleton())
            return range.lower();
        return coin();
    }
    double lo = range.lower();
    double hi = range.upper();
    return std::min(hi, lo + (hi - lo) * uniform01());
}

double restriction_mass(Generator gen, const Interval& range)
{
    if (range.is_bottom())
        return 0.0;
    if (gen == Generator::coin_flip) {
        double count = 0;
        for (double v : {0.0, 1.0})
            if (range.contains(v))
                count += 1;
        return count / 2;
    }
    double lo = std::max(0.0, range.lower());
    double hi = std::min(1.0, range.upper());
    return hi > lo ? hi - lo : 0.0;
}

}  // namespace amc
