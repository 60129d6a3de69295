#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace threadrank {

/// Word multiset. Ordered so that every floating-point reduction over a bag
/// visits terms in the same order on every platform.
using TermCounts = std::map<std::string, std::uint32_t, std::less<>>;

/// Non-repeated bag of words.
using WordSet = std::set<std::string, std::less<>>;

using PostId = std::int64_t;

/// Bad input data: malformed files, schema violations, stale artifacts.
class DataError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or caller request (unknown baseline, missing feature).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Bumped whenever tokenization or filtering rules change; persisted indexes
/// carrying a different tag are rejected at load.
inline constexpr std::string_view kPreprocessingVersion = "tok-v1";

[[nodiscard]] inline WordSet to_set(TermCounts const &counts)
{
    WordSet out;
    for (auto const &[word, _] : counts) {
        out.insert(out.end(), word);
    }
    return out;
}

[[nodiscard]] inline TermCounts to_counts(WordSet const &words)
{
    TermCounts out;
    for (auto const &word : words) {
        out.emplace_hint(out.end(), word, 1U);
    }
    return out;
}

/// Multiset sum (bag concatenation).
inline void add_bag(TermCounts &into, TermCounts const &other)
{
    for (auto const &[word, count] : other) {
        into[word] += count;
    }
}

[[nodiscard]] inline std::uint64_t bag_length(TermCounts const &bag)
{
    std::uint64_t total = 0;
    for (auto const &[_, count] : bag) {
        total += count;
    }
    return total;
}

/// 64-bit FNV-1a. Used for stable hashing of words and file contents.
[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view text,
                                            std::uint64_t basis = 0xcbf29ce484222325ULL)
{
    std::uint64_t h = basis;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace threadrank
