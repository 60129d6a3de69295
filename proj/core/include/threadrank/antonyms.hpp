#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "threadrank/common.hpp"

namespace threadrank {

enum class PosTag : unsigned { none = 0, noun = 1, verb = 2, both = 3 };

[[nodiscard]] constexpr PosTag operator|(PosTag a, PosTag b)
{
    return static_cast<PosTag>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
[[nodiscard]] constexpr bool intersects(PosTag a, PosTag b)
{
    return (static_cast<unsigned>(a) & static_cast<unsigned>(b)) != 0;
}

/// Which query words contribute antonyms.
enum class PosMode { NN, VB, NN_VB };

[[nodiscard]] PosMode parse_pos_mode(std::string_view text);
[[nodiscard]] std::string_view to_string(PosMode mode);

/// POS guess for lexicon entries that carry no flags: -ing/-ize/-ify are
/// verbs, -tion/-ness/-ment are nouns, anything else may be either.
[[nodiscard]] PosTag suffix_pos(std::string_view word);

struct AntonymEntry {
    PosTag pos = PosTag::none;
    WordSet antonyms;
};

/// Word -> (POS flags, antonyms). Immutable once built; safe to share across
/// concurrent searches.
///
/// File format, one entry per line:
///   word<TAB>pos_flags<TAB>antonym1,antonym2,...
/// pos_flags is any combination of `n` and `v` (may be empty); `#` starts a
/// comment line. Words are lowercased. Antonym pairs are closed symmetrically
/// at merge time.
class AntonymDictionary {
   public:
    struct ParseStats {
        std::size_t lines = 0;
        std::size_t skipped = 0;
    };

    AntonymDictionary() = default;

    /// Unions entries, antonym sets and POS flags from every file, then applies
    /// symmetric closure. Unparsable lines are skipped with a warning. Throws
    /// DataError when a file cannot be opened.
    [[nodiscard]] static AntonymDictionary merge_lists(std::vector<std::filesystem::path> const &paths,
                                                       ParseStats *stats = nullptr);
    [[nodiscard]] static AntonymDictionary parse(std::string_view text, ParseStats *stats = nullptr);

    /// Adds `word` with flags and antonyms (union with any existing entry).
    void add(std::string_view word, PosTag pos, WordSet const &antonyms);
    /// Makes every a -> b also b -> a. Words introduced only as antonyms get
    /// empty POS flags (the suffix heuristic decides later).
    void close_symmetric();

    [[nodiscard]] AntonymEntry const *find(std::string_view word) const;
    /// Lexicon POS for a known word; suffix heuristic when its flags are empty.
    [[nodiscard]] PosTag pos_of(std::string_view word) const;

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::map<std::string, AntonymEntry, std::less<>> const &entries() const noexcept
    {
        return entries_;
    }

    [[nodiscard]] std::string serialize() const;
    void save(std::filesystem::path const &path) const;
    [[nodiscard]] static AntonymDictionary load(std::filesystem::path const &path);

   private:
    std::map<std::string, AntonymEntry, std::less<>> entries_;
};

/// Query words whose lexicon POS matches the mode. Words absent from the
/// dictionary are never returned.
[[nodiscard]] WordSet pos_filter(AntonymDictionary const &dict, WordSet const &query, PosMode mode);

struct AntonymQueryContext {
    WordSet antonyms;  // A_nt
    bool self_antonymous = false;

    /// Antonyms that take part in scoring (none for self-antonymous queries).
    [[nodiscard]] WordSet const &effective() const;
};

/// Collects antonyms of the POS-filtered query words, minus the query words
/// themselves. A query containing a word together with one of its antonyms
/// (zip/unzip) is self-antonymous.
[[nodiscard]] AntonymQueryContext antonym_context(AntonymDictionary const &dict, WordSet const &query,
                                                  PosMode mode);

/// |A_nt ∩ C_an|, or 0 for a self-antonymous query.
[[nodiscard]] std::size_t antonyms_score(AntonymQueryContext const &ctx, WordSet const &candidate);
[[nodiscard]] std::size_t antonyms_score(AntonymQueryContext const &ctx, TermCounts const &candidate);

}  // namespace threadrank
