#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "threadrank/common.hpp"

namespace threadrank {

enum class PostKind { question, answer };

struct RawPost {
    PostId id = 0;
    PostKind kind = PostKind::question;
    std::optional<PostId> parent_id;  // answers only
    std::string title;                // questions only
    std::string body_html;
    std::int64_t score = 0;
    std::vector<std::string> tags;  // questions only, lowercase
};

/// Question selection by tag substring. A question passes when some tag
/// contains an include pattern and no tag contains an exclude pattern. An
/// empty include list accepts every question not excluded.
struct TagFilter {
    std::vector<std::string> include{"java"};
    std::vector<std::string> exclude{"javascript"};

    [[nodiscard]] static TagFilter accept_all() { return TagFilter{{}, {}}; }
    [[nodiscard]] bool accepts(std::vector<std::string> const &tags) const;
};

struct DumpStats {
    std::size_t lines = 0;
    std::size_t questions_kept = 0;
    std::size_t questions_dropped = 0;
    std::size_t answers_kept = 0;
    std::size_t answers_dropped = 0;
    std::size_t warning_count = 0;
};

/// Streams a JSON Lines dump. Questions failing `filter` are dropped together
/// with their answers; everything else is delivered to `sink` in file order.
/// Malformed lines and lines missing required fields are skipped and counted.
/// Throws DataError when the file cannot be opened.
DumpStats load_dump(std::filesystem::path const &path, TagFilter const &filter,
                    std::function<void(RawPost &&)> const &sink);

struct LoadedDump {
    std::vector<RawPost> posts;
    DumpStats stats;
};

[[nodiscard]] LoadedDump load_dump(std::filesystem::path const &path, TagFilter const &filter);

/// Parses one dump line. Returns nullopt (and a reason) for malformed input.
[[nodiscard]] std::optional<RawPost> parse_post(std::string_view line, std::string *reason = nullptr);

/// Serializes a post as one dump line (the inverse of parse_post).
[[nodiscard]] std::string format_post(RawPost const &post);

struct SeparatedText {
    std::string prose;
    std::string code;
};

/// Splits HTML into prose and code. Text inside <code> or <pre> (including
/// nested <pre><code>) goes to `code`, one line per block; everything else
/// goes to `prose` with tags replaced by a space. An unclosed block runs to the
/// end of the document. Common character entities are decoded in both parts.
[[nodiscard]] SeparatedText separate_code(std::string_view body_html);

enum class PreprocessMode { corpus, query };

class Preprocessor {
   public:
    /// Uses the built-in stop word list.
    Preprocessor();
    explicit Preprocessor(WordSet stop_words);

    /// One word per line, `#` comments allowed.
    [[nodiscard]] static Preprocessor from_file(std::filesystem::path const &path);

    /// Lowercased alphanumeric tokens with stop words, numbers and
    /// one-character words removed. Query mode also drops repeats, keeping the
    /// first occurrence.
    [[nodiscard]] std::vector<std::string> tokens(std::string_view text, PreprocessMode mode) const;

    [[nodiscard]] TermCounts bag(std::string_view text) const;
    [[nodiscard]] WordSet query_bag(std::string_view text) const;

    [[nodiscard]] WordSet const &stop_words() const noexcept { return stop_words_; }
    /// Hash of the stop word list, recorded in index metadata.
    [[nodiscard]] std::uint64_t fingerprint() const;

   private:
    WordSet stop_words_;
};

/// The shipped stop word list (identical to data/stopwords.txt).
[[nodiscard]] WordSet const &default_stop_words();

struct ProcessedPost {
    PostId id = 0;
    std::int64_t score = 0;
    TermCounts title_bag;
    TermCounts body_bag;
    TermCounts code_bag;
    std::string original_title;
    std::string original_body;
};

[[nodiscard]] ProcessedPost process_post(RawPost const &post, Preprocessor const &pre);

struct Thread {
    ProcessedPost question;
    std::vector<ProcessedPost> answers;  // ascending answer id
    std::size_t answer_count = 0;
    std::int64_t question_score = 0;
    std::int64_t total_answer_score = 0;

    [[nodiscard]] PostId id() const noexcept { return question.id; }
};

struct ThreadBuildStats {
    std::size_t questions_seen = 0;
    std::size_t threads_built = 0;
    std::size_t orphan_answers = 0;
    std::size_t answers_discarded = 0;
};

/// Reconstructs threads: keeps questions with score > 0 and, for each, the
/// answers with score > 0 and a non-empty code bag. Questions left without any
/// answer produce no thread. Output is sorted by question id.
[[nodiscard]] std::vector<Thread> build_threads(std::vector<RawPost> const &posts, Preprocessor const &pre,
                                                ThreadBuildStats *stats = nullptr);

/// Versioned JSON Lines thread store.
void save_threads(std::filesystem::path const &path, std::vector<Thread> const &threads);
[[nodiscard]] std::vector<Thread> load_threads(std::filesystem::path const &path);
[[nodiscard]] std::string serialize_threads(std::vector<Thread> const &threads);

}  // namespace threadrank
