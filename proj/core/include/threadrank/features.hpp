#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "threadrank/antonyms.hpp"
#include "threadrank/common.hpp"
#include "threadrank/corpus.hpp"
#include "threadrank/embeddings.hpp"

namespace threadrank {

namespace feature {
// Thread features.
inline constexpr std::string_view sentence_title = "sentence_title";
inline constexpr std::string_view asym_title = "asym_title";
inline constexpr std::string_view asym_body = "asym_body";
inline constexpr std::string_view tf_all = "tf_all";
inline constexpr std::string_view answer_count = "answer_count";
inline constexpr std::string_view total_answer_score = "total_answer_score";
inline constexpr std::string_view question_score = "question_score";
// Answer features.
inline constexpr std::string_view asym = "asym";
inline constexpr std::string_view tfidf = "tfidf";
inline constexpr std::string_view top_method = "top_method";
inline constexpr std::string_view thread_score = "thread_score";

inline constexpr std::string_view thread_lexical[] = {sentence_title, asym_title, asym_body, tf_all};
inline constexpr std::string_view thread_social[] = {answer_count, total_answer_score, question_score};
inline constexpr std::string_view thread_all[] = {sentence_title, asym_title,         asym_body,     tf_all,
                                                  answer_count,   total_answer_score, question_score};
inline constexpr std::string_view answer_all[] = {asym, tfidf, top_method, thread_score};
}  // namespace feature

using FeatureMap = std::map<std::string, double, std::less<>>;

/// Raw and [0,1]-normalized feature scores of one candidate.
struct FeatureVector {
    FeatureMap raw;
    FeatureMap normalized;

    void set(std::string_view name, double raw_value, double normalized_value);
};

enum class AntonymTarget { TR, ANS, TR_ANS };

[[nodiscard]] AntonymTarget parse_antonym_target(std::string_view text);
[[nodiscard]] std::string_view to_string(AntonymTarget target);

struct AntonymConfig {
    bool enabled = false;
    PosMode pos = PosMode::NN;
    AntonymTarget target = AntonymTarget::ANS;

    [[nodiscard]] bool filters_threads() const
    {
        return enabled && (target == AntonymTarget::TR || target == AntonymTarget::TR_ANS);
    }
    [[nodiscard]] bool filters_answers() const
    {
        return enabled && (target == AntonymTarget::ANS || target == AntonymTarget::TR_ANS);
    }
};

/// Candidate counts kept by each stage of the search funnel.
struct FunnelConfig {
    std::size_t bm25_threads = 500;
    std::size_t stage1_keep = 250;
    std::size_t stage2_keep = 100;
    std::size_t answer_k = 150;
    std::size_t final_n = 10;
};

/// Everything that parameterizes a search run. Defaults are the tuned values:
/// 0.5 for every thread feature; 1.0 / 0.5 / 0.75 / 0.75 for the answer
/// features; funnel 500 -> 250 -> 100 threads and 150 answers; S = 10.
///
/// Serialized as flat `key = value` lines (see serialize()); `#` comments and
/// blank lines are ignored, unknown keys are an error.
struct WeightConfig {
    FeatureMap thread_weights;
    FeatureMap answer_weights;
    FunnelConfig funnel;
    AntonymConfig antonym;
    double method_scale = 10.0;
    bool clamp_negative = true;

    WeightConfig();

    /// Throws ConfigError on negative weights, missing features or a funnel
    /// that widens.
    void validate() const;

    [[nodiscard]] std::string serialize() const;
    [[nodiscard]] static WeightConfig parse(std::string_view text);
    [[nodiscard]] static WeightConfig load(std::filesystem::path const &path);

    friend bool operator==(WeightConfig const &a, WeightConfig const &b);
};

/// Cosine of raw term-frequency vectors; 0 when either bag is empty.
[[nodiscard]] double tf_score(TermCounts const &q, TermCounts const &t);

/// Cosine of TF * IDF vectors; 0 when either weighted vector is zero.
[[nodiscard]] double tfidf_score(TermCounts const &q, TermCounts const &a, IdfMap const &idf);

/// Question score ladder: <=1 -> 0.1, 2-5 -> 0.2, 6-10 -> 0.3, 11-25 -> 0.4,
/// 26-50 -> 0.5, 51-75 -> 0.6, 76-100 -> 0.7, 101-200 -> 0.8, 201-500 -> 0.9,
/// >500 -> 1.0.
[[nodiscard]] double question_score_value(std::int64_t score);

/// Min-max normalization over a candidate set; all-equal input maps to 1.0.
[[nodiscard]] std::vector<double> normalize_social(std::span<double const> values);

/// Distinct method names called in `code`: identifiers directly followed by
/// '(' (a dotted receiver chain may precede them), excluding control keywords.
[[nodiscard]] WordSet extract_methods(std::string_view code);

struct TopMethod {
    std::string method;          // empty when no candidate calls anything
    std::size_t frequency = 0;   // number of candidate answers calling it
    std::map<PostId, double> scores;
};

/// Finds the method called by the most candidate answers (ties: smallest
/// name) and gives every answer calling it log2(frequency) / scale; other
/// answers get 0.
[[nodiscard]] TopMethod top_method_score(std::span<std::pair<PostId, std::string> const> answer_code,
                                         double scale = 10.0);

/// Weighted sum of normalized feature scores. Throws ConfigError when a
/// weighted feature is missing from the vector.
[[nodiscard]] double final_score(FeatureVector const &fv, FeatureMap const &weights);

/// Query-side inputs shared by every candidate of one search.
struct QueryFeatures {
    WordSet words;
    TermCounts counts;  // every word once
    Vector sentence;

    [[nodiscard]] static QueryFeatures make(WordSet words, EmbeddingStore const &store, IdfMap const &idf);
};

struct ScoringResources {
    EmbeddingStore const &store;
    IdfMap const &idf;
    SimilarityOptions similarity{};
};

enum class ThreadStage { lexical = 1, full = 2 };

/// Stage 1: sentence similarity on the title, asym on the title, asym on
/// question body + answers' bodies, TF on everything. Stage 2 adds the three
/// social features; answer count and total answer score still need
/// normalize_thread_social() over the candidate set.
[[nodiscard]] FeatureVector thread_features(QueryFeatures const &query, Thread const &thread, ThreadStage stage,
                                            ScoringResources const &res);

/// Adds the social features to a stage-1 vector.
void add_social_features(FeatureVector &fv, Thread const &thread);

/// Min-max normalizes answer count and total answer score across candidates.
void normalize_thread_social(std::span<FeatureVector> candidates);

/// Candidate-set information needed by answer_features.
struct AnswerCandidateContext {
    TopMethod top_method;
    std::map<PostId, double> thread_score_raw;         // parent's stage-2 final score
    std::map<PostId, double> thread_score_normalized;  // min-max over parents
};

/// Asym on parent title + answer body, TF-IDF on parent title + parent body +
/// answer body + code, top method, and the parent's normalized thread score.
[[nodiscard]] FeatureVector answer_features(QueryFeatures const &query, ProcessedPost const &answer,
                                            Thread const &parent, AnswerCandidateContext const &ctx,
                                            ScoringResources const &res);

}  // namespace threadrank
