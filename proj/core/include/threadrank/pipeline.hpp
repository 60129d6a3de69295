#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "threadrank/antonyms.hpp"
#include "threadrank/corpus.hpp"
#include "threadrank/embeddings.hpp"
#include "threadrank/features.hpp"
#include "threadrank/indexing.hpp"

namespace threadrank {

/// Everything a search needs. Immutable after construction.
struct EngineData {
    std::vector<Thread> threads;
    InvertedIndex thread_index;
    IdfMap idf;
    EmbeddingStore store;
    AntonymDictionary antonyms;
    Preprocessor preprocessor;
    EmbeddingConfig embedding;
};

struct RankedAnswer {
    PostId answer_id = 0;
    PostId thread_id = 0;
    double score = 0.0;
    std::string answer_body;   // original HTML
    std::string parent_title;  // original text
    FeatureVector features;
};

struct StageCounts {
    std::size_t bm25_threads = 0;
    std::size_t after_thread_antonyms = 0;
    std::size_t stage1 = 0;
    std::size_t stage2 = 0;
    std::size_t answer_pool = 0;
    std::size_t answer_bm25 = 0;
    std::size_t after_answer_antonyms = 0;
    std::size_t returned = 0;
};

struct ThreadDiagnostic {
    PostId thread_id = 0;
    double bm25 = 0.0;
    double stage1_score = 0.0;
    std::optional<double> stage2_score;
    FeatureVector features;
};

struct AnswerDiagnostic {
    PostId answer_id = 0;
    PostId thread_id = 0;
    double bm25 = 0.0;
    double score = 0.0;
    FeatureVector features;
};

/// Per-stage survivors and per-feature scores of every scored candidate.
struct SearchDiagnostics {
    StageCounts counts;
    std::vector<PostId> bm25_threads;   // BM25 order
    std::vector<PostId> stage1_threads; // stage-1 order
    std::vector<PostId> stage2_threads; // stage-2 order
    std::vector<PostId> answer_candidates;
    std::vector<ThreadDiagnostic> threads;
    std::vector<AnswerDiagnostic> answers;
    std::string top_method;
    std::size_t top_method_frequency = 0;
    bool self_antonymous = false;
    std::vector<std::string> notes;
};

struct SearchResult {
    std::string query;
    WordSet query_words;
    std::vector<RankedAnswer> answers;  // score desc, answer id asc
    SearchDiagnostics diagnostics;

    [[nodiscard]] nlohmann::json to_json(bool explain = false) const;
};

class SearchEngine {
   public:
    explicit SearchEngine(EngineData data);

    /// Runs the full funnel: BM25 over threads, optional thread antonym
    /// filter, stage-1 and stage-2 thread ranking, per-query answer index,
    /// BM25 over answers, optional answer antonym filter, answer ranking.
    /// Returns at most `final_n` answers.
    [[nodiscard]] SearchResult search(std::string_view query, WeightConfig const &config,
                                      std::size_t final_n) const;
    [[nodiscard]] SearchResult search(std::string_view query, WeightConfig const &config) const
    {
        return search(query, config, config.funnel.final_n);
    }

    [[nodiscard]] EngineData const &data() const noexcept { return data_; }
    [[nodiscard]] Thread const *thread(PostId id) const;

   private:
    EngineData data_;
    std::unordered_map<PostId, std::size_t> thread_pos_;
};

/// Named pipeline variants. Grammar:
///   Template | Template-Without-SF | Template-SF-<S>[-<S>...] (S in TAS, QS, AC, or All)
///   Template-Ant-<NN|VB|NN_VB>-<TR|ANS|TR_ANS>[|SF-<S>[-<S>...]]
///   CRAR (alias "CRAR (Sent2Vec)") = Template-Ant-NN-ANS|SF-All
///   CRAR Without <feature>, and single-feature baselines
///   (see baseline_names() for the full list).
/// Throws ConfigError listing valid names for anything else.
[[nodiscard]] WeightConfig configure_ablation(std::string_view name);

/// Every documented baseline name.
[[nodiscard]] std::vector<std::string> const &baseline_names();

}  // namespace threadrank
