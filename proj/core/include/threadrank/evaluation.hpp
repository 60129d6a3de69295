#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "threadrank/common.hpp"
#include "threadrank/pipeline.hpp"

namespace threadrank {

/// Cutoff meaning "the whole ranking".
inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct TruthEntry {
    std::string query_text;
    std::set<PostId> relevant;  // non-empty
};

/// query_id -> entry. JSON Lines:
///   {"query_id": "...", "query_text": "...", "relevant_answer_ids": [1, 2]}
/// query_id may be a string or an integer; it is kept as text.
class GroundTruth {
   public:
    GroundTruth() = default;

    /// Throws DataError on duplicate ids, non-positive answer ids or an empty
    /// relevant set.
    void add(std::string query_id, TruthEntry entry);

    [[nodiscard]] static GroundTruth parse(std::string_view jsonl);
    [[nodiscard]] static GroundTruth load(std::filesystem::path const &path);

    [[nodiscard]] std::map<std::string, TruthEntry> const &entries() const noexcept { return entries_; }
    [[nodiscard]] bool contains(std::string_view id) const { return entries_.find(std::string(id)) != entries_.end(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

   private:
    std::map<std::string, TruthEntry> entries_;
};

/// query_id -> ranked answer ids. JSON Lines:
///   {"query_id": "...", "ranked_answer_ids": [..]}
using Rankings = std::map<std::string, std::vector<PostId>>;

[[nodiscard]] Rankings parse_rankings(std::string_view jsonl);
[[nodiscard]] Rankings load_rankings(std::filesystem::path const &path);
[[nodiscard]] std::string serialize_rankings(Rankings const &rankings);

struct QueryMetrics {
    double hit = 0.0;
    double rr = 0.0;
    double ap = 0.0;
    double recall = 0.0;
};

struct MetricsReport {
    std::size_t k = 10;
    std::map<std::string, QueryMetrics> per_query;
    double hit = 0.0;
    double mrr = 0.0;
    double map = 0.0;
    double mr = 0.0;

    [[nodiscard]] double sum() const noexcept { return hit + mrr + map + mr; }
};

/// Metrics of one ranking against one relevant set at cutoff k.
[[nodiscard]] QueryMetrics query_metrics(std::vector<PostId> const &ranking, std::set<PostId> const &relevant,
                                         std::size_t k);

/// Means over every truth query; queries absent from `results` score 0.
/// Throws DataError when `results` holds a query id unknown to `truth`.
[[nodiscard]] MetricsReport evaluate(Rankings const &results, GroundTruth const &truth, std::size_t k = 10);

struct AblationRow {
    std::string baseline;
    MetricsReport report;
    Rankings rankings;
};

/// Runs every named baseline over every truth query. Rows are sorted by the
/// sum of the four metrics ascending, then by name.
[[nodiscard]] std::vector<AblationRow> run_ablation_grid(SearchEngine const &engine,
                                                         std::vector<std::string> const &baselines,
                                                         GroundTruth const &truth, std::size_t k = 10);

/// `Baseline,Hit,MRR,MAP,MR` header plus one row per baseline, values with
/// six decimals.
[[nodiscard]] std::string metrics_csv(std::vector<AblationRow> const &rows);

}  // namespace threadrank
