#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "threadrank/common.hpp"
#include "threadrank/corpus.hpp"

namespace threadrank {

struct Posting {
    PostId doc = 0;
    std::uint32_t tf = 0;

    friend bool operator==(Posting const &, Posting const &) = default;
};

struct Bm25Params {
    double k = 1.2;
    double b = 0.9;
};

struct IndexStats {
    std::uint64_t doc_count = 0;
    std::uint64_t total_length = 0;
    double avgdl = 0.0;
    double k = 1.2;
    double b = 0.9;
};

/// A document as the index sees it: an id plus its bag of words.
struct IndexedDocument {
    PostId id = 0;
    TermCounts terms;
};

struct ScoredDoc {
    PostId id = 0;
    double score = 0.0;

    friend bool operator==(ScoredDoc const &, ScoredDoc const &) = default;
};

/// Term-at-a-time BM25 index with log10(N/df) term weights. Postings are kept
/// sorted by document id, so equal content always yields equal bytes.
class InvertedIndex {
   public:
    explicit InvertedIndex(Bm25Params params = {});

    [[nodiscard]] static InvertedIndex build(std::vector<IndexedDocument> const &docs, Bm25Params params = {});

    /// Throws std::invalid_argument on a duplicate id.
    void add(IndexedDocument const &doc);

    /// Highest-scoring documents first; ties by ascending id. Only documents
    /// containing at least one query term are returned; such a document may
    /// score 0 when all its matched terms occur in every document. Empty query
    /// or top_n == 0 gives an empty result.
    [[nodiscard]] std::vector<ScoredDoc> search(WordSet const &query, std::size_t top_n) const;

    /// BM25 score of one document (0 for unknown ids).
    [[nodiscard]] double score(PostId doc, WordSet const &query) const;

    [[nodiscard]] IndexStats const &stats() const noexcept { return stats_; }
    [[nodiscard]] std::uint32_t df(std::string_view term) const;
    [[nodiscard]] std::uint32_t doc_length(PostId doc) const;
    [[nodiscard]] std::span<Posting const> postings(std::string_view term) const;
    [[nodiscard]] std::map<PostId, std::uint32_t> const &doc_lengths() const noexcept { return doc_len_; }
    [[nodiscard]] std::size_t term_count() const noexcept { return postings_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return doc_len_.size(); }
    [[nodiscard]] bool empty() const noexcept { return doc_len_.empty(); }

    /// Binary format: magic, format version, preprocessing tag, JSON metadata,
    /// BM25 parameters, document lengths, postings. All integers little-endian.
    [[nodiscard]] std::string serialize(nlohmann::json const &metadata = nlohmann::json::object()) const;
    void save(std::filesystem::path const &path, nlohmann::json const &metadata = nlohmann::json::object()) const;

    struct Loaded;
    /// Throws DataError on a bad magic, a different format version or a
    /// different preprocessing tag.
    [[nodiscard]] static Loaded deserialize(std::string_view bytes);
    [[nodiscard]] static Loaded load(std::filesystem::path const &path);

   private:
    [[nodiscard]] double term_weight(double idf, std::uint32_t tf, std::uint32_t len) const;
    void refresh_avgdl();

    IndexStats stats_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::map<PostId, std::uint32_t> doc_len_;
};

struct InvertedIndex::Loaded {
    InvertedIndex index;
    nlohmann::json metadata;
};

/// Thread document: title + question body + retained answers' bodies and code.
[[nodiscard]] IndexedDocument thread_document(Thread const &thread);

/// Answer document: answer body + code + parent title + parent body.
[[nodiscard]] IndexedDocument answer_document(ProcessedPost const &answer, Thread const &parent);

/// Persistent thread index over the whole store.
[[nodiscard]] InvertedIndex build_thread_index(std::span<Thread const> threads, Bm25Params params = {});

/// Per-query index over the retained answers of the given threads. Statistics
/// cover only this collection.
[[nodiscard]] InvertedIndex build_ephemeral_answer_index(std::span<Thread const *const> threads,
                                                         Bm25Params params = {});

}  // namespace threadrank
