#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "threadrank/common.hpp"

namespace threadrank {

using Vector = std::vector<double>;

/// Word and title vectors. Every stored vector has exactly dim() components;
/// lookups of unknown keys return nullopt.
///
/// Text format (mirrors fastText print-word-vectors): a header line
/// `count dim`, then `key v1 ... v_dim` per line. Sentence files use integer
/// question ids as keys.
class EmbeddingStore {
   public:
    explicit EmbeddingStore(std::size_t dim = 100);

    /// Throws DataError on a missing header or any line whose component count
    /// differs from the header's dim. Duplicate words: last one wins.
    [[nodiscard]] static EmbeddingStore load_word_vectors(std::filesystem::path const &path);
    [[nodiscard]] static EmbeddingStore parse_word_vectors(std::string_view text);

    /// Adds title vectors keyed by question id. Dim must match this store.
    void load_sentence_vectors(std::filesystem::path const &path);
    void parse_sentence_vectors(std::string_view text);

    /// Deterministic store covering `vocabulary` with fallback_embed vectors.
    [[nodiscard]] static EmbeddingStore fallback(WordSet const &vocabulary, std::uint64_t seed,
                                                 std::size_t dim = 100);

    void set_word(std::string_view word, Vector vec);
    void set_sentence(PostId id, Vector vec);

    [[nodiscard]] std::optional<std::span<double const>> word(std::string_view word) const;
    [[nodiscard]] std::optional<std::span<double const>> sentence(PostId id) const;

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t word_count() const noexcept { return words_.size(); }
    [[nodiscard]] std::size_t sentence_count() const noexcept { return sentences_.size(); }

    /// Words sorted; shortest round-trip decimal formatting.
    [[nodiscard]] std::string serialize_words() const;
    [[nodiscard]] std::string serialize_sentences() const;
    void save_words(std::filesystem::path const &path) const;
    void save_sentences(std::filesystem::path const &path) const;

   private:
    std::size_t dim_;
    std::unordered_map<std::string, Vector> words_;
    std::map<PostId, Vector> sentences_;
};

/// Unit-norm pseudo-random vector from a seeded hash of `word`. Uses only
/// integer mixing and correctly rounded arithmetic, so results are identical
/// across runs and platforms.
[[nodiscard]] Vector fallback_embed(std::string_view word, std::uint64_t seed, std::size_t dim = 100);

/// dot(a, b) / (|a| |b|); 0 when either norm is 0. Throws std::invalid_argument
/// on a dimension mismatch.
[[nodiscard]] double cosine(std::span<double const> a, std::span<double const> b);

/// word -> log10(N / df). Unknown words get log10(N), as if df were 1.
class IdfMap {
   public:
    IdfMap() = default;

    void add_document(WordSet const &distinct_words);
    [[nodiscard]] static IdfMap from_documents(std::vector<WordSet> const &docs);

    [[nodiscard]] double idf(std::string_view word) const;
    [[nodiscard]] std::optional<std::uint32_t> df(std::string_view word) const;
    [[nodiscard]] std::uint64_t doc_count() const noexcept { return doc_count_; }
    [[nodiscard]] std::size_t vocabulary_size() const noexcept { return df_.size(); }
    [[nodiscard]] WordSet vocabulary() const;

    /// `N<TAB>count` header, then `word<TAB>df` lines sorted by word.
    [[nodiscard]] std::string serialize() const;
    void save(std::filesystem::path const &path) const;
    [[nodiscard]] static IdfMap load(std::filesystem::path const &path);

   private:
    std::uint64_t doc_count_ = 0;
    std::map<std::string, std::uint32_t, std::less<>> df_;
};

/// Provenance of stored vectors. mean_of_words marks title vectors computed
/// with embed_sentence() instead of being read from a file.
enum class ModelKind { skipgram_words, sent2vec_titles, fallback_hash, mean_of_words };

[[nodiscard]] std::string_view to_string(ModelKind kind);
[[nodiscard]] ModelKind parse_model_kind(std::string_view text);

struct EmbeddingConfig {
    ModelKind word_model = ModelKind::fallback_hash;
    ModelKind sentence_model = ModelKind::fallback_hash;
    std::size_t dim = 100;
    int ngrams = 3;
    std::uint64_t seed = 42;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static EmbeddingConfig from_json(nlohmann::json const &j);
    friend bool operator==(EmbeddingConfig const &, EmbeddingConfig const &) = default;
};

struct SimilarityOptions {
    /// Negative word cosines count as 0 inside asym.
    bool clamp_negative = true;
};

/// IDF-weighted mean of the word vectors of `words`. Words without a vector
/// are skipped; the result is all zeros when none is embedded.
[[nodiscard]] Vector embed_sentence(WordSet const &words, EmbeddingStore const &store, IdfMap const &idf);

/// Cosine between a query sentence vector and the stored title vector of
/// `question_id`; 0 when no title vector is stored.
[[nodiscard]] double sentence_similarity(std::span<double const> query_vec, PostId question_id,
                                         EmbeddingStore const &store);

/// Directional relevance of `from` toward `to`: the IDF-weighted mean over
/// words w of `from` of max cosine(w, w') for w' in `to`. Words without a
/// vector contribute 0 to the numerator; 0 when the IDF mass is 0.
[[nodiscard]] double asym(WordSet const &from, WordSet const &to, EmbeddingStore const &store,
                          IdfMap const &idf, SimilarityOptions opts = {});

/// Harmonic mean of asym(q -> t) and asym(t -> q); 0 when either is 0.
[[nodiscard]] double asym_score(WordSet const &q, WordSet const &t, EmbeddingStore const &store,
                                IdfMap const &idf, SimilarityOptions opts = {});

}  // namespace threadrank
