#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "threadrank/pipeline.hpp"

namespace threadrank {

struct BuildOptions {
    std::optional<std::filesystem::path> word_vectors;      // fastText-style text file
    std::optional<std::filesystem::path> sentence_vectors;  // keyed by question id
    std::uint64_t seed = 42;
    std::size_t dim = 100;  // fallback embedder only
    Bm25Params bm25{};
};

/// Offline steps after thread reconstruction: IDF vocabulary over whole-thread
/// contents, word vectors (loaded or fallback), title vectors (loaded or the
/// IDF-weighted mean of the title's word vectors) and the thread index.
[[nodiscard]] EngineData build_engine_data(std::vector<Thread> threads, Preprocessor preprocessor,
                                           AntonymDictionary antonyms, BuildOptions const &options);

/// Distinct words of a thread's full content (title, bodies and code of the
/// question and its retained answers).
[[nodiscard]] WordSet thread_content_words(Thread const &thread);

/// Writes the index directory:
///   manifest.json     format tag, versions, embedding config, counts
///   threads.jsonl     thread store
///   threads.idx       thread inverted index
///   idf.tsv           document frequencies
///   words.vec         word vectors
///   titles.vec        title vectors
///   stopwords.txt     stop word list used at build time
///   antonyms.tsv      antonym dictionary
///   titles.txt        preprocessed titles, one per line
///   contents.txt      preprocessed threads, one per line
///   vocabulary.txt    distinct words, one per line
/// Every file is a pure function of the inputs.
void save_index_dir(std::filesystem::path const &dir, EngineData const &data,
                    nlohmann::json const &build_stats = nlohmann::json::object());

/// Loads and cross-checks an index directory. Throws DataError for missing
/// files, unknown format versions, a preprocessing tag or stop word list that
/// differs from the one the index was built with, or an embedding config that
/// disagrees with the index metadata.
[[nodiscard]] EngineData load_index_dir(std::filesystem::path const &dir);

}  // namespace threadrank
