#include "threadrank/index_dir.hpp"

#include <fstream>
#include <sstream>

namespace threadrank {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestFormat = "threadrank-index";
constexpr int kManifestVersion = 1;

std::string hex64(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

void write_text(fs::path const &path, std::string const &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string read_text(fs::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("index directory is missing '" + path.filename().string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void append_line(std::string &out, std::vector<std::string> const &tokens)
{
    bool first = true;
    for (auto const &t : tokens) {
        if (!first) out += ' ';
        out += t;
        first = false;
    }
    out += '\n';
}

void append_tokens(std::vector<std::string> &into, std::vector<std::string> &&more)
{
    into.insert(into.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

std::vector<std::string> post_tokens(Preprocessor const &pre, std::string const &title, std::string const &body)
{
    auto tokens = pre.tokens(title, PreprocessMode::corpus);
    auto parts = separate_code(body);
    append_tokens(tokens, pre.tokens(parts.prose, PreprocessMode::corpus));
    append_tokens(tokens, pre.tokens(parts.code, PreprocessMode::corpus));
    return tokens;
}

}  // namespace

WordSet thread_content_words(Thread const &thread)
{
    WordSet words;
    auto take = [&](TermCounts const &bag) {
        for (auto const &[w, _] : bag) words.insert(w);
    };
    take(thread.question.title_bag);
    take(thread.question.body_bag);
    take(thread.question.code_bag);
    for (auto const &a : thread.answers) {
        take(a.body_bag);
        take(a.code_bag);
    }
    return words;
}

EngineData build_engine_data(std::vector<Thread> threads, Preprocessor preprocessor, AntonymDictionary antonyms,
                             BuildOptions const &options)
{
    IdfMap idf;
    for (auto const &t : threads) {
        idf.add_document(thread_content_words(t));
    }

    EmbeddingConfig emb;
    emb.seed = options.seed;
    std::optional<EmbeddingStore> store;
    if (options.word_vectors) {
        store = EmbeddingStore::load_word_vectors(*options.word_vectors);
        emb.word_model = ModelKind::skipgram_words;
    } else {
        store = EmbeddingStore::fallback(idf.vocabulary(), options.seed, options.dim);
        emb.word_model = ModelKind::fallback_hash;
    }
    emb.dim = store->dim();

    if (options.sentence_vectors) {
        store->load_sentence_vectors(*options.sentence_vectors);
        emb.sentence_model = ModelKind::sent2vec_titles;
    } else {
        for (auto const &t : threads) {
            store->set_sentence(t.id(), embed_sentence(to_set(t.question.title_bag), *store, idf));
        }
        emb.sentence_model = ModelKind::mean_of_words;
    }

    auto index = build_thread_index(threads, options.bm25);
    return EngineData{std::move(threads), std::move(index),        std::move(idf),
                      std::move(*store),   std::move(antonyms), std::move(preprocessor), emb};
}

void save_index_dir(fs::path const &dir, EngineData const &data, nlohmann::json const &build_stats)
{
    fs::create_directories(dir);
    auto const fingerprint = hex64(data.preprocessor.fingerprint());

    std::size_t answers = 0;
    for (auto const &t : data.threads) answers += t.answers.size();

    nlohmann::json manifest{{"format", kManifestFormat},
                            {"version", kManifestVersion},
                            {"preprocessing", kPreprocessingVersion},
                            {"stopword_fingerprint", fingerprint},
                            {"embedding", data.embedding.to_json()},
                            {"bm25", {{"k", data.thread_index.stats().k}, {"b", data.thread_index.stats().b}}},
                            {"counts",
                             {{"threads", data.threads.size()},
                              {"answers", answers},
                              {"vocabulary", data.idf.vocabulary_size()},
                              {"index_terms", data.thread_index.term_count()},
                              {"antonym_entries", data.antonyms.size()}}},
                            {"build", build_stats}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    save_threads(dir / "threads.jsonl", data.threads);
    data.thread_index.save(dir / "threads.idx",
                           {{"embedding", data.embedding.to_json()}, {"stopword_fingerprint", fingerprint}});
    data.idf.save(dir / "idf.tsv");
    data.store.save_words(dir / "words.vec");
    data.store.save_sentences(dir / "titles.vec");
    data.antonyms.save(dir / "antonyms.tsv");

    std::string stop = "# stop words used to build this index\n";
    for (auto const &w : data.preprocessor.stop_words()) stop += w + "\n";
    write_text(dir / "stopwords.txt", stop);

    std::string titles;
    std::string contents;
    for (auto const &t : data.threads) {
        append_line(titles, data.preprocessor.tokens(t.question.original_title, PreprocessMode::corpus));
        auto tokens = post_tokens(data.preprocessor, t.question.original_title, t.question.original_body);
        for (auto const &a : t.answers) {
            append_tokens(tokens, post_tokens(data.preprocessor, {}, a.original_body));
        }
        append_line(contents, tokens);
    }
    write_text(dir / "titles.txt", titles);
    write_text(dir / "contents.txt", contents);

    std::string vocabulary;
    for (auto const &w : data.idf.vocabulary()) vocabulary += w + "\n";
    write_text(dir / "vocabulary.txt", vocabulary);
}

EngineData load_index_dir(fs::path const &dir)
{
    if (!fs::is_directory(dir)) {
        throw DataError("index directory '" + dir.string() + "' does not exist");
    }
    auto manifest = nlohmann::json::parse(read_text(dir / "manifest.json"), nullptr, false);
    if (manifest.is_discarded() || manifest.value("format", "") != kManifestFormat) {
        throw DataError("'" + (dir / "manifest.json").string() + "' is not an index manifest");
    }
    if (manifest.value("version", 0) != kManifestVersion) {
        throw DataError("index manifest version is not supported; rebuild the index");
    }
    if (manifest.value("preprocessing", "") != kPreprocessingVersion) {
        throw DataError("index was built with a different preprocessing version; rebuild the index");
    }

    auto preprocessor = Preprocessor::from_file(dir / "stopwords.txt");
    auto const fingerprint = hex64(preprocessor.fingerprint());
    if (manifest.value("stopword_fingerprint", "") != fingerprint) {
        throw DataError("stop word list does not match the one the index was built with");
    }

    if (!manifest.contains("embedding")) {
        throw DataError("index manifest has no embedding config");
    }
    auto const emb = EmbeddingConfig::from_json(manifest["embedding"]);

    auto loaded = InvertedIndex::load(dir / "threads.idx");
    if (!loaded.metadata.contains("embedding") ||
        EmbeddingConfig::from_json(loaded.metadata.at("embedding")) != emb ||
        loaded.metadata.value("stopword_fingerprint", "") != fingerprint) {
        throw DataError("thread index metadata disagrees with the manifest; rebuild the index");
    }

    auto threads = load_threads(dir / "threads.jsonl");
    if (threads.size() != loaded.index.size()) {
        throw DataError("thread store and thread index disagree on the number of threads");
    }
    auto idf = IdfMap::load(dir / "idf.tsv");
    auto store = EmbeddingStore::load_word_vectors(dir / "words.vec");
    if (store.dim() != emb.dim) {
        throw DataError("word vector dim does not match the manifest");
    }
    store.load_sentence_vectors(dir / "titles.vec");
    auto antonyms = AntonymDictionary::load(dir / "antonyms.tsv");

    return EngineData{std::move(threads), std::move(loaded.index), std::move(idf),
                      std::move(store),   std::move(antonyms),     std::move(preprocessor), emb};
}

}  // namespace threadrank
