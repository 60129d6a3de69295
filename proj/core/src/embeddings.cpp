#include "threadrank/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace threadrank {

namespace {

std::string read_file(std::filesystem::path const &path, char const *what)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(std::string("cannot open ") + what + " '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(std::filesystem::path const &path, std::string const &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << content;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T &out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

void append_double(std::string &out, double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

/// Calls `row(key, values)` for every data line; returns the header dim.
template <typename RowFn>
std::size_t parse_vector_text(std::string_view text, std::optional<std::size_t> expected_dim, RowFn &&row)
{
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::optional<std::size_t> dim;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        auto fields = split_ws(line);
        if (fields.empty()) {
            continue;
        }
        if (!dim) {
            std::size_t count = 0;
            std::size_t d = 0;
            if (fields.size() != 2 || !parse_number(fields[0], count) || !parse_number(fields[1], d) || d == 0) {
                throw DataError("vector file: line 1 must be the header 'count dim'");
            }
            if (expected_dim && *expected_dim != d) {
                throw DataError("vector file: dim " + std::to_string(d) + " does not match store dim " +
                                std::to_string(*expected_dim));
            }
            dim = d;
            continue;
        }
        if (fields.size() != *dim + 1) {
            throw DataError("vector file line " + std::to_string(line_no) + ": expected " +
                            std::to_string(*dim) + " components, found " + std::to_string(fields.size() - 1));
        }
        Vector v(*dim);
        for (std::size_t i = 0; i < *dim; ++i) {
            if (!parse_number(fields[i + 1], v[i]) || !std::isfinite(v[i])) {
                throw DataError("vector file line " + std::to_string(line_no) + ": bad number '" +
                                std::string(fields[i + 1]) + "'");
            }
        }
        row(fields[0], std::move(v), line_no);
    }
    if (!dim) {
        throw DataError("vector file: missing header");
    }
    return *dim;
}

std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim)
{
    if (dim_ == 0) {
        throw std::invalid_argument("embedding dim must be positive");
    }
}

EmbeddingStore EmbeddingStore::parse_word_vectors(std::string_view text)
{
    std::unordered_map<std::string, Vector> words;
    auto dim = parse_vector_text(text, std::nullopt, [&](std::string_view key, Vector v, std::size_t line) {
        auto [it, inserted] = words.insert_or_assign(std::string(key), std::move(v));
        if (!inserted) {
            spdlog::warn("word vectors line {}: duplicate word '{}', keeping the last", line, key);
        }
    });
    EmbeddingStore store(dim);
    store.words_ = std::move(words);
    return store;
}

EmbeddingStore EmbeddingStore::load_word_vectors(std::filesystem::path const &path)
{
    return parse_word_vectors(read_file(path, "word vectors"));
}

void EmbeddingStore::parse_sentence_vectors(std::string_view text)
{
    parse_vector_text(text, dim_, [&](std::string_view key, Vector v, std::size_t line) {
        PostId id = 0;
        if (!parse_number(key, id) || id <= 0) {
            throw DataError("sentence vectors line " + std::to_string(line) + ": key '" + std::string(key) +
                            "' is not a question id");
        }
        sentences_.insert_or_assign(id, std::move(v));
    });
}

void EmbeddingStore::load_sentence_vectors(std::filesystem::path const &path)
{
    parse_sentence_vectors(read_file(path, "sentence vectors"));
}

EmbeddingStore EmbeddingStore::fallback(WordSet const &vocabulary, std::uint64_t seed, std::size_t dim)
{
    EmbeddingStore store(dim);
    store.words_.reserve(vocabulary.size());
    for (auto const &word : vocabulary) {
        store.words_.emplace(word, fallback_embed(word, seed, dim));
    }
    return store;
}

void EmbeddingStore::set_word(std::string_view word, Vector vec)
{
    if (vec.size() != dim_) {
        throw std::invalid_argument("word vector has wrong dimension");
    }
    words_.insert_or_assign(std::string(word), std::move(vec));
}

void EmbeddingStore::set_sentence(PostId id, Vector vec)
{
    if (vec.size() != dim_) {
        throw std::invalid_argument("sentence vector has wrong dimension");
    }
    sentences_.insert_or_assign(id, std::move(vec));
}

std::optional<std::span<double const>> EmbeddingStore::word(std::string_view word) const
{
    auto it = words_.find(std::string(word));
    if (it == words_.end()) {
        return std::nullopt;
    }
    return std::span<double const>(it->second);
}

std::optional<std::span<double const>> EmbeddingStore::sentence(PostId id) const
{
    auto it = sentences_.find(id);
    if (it == sentences_.end()) {
        return std::nullopt;
    }
    return std::span<double const>(it->second);
}

std::string EmbeddingStore::serialize_words() const
{
    std::vector<std::string const *> keys;
    keys.reserve(words_.size());
    for (auto const &[word, _] : words_) {
        keys.push_back(&word);
    }
    std::sort(keys.begin(), keys.end(), [](auto a, auto b) { return *a < *b; });

    std::string out = std::to_string(words_.size()) + " " + std::to_string(dim_) + "\n";
    for (auto const *key : keys) {
        out += *key;
        for (double v : words_.at(*key)) {
            out += ' ';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

std::string EmbeddingStore::serialize_sentences() const
{
    std::string out = std::to_string(sentences_.size()) + " " + std::to_string(dim_) + "\n";
    for (auto const &[id, vec] : sentences_) {
        out += std::to_string(id);
        for (double v : vec) {
            out += ' ';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

void EmbeddingStore::save_words(std::filesystem::path const &path) const { write_file(path, serialize_words()); }

void EmbeddingStore::save_sentences(std::filesystem::path const &path) const
{
    write_file(path, serialize_sentences());
}

Vector fallback_embed(std::string_view word, std::uint64_t seed, std::size_t dim)
{
    std::uint64_t state = fnv1a(word) ^ (seed * 0xd6e8feb86659fd93ULL);
    Vector v(dim);
    double norm2 = 0.0;
    for (auto &x : v) {
        // 53 random bits -> [-1, 1); exact in binary64.
        x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
        norm2 += x * x;
    }
    if (norm2 == 0.0) {
        v[0] = 1.0;
        return v;
    }
    double const norm = std::sqrt(norm2);
    for (auto &x : v) {
        x /= norm;
    }
    return v;
}

double cosine(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void IdfMap::add_document(WordSet const &distinct_words)
{
    ++doc_count_;
    for (auto const &word : distinct_words) {
        ++df_[word];
    }
}

IdfMap IdfMap::from_documents(std::vector<WordSet> const &docs)
{
    IdfMap map;
    for (auto const &doc : docs) {
        map.add_document(doc);
    }
    return map;
}

double IdfMap::idf(std::string_view word) const
{
    if (doc_count_ == 0) {
        return 0.0;
    }
    auto it = df_.find(word);
    double const df = it == df_.end() ? 1.0 : static_cast<double>(it->second);
    return std::log10(static_cast<double>(doc_count_) / df);
}

std::optional<std::uint32_t> IdfMap::df(std::string_view word) const
{
    auto it = df_.find(word);
    if (it == df_.end()) {
        return std::nullopt;
    }
    return it->second;
}

WordSet IdfMap::vocabulary() const
{
    WordSet out;
    for (auto const &[word, _] : df_) {
        out.insert(out.end(), word);
    }
    return out;
}

std::string IdfMap::serialize() const
{
    std::string out = "N\t" + std::to_string(doc_count_) + "\n";
    for (auto const &[word, df] : df_) {
        out += word;
        out += '\t';
        out += std::to_string(df);
        out += '\n';
    }
    return out;
}

void IdfMap::save(std::filesystem::path const &path) const { write_file(path, serialize()); }

IdfMap IdfMap::load(std::filesystem::path const &path)
{
    auto text = read_file(path, "IDF map");
    std::istringstream in(text);
    std::string line;
    IdfMap map;
    if (!std::getline(in, line) || line.rfind("N\t", 0) != 0 ||
        !parse_number(std::string_view(line).substr(2), map.doc_count_)) {
        throw DataError("IDF map '" + path.string() + "': missing 'N' header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        std::uint32_t df = 0;
        if (tab == std::string::npos || !parse_number(std::string_view(line).substr(tab + 1), df) || df == 0 ||
            df > map.doc_count_) {
            throw DataError("IDF map '" + path.string() + "': bad line '" + line + "'");
        }
        map.df_.emplace(line.substr(0, tab), df);
    }
    return map;
}

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
        case ModelKind::skipgram_words: return "skipgram_words";
        case ModelKind::sent2vec_titles: return "sent2vec_titles";
        case ModelKind::fallback_hash: return "fallback_hash";
        case ModelKind::mean_of_words: return "mean_of_words";
    }
    return "fallback_hash";
}

ModelKind parse_model_kind(std::string_view text)
{
    if (text == "skipgram_words") return ModelKind::skipgram_words;
    if (text == "sent2vec_titles") return ModelKind::sent2vec_titles;
    if (text == "fallback_hash") return ModelKind::fallback_hash;
    if (text == "mean_of_words") return ModelKind::mean_of_words;
    throw DataError("unknown embedding model kind '" + std::string(text) + "'");
}

nlohmann::json EmbeddingConfig::to_json() const
{
    return {{"word_model", to_string(word_model)},
            {"sentence_model", to_string(sentence_model)},
            {"dim", dim},
            {"ngrams", ngrams},
            {"seed", seed}};
}

EmbeddingConfig EmbeddingConfig::from_json(nlohmann::json const &j)
{
    EmbeddingConfig c;
    try {
        c.word_model = parse_model_kind(j.at("word_model").get<std::string>());
        c.sentence_model = parse_model_kind(j.at("sentence_model").get<std::string>());
        c.dim = j.at("dim").get<std::size_t>();
        c.ngrams = j.at("ngrams").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
    } catch (nlohmann::json::exception const &e) {
        throw DataError(std::string("bad embedding config: ") + e.what());
    }
    return c;
}

Vector embed_sentence(WordSet const &words, EmbeddingStore const &store, IdfMap const &idf)
{
    Vector out(store.dim(), 0.0);
    double weight_sum = 0.0;
    for (auto const &word : words) {
        auto vec = store.word(word);
        if (!vec) {
            continue;
        }
        double const w = idf.idf(word);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += w * (*vec)[i];
        }
        weight_sum += w;
    }
    if (weight_sum > 0.0) {
        for (auto &x : out) {
            x /= weight_sum;
        }
    }
    return out;
}

double sentence_similarity(std::span<double const> query_vec, PostId question_id, EmbeddingStore const &store)
{
    auto title = store.sentence(question_id);
    if (!title) {
        spdlog::warn("no title vector for question {}", question_id);
        return 0.0;
    }
    return cosine(query_vec, *title);
}

namespace {

struct EmbeddedWord {
    std::string_view text;
    std::optional<std::span<double const>> vec;
    double norm = 0.0;
    double idf = 0.0;
};

std::vector<EmbeddedWord> embed_words(WordSet const &words, EmbeddingStore const &store, IdfMap const &idf)
{
    std::vector<EmbeddedWord> out;
    out.reserve(words.size());
    for (auto const &word : words) {
        EmbeddedWord e{word, store.word(word), 0.0, idf.idf(word)};
        if (e.vec) {
            double n2 = 0.0;
            for (double x : *e.vec) n2 += x * x;
            e.norm = std::sqrt(n2);
        }
        out.push_back(e);
    }
    return out;
}

/// sim(w, w') for embedded words. Identical words are exactly 1.
double word_sim(EmbeddedWord const &a, EmbeddedWord const &b, SimilarityOptions opts)
{
    if (a.text == b.text) {
        return 1.0;
    }
    if (a.norm == 0.0 || b.norm == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.vec->size(); ++i) {
        dot += (*a.vec)[i] * (*b.vec)[i];
    }
    double sim = std::min(1.0, dot / (a.norm * b.norm));
    return opts.clamp_negative ? std::max(0.0, sim) : std::max(-1.0, sim);
}

/// Best similarity of each `from` word against `to`; nullopt for words without
/// a vector or when `to` has no embedded word.
std::vector<std::optional<double>> best_matches(std::vector<EmbeddedWord> const &from,
                                                std::vector<EmbeddedWord> const &to, SimilarityOptions opts)
{
    std::vector<std::optional<double>> best(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (!from[i].vec) continue;
        for (auto const &t : to) {
            if (!t.vec) continue;
            double s = word_sim(from[i], t, opts);
            if (!best[i] || s > *best[i]) best[i] = s;
        }
    }
    return best;
}

double weighted_relevance(std::vector<EmbeddedWord> const &from, std::vector<std::optional<double>> const &best)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        num += best[i].value_or(0.0) * from[i].idf;
        den += from[i].idf;
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

double asym(WordSet const &from, WordSet const &to, EmbeddingStore const &store, IdfMap const &idf,
            SimilarityOptions opts)
{
    auto f = embed_words(from, store, idf);
    auto t = embed_words(to, store, idf);
    return weighted_relevance(f, best_matches(f, t, opts));
}

double asym_score(WordSet const &q, WordSet const &t, EmbeddingStore const &store, IdfMap const &idf,
                  SimilarityOptions opts)
{
    auto qe = embed_words(q, store, idf);
    auto te = embed_words(t, store, idf);
    double const forward = weighted_relevance(qe, best_matches(qe, te, opts));
    double const backward = weighted_relevance(te, best_matches(te, qe, opts));
    double const sum = forward + backward;
    if (forward == 0.0 || backward == 0.0 || sum == 0.0) {
        return 0.0;
    }
    return 2.0 * forward * backward / sum;
}

}  // namespace threadrank
