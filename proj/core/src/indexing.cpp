#include "threadrank/indexing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace threadrank {

namespace {

constexpr std::string_view kMagic{"TRIDX\0\0\0", 8};
constexpr std::uint32_t kIndexFormatVersion = 1;

class ByteWriter {
   public:
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s)
    {
        u64(s.size());
        out_.append(s);
    }
    void raw(std::string_view s) { out_.append(s); }
    [[nodiscard]] std::string take() { return std::move(out_); }

   private:
    std::string out_;
};

class ByteReader {
   public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t uint(int width)
    {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string_view raw(std::size_t n)
    {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string str() { return std::string(raw(u64())); }
    [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

   private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n) {
            throw DataError("index file is truncated");
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

InvertedIndex::InvertedIndex(Bm25Params params)
{
    if (params.k < 0.0 || params.b < 0.0 || params.b > 1.0) {
        throw std::invalid_argument("BM25 parameters out of range (k >= 0, 0 <= b <= 1)");
    }
    stats_.k = params.k;
    stats_.b = params.b;
}

InvertedIndex InvertedIndex::build(std::vector<IndexedDocument> const &docs, Bm25Params params)
{
    InvertedIndex index(params);
    for (auto const &doc : docs) {
        index.add(doc);
    }
    return index;
}

void InvertedIndex::add(IndexedDocument const &doc)
{
    if (doc_len_.count(doc.id) != 0) {
        throw std::invalid_argument("duplicate document id " + std::to_string(doc.id));
    }
    std::uint64_t len = 0;
    for (auto const &[term, tf] : doc.terms) {
        if (tf == 0) continue;
        auto &list = postings_[term];
        Posting p{doc.id, tf};
        if (list.empty() || list.back().doc < doc.id) {
            list.push_back(p);
        } else {
            auto at = std::lower_bound(list.begin(), list.end(), doc.id,
                                       [](Posting const &x, PostId id) { return x.doc < id; });
            list.insert(at, p);
        }
        len += tf;
    }
    doc_len_.emplace(doc.id, static_cast<std::uint32_t>(len));
    ++stats_.doc_count;
    stats_.total_length += len;
    refresh_avgdl();
}

void InvertedIndex::refresh_avgdl()
{
    stats_.avgdl = stats_.doc_count == 0
                       ? 0.0
                       : static_cast<double>(stats_.total_length) / static_cast<double>(stats_.doc_count);
}

std::uint32_t InvertedIndex::df(std::string_view term) const
{
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : static_cast<std::uint32_t>(it->second.size());
}

std::uint32_t InvertedIndex::doc_length(PostId doc) const
{
    auto it = doc_len_.find(doc);
    return it == doc_len_.end() ? 0 : it->second;
}

std::span<Posting const> InvertedIndex::postings(std::string_view term) const
{
    auto it = postings_.find(term);
    if (it == postings_.end()) {
        return {};
    }
    return it->second;
}

double InvertedIndex::term_weight(double idf, std::uint32_t tf, std::uint32_t len) const
{
    double const f = tf;
    double const norm = 1.0 - stats_.b + stats_.b * (static_cast<double>(len) / stats_.avgdl);
    return idf * (f * (stats_.k + 1.0)) / (f + stats_.k * norm);
}

std::vector<ScoredDoc> InvertedIndex::search(WordSet const &query, std::size_t top_n) const
{
    if (query.empty() || top_n == 0 || empty()) {
        return {};
    }
    double const n = static_cast<double>(stats_.doc_count);
    std::unordered_map<PostId, double> acc;
    for (auto const &term : query) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        double const idf = std::log10(n / static_cast<double>(it->second.size()));
        for (auto const &p : it->second) {
            acc[p.doc] += term_weight(idf, p.tf, doc_len_.at(p.doc));
        }
    }
    std::vector<ScoredDoc> out;
    out.reserve(acc.size());
    // Every document here matched a query term. Its score can still be 0
    // when each matched term occurs in all documents (log10(N/N) = 0).
    for (auto const &[doc, score] : acc) {
        out.push_back({doc, score});
    }
    auto better = [](ScoredDoc const &a, ScoredDoc const &b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    };
    if (out.size() > top_n) {
        std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(top_n), out.end(), better);
        out.resize(top_n);
    } else {
        std::sort(out.begin(), out.end(), better);
    }
    return out;
}

double InvertedIndex::score(PostId doc, WordSet const &query) const
{
    auto len_it = doc_len_.find(doc);
    if (len_it == doc_len_.end()) {
        return 0.0;
    }
    double const n = static_cast<double>(stats_.doc_count);
    double total = 0.0;
    for (auto const &term : query) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        auto const &list = it->second;
        auto p = std::lower_bound(list.begin(), list.end(), doc,
                                  [](Posting const &x, PostId id) { return x.doc < id; });
        if (p == list.end() || p->doc != doc) continue;
        double const idf = std::log10(n / static_cast<double>(list.size()));
        total += term_weight(idf, p->tf, len_it->second);
    }
    return total;
}

std::string InvertedIndex::serialize(nlohmann::json const &metadata) const
{
    ByteWriter w;
    w.raw(kMagic);
    w.u32(kIndexFormatVersion);
    w.str(kPreprocessingVersion);
    w.str(metadata.dump());
    w.f64(stats_.k);
    w.f64(stats_.b);
    w.u64(doc_len_.size());
    for (auto const &[doc, len] : doc_len_) {
        w.i64(doc);
        w.u32(len);
    }
    w.u64(postings_.size());
    for (auto const &[term, list] : postings_) {
        w.str(term);
        w.u64(list.size());
        for (auto const &p : list) {
            w.i64(p.doc);
            w.u32(p.tf);
        }
    }
    return w.take();
}

void InvertedIndex::save(std::filesystem::path const &path, nlohmann::json const &metadata) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write index '" + path.string() + "'");
    }
    out << serialize(metadata);
}

InvertedIndex::Loaded InvertedIndex::deserialize(std::string_view bytes)
{
    ByteReader r(bytes);
    if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
        throw DataError("not an index file (bad magic)");
    }
    if (auto version = r.u32(); version != kIndexFormatVersion) {
        throw DataError("index format version " + std::to_string(version) + " is not supported");
    }
    if (auto tag = r.str(); tag != kPreprocessingVersion) {
        throw DataError("index was built with preprocessing '" + tag + "', expected '" +
                        std::string(kPreprocessingVersion) + "'; rebuild it");
    }
    auto metadata = nlohmann::json::parse(r.str(), nullptr, false);
    if (metadata.is_discarded()) {
        throw DataError("index metadata is not valid JSON");
    }
    Bm25Params params;
    params.k = r.f64();
    params.b = r.f64();
    InvertedIndex index(params);

    auto const docs = r.u64();
    for (std::uint64_t i = 0; i < docs; ++i) {
        auto id = r.i64();
        auto len = r.u32();
        if (!index.doc_len_.emplace(id, len).second) {
            throw DataError("index lists document " + std::to_string(id) + " twice");
        }
        index.stats_.total_length += len;
    }
    index.stats_.doc_count = docs;
    index.refresh_avgdl();

    auto const terms = r.u64();
    for (std::uint64_t t = 0; t < terms; ++t) {
        auto term = r.str();
        auto const count = r.u64();
        std::vector<Posting> list;
        list.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) {
            Posting p{r.i64(), r.u32()};
            if (index.doc_len_.count(p.doc) == 0 || (!list.empty() && list.back().doc >= p.doc)) {
                throw DataError("corrupt postings for term '" + term + "'");
            }
            list.push_back(p);
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    if (!r.done()) {
        throw DataError("trailing bytes after index data");
    }
    return Loaded{std::move(index), std::move(metadata)};
}

InvertedIndex::Loaded InvertedIndex::load(std::filesystem::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open index '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

IndexedDocument thread_document(Thread const &thread)
{
    IndexedDocument doc{thread.id(), thread.question.title_bag};
    add_bag(doc.terms, thread.question.body_bag);
    for (auto const &answer : thread.answers) {
        add_bag(doc.terms, answer.body_bag);
        add_bag(doc.terms, answer.code_bag);
    }
    return doc;
}

IndexedDocument answer_document(ProcessedPost const &answer, Thread const &parent)
{
    IndexedDocument doc{answer.id, answer.body_bag};
    add_bag(doc.terms, answer.code_bag);
    add_bag(doc.terms, parent.question.title_bag);
    add_bag(doc.terms, parent.question.body_bag);
    return doc;
}

InvertedIndex build_thread_index(std::span<Thread const> threads, Bm25Params params)
{
    InvertedIndex index(params);
    for (auto const &thread : threads) {
        index.add(thread_document(thread));
    }
    return index;
}

InvertedIndex build_ephemeral_answer_index(std::span<Thread const *const> threads, Bm25Params params)
{
    InvertedIndex index(params);
    for (Thread const *thread : threads) {
        for (auto const &answer : thread->answers) {
            index.add(answer_document(answer, *thread));
        }
    }
    return index;
}

}  // namespace threadrank
