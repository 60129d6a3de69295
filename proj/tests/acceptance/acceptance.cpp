// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli.hpp"
#include "synth.hpp"
#include "threadrank/embeddings.hpp"
#include "threadrank/evaluation.hpp"
#include "threadrank/features.hpp"
#include "threadrank/index_dir.hpp"
#include "threadrank/indexing.hpp"
#include "threadrank/pipeline.hpp"

using namespace threadrank;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- BM25 oracle

double bm25_oracle(std::vector<TermCounts> const &docs, std::size_t doc, WordSet const &query, double k, double b)
{
    double const n = static_cast<double>(docs.size());
    double total_len = 0.0;
    for (auto const &d : docs) {
        for (auto const &[_, c] : d) total_len += c;
    }
    double const avgdl = total_len / n;
    double len = 0.0;
    for (auto const &[_, c] : docs[doc]) len += c;

    double score = 0.0;
    for (auto const &q : query) {
        double df = 0.0;
        for (auto const &d : docs) df += d.count(q) ? 1.0 : 0.0;
        auto it = docs[doc].find(q);
        if (df == 0.0 || it == docs[doc].end()) continue;
        double const f = it->second;
        double const idf = std::log10(n / df);
        score += idf * f * (k + 1.0) / (f + k * (1.0 - b + b * len / avgdl));
    }
    return score;
}

Outcome bm25_oracle_equivalence()
{
    auto const start = Clock::now();
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    std::size_t pairs = 0;
    bool order_ok = true;
    for (int corpus = 0; corpus < 200; ++corpus) {
        auto const vocab = synth::words(0, std::uniform_int_distribution<std::size_t>(1, 20)(rng));
        auto const n_docs = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
        std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
        std::vector<TermCounts> docs(n_docs);
        std::vector<IndexedDocument> indexed;
        for (std::size_t d = 0; d < n_docs; ++d) {
            auto const len = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
            for (std::size_t i = 0; i < len; ++i) ++docs[d][vocab[pick(rng)]];
            indexed.push_back({static_cast<PostId>(d + 1), docs[d]});
        }
        std::shuffle(indexed.begin(), indexed.end(), rng);
        auto const index = InvertedIndex::build(indexed);

        for (int qn = 0; qn < 10; ++qn) {
            WordSet query;
            auto const qlen = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
            for (std::size_t i = 0; i < qlen; ++i) query.insert(vocab[pick(rng)]);
            if (qn == 0) query.insert("absentterm");
            auto const hits = index.search(query, n_docs);
            std::map<PostId, double> got;
            for (auto const &h : hits) got[h.id] = h.score;
            for (std::size_t i = 1; i < hits.size(); ++i) {
                auto const &a = hits[i - 1];
                auto const &b = hits[i];
                if (a.score < b.score || (a.score == b.score && a.id > b.id)) order_ok = false;
            }
            for (std::size_t d = 0; d < n_docs; ++d) {
                bool const matches = std::any_of(query.begin(), query.end(),
                                                 [&](auto const &w) { return docs[d].count(w) > 0; });
                if (matches != (got.count(static_cast<PostId>(d + 1)) > 0)) order_ok = false;
                double const expected = bm25_oracle(docs, d, query, 1.2, 0.9);
                auto it = got.find(static_cast<PostId>(d + 1));
                double const actual = it == got.end() ? 0.0 : it->second;
                worst = std::max(worst, std::abs(expected - actual));
                worst = std::max(worst, std::abs(expected - index.score(static_cast<PostId>(d + 1), query)));
                ++pairs;
            }
        }
    }
    double const elapsed = seconds_since(start);
    return {worst <= 1e-9 && order_ok && elapsed < 10.0,
            fmt::format("{} (doc, query) pairs, max |diff| {:.3g}, ordering and membership {}, {:.2f} s", pairs, worst,
                        order_ok ? "ok" : "broken", elapsed)};
}

// ---------------------------------------------------------- similarity oracles

double dot(Vector const &a, Vector const &b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Oracle {
    EmbeddingStore const &store;
    std::vector<WordSet> const &docs;

    double idf(std::string const &w) const
    {
        double df = 0.0;
        for (auto const &d : docs) df += d.count(w) ? 1.0 : 0.0;
        return std::log10(static_cast<double>(docs.size()) / std::max(df, 1.0));
    }

    Vector vec(std::string const &w) const
    {
        auto v = store.word(w);
        return v ? Vector(v->begin(), v->end()) : Vector{};
    }

    double tf(TermCounts const &q, TermCounts const &t) const
    {
        std::set<std::string> all;
        for (auto const &[w, _] : q) all.insert(w);
        for (auto const &[w, _] : t) all.insert(w);
        double d = 0.0, nq = 0.0, nt = 0.0;
        for (auto const &w : all) {
            double const a = q.count(w) ? q.at(w) : 0.0;
            double const b = t.count(w) ? t.at(w) : 0.0;
            d += a * b;
            nq += a * a;
            nt += b * b;
        }
        return (nq == 0.0 || nt == 0.0) ? 0.0 : d / (std::sqrt(nq) * std::sqrt(nt));
    }

    double tfidf(TermCounts const &q, TermCounts const &t) const
    {
        std::set<std::string> all;
        for (auto const &[w, _] : q) all.insert(w);
        for (auto const &[w, _] : t) all.insert(w);
        double d = 0.0, nq = 0.0, nt = 0.0;
        for (auto const &w : all) {
            double const a = (q.count(w) ? q.at(w) : 0.0) * idf(w);
            double const b = (t.count(w) ? t.at(w) : 0.0) * idf(w);
            d += a * b;
            nq += a * a;
            nt += b * b;
        }
        return (nq == 0.0 || nt == 0.0) ? 0.0 : d / (std::sqrt(nq) * std::sqrt(nt));
    }

    double asym(WordSet const &from, WordSet const &to) const
    {
        double num = 0.0, den = 0.0;
        for (auto const &w : from) {
            double best = 0.0;
            auto const vw = vec(w);
            for (auto const &x : to) {
                double s = 0.0;
                if (w == x) {
                    s = 1.0;
                } else {
                    auto const vx = vec(x);
                    s = dot(vw, vx) / std::sqrt(dot(vw, vw) * dot(vx, vx));
                }
                best = std::max(best, s);
            }
            num += best * idf(w);
            den += idf(w);
        }
        return den == 0.0 ? 0.0 : num / den;
    }

    double asym_score(WordSet const &q, WordSet const &t) const
    {
        double const a = asym(q, t);
        double const b = asym(t, q);
        return (a == 0.0 || b == 0.0) ? 0.0 : 2.0 * a * b / (a + b);
    }
};

Outcome similarity_oracles()
{
    std::mt19937_64 rng(2002);
    auto const vocab = synth::words(0, 40);
    WordSet vocab_set(vocab.begin(), vocab.end());
    auto const store = EmbeddingStore::fallback(vocab_set, 42);
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);

    std::vector<WordSet> docs;
    for (int d = 0; d < 30; ++d) {
        WordSet doc;
        for (int i = 0; i < 8; ++i) doc.insert(vocab[pick(rng)]);
        docs.push_back(doc);
    }
    docs.push_back({"sentinelword"});  // keeps every df below N
    auto const idf = IdfMap::from_documents(docs);
    Oracle const oracle{store, docs};

    auto random_bag = [&](std::size_t max_words) {
        TermCounts bag;
        auto const n = std::uniform_int_distribution<std::size_t>(1, max_words)(rng);
        for (std::size_t i = 0; i < n; ++i) ++bag[vocab[pick(rng)]];
        return bag;
    };

    double worst = 0.0;
    bool symmetric = true;
    bool subset_one = true;
    bool bounded = true;
    for (int i = 0; i < 1000; ++i) {
        auto const q = random_bag(15);
        auto const t = random_bag(15);
        auto const qs = to_set(q);
        auto const ts = to_set(t);
        double const values[] = {tf_score(q, t), tfidf_score(q, t, idf), asym(qs, ts, store, idf),
                                 asym(ts, qs, store, idf), asym_score(qs, ts, store, idf)};
        double const expected[] = {oracle.tf(q, t), oracle.tfidf(q, t), oracle.asym(qs, ts), oracle.asym(ts, qs),
                                   oracle.asym_score(qs, ts)};
        for (std::size_t j = 0; j < std::size(values); ++j) {
            worst = std::max(worst, std::abs(values[j] - expected[j]));
            if (values[j] < 0.0 || values[j] > 1.0) bounded = false;
        }
        if (asym_score(qs, ts, store, idf) != asym_score(ts, qs, store, idf)) symmetric = false;
        if (tf_score(q, t) != tf_score(t, q) || tfidf_score(q, t, idf) != tfidf_score(t, q, idf)) symmetric = false;

        WordSet superset = ts;
        superset.insert(qs.begin(), qs.end());
        if (asym(qs, superset, store, idf) != 1.0) subset_one = false;
    }
    return {worst <= 1e-9 && symmetric && subset_one && bounded,
            fmt::format("1000 bag pairs, max |diff| {:.3g}, symmetry {}, Q subset of T gives 1: {}, bounds {}", worst,
                        symmetric ? "exact" : "broken", subset_one ? "always" : "not always",
                        bounded ? "ok" : "violated")};
}

// ------------------------------------------------------------ formula fixtures

Outcome ladder_and_fixtures()
{
    struct Row {
        std::int64_t lo, hi;
        double value;
    };
    // Question score ranges and values as published.
    Row const ladder[] = {{-1000, 1, 0.1}, {2, 5, 0.2},     {6, 10, 0.3},    {11, 25, 0.4},   {26, 50, 0.5},
                          {51, 75, 0.6},   {76, 100, 0.7}, {101, 200, 0.8}, {201, 500, 0.9}, {501, 100000, 1.0}};
    std::size_t rows_ok = 0;
    for (auto const &r : ladder) {
        bool ok = true;
        for (auto s : {r.lo, r.hi, (r.lo + r.hi) / 2}) ok = ok && question_score_value(s) == r.value;
        rows_ok += ok ? 1 : 0;
    }

    auto method_fixture = [](std::size_t f) {
        std::vector<std::pair<PostId, std::string>> code;
        for (std::size_t i = 0; i < f; ++i) code.emplace_back(static_cast<PostId>(i + 1), "list.sortItems(x);");
        code.emplace_back(100, "int y = 0;");
        auto const top = top_method_score(code, 10.0);
        return std::make_pair(top.scores.at(1), top.scores.at(100));
    };
    auto const [m1, z1] = method_fixture(1);
    auto const [m2, z2] = method_fixture(2);
    auto const [m8, z8] = method_fixture(8);
    bool const methods_ok = m1 == 0.0 && m2 == 0.1 && m8 == 0.3 && z1 == 0.0 && z2 == 0.0 && z8 == 0.0;

    AntonymDictionary dict;
    dict.add("fill", PosTag::both, {"empty"});
    dict.add("zip", PosTag::both, {"unzip"});
    dict.close_symmetric();
    Preprocessor pre;
    auto const fill_ctx = antonym_context(dict, pre.query_bag("fill array"), PosMode::NN);
    auto const fill_score = antonyms_score(fill_ctx, pre.bag("check whether an array is empty"));
    auto const zip_ctx = antonym_context(dict, pre.query_bag("zip unzip file"), PosMode::NN);
    auto const zip_score = antonyms_score(zip_ctx, pre.bag("unzip a zip file"));
    bool const antonyms_ok = fill_score == 1 && zip_score == 0 && zip_ctx.self_antonymous;

    return {rows_ok == 10 && methods_ok && antonyms_ok,
            fmt::format("ladder rows {}/10, top method f=1,2,8 -> {}, {}, {}, fill/empty -> {}, zip/unzip -> {}",
                        rows_ok, m1, m2, m8, fill_score, zip_score)};
}

// -------------------------------------------------------------- metric fixture

struct BruteMetrics {
    double hit = 0, rr = 0, ap = 0, recall = 0;
};

BruteMetrics brute_metrics(std::vector<PostId> const &ranking, std::set<PostId> const &relevant, std::size_t k)
{
    BruteMetrics m;
    std::size_t const depth = std::min(k, ranking.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < depth; ++i) {
        if (!relevant.count(ranking[i])) continue;
        if (hits == 0) m.rr = 1.0 / static_cast<double>(i + 1);
        std::size_t rel_upto = 0;
        for (std::size_t j = 0; j <= i; ++j) rel_upto += relevant.count(ranking[j]);
        m.ap += static_cast<double>(rel_upto) / static_cast<double>(i + 1);
        ++hits;
    }
    m.hit = hits > 0 ? 1.0 : 0.0;
    m.ap /= static_cast<double>(std::min(relevant.size(), k));
    m.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    return m;
}

Outcome metric_fixture()
{
    // Published ranking for "How to resize images in Java?": ranks 1-10 miss,
    // ranks 11, 12, 13, 20 and 107 are in the goldset.
    std::map<std::size_t, PostId> const published = {
        {1, 16076530},  {2, 32740879},  {3, 19898341}, {4, 9403763},  {5, 6586119},
        {6, 32758346},  {7, 6444133},   {8, 12204680}, {9, 9804943},  {10, 13892750},
        {11, 6585602},  {12, 6585887},  {13, 244177},  {20, 5051429}, {107, 4528136}};
    std::vector<PostId> ranking;
    for (std::size_t r = 1; r <= 107; ++r) {
        auto it = published.find(r);
        ranking.push_back(it != published.end() ? it->second : static_cast<PostId>(90000000 + r));
    }
    GroundTruth truth;
    truth.add("resize-images", {"How to resize images in Java?", {6585602, 6585887, 244177, 5051429, 4528136}});
    Rankings results{{"resize-images", ranking}};
    auto const at10 = evaluate(results, truth, 10);
    auto const at_inf = evaluate(results, truth, kUnbounded);
    bool const fixture_ok =
        at10.hit == 0.0 && at10.mrr == 0.0 && std::abs(at_inf.mrr - 1.0 / 11.0) <= 1e-12 && at_inf.hit == 1.0;

    // Random rankings against a brute-force recomputation.
    std::mt19937_64 rng(4004);
    bool exact = true;
    std::size_t checked = 0;
    for (int round = 0; round < 100; ++round) {
        GroundTruth rt;
        Rankings rr;
        std::map<std::string, std::pair<std::vector<PostId>, std::set<PostId>>> cases;
        auto const n_queries = std::uniform_int_distribution<int>(1, 100)(rng);
        for (int q = 0; q < n_queries; ++q) {
            std::vector<PostId> pool(80);
            std::iota(pool.begin(), pool.end(), 1);
            std::shuffle(pool.begin(), pool.end(), rng);
            pool.resize(std::uniform_int_distribution<std::size_t>(0, 50)(rng));
            std::set<PostId> rel;
            auto const n_rel = std::uniform_int_distribution<int>(1, 10)(rng);
            for (int i = 0; i < n_rel; ++i) rel.insert(std::uniform_int_distribution<PostId>(1, 80)(rng));
            auto const id = fmt::format("r{:03}", q);
            rt.add(id, {"query", rel});
            if (std::uniform_int_distribution<int>(0, 9)(rng) > 0) rr[id] = pool;
            cases[id] = {pool, rel};
        }
        std::size_t const ks[] = {1, 5, 10, 20, kUnbounded};
        auto const k = ks[std::uniform_int_distribution<std::size_t>(0, 4)(rng)];
        auto const report = evaluate(rr, rt, k);
        BruteMetrics sum;
        for (auto const &[id, c] : cases) {
            auto const m = brute_metrics(rr.count(id) ? c.first : std::vector<PostId>{}, c.second, k);
            auto const &got = report.per_query.at(id);
            exact = exact && got.hit == m.hit && got.rr == m.rr && got.ap == m.ap && got.recall == m.recall;
            sum.hit += m.hit;
            sum.rr += m.rr;
            sum.ap += m.ap;
            sum.recall += m.recall;
            ++checked;
        }
        double const n = static_cast<double>(cases.size());
        exact = exact && report.hit == sum.hit / n && report.mrr == sum.rr / n && report.map == sum.ap / n &&
                report.mr == sum.recall / n;
    }
    return {fixture_ok && exact,
            fmt::format("hit@10 {}, rr@10 {}, rr@inf {:.12f}; 100 random rankings ({} queries) {}", at10.hit,
                        at10.mrr, at_inf.mrr, checked, exact ? "match exactly" : "differ")};
}

// ----------------------------------------------------------- planted answers

Outcome planted_relevance()
{
    auto const corpus = synth::planted_answer_corpus(5005);
    SearchEngine const engine(synth::engine_data(corpus));
    auto const config = configure_ablation("CRAR");
    std::size_t first = 0;
    double slowest = 0.0;
    std::string misses;
    for (auto const &q : corpus.queries) {
        auto const start = Clock::now();
        auto const result = engine.search(q.text, config);
        slowest = std::max(slowest, seconds_since(start));
        if (!result.answers.empty() && q.relevant.count(result.answers.front().answer_id)) {
            ++first;
        } else {
            misses += " " + q.id;
        }
    }
    return {first == corpus.queries.size() && slowest < 5.0,
            fmt::format("{} threads, planted answer ranked first for {}/{} queries{}, slowest query {:.3f} s",
                        engine.data().threads.size(), first, corpus.queries.size(),
                        misses.empty() ? "" : " (missed:" + misses + ")", slowest)};
}

// --------------------------------------------------------- ablation direction

std::map<std::string, MetricsReport> grid(synth::Corpus const &corpus, std::vector<std::string> const &names)
{
    SearchEngine const engine(synth::engine_data(corpus));
    std::map<std::string, MetricsReport> out;
    for (auto &row : run_ablation_grid(engine, names, synth::truth_of(corpus), 10)) {
        out.emplace(row.baseline, row.report);
    }
    return out;
}

Outcome ablation_direction()
{
    auto const social = grid(synth::social_corpus(6006), {"Template", "Template-Without-SF"});
    auto const &with = social.at("Template");
    auto const &without = social.at("Template-Without-SF");
    bool const social_ok =
        with.hit > without.hit && with.mrr > without.mrr && with.map > without.map && with.mr > without.mr;

    auto const ant = grid(synth::antonym_corpus(6007), {"Template", "Template-Ant-NN-ANS"});
    bool const ant_ok = ant.at("Template-Ant-NN-ANS").mrr > ant.at("Template").mrr;

    return {social_ok && ant_ok,
            fmt::format("Template {:.3f}/{:.3f}/{:.3f}/{:.3f} vs Without-SF {:.3f}/{:.3f}/{:.3f}/{:.3f} "
                        "(Hit/MRR/MAP/MR); MRR Template {:.3f} vs Ant-NN-ANS {:.3f}",
                        with.hit, with.mrr, with.map, with.mr, without.hit, without.mrr, without.map, without.mr,
                        ant.at("Template").mrr, ant.at("Template-Ant-NN-ANS").mrr)};
}

// ---------------------------------------------------------------- determinism

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "threadrank");
    std::vector<char const *> argv;
    for (auto const &a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return threadrank::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, std::string> snapshot(std::filesystem::path const &root)
{
    std::map<std::string, std::string> files;
    for (auto const &entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files[std::filesystem::relative(entry.path(), root).generic_string()] = synth::read_file(entry.path());
        }
    }
    return files;
}

Outcome determinism()
{
    auto const inputs = synth::fresh_dir("accept-inputs");
    auto const corpus = synth::antonym_corpus(7007);
    synth::write_dump(inputs / "dump.jsonl", corpus.posts);
    {
        std::ofstream(inputs / "antonyms.tsv") << corpus.antonyms.serialize();
        std::ofstream(inputs / "truth.jsonl") << synth::truth_text(corpus);
    }

    std::vector<std::map<std::string, std::string>> runs;
    bool exit_ok = true;
    for (int run = 0; run < 2; ++run) {
        auto const dir = synth::fresh_dir("accept-run-" + std::to_string(run));
        auto const in = inputs.string();
        auto const d = dir.string();
        exit_ok = exit_ok && cli({"build-index", "--corpus", in + "/dump.jsonl", "--out", d + "/index", "--antonyms",
                                  in + "/antonyms.tsv", "--seed", "42"}) == 0;
        exit_ok = exit_ok && cli({"search", "--index", d + "/index", "--queries", in + "/truth.jsonl", "--out",
                                  d + "/results.jsonl"}) == 0;
        exit_ok = exit_ok && cli({"evaluate", "--index", d + "/index", "--truth", in + "/truth.jsonl", "--baseline",
                                  "CRAR", "--baseline", "Template", "--baseline", "Template-Without-SF", "--out",
                                  d + "/report.csv", "--results-dir", d + "/rankings"}) == 0;
        runs.push_back(snapshot(dir));
    }
    bool const identical = runs[0] == runs[1];
    return {exit_ok && identical && runs[0].size() >= 14,
            fmt::format("{} files per run ({} bytes), runs {}", runs[0].size(),
                        [&] {
                            std::size_t total = 0;
                            for (auto const &[_, v] : runs[0]) total += v.size();
                            return total;
                        }(),
                        identical ? "byte-identical" : "differ")};
}

// ------------------------------------------------------------------- funnel

Outcome funnel_conformance()
{
    auto const corpus = synth::funnel_corpus(8008);
    SearchEngine const engine(synth::engine_data(corpus));
    StageCounts peak;
    bool within = true;
    bool nested = true;
    for (auto const &name : {"CRAR", "Template", "Template-Ant-NN_VB-TR_ANS"}) {
        auto const config = configure_ablation(name);
        for (auto const &q : corpus.queries) {
            auto const r = engine.search(q.text, config);
            auto const &c = r.diagnostics.counts;
            within = within && c.bm25_threads <= 500 && c.stage1 <= 250 && c.stage2 <= 100 && c.answer_bm25 <= 150 &&
                     c.returned <= config.funnel.final_n;
            peak.bm25_threads = std::max(peak.bm25_threads, c.bm25_threads);
            peak.stage1 = std::max(peak.stage1, c.stage1);
            peak.stage2 = std::max(peak.stage2, c.stage2);
            peak.answer_pool = std::max(peak.answer_pool, c.answer_pool);
            peak.answer_bm25 = std::max(peak.answer_bm25, c.answer_bm25);
            peak.returned = std::max(peak.returned, c.returned);

            auto const &d = r.diagnostics;
            std::set<PostId> bm25(d.bm25_threads.begin(), d.bm25_threads.end());
            std::set<PostId> s1(d.stage1_threads.begin(), d.stage1_threads.end());
            std::set<PostId> s2(d.stage2_threads.begin(), d.stage2_threads.end());
            std::set<PostId> cands(d.answer_candidates.begin(), d.answer_candidates.end());
            nested = nested && std::includes(bm25.begin(), bm25.end(), s1.begin(), s1.end()) &&
                     std::includes(s1.begin(), s1.end(), s2.begin(), s2.end());
            for (auto const &a : r.answers) {
                nested = nested && cands.count(a.answer_id) && s2.count(a.thread_id);
            }
        }
    }
    bool const exercised = peak.bm25_threads == 500 && peak.stage1 == 250 && peak.stage2 == 100 &&
                           peak.answer_bm25 == 150 && peak.answer_pool > 150;
    return {within && nested && exercised,
            fmt::format("{} threads; peak counts bm25 {}, stage1 {}, stage2 {}, answer pool {}, answer bm25 {}, "
                        "returned {}; subsets {}",
                        engine.data().threads.size(), peak.bm25_threads, peak.stage1, peak.stage2, peak.answer_pool,
                        peak.answer_bm25, peak.returned, nested ? "nested" : "not nested")};
}

}  // namespace

int main()
{
    struct Criterion {
        char const *name;
        std::function<Outcome()> run;
    };
    Criterion const criteria[] = {
        {"bm25-oracle", bm25_oracle_equivalence},
        {"similarity-oracles", similarity_oracles},
        {"ladder-and-formula-fixtures", ladder_and_fixtures},
        {"metric-fixture", metric_fixture},
        {"planted-relevance", planted_relevance},
        {"ablation-direction", ablation_direction},
        {"determinism", determinism},
        {"funnel-conformance", funnel_conformance},
    };

    std::size_t failed = 0;
    for (auto const &c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (std::exception const &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %-28s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    }
    std::printf("%zu/%zu criteria passed\n", std::size(criteria) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
