#include "threadrank/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace threadrank {

SearchEngine::SearchEngine(EngineData data) : data_(std::move(data))
{
    for (std::size_t i = 0; i < data_.threads.size(); ++i) {
        thread_pos_.emplace(data_.threads[i].id(), i);
    }
}

Thread const *SearchEngine::thread(PostId id) const
{
    auto it = thread_pos_.find(id);
    return it == thread_pos_.end() ? nullptr : &data_.threads[it->second];
}

namespace {

struct Scored {
    std::size_t slot;  // index into the stage's candidate array
    PostId id;
    double score;
};

void rank(std::vector<Scored> &items)
{
    std::sort(items.begin(), items.end(), [](Scored const &a, Scored const &b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
}

FeatureMap restrict_weights(FeatureMap const &weights, std::span<std::string_view const> names)
{
    FeatureMap out;
    for (auto name : names) {
        out.emplace(name, weights.at(std::string(name)));
    }
    return out;
}

}  // namespace

SearchResult SearchEngine::search(std::string_view query, WeightConfig const &config, std::size_t final_n) const
{
    config.validate();
    SearchResult result;
    result.query = std::string(query);
    auto &diag = result.diagnostics;

    // 1) query processing
    result.query_words = data_.preprocessor.query_bag(query);
    if (result.query_words.empty()) {
        diag.notes.emplace_back("query is empty after preprocessing");
        return result;
    }
    if (final_n == 0) {
        diag.notes.emplace_back("final_n is 0");
        return result;
    }
    auto const &words = result.query_words;
    auto const antonyms = antonym_context(data_.antonyms, words, config.antonym.pos);
    diag.self_antonymous = antonyms.self_antonymous;
    auto const qf = QueryFeatures::make(words, data_.store, data_.idf);
    ScoringResources const res{data_.store, data_.idf, SimilarityOptions{config.clamp_negative}};

    // 2) BM25 over threads
    auto const bm25 = data_.thread_index.search(words, config.funnel.bm25_threads);
    diag.counts.bm25_threads = bm25.size();
    std::vector<Thread const *> pool;
    std::vector<double> pool_bm25;
    for (auto const &hit : bm25) {
        diag.bm25_threads.push_back(hit.id);
        Thread const *t = thread(hit.id);
        if (t == nullptr) {
            throw DataError("thread index refers to unknown thread " + std::to_string(hit.id));
        }
        // 2b) thread antonym filter
        if (config.antonym.filters_threads()) {
            TermCounts text = t->question.title_bag;
            add_bag(text, t->question.body_bag);
            if (antonyms_score(antonyms, text) > 0) {
                continue;
            }
        }
        pool.push_back(t);
        pool_bm25.push_back(hit.score);
    }
    diag.counts.after_thread_antonyms = pool.size();

    // 3a) stage 1: lexical and semantic features
    auto const stage1_weights = restrict_weights(config.thread_weights, feature::thread_lexical);
    std::vector<FeatureVector> fvs;
    fvs.reserve(pool.size());
    std::vector<Scored> stage1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        fvs.push_back(thread_features(qf, *pool[i], ThreadStage::lexical, res));
        stage1.push_back({i, pool[i]->id(), final_score(fvs.back(), stage1_weights)});
    }
    rank(stage1);
    if (stage1.size() > config.funnel.stage1_keep) stage1.resize(config.funnel.stage1_keep);
    diag.counts.stage1 = stage1.size();

    // 3b) stage 2: all seven features over the stage-1 survivors
    std::vector<FeatureVector> stage2_fvs;
    stage2_fvs.reserve(stage1.size());
    for (auto const &s : stage1) {
        diag.stage1_threads.push_back(s.id);
        stage2_fvs.push_back(fvs[s.slot]);
        add_social_features(stage2_fvs.back(), *pool[s.slot]);
    }
    normalize_thread_social(stage2_fvs);
    std::vector<Scored> stage2;
    for (std::size_t j = 0; j < stage1.size(); ++j) {
        stage2.push_back({j, stage1[j].id, final_score(stage2_fvs[j], config.thread_weights)});
    }
    rank(stage2);

    std::vector<double> stage2_score_by_slot(stage1.size());
    for (auto const &s : stage2) stage2_score_by_slot[s.slot] = s.score;
    std::vector<bool> kept(stage1.size(), false);
    if (stage2.size() > config.funnel.stage2_keep) stage2.resize(config.funnel.stage2_keep);
    diag.counts.stage2 = stage2.size();

    std::vector<Thread const *> survivors;
    std::map<PostId, double> thread_final;
    for (auto const &s : stage2) {
        kept[s.slot] = true;
        Thread const *t = pool[stage1[s.slot].slot];
        survivors.push_back(t);
        diag.stage2_threads.push_back(t->id());
        thread_final.emplace(t->id(), s.score);
    }
    for (std::size_t j = 0; j < stage1.size(); ++j) {
        auto const slot = stage1[j].slot;
        ThreadDiagnostic td{pool[slot]->id(), pool_bm25[slot], stage1[j].score, std::nullopt, stage2_fvs[j]};
        if (kept[j]) td.stage2_score = stage2_score_by_slot[j];
        diag.threads.push_back(std::move(td));
    }

    // 5-6) answers of the surviving threads, indexed per query
    auto const &thread_stats = data_.thread_index.stats();
    auto const answer_index = build_ephemeral_answer_index(survivors, Bm25Params{thread_stats.k, thread_stats.b});
    diag.counts.answer_pool = answer_index.size();
    std::unordered_map<PostId, std::pair<ProcessedPost const *, Thread const *>> answer_lookup;
    for (Thread const *t : survivors) {
        for (auto const &a : t->answers) answer_lookup.emplace(a.id, std::make_pair(&a, t));
    }

    // 7) BM25 over answers
    auto const answer_hits = answer_index.search(words, config.funnel.answer_k);
    diag.counts.answer_bm25 = answer_hits.size();

    struct Candidate {
        ProcessedPost const *answer;
        Thread const *parent;
        double bm25;
    };
    std::vector<Candidate> candidates;
    for (auto const &hit : answer_hits) {
        auto [answer, parent] = answer_lookup.at(hit.id);
        // 7b) answer antonym filter
        if (config.antonym.filters_answers()) {
            TermCounts text = parent->question.title_bag;
            add_bag(text, answer->body_bag);
            add_bag(text, answer->code_bag);
            if (antonyms_score(antonyms, text) > 0) continue;
        }
        candidates.push_back({answer, parent, hit.score});
        diag.answer_candidates.push_back(answer->id);
    }
    diag.counts.after_answer_antonyms = candidates.size();

    // 8) answer features
    AnswerCandidateContext ctx;
    {
        std::vector<std::pair<PostId, std::string>> code;
        code.reserve(candidates.size());
        for (auto const &c : candidates) {
            code.emplace_back(c.answer->id, separate_code(c.answer->original_body).code);
        }
        ctx.top_method = top_method_score(code, config.method_scale);
        diag.top_method = ctx.top_method.method;
        diag.top_method_frequency = ctx.top_method.frequency;

        std::set<PostId> parents;
        for (auto const &c : candidates) parents.insert(c.parent->id());
        std::vector<double> raw;
        for (PostId p : parents) raw.push_back(thread_final.at(p));
        auto norm = normalize_social(raw);
        std::size_t i = 0;
        for (PostId p : parents) {
            ctx.thread_score_raw.emplace(p, raw[i]);
            ctx.thread_score_normalized.emplace(p, norm[i]);
            ++i;
        }
    }
    std::vector<Scored> ranked;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        auto const &c = candidates[i];
        auto fv = answer_features(qf, *c.answer, *c.parent, ctx, res);
        double const score = final_score(fv, config.answer_weights);
        ranked.push_back({i, c.answer->id, score});
        diag.answers.push_back({c.answer->id, c.parent->id(), c.bm25, score, std::move(fv)});
    }
    rank(ranked);

    // 9) top N
    if (ranked.size() > final_n) ranked.resize(final_n);
    for (auto const &r : ranked) {
        auto const &c = candidates[r.slot];
        result.answers.push_back({c.answer->id, c.parent->id(), r.score, c.answer->original_body,
                                  c.parent->question.original_title, diag.answers[r.slot].features});
    }
    diag.counts.returned = result.answers.size();
    return result;
}

namespace {

nlohmann::json features_json(FeatureVector const &fv)
{
    nlohmann::json j = nlohmann::json::object();
    for (auto const &[name, raw] : fv.raw) {
        j[name] = {{"raw", raw}, {"normalized", fv.normalized.at(name)}};
    }
    return j;
}

}  // namespace

nlohmann::json SearchResult::to_json(bool explain) const
{
    nlohmann::json answers_json = nlohmann::json::array();
    std::size_t rank = 0;
    for (auto const &a : answers) {
        nlohmann::json row{{"rank", ++rank},
                           {"answer_id", a.answer_id},
                           {"thread_id", a.thread_id},
                           {"score", a.score},
                           {"title", a.parent_title},
                           {"answer", a.answer_body}};
        if (explain) row["features"] = features_json(a.features);
        answers_json.push_back(std::move(row));
    }
    nlohmann::json j{{"query", query}, {"query_words", query_words}, {"answers", std::move(answers_json)}};
    if (explain) {
        auto const &c = diagnostics.counts;
        nlohmann::json threads = nlohmann::json::array();
        for (auto const &t : diagnostics.threads) {
            nlohmann::json row{{"thread_id", t.thread_id},
                               {"bm25", t.bm25},
                               {"stage1_score", t.stage1_score},
                               {"features", features_json(t.features)}};
            row["stage2_score"] = t.stage2_score ? nlohmann::json(*t.stage2_score) : nlohmann::json(nullptr);
            threads.push_back(std::move(row));
        }
        nlohmann::json scored = nlohmann::json::array();
        for (auto const &a : diagnostics.answers) {
            scored.push_back({{"answer_id", a.answer_id},
                              {"thread_id", a.thread_id},
                              {"bm25", a.bm25},
                              {"score", a.score},
                              {"features", features_json(a.features)}});
        }
        j["diagnostics"] = {{"counts",
                             {{"bm25_threads", c.bm25_threads},
                              {"after_thread_antonyms", c.after_thread_antonyms},
                              {"stage1", c.stage1},
                              {"stage2", c.stage2},
                              {"answer_pool", c.answer_pool},
                              {"answer_bm25", c.answer_bm25},
                              {"after_answer_antonyms", c.after_answer_antonyms},
                              {"returned", c.returned}}},
                            {"top_method", diagnostics.top_method},
                            {"top_method_frequency", diagnostics.top_method_frequency},
                            {"self_antonymous", diagnostics.self_antonymous},
                            {"notes", diagnostics.notes},
                            {"threads", std::move(threads)},
                            {"answers", std::move(scored)}};
    }
    return j;
}

namespace {

constexpr std::string_view kCrarBase = "Template-Ant-NN-ANS|SF-All";

void zero(FeatureMap &weights, std::string_view name) { weights.at(std::string(name)) = 0.0; }

void keep_only(FeatureMap &weights, std::string_view name)
{
    for (auto &[n, w] : weights) {
        if (n != name) w = 0.0;
    }
}

/// "TAS-QS" style social combination, or "All".
void apply_social_combo(WeightConfig &cfg, std::string_view combo, std::string_view full_name)
{
    if (combo == "All") {
        return;
    }
    std::set<std::string_view> chosen;
    std::size_t start = 0;
    while (start <= combo.size()) {
        auto dash = combo.find('-', start);
        auto token = combo.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start);
        if ((token != "TAS" && token != "QS" && token != "AC") || !chosen.insert(token).second) {
            throw ConfigError("unknown baseline '" + std::string(full_name) + "'");
        }
        if (dash == std::string_view::npos) break;
        start = dash + 1;
    }
    if (chosen.count("TAS") == 0) zero(cfg.thread_weights, feature::total_answer_score);
    if (chosen.count("QS") == 0) zero(cfg.thread_weights, feature::question_score);
    if (chosen.count("AC") == 0) zero(cfg.thread_weights, feature::answer_count);
}

WeightConfig parse_template(std::string_view name)
{
    WeightConfig cfg;
    std::string_view rest = name.substr(std::string_view("Template").size());
    if (rest.empty()) {
        return cfg;
    }
    if (rest == "-Without-SF") {
        for (auto f : feature::thread_social) zero(cfg.thread_weights, f);
        return cfg;
    }
    std::string_view sf;
    if (rest.rfind("-Ant-", 0) == 0) {
        auto body = rest.substr(5);
        auto bar = body.find('|');
        auto ant = body.substr(0, bar);
        if (bar != std::string_view::npos) {
            sf = body.substr(bar + 1);
            if (sf.rfind("SF-", 0) != 0) throw ConfigError("unknown baseline '" + std::string(name) + "'");
            sf = sf.substr(3);
        }
        auto dash = ant.find('-');
        if (dash == std::string_view::npos) throw ConfigError("unknown baseline '" + std::string(name) + "'");
        try {
            cfg.antonym.pos = parse_pos_mode(ant.substr(0, dash));
            cfg.antonym.target = parse_antonym_target(ant.substr(dash + 1));
        } catch (ConfigError const &) {
            throw ConfigError("unknown baseline '" + std::string(name) + "'");
        }
        cfg.antonym.enabled = true;
        if (bar != std::string_view::npos) apply_social_combo(cfg, sf, name);
        return cfg;
    }
    if (rest.rfind("-SF-", 0) == 0) {
        apply_social_combo(cfg, rest.substr(4), name);
        return cfg;
    }
    throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

struct ThreadFeatureName {
    std::string_view label;
    std::string_view feature;
};

constexpr ThreadFeatureName kThreadLabels[] = {
    {"TF", feature::tf_all},
    {"Sent2Vec", feature::sentence_title},
    {"Asym.Sim.Title", feature::asym_title},
    {"Asym.Sim.Body+Ans.Body", feature::asym_body},
};

constexpr ThreadFeatureName kAnswerLabels[] = {
    {"Asymmetric Similarity", feature::asym},
    {"TF-IDF", feature::tfidf},
    {"Top Method", feature::top_method},
    {"Thread Score", feature::thread_score},
};

std::string valid_names_message()
{
    std::string msg = "valid baselines:";
    for (auto const &n : baseline_names()) {
        msg += "\n  " + n;
    }
    return msg;
}

}  // namespace

std::vector<std::string> const &baseline_names()
{
    static std::vector<std::string> const names = [] {
        std::vector<std::string> out{"Template", "Template-Without-SF"};
        for (auto combo : {"TAS", "QS", "AC", "TAS-AC", "QS-TAS", "QS-AC", "All"}) {
            out.push_back(std::string("Template-SF-") + combo);
        }
        for (auto pos : {"NN", "VB", "NN_VB"}) {
            for (auto target : {"TR", "ANS", "TR_ANS"}) {
                out.push_back(std::string("Template-Ant-") + pos + "-" + target);
            }
        }
        out.emplace_back("Template-Ant-NN-ANS|SF-QS-AC");
        out.emplace_back(kCrarBase);
        out.emplace_back("CRAR");
        out.emplace_back("CRAR (Sent2Vec)");
        for (auto const &l : kThreadLabels) out.emplace_back(l.label);
        for (auto const &l : kThreadLabels) out.push_back("CRAR Without " + std::string(l.label));
        for (auto const &l : kAnswerLabels) out.emplace_back(l.label);
        for (auto const &l : kAnswerLabels) out.push_back("CRAR Without " + std::string(l.label));
        return out;
    }();
    return names;
}

WeightConfig configure_ablation(std::string_view name)
{
    try {
        if (name == "CRAR" || name == "CRAR (Sent2Vec)") {
            return parse_template(kCrarBase);
        }
        if (name.rfind("Template", 0) == 0) {
            return parse_template(name);
        }
        constexpr std::string_view without = "CRAR Without ";
        if (name.rfind(without, 0) == 0) {
            auto label = name.substr(without.size());
            auto cfg = parse_template(kCrarBase);
            for (auto const &l : kThreadLabels) {
                if (l.label == label) {
                    zero(cfg.thread_weights, l.feature);
                    return cfg;
                }
            }
            for (auto const &l : kAnswerLabels) {
                if (l.label == label) {
                    zero(cfg.answer_weights, l.feature);
                    return cfg;
                }
            }
        }
        // Single thread feature: everything else on the thread side is off,
        // answer weights untouched.
        for (auto const &l : kThreadLabels) {
            if (l.label == name) {
                auto cfg = parse_template("Template-Without-SF");
                keep_only(cfg.thread_weights, l.feature);
                return cfg;
            }
        }
        // Single answer feature on top of the full thread ranking.
        for (auto const &l : kAnswerLabels) {
            if (l.label == name) {
                auto cfg = parse_template(kCrarBase);
                keep_only(cfg.answer_weights, l.feature);
                return cfg;
            }
        }
    } catch (ConfigError const &) {
        // fall through to the listing below
    }
    throw ConfigError("unknown baseline '" + std::string(name) + "'; " + valid_names_message());
}

}  // namespace threadrank
