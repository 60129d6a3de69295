#include "threadrank/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "threadrank/indexing.hpp"

namespace threadrank {

void FeatureVector::set(std::string_view name, double raw_value, double normalized_value)
{
    raw.insert_or_assign(std::string(name), raw_value);
    normalized.insert_or_assign(std::string(name), normalized_value);
}

AntonymTarget parse_antonym_target(std::string_view text)
{
    if (text == "TR") return AntonymTarget::TR;
    if (text == "ANS") return AntonymTarget::ANS;
    if (text == "TR_ANS") return AntonymTarget::TR_ANS;
    throw ConfigError("unknown antonym target '" + std::string(text) + "' (expected TR, ANS or TR_ANS)");
}

std::string_view to_string(AntonymTarget target)
{
    switch (target) {
        case AntonymTarget::TR: return "TR";
        case AntonymTarget::ANS: return "ANS";
        case AntonymTarget::TR_ANS: return "TR_ANS";
    }
    return "ANS";
}

WeightConfig::WeightConfig()
{
    for (auto name : feature::thread_all) {
        thread_weights.emplace(name, 0.5);
    }
    answer_weights.emplace(feature::asym, 1.0);
    answer_weights.emplace(feature::tfidf, 0.5);
    answer_weights.emplace(feature::top_method, 0.75);
    answer_weights.emplace(feature::thread_score, 0.75);
}

void WeightConfig::validate() const
{
    auto check = [](FeatureMap const &weights, std::span<std::string_view const> names, char const *group) {
        for (auto name : names) {
            if (weights.find(name) == weights.end()) {
                throw ConfigError(std::string(group) + " weight '" + std::string(name) + "' is missing");
            }
        }
        if (weights.size() != names.size()) {
            throw ConfigError(std::string(group) + " weights contain an unknown feature");
        }
        for (auto const &[name, w] : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw ConfigError(std::string(group) + " weight '" + name + "' must be a finite value >= 0");
            }
        }
    };
    check(thread_weights, feature::thread_all, "thread");
    check(answer_weights, feature::answer_all, "answer");

    auto const &f = funnel;
    if (f.bm25_threads == 0 || f.stage1_keep == 0 || f.stage2_keep == 0 || f.answer_k == 0) {
        throw ConfigError("funnel thresholds must be positive");
    }
    if (f.bm25_threads < f.stage1_keep || f.stage1_keep < f.stage2_keep) {
        throw ConfigError("funnel must not widen: bm25_threads >= stage1_keep >= stage2_keep");
    }
    if (!(method_scale > 0.0)) {
        throw ConfigError("method.scale must be positive");
    }
}

namespace {

std::string format_double(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string const &key, std::string const &value)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
    }
    return v;
}

std::size_t parse_count(std::string const &key, std::string const &value)
{
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': '" + value + "' is not a non-negative integer");
    }
    return v;
}

bool parse_bool(std::string const &key, std::string const &value)
{
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError("config key '" + key + "': expected true or false, got '" + value + "'");
}

}  // namespace

std::string WeightConfig::serialize() const
{
    std::ostringstream out;
    out << "# Thread feature weights\n";
    for (auto name : feature::thread_all) {
        out << "thread." << name << " = " << format_double(thread_weights.at(std::string(name))) << '\n';
    }
    out << "# Answer feature weights\n";
    for (auto name : feature::answer_all) {
        out << "answer." << name << " = " << format_double(answer_weights.at(std::string(name))) << '\n';
    }
    out << "# Funnel\n"
        << "funnel.bm25_threads = " << funnel.bm25_threads << '\n'
        << "funnel.stage1_keep = " << funnel.stage1_keep << '\n'
        << "funnel.stage2_keep = " << funnel.stage2_keep << '\n'
        << "funnel.answer_k = " << funnel.answer_k << '\n'
        << "funnel.final_n = " << funnel.final_n << '\n'
        << "# Antonym filter (pos: NN, VB, NN_VB; target: TR, ANS, TR_ANS)\n"
        << "antonym.enabled = " << (antonym.enabled ? "true" : "false") << '\n'
        << "antonym.pos = " << to_string(antonym.pos) << '\n'
        << "antonym.target = " << to_string(antonym.target) << '\n'
        << "# Top method scale S\n"
        << "method.scale = " << format_double(method_scale) << '\n'
        << "# Clamp negative word cosines to 0 in asymmetric similarity\n"
        << "similarity.clamp_negative = " << (clamp_negative ? "true" : "false") << '\n';
    return out.str();
}

WeightConfig WeightConfig::parse(std::string_view text)
{
    WeightConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = trim(std::string_view(body).substr(0, eq));
        auto value = trim(std::string_view(body).substr(eq + 1));

        if (key.rfind("thread.", 0) == 0 && cfg.thread_weights.count(key.substr(7)) != 0) {
            cfg.thread_weights[key.substr(7)] = parse_double(key, value);
        } else if (key.rfind("answer.", 0) == 0 && cfg.answer_weights.count(key.substr(7)) != 0) {
            cfg.answer_weights[key.substr(7)] = parse_double(key, value);
        } else if (key == "funnel.bm25_threads") {
            cfg.funnel.bm25_threads = parse_count(key, value);
        } else if (key == "funnel.stage1_keep") {
            cfg.funnel.stage1_keep = parse_count(key, value);
        } else if (key == "funnel.stage2_keep") {
            cfg.funnel.stage2_keep = parse_count(key, value);
        } else if (key == "funnel.answer_k") {
            cfg.funnel.answer_k = parse_count(key, value);
        } else if (key == "funnel.final_n") {
            cfg.funnel.final_n = parse_count(key, value);
        } else if (key == "antonym.enabled") {
            cfg.antonym.enabled = parse_bool(key, value);
        } else if (key == "antonym.pos") {
            cfg.antonym.pos = parse_pos_mode(value);
        } else if (key == "antonym.target") {
            cfg.antonym.target = parse_antonym_target(value);
        } else if (key == "method.scale") {
            cfg.method_scale = parse_double(key, value);
        } else if (key == "similarity.clamp_negative") {
            cfg.clamp_negative = parse_bool(key, value);
        } else {
            throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

WeightConfig WeightConfig::load(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open weight config '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

bool operator==(WeightConfig const &a, WeightConfig const &b)
{
    auto same_funnel = [](FunnelConfig const &x, FunnelConfig const &y) {
        return x.bm25_threads == y.bm25_threads && x.stage1_keep == y.stage1_keep &&
               x.stage2_keep == y.stage2_keep && x.answer_k == y.answer_k && x.final_n == y.final_n;
    };
    return a.thread_weights == b.thread_weights && a.answer_weights == b.answer_weights &&
           same_funnel(a.funnel, b.funnel) && a.antonym.enabled == b.antonym.enabled &&
           a.antonym.pos == b.antonym.pos && a.antonym.target == b.antonym.target &&
           a.method_scale == b.method_scale && a.clamp_negative == b.clamp_negative;
}

namespace {

/// Cosine over two sparse vectors given as sorted bags and a per-term weight.
template <typename WeightFn>
double sparse_cosine(TermCounts const &a, TermCounts const &b, WeightFn &&weight)
{
    double na = 0.0;
    for (auto const &[term, count] : a) {
        double w = weight(term, count);
        na += w * w;
    }
    double nb = 0.0;
    for (auto const &[term, count] : b) {
        double w = weight(term, count);
        nb += w * w;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            dot += weight(ia->first, ia->second) * weight(ib->first, ib->second);
            ++ia;
            ++ib;
        }
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

}  // namespace

double tf_score(TermCounts const &q, TermCounts const &t)
{
    return sparse_cosine(q, t, [](std::string const &, std::uint32_t count) { return double(count); });
}

double tfidf_score(TermCounts const &q, TermCounts const &a, IdfMap const &idf)
{
    return sparse_cosine(q, a, [&](std::string const &term, std::uint32_t count) {
        return double(count) * idf.idf(term);
    });
}

double question_score_value(std::int64_t score)
{
    struct Rung {
        std::int64_t upper;
        double value;
    };
    static constexpr Rung ladder[] = {{1, 0.1},   {5, 0.2},   {10, 0.3},  {25, 0.4},  {50, 0.5},
                                      {75, 0.6},  {100, 0.7}, {200, 0.8}, {500, 0.9}};
    for (auto const &rung : ladder) {
        if (score <= rung.upper) {
            return rung.value;
        }
    }
    return 1.0;
}

std::vector<double> normalize_social(std::span<double const> values)
{
    if (values.empty()) {
        return {};
    }
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double const min = *lo;
    double const range = *hi - *lo;
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        out.push_back(range == 0.0 ? 1.0 : (v - min) / range);
    }
    return out;
}

WordSet extract_methods(std::string_view code)
{
    static WordSet const keywords{"if", "for", "while", "switch", "catch", "return", "new", "synchronized"};
    auto is_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };

    WordSet out;
    std::size_t i = 0;
    while (i < code.size()) {
        if (!is_start(code[i]) || (i > 0 && is_word(code[i - 1]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < code.size() && is_word(code[i])) ++i;
        std::size_t j = i;
        while (j < code.size() && (code[j] == ' ' || code[j] == '\t')) ++j;
        if (j < code.size() && code[j] == '(') {
            std::string name(code.substr(start, i - start));
            if (keywords.count(name) == 0) {
                out.insert(std::move(name));
            }
        }
    }
    return out;
}

TopMethod top_method_score(std::span<std::pair<PostId, std::string> const> answer_code, double scale)
{
    TopMethod result;
    std::vector<std::pair<PostId, WordSet>> methods;
    std::map<std::string, std::size_t, std::less<>> frequency;
    for (auto const &[id, code] : answer_code) {
        auto found = extract_methods(code);
        for (auto const &m : found) {
            ++frequency[m];
        }
        methods.emplace_back(id, std::move(found));
    }
    // Ascending name order, strict '>' keeps the smallest name on ties.
    for (auto const &[name, count] : frequency) {
        if (count > result.frequency) {
            result.method = name;
            result.frequency = count;
        }
    }
    double const value = result.frequency == 0 ? 0.0 : std::log2(double(result.frequency)) / scale;
    for (auto const &[id, found] : methods) {
        result.scores[id] = (!result.method.empty() && found.count(result.method) != 0) ? value : 0.0;
    }
    return result;
}

double final_score(FeatureVector const &fv, FeatureMap const &weights)
{
    double total = 0.0;
    for (auto const &[name, w] : weights) {
        auto it = fv.normalized.find(name);
        if (it == fv.normalized.end()) {
            throw ConfigError("feature '" + name + "' is weighted but was not computed");
        }
        total += it->second * w;
    }
    return total;
}

QueryFeatures QueryFeatures::make(WordSet words, EmbeddingStore const &store, IdfMap const &idf)
{
    QueryFeatures q;
    q.counts = to_counts(words);
    q.sentence = embed_sentence(words, store, idf);
    q.words = std::move(words);
    return q;
}

namespace {

double unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

FeatureVector thread_features(QueryFeatures const &query, Thread const &thread, ThreadStage stage,
                              ScoringResources const &res)
{
    FeatureVector fv;

    double const sent = sentence_similarity(query.sentence, thread.id(), res.store);
    fv.set(feature::sentence_title, sent, unit(sent));

    double const title = asym_score(query.words, to_set(thread.question.title_bag), res.store, res.idf,
                                    res.similarity);
    fv.set(feature::asym_title, title, unit(title));

    WordSet body = to_set(thread.question.body_bag);
    for (auto const &answer : thread.answers) {
        for (auto const &[word, _] : answer.body_bag) body.insert(word);
    }
    double const body_score = asym_score(query.words, body, res.store, res.idf, res.similarity);
    fv.set(feature::asym_body, body_score, unit(body_score));

    double const tf = tf_score(query.counts, thread_document(thread).terms);
    fv.set(feature::tf_all, tf, unit(tf));

    if (stage == ThreadStage::full) {
        add_social_features(fv, thread);
    }
    return fv;
}

void add_social_features(FeatureVector &fv, Thread const &thread)
{
    // A lone candidate normalizes to 1.0; normalize_thread_social() recomputes
    // these over the real candidate set.
    fv.set(feature::answer_count, double(thread.answer_count), 1.0);
    fv.set(feature::total_answer_score, double(thread.total_answer_score), 1.0);
    fv.set(feature::question_score, double(thread.question_score), question_score_value(thread.question_score));
}

void normalize_thread_social(std::span<FeatureVector> candidates)
{
    for (auto name : {feature::answer_count, feature::total_answer_score}) {
        std::vector<double> raw;
        raw.reserve(candidates.size());
        for (auto const &fv : candidates) {
            raw.push_back(fv.raw.at(std::string(name)));
        }
        auto norm = normalize_social(raw);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            candidates[i].normalized.insert_or_assign(std::string(name), norm[i]);
        }
    }
}

FeatureVector answer_features(QueryFeatures const &query, ProcessedPost const &answer, Thread const &parent,
                              AnswerCandidateContext const &ctx, ScoringResources const &res)
{
    FeatureVector fv;

    WordSet text = to_set(parent.question.title_bag);
    for (auto const &[word, _] : answer.body_bag) text.insert(word);
    double const sym = asym_score(query.words, text, res.store, res.idf, res.similarity);
    fv.set(feature::asym, sym, unit(sym));

    double const lexical = tfidf_score(query.counts, answer_document(answer, parent).terms, res.idf);
    fv.set(feature::tfidf, lexical, unit(lexical));

    auto method = ctx.top_method.scores.find(answer.id);
    double const method_score = method == ctx.top_method.scores.end() ? 0.0 : method->second;
    fv.set(feature::top_method, method_score, unit(method_score));

    auto raw = ctx.thread_score_raw.find(parent.id());
    auto norm = ctx.thread_score_normalized.find(parent.id());
    fv.set(feature::thread_score, raw == ctx.thread_score_raw.end() ? 0.0 : raw->second,
           norm == ctx.thread_score_normalized.end() ? 0.0 : norm->second);
    return fv;
}

}  // namespace threadrank
