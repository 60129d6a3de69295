#include "threadrank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace threadrank {

using nlohmann::json;

namespace {

constexpr std::string_view kThreadFormat = "threadrank-threads";
constexpr int kThreadFormatVersion = 1;

bool contains_any(std::vector<std::string> const &tags, std::vector<std::string> const &patterns)
{
    return std::any_of(tags.begin(), tags.end(), [&](auto const &tag) {
        return std::any_of(patterns.begin(), patterns.end(),
                           [&](auto const &p) { return tag.find(p) != std::string::npos; });
    });
}

}  // namespace

bool TagFilter::accepts(std::vector<std::string> const &tags) const
{
    if (contains_any(tags, exclude)) {
        return false;
    }
    return include.empty() || contains_any(tags, include);
}

std::optional<RawPost> parse_post(std::string_view line, std::string *reason)
{
    auto fail = [&](std::string why) -> std::optional<RawPost> {
        if (reason != nullptr) {
            *reason = std::move(why);
        }
        return std::nullopt;
    };

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        return fail("not a JSON object");
    }
    for (char const *field : {"id", "post_kind", "body_html", "score"}) {
        if (!j.contains(field)) {
            return fail(std::string("missing field '") + field + "'");
        }
    }
    try {
        RawPost post;
        post.id = j.at("id").get<PostId>();
        if (post.id <= 0) {
            return fail("id must be positive");
        }
        auto const kind = j.at("post_kind").get<std::string>();
        if (kind == "question") {
            post.kind = PostKind::question;
        } else if (kind == "answer") {
            post.kind = PostKind::answer;
        } else {
            return fail("unknown post_kind '" + kind + "'");
        }
        post.body_html = j.at("body_html").get<std::string>();
        post.score = j.at("score").get<std::int64_t>();

        if (post.kind == PostKind::question) {
            if (!j.contains("title") || !j.contains("tags")) {
                return fail("question without title or tags");
            }
            post.title = j.at("title").get<std::string>();
            post.tags = j.at("tags").get<std::vector<std::string>>();
            for (auto &tag : post.tags) {
                std::transform(tag.begin(), tag.end(), tag.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            }
        } else {
            if (!j.contains("parent_id") || j.at("parent_id").is_null()) {
                return fail("answer without parent_id");
            }
            post.parent_id = j.at("parent_id").get<PostId>();
            if (*post.parent_id <= 0) {
                return fail("parent_id must be positive");
            }
        }
        return post;
    } catch (json::exception const &e) {
        return fail(e.what());
    }
}

std::string format_post(RawPost const &post)
{
    json j;
    j["id"] = post.id;
    j["post_kind"] = post.kind == PostKind::question ? "question" : "answer";
    j["body_html"] = post.body_html;
    j["score"] = post.score;
    if (post.kind == PostKind::question) {
        j["title"] = post.title;
        j["tags"] = post.tags;
    } else {
        j["parent_id"] = post.parent_id.value_or(0);
    }
    return j.dump();
}

DumpStats load_dump(std::filesystem::path const &path, TagFilter const &filter,
                    std::function<void(RawPost &&)> const &sink)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dump '" + path.string() + "'");
    }

    // First pass: which questions pass the filter. Answers may precede their
    // question in the file, so the decision has to be known up front.
    std::unordered_set<PostId> accepted;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("\"question\"") == std::string::npos) {
            continue;
        }
        if (auto post = parse_post(line); post && post->kind == PostKind::question &&
                                          filter.accepts(post->tags)) {
            accepted.insert(post->id);
        }
    }

    in.clear();
    in.seekg(0);
    DumpStats stats;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        ++stats.lines;
        std::string reason;
        auto post = parse_post(line, &reason);
        if (!post) {
            ++stats.warning_count;
            spdlog::warn("{}:{}: skipped: {}", path.string(), line_no, reason);
            continue;
        }
        if (post->kind == PostKind::question) {
            if (accepted.count(post->id) == 0) {
                ++stats.questions_dropped;
                continue;
            }
            ++stats.questions_kept;
        } else {
            if (accepted.count(*post->parent_id) == 0) {
                ++stats.answers_dropped;
                continue;
            }
            ++stats.answers_kept;
        }
        sink(std::move(*post));
    }
    return stats;
}

LoadedDump load_dump(std::filesystem::path const &path, TagFilter const &filter)
{
    LoadedDump out;
    out.stats = load_dump(path, filter, [&](RawPost &&post) { out.posts.push_back(std::move(post)); });
    return out;
}

namespace {

std::string lower_ascii(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Decodes the entity starting at html[pos] ('&'). Returns the decoded text and
/// the number of consumed bytes, or {"&", 1} when it is not a known entity.
std::pair<std::string, std::size_t> decode_entity(std::string_view html, std::size_t pos)
{
    auto semi = html.find(';', pos);
    if (semi == std::string_view::npos || semi - pos > 10) {
        return {"&", 1};
    }
    auto name = html.substr(pos + 1, semi - pos - 1);
    std::size_t const used = semi - pos + 1;
    if (name == "lt") return {"<", used};
    if (name == "gt") return {">", used};
    if (name == "amp") return {"&", used};
    if (name == "quot") return {"\"", used};
    if (name == "apos") return {"'", used};
    if (name == "nbsp") return {" ", used};
    if (name.size() > 1 && name[0] == '#') {
        int base = 10;
        auto digits = name.substr(1);
        if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
            base = 16;
            digits = digits.substr(1);
        }
        if (digits.empty()) {
            return {"&", 1};
        }
        long value = 0;
        for (char c : digits) {
            int d = -1;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (base == 16 && c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (base == 16 && c >= 'A' && c <= 'F') d = c - 'A' + 10;
            if (d < 0) {
                return {"&", 1};
            }
            value = value * base + d;
            if (value > 0x10FFFF) {
                return {"&", 1};
            }
        }
        if (value > 0 && value < 0x80) {
            return {std::string(1, static_cast<char>(value)), used};
        }
        return {" ", used};
    }
    return {"&", 1};
}

struct Tag {
    std::string name;  // lowercase, without '/'
    bool closing = false;
    std::size_t end = 0;  // one past '>'
};

/// Recognizes a markup tag at html[pos] == '<'. A '<' not followed by a
/// letter, '/' or '!' is literal text.
std::optional<Tag> read_tag(std::string_view html, std::size_t pos)
{
    if (pos + 1 >= html.size()) {
        return std::nullopt;
    }
    char next = html[pos + 1];
    if (!(std::isalpha(static_cast<unsigned char>(next)) || next == '/' || next == '!')) {
        return std::nullopt;
    }
    auto gt = html.find('>', pos);
    if (gt == std::string_view::npos) {
        return std::nullopt;
    }
    Tag tag;
    tag.end = gt + 1;
    std::size_t i = pos + 1;
    if (html[i] == '/') {
        tag.closing = true;
        ++i;
    }
    std::size_t start = i;
    while (i < gt && std::isalnum(static_cast<unsigned char>(html[i]))) {
        ++i;
    }
    tag.name = lower_ascii(html.substr(start, i - start));
    return tag;
}

bool is_code_tag(std::string const &name) { return name == "code" || name == "pre"; }

}  // namespace

SeparatedText separate_code(std::string_view html)
{
    SeparatedText out;
    std::vector<std::string> blocks;
    std::string current;
    std::string outer;  // name of the open code block, empty in prose
    int depth = 0;

    std::size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '<') {
            if (auto tag = read_tag(html, i)) {
                if (outer.empty()) {
                    if (!tag->closing && is_code_tag(tag->name)) {
                        outer = tag->name;
                        depth = 1;
                    } else {
                        out.prose += ' ';
                    }
                } else if (tag->name == outer) {
                    depth += tag->closing ? -1 : 1;
                    if (depth == 0) {
                        blocks.push_back(std::move(current));
                        current.clear();
                        outer.clear();
                    }
                }
                i = tag->end;
                continue;
            }
        }
        std::string piece(1, c);
        std::size_t used = 1;
        if (c == '&') {
            std::tie(piece, used) = decode_entity(html, i);
        }
        (outer.empty() ? out.prose : current) += piece;
        i += used;
    }
    if (!outer.empty()) {
        blocks.push_back(std::move(current));
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (b > 0) {
            out.code += '\n';
        }
        out.code += blocks[b];
    }
    return out;
}

namespace {

constexpr std::string_view kBuiltinStopWords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "cannot", "could", "couldn", "did", "didn", "do", "does", "doesn",
    "doing", "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn",
    "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
    "just", "let", "ll", "me", "more", "most", "mustn", "my", "myself", "no", "nor", "not",
    "now", "of", "off", "on", "once", "only", "or", "other", "ought", "our", "ours",
    "ourselves", "out", "over", "own", "re", "same", "shan", "she", "should", "shouldn", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "won", "would", "wouldn", "you", "your",
    "yours", "yourself", "yourselves",
};

bool is_number(std::string_view token)
{
    return std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

WordSet const &default_stop_words()
{
    static WordSet const words(std::begin(kBuiltinStopWords), std::end(kBuiltinStopWords));
    return words;
}

Preprocessor::Preprocessor() : stop_words_(default_stop_words()) {}

Preprocessor::Preprocessor(WordSet stop_words) : stop_words_(std::move(stop_words)) {}

Preprocessor Preprocessor::from_file(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open stop word list '" + path.string() + "'");
    }
    WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        auto last = line.find_last_not_of(" \t\r");
        words.insert(lower_ascii(line.substr(first, last - first + 1)));
    }
    return Preprocessor(std::move(words));
}

std::vector<std::string> Preprocessor::tokens(std::string_view text, PreprocessMode mode) const
{
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    std::string token;

    auto flush = [&] {
        if (token.size() >= 2 && !is_number(token) && stop_words_.count(token) == 0) {
            if (mode == PreprocessMode::corpus || seen.insert(token).second) {
                out.push_back(token);
            }
        }
        token.clear();
    };

    for (unsigned char c : text) {
        if (c >= 'A' && c <= 'Z') {
            token.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            token.push_back(static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

TermCounts Preprocessor::bag(std::string_view text) const
{
    TermCounts out;
    for (auto &token : tokens(text, PreprocessMode::corpus)) {
        ++out[token];
    }
    return out;
}

WordSet Preprocessor::query_bag(std::string_view text) const
{
    auto toks = tokens(text, PreprocessMode::query);
    return WordSet(std::make_move_iterator(toks.begin()), std::make_move_iterator(toks.end()));
}

std::uint64_t Preprocessor::fingerprint() const
{
    std::uint64_t h = fnv1a(kPreprocessingVersion);
    for (auto const &word : stop_words_) {
        h = fnv1a(word, h);
        h = fnv1a("\n", h);
    }
    return h;
}

ProcessedPost process_post(RawPost const &post, Preprocessor const &pre)
{
    ProcessedPost out;
    out.id = post.id;
    out.score = post.score;
    auto parts = separate_code(post.body_html);
    out.title_bag = pre.bag(post.title);
    out.body_bag = pre.bag(parts.prose);
    out.code_bag = pre.bag(parts.code);
    out.original_title = post.title;
    out.original_body = post.body_html;
    return out;
}

std::vector<Thread> build_threads(std::vector<RawPost> const &posts, Preprocessor const &pre,
                                  ThreadBuildStats *stats)
{
    ThreadBuildStats local;
    std::unordered_map<PostId, RawPost const *> questions;
    for (auto const &post : posts) {
        if (post.kind == PostKind::question) {
            questions.emplace(post.id, &post);
        }
    }
    local.questions_seen = questions.size();

    std::unordered_map<PostId, std::vector<RawPost const *>> answers_by_parent;
    for (auto const &post : posts) {
        if (post.kind != PostKind::answer) {
            continue;
        }
        if (questions.count(*post.parent_id) == 0) {
            ++local.orphan_answers;
            continue;
        }
        answers_by_parent[*post.parent_id].push_back(&post);
    }

    std::vector<Thread> threads;
    for (auto const &[qid, question] : questions) {
        auto it = answers_by_parent.find(qid);
        std::size_t const answer_total = it == answers_by_parent.end() ? 0 : it->second.size();
        if (question->score <= 0 || answer_total == 0) {
            local.answers_discarded += answer_total;
            continue;
        }
        Thread thread;
        for (RawPost const *answer : it->second) {
            if (answer->score <= 0) {
                ++local.answers_discarded;
                continue;
            }
            auto processed = process_post(*answer, pre);
            if (processed.code_bag.empty()) {
                ++local.answers_discarded;
                continue;
            }
            thread.answers.push_back(std::move(processed));
        }
        if (thread.answers.empty()) {
            continue;
        }
        std::sort(thread.answers.begin(), thread.answers.end(),
                  [](auto const &a, auto const &b) { return a.id < b.id; });
        thread.question = process_post(*question, pre);
        thread.answer_count = thread.answers.size();
        thread.question_score = question->score;
        for (auto const &answer : thread.answers) {
            thread.total_answer_score += answer.score;
        }
        threads.push_back(std::move(thread));
    }
    std::sort(threads.begin(), threads.end(), [](auto const &a, auto const &b) { return a.id() < b.id(); });
    local.threads_built = threads.size();
    if (stats != nullptr) {
        *stats = local;
    }
    return threads;
}

namespace {

json bag_to_json(TermCounts const &bag)
{
    json j = json::object();
    for (auto const &[word, count] : bag) {
        j[word] = count;
    }
    return j;
}

TermCounts bag_from_json(json const &j)
{
    TermCounts bag;
    for (auto const &[word, count] : j.items()) {
        bag.emplace(word, count.get<std::uint32_t>());
    }
    return bag;
}

json post_to_json(ProcessedPost const &p)
{
    return json{{"id", p.id},
                {"score", p.score},
                {"title_bag", bag_to_json(p.title_bag)},
                {"body_bag", bag_to_json(p.body_bag)},
                {"code_bag", bag_to_json(p.code_bag)},
                {"original_title", p.original_title},
                {"original_body", p.original_body}};
}

ProcessedPost post_from_json(json const &j)
{
    ProcessedPost p;
    p.id = j.at("id").get<PostId>();
    p.score = j.at("score").get<std::int64_t>();
    p.title_bag = bag_from_json(j.at("title_bag"));
    p.body_bag = bag_from_json(j.at("body_bag"));
    p.code_bag = bag_from_json(j.at("code_bag"));
    p.original_title = j.at("original_title").get<std::string>();
    p.original_body = j.at("original_body").get<std::string>();
    return p;
}

}  // namespace

std::string serialize_threads(std::vector<Thread> const &threads)
{
    std::ostringstream out;
    out << json{{"format", kThreadFormat},
                {"version", kThreadFormatVersion},
                {"preprocessing", kPreprocessingVersion}}
               .dump()
        << '\n';
    for (auto const &t : threads) {
        json answers = json::array();
        for (auto const &a : t.answers) {
            answers.push_back(post_to_json(a));
        }
        out << json{{"question", post_to_json(t.question)},
                    {"answers", std::move(answers)},
                    {"answer_count", t.answer_count},
                    {"question_score", t.question_score},
                    {"total_answer_score", t.total_answer_score}}
                   .dump()
            << '\n';
    }
    return out.str();
}

void save_threads(std::filesystem::path const &path, std::vector<Thread> const &threads)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write thread store '" + path.string() + "'");
    }
    out << serialize_threads(threads);
}

std::vector<Thread> load_threads(std::filesystem::path const &path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open thread store '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("thread store '" + path.string() + "' is empty");
    }
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != kThreadFormat ||
        header.value("version", 0) != kThreadFormatVersion ||
        header.value("preprocessing", "") != kPreprocessingVersion) {
        throw DataError("thread store '" + path.string() + "' has an unsupported format header");
    }
    std::vector<Thread> threads;
    try {
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            json j = json::parse(line);
            Thread t;
            t.question = post_from_json(j.at("question"));
            for (auto const &a : j.at("answers")) {
                t.answers.push_back(post_from_json(a));
            }
            t.answer_count = j.at("answer_count").get<std::size_t>();
            t.question_score = j.at("question_score").get<std::int64_t>();
            t.total_answer_score = j.at("total_answer_score").get<std::int64_t>();
            threads.push_back(std::move(t));
        }
    } catch (json::exception const &e) {
        throw DataError("corrupt thread store '" + path.string() + "': " + e.what());
    }
    return threads;
}

}  // namespace threadrank
