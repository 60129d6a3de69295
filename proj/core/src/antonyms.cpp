#include "threadrank/antonyms.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace threadrank {

namespace {

std::string lower_trim(std::string_view s)
{
    auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    auto last = s.find_last_not_of(" \t\r");
    std::string out(s.substr(first, last - first + 1));
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool ends_with(std::string_view word, std::string_view suffix)
{
    return word.size() > suffix.size() && word.substr(word.size() - suffix.size()) == suffix;
}

}  // namespace

PosMode parse_pos_mode(std::string_view text)
{
    if (text == "NN") return PosMode::NN;
    if (text == "VB") return PosMode::VB;
    if (text == "NN_VB") return PosMode::NN_VB;
    throw ConfigError("unknown POS mode '" + std::string(text) + "' (expected NN, VB or NN_VB)");
}

std::string_view to_string(PosMode mode)
{
    switch (mode) {
        case PosMode::NN: return "NN";
        case PosMode::VB: return "VB";
        case PosMode::NN_VB: return "NN_VB";
    }
    return "NN";
}

PosTag suffix_pos(std::string_view word)
{
    for (auto suffix : {"ing", "ize", "ify"}) {
        if (ends_with(word, suffix)) {
            return PosTag::verb;
        }
    }
    for (auto suffix : {"tion", "ness", "ment"}) {
        if (ends_with(word, suffix)) {
            return PosTag::noun;
        }
    }
    return PosTag::both;
}

void AntonymDictionary::add(std::string_view word, PosTag pos, WordSet const &antonyms)
{
    auto &entry = entries_[std::string(word)];
    entry.pos = entry.pos | pos;
    for (auto const &a : antonyms) {
        if (a != word) {
            entry.antonyms.insert(a);
        }
    }
}

void AntonymDictionary::close_symmetric()
{
    std::vector<std::pair<std::string, std::string>> reverse;
    for (auto const &[word, entry] : entries_) {
        for (auto const &a : entry.antonyms) {
            reverse.emplace_back(a, word);
        }
    }
    for (auto const &[word, antonym] : reverse) {
        entries_[word].antonyms.insert(antonym);
    }
}

AntonymDictionary AntonymDictionary::parse(std::string_view text, ParseStats *stats)
{
    AntonymDictionary dict;
    ParseStats local;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') {
            continue;
        }
        ++local.lines;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                               : tab - start));
            if (tab == std::string_view::npos) {
                break;
            }
            start = tab + 1;
        }

        auto word = fields.empty() ? std::string{} : lower_trim(fields[0]);
        bool ok = (fields.size() == 2 || fields.size() == 3) && !word.empty();
        PosTag tag = PosTag::none;
        if (ok) {
            for (char c : lower_trim(fields[1])) {
                if (c == 'n') tag = tag | PosTag::noun;
                else if (c == 'v') tag = tag | PosTag::verb;
                else ok = false;
            }
        }
        if (!ok) {
            ++local.skipped;
            spdlog::warn("antonym list line {}: unparsable, skipped", line_no);
            continue;
        }
        WordSet antonyms;
        if (fields.size() == 3) {
            std::string_view list = fields[2];
            std::size_t s = 0;
            while (s <= list.size()) {
                auto comma = list.find(',', s);
                auto item = lower_trim(
                    list.substr(s, comma == std::string_view::npos ? std::string_view::npos : comma - s));
                if (!item.empty()) {
                    antonyms.insert(std::move(item));
                }
                if (comma == std::string_view::npos) {
                    break;
                }
                s = comma + 1;
            }
        }
        dict.add(word, tag, antonyms);
    }
    if (stats != nullptr) {
        *stats = local;
    }
    return dict;
}

AntonymDictionary AntonymDictionary::merge_lists(std::vector<std::filesystem::path> const &paths,
                                                 ParseStats *stats)
{
    AntonymDictionary merged;
    ParseStats total;
    for (auto const &path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open antonym list '" + path.string() + "'");
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        ParseStats one;
        auto part = parse(buffer.str(), &one);
        total.lines += one.lines;
        total.skipped += one.skipped;
        for (auto const &[word, entry] : part.entries_) {
            merged.add(word, entry.pos, entry.antonyms);
        }
    }
    merged.close_symmetric();
    if (stats != nullptr) {
        *stats = total;
    }
    return merged;
}

AntonymEntry const *AntonymDictionary::find(std::string_view word) const
{
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
}

PosTag AntonymDictionary::pos_of(std::string_view word) const
{
    auto const *entry = find(word);
    if (entry == nullptr) {
        return PosTag::none;
    }
    return entry->pos == PosTag::none ? suffix_pos(word) : entry->pos;
}

std::string AntonymDictionary::serialize() const
{
    std::string out = "# word\tpos_flags\tantonyms\n";
    for (auto const &[word, entry] : entries_) {
        out += word;
        out += '\t';
        if (intersects(entry.pos, PosTag::noun)) out += 'n';
        if (intersects(entry.pos, PosTag::verb)) out += 'v';
        out += '\t';
        bool first = true;
        for (auto const &a : entry.antonyms) {
            if (!first) out += ',';
            out += a;
            first = false;
        }
        out += '\n';
    }
    return out;
}

void AntonymDictionary::save(std::filesystem::path const &path) const
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write antonym dictionary '" + path.string() + "'");
    }
    out << serialize();
}

AntonymDictionary AntonymDictionary::load(std::filesystem::path const &path)
{
    return merge_lists({path});
}

WordSet pos_filter(AntonymDictionary const &dict, WordSet const &query, PosMode mode)
{
    PosTag const wanted = mode == PosMode::NN   ? PosTag::noun
                          : mode == PosMode::VB ? PosTag::verb
                                                : PosTag::both;
    WordSet out;
    for (auto const &word : query) {
        if (intersects(dict.pos_of(word), wanted)) {
            out.insert(word);
        }
    }
    return out;
}

WordSet const &AntonymQueryContext::effective() const
{
    static WordSet const none;
    return self_antonymous ? none : antonyms;
}

AntonymQueryContext antonym_context(AntonymDictionary const &dict, WordSet const &query, PosMode mode)
{
    AntonymQueryContext ctx;
    for (auto const &word : query) {
        if (auto const *entry = dict.find(word)) {
            for (auto const &a : entry->antonyms) {
                if (query.count(a) != 0) {
                    ctx.self_antonymous = true;
                }
            }
        }
    }
    for (auto const &word : pos_filter(dict, query, mode)) {
        for (auto const &a : dict.find(word)->antonyms) {
            if (query.count(a) == 0) {
                ctx.antonyms.insert(a);
            }
        }
    }
    return ctx;
}

std::size_t antonyms_score(AntonymQueryContext const &ctx, WordSet const &candidate)
{
    std::size_t hits = 0;
    for (auto const &a : ctx.effective()) {
        hits += candidate.count(a);
    }
    return hits;
}

std::size_t antonyms_score(AntonymQueryContext const &ctx, TermCounts const &candidate)
{
    std::size_t hits = 0;
    for (auto const &a : ctx.effective()) {
        hits += candidate.count(a);
    }
    return hits;
}

}  // namespace threadrank
