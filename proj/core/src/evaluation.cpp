#include "threadrank/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace threadrank {

namespace {

std::string read_file(std::filesystem::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string query_id_of(nlohmann::json const &obj, std::size_t line_no)
{
    auto it = obj.find("query_id");
    if (it == obj.end()) {
        throw DataError(fmt::format("line {}: missing query_id", line_no));
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    throw DataError(fmt::format("line {}: query_id must be a string or integer", line_no));
}

std::vector<PostId> id_list(nlohmann::json const &obj, char const *key, std::size_t line_no)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) {
        throw DataError(fmt::format("line {}: '{}' must be an array of ids", line_no, key));
    }
    std::vector<PostId> ids;
    ids.reserve(it->size());
    for (auto const &v : *it) {
        if (!v.is_number_integer()) {
            throw DataError(fmt::format("line {}: '{}' holds a non-integer id", line_no, key));
        }
        ids.push_back(v.get<PostId>());
    }
    return ids;
}

template <typename Fn>
void for_each_json_line(std::string_view jsonl, Fn &&fn)
{
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        auto end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        auto line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            throw DataError(fmt::format("line {}: not a JSON object", line_no));
        }
        fn(obj, line_no);
    }
}

}  // namespace

void GroundTruth::add(std::string query_id, TruthEntry entry)
{
    if (entry.relevant.empty()) {
        throw DataError("query '" + query_id + "' has no relevant answers");
    }
    if (*entry.relevant.begin() <= 0) {
        throw DataError("query '" + query_id + "' has a non-positive answer id");
    }
    if (!entries_.emplace(query_id, std::move(entry)).second) {
        throw DataError("duplicate query_id '" + query_id + "' in ground truth");
    }
}

GroundTruth GroundTruth::parse(std::string_view jsonl)
{
    GroundTruth truth;
    for_each_json_line(jsonl, [&](nlohmann::json const &obj, std::size_t line_no) {
        TruthEntry entry;
        auto text = obj.find("query_text");
        if (text == obj.end() || !text->is_string()) {
            throw DataError(fmt::format("line {}: missing query_text", line_no));
        }
        entry.query_text = text->get<std::string>();
        auto ids = id_list(obj, "relevant_answer_ids", line_no);
        entry.relevant.insert(ids.begin(), ids.end());
        truth.add(query_id_of(obj, line_no), std::move(entry));
    });
    return truth;
}

GroundTruth GroundTruth::load(std::filesystem::path const &path)
{
    try {
        return parse(read_file(path));
    } catch (DataError const &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

Rankings parse_rankings(std::string_view jsonl)
{
    Rankings out;
    for_each_json_line(jsonl, [&](nlohmann::json const &obj, std::size_t line_no) {
        auto id = query_id_of(obj, line_no);
        if (!out.emplace(id, id_list(obj, "ranked_answer_ids", line_no)).second) {
            throw DataError(fmt::format("line {}: duplicate query_id '{}'", line_no, id));
        }
    });
    return out;
}

Rankings load_rankings(std::filesystem::path const &path)
{
    try {
        return parse_rankings(read_file(path));
    } catch (DataError const &e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string serialize_rankings(Rankings const &rankings)
{
    std::string out;
    for (auto const &[id, ranked] : rankings) {
        nlohmann::json line{{"query_id", id}, {"ranked_answer_ids", ranked}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

QueryMetrics query_metrics(std::vector<PostId> const &ranking, std::set<PostId> const &relevant, std::size_t k)
{
    QueryMetrics m;
    if (relevant.empty() || k == 0) return m;

    auto const cutoff = std::min(k, ranking.size());
    std::size_t found = 0;
    double precision_sum = 0.0;
    std::set<PostId> seen;
    for (std::size_t i = 0; i < cutoff; ++i) {
        // A repeated id counts once.
        if (!relevant.contains(ranking[i]) || !seen.insert(ranking[i]).second) continue;
        ++found;
        if (found == 1) m.rr = 1.0 / static_cast<double>(i + 1);
        precision_sum += static_cast<double>(found) / static_cast<double>(i + 1);
    }
    m.hit = found > 0 ? 1.0 : 0.0;
    m.ap = precision_sum / static_cast<double>(std::min(relevant.size(), k));
    m.recall = static_cast<double>(found) / static_cast<double>(relevant.size());
    return m;
}

MetricsReport evaluate(Rankings const &results, GroundTruth const &truth, std::size_t k)
{
    for (auto const &[id, _] : results) {
        if (!truth.contains(id)) {
            throw DataError("results mention query_id '" + id + "' which is not in the ground truth");
        }
    }

    MetricsReport report;
    report.k = k;
    static std::vector<PostId> const empty;
    for (auto const &[id, entry] : truth.entries()) {
        auto it = results.find(id);
        auto const m = query_metrics(it == results.end() ? empty : it->second, entry.relevant, k);
        report.per_query.emplace(id, m);
        report.hit += m.hit;
        report.mrr += m.rr;
        report.map += m.ap;
        report.mr += m.recall;
    }
    if (auto const n = static_cast<double>(truth.size()); n > 0) {
        report.hit /= n;
        report.mrr /= n;
        report.map /= n;
        report.mr /= n;
    }
    return report;
}

std::vector<AblationRow> run_ablation_grid(SearchEngine const &engine, std::vector<std::string> const &baselines,
                                           GroundTruth const &truth, std::size_t k)
{
    std::vector<AblationRow> rows;
    rows.reserve(baselines.size());
    for (auto const &name : baselines) {
        auto const config = configure_ablation(name);
        auto const n = k == kUnbounded ? config.funnel.answer_k : std::max(k, config.funnel.final_n);
        AblationRow row;
        row.baseline = name;
        for (auto const &[id, entry] : truth.entries()) {
            auto const result = engine.search(entry.query_text, config, n);
            auto &ranked = row.rankings[id];
            ranked.reserve(result.answers.size());
            for (auto const &a : result.answers) ranked.push_back(a.answer_id);
        }
        row.report = evaluate(row.rankings, truth, k);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](AblationRow const &a, AblationRow const &b) {
        if (a.report.sum() != b.report.sum()) return a.report.sum() < b.report.sum();
        return a.baseline < b.baseline;
    });
    return rows;
}

std::string metrics_csv(std::vector<AblationRow> const &rows)
{
    std::string out = "Baseline,Hit,MRR,MAP,MR\n";
    for (auto const &row : rows) {
        auto name = row.baseline;
        if (name.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : name) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            name = quoted + "\"";
        }
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", name, row.report.hit, row.report.mrr,
                           row.report.map, row.report.mr);
    }
    return out;
}

}  // namespace threadrank
