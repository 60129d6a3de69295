#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "threadrank/evaluation.hpp"
#include "threadrank/index_dir.hpp"
#include "threadrank/pipeline.hpp"

namespace threadrank::cli {

namespace {

constexpr char const *kDumpFormat = R"(Corpus dump (JSON Lines, one post per line):
  {"id": 1, "post_kind": "question", "title": "...", "body_html": "<p>html</p>", "score": 3, "tags": ["java"]}
  {"id": 2, "post_kind": "answer", "parent_id": 1, "body_html": "<pre><code>...</code></pre>", "score": 5}
Word vectors: text file with a "count dim" header, then "word v1 ... v_dim" per line.
Sentence vectors: same layout keyed by question id.
Antonym dictionary: "word<TAB>pos<TAB>ant1,ant2" per line, pos any of n/v.
Stop words: one word per line, '#' comments.)";

constexpr char const *kSearchFormat = R"(Weight config: "key = value" lines as printed by `threadrank show-config`.
Queries file (batch mode): JSON Lines {"query_id": "...", "query_text": "..."}.
Batch output: JSON Lines {"query_id": "...", "ranked_answer_ids": [...]}.
--format json prints one JSON object per query.)";

constexpr char const *kEvaluateFormat = R"(Ground truth: JSON Lines {"query_id": "...", "query_text": "...", "relevant_answer_ids": [...]}.
Queries file: JSON Lines {"query_id": "...", "query_text": "..."}; overrides truth texts.
Results file: JSON Lines {"query_id": "...", "ranked_answer_ids": [...]}.
Report: CSV "Baseline,Hit,MRR,MAP,MR", rows sorted by the metric sum ascending.
K accepts a positive integer or "inf".)";

void write_file(std::filesystem::path const &path, std::string const &text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

std::size_t parse_k(std::string const &text)
{
    if (text == "inf" || text == "infinity") return kUnbounded;
    std::size_t pos = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(text, &pos);
    } catch (std::exception const &) {
        pos = 0;
    }
    if (pos != text.size() || value == 0 || text.front() == '-') {
        throw ConfigError("K must be a positive integer or 'inf', got '" + text + "'");
    }
    return static_cast<std::size_t>(value);
}

std::string file_stem_for(std::string const &baseline)
{
    std::string out;
    for (char c : baseline) {
        bool const keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
        out += keep ? c : '_';
    }
    return out;
}

struct QueryLine {
    std::string id;
    std::string text;
};

std::vector<QueryLine> load_queries(std::filesystem::path const &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<QueryLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("query_id") || !j.contains("query_text") ||
            !j["query_text"].is_string()) {
            throw DataError(fmt::format("{}:{}: expected {{query_id, query_text}}", path.string(), line_no));
        }
        auto const &id = j["query_id"];
        QueryLine q;
        if (id.is_string()) {
            q.id = id.get<std::string>();
        } else if (id.is_number_integer()) {
            q.id = std::to_string(id.get<std::int64_t>());
        } else {
            throw DataError(fmt::format("{}:{}: query_id must be a string or integer", path.string(), line_no));
        }
        q.text = j["query_text"].get<std::string>();
        out.push_back(std::move(q));
    }
    return out;
}

void print_text(std::ostream &out, SearchResult const &result, bool explain)
{
    out << "query: " << result.query << "\n";
    out << "words:";
    for (auto const &w : result.query_words) out << ' ' << w;
    out << "\n";
    std::size_t rank = 0;
    for (auto const &a : result.answers) {
        out << fmt::format("{:>3}. answer {} (thread {})  score {:.6f}\n", ++rank, a.answer_id, a.thread_id, a.score);
        out << "     title: " << a.parent_title << "\n";
        auto const parts = separate_code(a.answer_body);
        auto const first = parts.prose.find_first_not_of(' ');
        if (first != std::string::npos) {
            auto const last = parts.prose.find_last_not_of(' ');
            out << "     text: " << parts.prose.substr(first, last - first + 1) << "\n";
        }
        if (!parts.code.empty()) {
            std::size_t start = 0;
            while (start <= parts.code.size()) {
                auto end = parts.code.find('\n', start);
                if (end == std::string::npos) end = parts.code.size();
                out << "     | " << parts.code.substr(start, end - start) << "\n";
                start = end + 1;
            }
        }
        if (explain) {
            for (auto const &[name, raw] : a.features.raw) {
                out << fmt::format("       {:<20} raw {:.6f}  normalized {:.6f}\n", name, raw,
                                   a.features.normalized.at(name));
            }
        }
    }
    if (explain) {
        auto const &d = result.diagnostics;
        auto const &c = d.counts;
        out << fmt::format(
            "funnel: bm25 {} -> antonyms {} -> stage1 {} -> stage2 {} -> answers {} -> bm25 {} -> antonyms {} -> "
            "returned {}\n",
            c.bm25_threads, c.after_thread_antonyms, c.stage1, c.stage2, c.answer_pool, c.answer_bm25,
            c.after_answer_antonyms, c.returned);
        out << "top method: " << (d.top_method.empty() ? "(none)" : d.top_method) << " (" << d.top_method_frequency
            << " answers)\n";
        if (d.self_antonymous) out << "query is self-antonymous; antonym filter inactive\n";
        for (auto const &n : d.notes) out << "note: " << n << "\n";
    }
}

WeightConfig resolve_config(std::string const &baseline, std::string const &config_path)
{
    if (!config_path.empty()) {
        return WeightConfig::load(config_path);
    }
    return configure_ablation(baseline);
}

}  // namespace

int run(int argc, char const *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Answer recommendation for programming questions over a Q&A dump", "threadrank"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "threadrank 0.1.0");

    // merge-antonyms
    auto *merge = app.add_subcommand("merge-antonyms", "Merge antonym lists into one symmetric dictionary");
    std::vector<std::string> merge_inputs;
    std::string merge_out;
    merge->add_option("inputs", merge_inputs, "Antonym list files")->required()->check(CLI::ExistingFile);
    merge->add_option("-o,--out", merge_out, "Output dictionary file")->required();
    merge->footer("List format: \"word<TAB>pos<TAB>ant1,ant2\" per line; pos is any of n/v or empty.");

    // build-index
    auto *build = app.add_subcommand("build-index", "Ingest a dump and write an index directory");
    std::string corpus;
    std::string out_dir;
    std::string word_vectors;
    std::string sentence_vectors;
    std::vector<std::string> antonym_files;
    std::string stopwords;
    std::uint64_t seed = 42;
    std::size_t dim = 100;
    std::vector<std::string> include_tags{"java"};
    std::vector<std::string> exclude_tags{"javascript"};
    bool all_tags = false;
    build->add_option("--corpus", corpus, "Dump file (JSON Lines)")->required()->check(CLI::ExistingFile);
    build->add_option("-o,--out", out_dir, "Index directory to write")->required();
    build->add_option("--word-vectors", word_vectors, "Word vector file; hashed fallback vectors when omitted")
        ->check(CLI::ExistingFile);
    build->add_option("--sentence-vectors", sentence_vectors,
                      "Title vector file; IDF-weighted word means when omitted")
        ->check(CLI::ExistingFile);
    build->add_option("--antonyms", antonym_files, "Antonym dictionary or lists (merged)")->check(CLI::ExistingFile);
    build->add_option("--stopwords", stopwords, "Stop word list; built-in list when omitted")
        ->check(CLI::ExistingFile);
    build->add_option("--seed", seed, "Seed of the fallback embedder")->capture_default_str();
    build->add_option("--dim", dim, "Dimension of fallback vectors")->capture_default_str()->check(CLI::PositiveNumber);
    build->add_option("--tag", include_tags, "Keep questions with a tag containing this text")
        ->capture_default_str();
    build->add_option("--exclude-tag", exclude_tags, "Drop questions with a tag containing this text")
        ->capture_default_str();
    build->add_flag("--all-tags", all_tags, "Keep every question regardless of tags");
    build->footer(kDumpFormat);

    // search
    auto *search = app.add_subcommand("search", "Recommend answers for a query");
    std::string index_dir;
    std::string query;
    std::string baseline = "CRAR";
    std::string config_path;
    std::optional<std::size_t> top_n;
    std::string format = "text";
    bool explain = false;
    std::string queries_path;
    std::string batch_out;
    search->add_option("--index", index_dir, "Index directory")->required();
    auto *query_opt = search->add_option("query", query, "Query text");
    auto *queries_opt = search->add_option("--queries", queries_path, "Batch mode: queries file")
                            ->check(CLI::ExistingFile);
    query_opt->excludes(queries_opt);
    search->add_option("--out", batch_out, "Batch mode: rankings output file (stdout when omitted)")
        ->needs(queries_opt);
    auto *baseline_opt = search->add_option("--baseline", baseline, "Named configuration")->capture_default_str();
    search->add_option("--config", config_path, "Weight config file")->check(CLI::ExistingFile)->excludes(baseline_opt);
    search->add_option("-n,--top", top_n, "Number of answers (default from the configuration)")
        ->check(CLI::NonNegativeNumber);
    search->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    search->add_flag("--explain", explain, "Include per-feature scores and funnel counts");
    search->footer(kSearchFormat);

    // evaluate
    auto *eval = app.add_subcommand("evaluate", "Score baselines against a ground truth");
    std::string truth_path;
    std::string eval_index;
    std::string results_path;
    std::string eval_queries;
    std::vector<std::string> baselines;
    bool all_baselines = false;
    std::string k_text = "10";
    std::string csv_out;
    std::string results_dir;
    eval->add_option("--truth", truth_path, "Ground-truth file")->required()->check(CLI::ExistingFile);
    auto *eval_index_opt = eval->add_option("--index", eval_index, "Index directory (run baselines)");
    auto *results_opt =
        eval->add_option("--results", results_path, "Score an existing results file")->check(CLI::ExistingFile);
    eval_index_opt->excludes(results_opt);
    eval->add_option("--queries", eval_queries, "Queries file")->check(CLI::ExistingFile)->needs(eval_index_opt);
    auto *baselines_opt = eval->add_option("--baseline", baselines, "Baseline to run (repeatable; default CRAR)")
                              ->needs(eval_index_opt);
    eval->add_flag("--all-baselines", all_baselines, "Run every documented baseline")
        ->needs(eval_index_opt)
        ->excludes(baselines_opt);
    eval->add_option("-k,--k", k_text, "Cutoff K")->capture_default_str();
    eval->add_option("--out", csv_out, "CSV report file (stdout when omitted)");
    eval->add_option("--results-dir", results_dir, "Write one rankings file per baseline here")
        ->needs(eval_index_opt);
    eval->footer(kEvaluateFormat);

    // helpers
    auto *show = app.add_subcommand("show-config", "Print the weight config of a named configuration");
    std::string show_baseline = "CRAR";
    show->add_option("--baseline", show_baseline, "Named configuration")->capture_default_str();
    auto *list = app.add_subcommand("list-baselines", "Print every named configuration");

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const &e) {
        // Help and version go to `out` with status 0; parse errors are usage errors.
        auto const code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (merge->parsed()) {
            std::vector<std::filesystem::path> paths(merge_inputs.begin(), merge_inputs.end());
            AntonymDictionary::ParseStats stats;
            auto dict = AntonymDictionary::merge_lists(paths, &stats);
            if (dict.empty()) spdlog::warn("merged antonym dictionary is empty");
            if (stats.skipped > 0) spdlog::warn("skipped {} unparsable lines", stats.skipped);
            dict.save(merge_out);
            out << fmt::format("wrote {} entries to {}\n", dict.size(), merge_out);
            return kExitOk;
        }

        if (build->parsed()) {
            TagFilter filter = all_tags ? TagFilter::accept_all() : TagFilter{include_tags, exclude_tags};
            auto pre = stopwords.empty() ? Preprocessor{} : Preprocessor::from_file(stopwords);
            auto dump = load_dump(corpus, filter);
            ThreadBuildStats tstats;
            auto threads = build_threads(dump.posts, pre, &tstats);
            AntonymDictionary antonyms;
            if (!antonym_files.empty()) {
                std::vector<std::filesystem::path> paths(antonym_files.begin(), antonym_files.end());
                antonyms = AntonymDictionary::merge_lists(paths);
            }
            BuildOptions opts;
            if (!word_vectors.empty()) opts.word_vectors = word_vectors;
            if (!sentence_vectors.empty()) opts.sentence_vectors = sentence_vectors;
            opts.seed = seed;
            opts.dim = dim;
            auto data = build_engine_data(std::move(threads), std::move(pre), std::move(antonyms), opts);
            if (data.threads.empty()) spdlog::warn("no thread survived filtering; the index is empty");

            std::size_t answers = 0;
            for (auto const &t : data.threads) answers += t.answers.size();
            nlohmann::json stats{{"dump_lines", dump.stats.lines},
                                 {"dump_warnings", dump.stats.warning_count},
                                 {"questions_kept", dump.stats.questions_kept},
                                 {"answers_kept", dump.stats.answers_kept},
                                 {"threads", data.threads.size()},
                                 {"orphan_answers", tstats.orphan_answers},
                                 {"answers_discarded", tstats.answers_discarded},
                                 {"seed", seed}};
            save_index_dir(out_dir, data, stats);
            out << fmt::format("threads: {}\nanswers: {}\nvocabulary: {}\nantonym entries: {}\nseed: {}\n",
                               data.threads.size(), answers, data.idf.vocabulary_size(), data.antonyms.size(), seed);
            return kExitOk;
        }

        if (search->parsed()) {
            auto const config = resolve_config(baseline, config_path);
            SearchEngine engine(load_index_dir(index_dir));
            auto const n = top_n.value_or(config.funnel.final_n);

            if (!queries_path.empty()) {
                Rankings rankings;
                for (auto const &q : load_queries(queries_path)) {
                    auto const result = engine.search(q.text, config, n);
                    auto &ranked = rankings[q.id];
                    for (auto const &a : result.answers) ranked.push_back(a.answer_id);
                }
                auto const text = serialize_rankings(rankings);
                if (batch_out.empty()) {
                    out << text;
                } else {
                    write_file(batch_out, text);
                }
                return kExitOk;
            }

            if (query.empty()) {
                throw ConfigError("search needs a query or --queries");
            }
            auto const result = engine.search(query, config, n);
            if (result.query_words.empty()) spdlog::warn("query is empty after preprocessing");
            if (format == "json") {
                auto j = result.to_json(explain);
                j["seed"] = engine.data().embedding.seed;
                out << j.dump() << "\n";
            } else {
                print_text(out, result, explain);
            }
            return kExitOk;
        }

        if (eval->parsed()) {
            auto const k = parse_k(k_text);
            auto truth = GroundTruth::load(truth_path);
            std::vector<AblationRow> rows;
            if (!results_path.empty()) {
                AblationRow row;
                row.baseline = std::filesystem::path(results_path).stem().string();
                row.rankings = load_rankings(results_path);
                row.report = evaluate(row.rankings, truth, k);
                rows.push_back(std::move(row));
            } else if (!eval_index.empty()) {
                if (all_baselines) baselines = baseline_names();
                if (baselines.empty()) baselines = {"CRAR"};
                for (auto const &b : baselines) (void)configure_ablation(b);  // fail before loading
                if (!eval_queries.empty()) {
                    GroundTruth merged;
                    auto entries = truth.entries();
                    for (auto const &q : load_queries(eval_queries)) {
                        auto it = entries.find(q.id);
                        if (it == entries.end()) {
                            throw DataError("query '" + q.id + "' has no ground-truth entry");
                        }
                        it->second.query_text = q.text;
                    }
                    for (auto &[id, e] : entries) merged.add(id, std::move(e));
                    truth = std::move(merged);
                }
                SearchEngine engine(load_index_dir(eval_index));
                rows = run_ablation_grid(engine, baselines, truth, k);
                if (!results_dir.empty()) {
                    for (auto const &row : rows) {
                        write_file(std::filesystem::path(results_dir) / (file_stem_for(row.baseline) + ".jsonl"),
                                   serialize_rankings(row.rankings));
                    }
                }
            } else {
                throw ConfigError("evaluate needs --index or --results");
            }
            auto const csv = metrics_csv(rows);
            err << fmt::format("evaluated {} queries x {} baselines at K={}\n", truth.size(), rows.size(),
                               k == kUnbounded ? std::string("inf") : std::to_string(k));
            if (csv_out.empty()) {
                out << csv;
            } else {
                write_file(csv_out, csv);
            }
            return kExitOk;
        }

        if (show->parsed()) {
            out << configure_ablation(show_baseline).serialize();
            return kExitOk;
        }

        if (list->parsed()) {
            for (auto const &name : baseline_names()) out << name << "\n";
            return kExitOk;
        }
    } catch (ConfigError const &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (DataError const &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (std::filesystem::filesystem_error const &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace threadrank::cli
