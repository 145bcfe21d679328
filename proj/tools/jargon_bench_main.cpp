#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jargon/cohort.hpp"
#include "jargon/corpus.hpp"
#include "jargon/errors.hpp"
#include "jargon/evalstat.hpp"
#include "jargon/promptkit.hpp"
#include "jargon/runner.hpp"
#include "jargon/strutil.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTransport = 2;
constexpr int kExitPartial = 3;

// Flags shared by extract/score: collected as config entries so a flag
// always overrides the same-named config-file key.
void add_config_flags(CLI::App* cmd, std::map<std::string, std::string>& overrides) {
    auto add = [cmd, &overrides](const std::string& flag, const std::string& key,
                                 const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag, [key, &overrides](const std::string& value) { overrides[key] = value; }, desc);
    };
    add("--corpus", "corpus", "corpus file (default: bundled corpus)");
    add("--annotations", "annotations", "annotator responses (JSON Lines)");
    add("--labels", "labels", "group label sets (JSON Lines)");
    add("--predictions", "predictions", "prediction set directory");
    add("--endpoint", "endpoint", "chat-completions endpoint, e.g. https://api.openai.com/v1");
    add("--cache", "cache", "response cache file (JSON Lines)");
    add("--mock-fixtures", "mock_fixtures", "scripted responses for offline runs");
    add("--out", "out", "output directory");
    add("--models", "models", "comma-separated model names");
    add("--temperatures", "temperatures", "comma-separated temperatures in [0,1]");
    add("--role", "role", "role-playing axis: on|off|both");
    add("--icl", "icl", "in-context-learning axis: on|off|both");
    add("--role-groups", "role_groups", "comma-separated groups (Type:label or label)");
    add("--samples", "samples", "samples per request at temperature > 0");
    add("--samples-icl", "samples_icl", "samples per request at temperature > 0 with exemplars");
    add("--icl-exemplar-labels", "icl_exemplar_labels", "exemplar gold source: group|pooled");
    add("--seed", "seed", "seed for fold shuffling");
    add("--max-in-flight", "max_in_flight", "bound on concurrent live requests");
    cmd->add_flag_function(
        "--cache-only",
        [&overrides](std::int64_t) { overrides["cache_only"] = "true"; },
        "fail on any request missing from the cache");
}

jargon::RunConfig build_config(const std::string& config_path,
                               const std::map<std::string, std::string>& overrides) {
    jargon::RunConfig config;
    if (!config_path.empty()) config = jargon::load_run_config(config_path);
    for (const auto& [key, value] : overrides) jargon::apply_config_entry(config, key, value);
    return config;
}

int run_corpus_validate(const std::string& path, std::optional<int> expect_words,
                        std::optional<int> expect_units) {
    jargon::Corpus corpus = path.empty() || path == "bundled"
                                ? jargon::parse_corpus(jargon::bundled_corpus_text())
                                : jargon::load_corpus_file(path);
    jargon::CorpusStats stats = jargon::corpus_stats(corpus);
    std::cout << "sentences=" << stats.sentences << "\n"
              << "words=" << stats.words << "\n"
              << "units=" << stats.units << "\n"
              << "multiword_units=" << stats.multiword_units << "\n"
              << "content_words=" << stats.content_words << "\n"
              << "content_units=" << stats.content_units << "\n";

    // Expected totals are compared against both counting bases: every
    // token, and alphanumeric tokens only (punctuation excluded).
    bool mismatch = (expect_words && *expect_words != stats.words &&
                     *expect_words != stats.content_words) ||
                    (expect_units && *expect_units != stats.units &&
                     *expect_units != stats.content_units);
    if (expect_words)
        std::cout << "expected_words=" << *expect_words
                  << " delta=" << (stats.words - *expect_words)
                  << " content_delta=" << (stats.content_words - *expect_words) << "\n";
    if (expect_units)
        std::cout << "expected_units=" << *expect_units
                  << " delta=" << (stats.units - *expect_units)
                  << " content_delta=" << (stats.content_units - *expect_units) << "\n";
    if (mismatch) {
        std::cout << "discrepancy itemization (per sentence):\n";
        for (const jargon::Sentence& s : corpus.sentences()) {
            int multiword = 0;
            for (const jargon::TermUnit& u : s.units)
                if (u.multiword()) ++multiword;
            std::cout << "  sentence " << s.id << ": words=" << s.words.size()
                      << " units=" << s.units.size() << " multiword=" << multiword << "\n";
        }
    }
    return kExitOk;
}

int run_prompts_dump(const std::string& corpus_path, std::optional<unsigned> fold_seed) {
    json personas = json::array();
    for (jargon::Group g : jargon::kAllGroups) {
        jargon::PersonaMessage persona = jargon::persona_for(g);
        personas.push_back({
            {"group_type", jargon::group_type_name(jargon::group_type(g))},
            {"group", jargon::group_label(g)},
            {"text", persona.text},
        });
    }
    json out = {
        {"instruction", jargon::extraction_instruction()},
        {"instruction_icl", jargon::extraction_instruction_with_exemplars()},
        {"personas", std::move(personas)},
    };
    if (fold_seed) {
        jargon::Corpus corpus = corpus_path.empty() || corpus_path == "bundled"
                                    ? jargon::parse_corpus(jargon::bundled_corpus_text())
                                    : jargon::load_corpus_file(corpus_path);
        jargon::FoldPlan plan = jargon::build_fold_plan(corpus, *fold_seed);
        json folds = json::array();
        for (size_t f = 0; f < plan.folds.size(); ++f)
            folds.push_back({{"fold", f},
                             {"sentences", plan.folds[f]},
                             {"exemplar_fold", plan.exemplar_map[f]}});
        out["fold_plan"] = std::move(folds);
        out["fold_seed"] = *fold_seed;
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_stats_wilcoxon(const std::string& pairs_path) {
    std::ifstream in(pairs_path);
    if (!in) throw jargon::ValidationError("cannot open pairs file " + pairs_path);
    std::vector<std::pair<double, double>> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view content = jargon::trim(line);
        if (content.empty()) continue;
        auto fields = jargon::split(content, ',');
        if (fields.size() < 2)
            throw jargon::ValidationError("pairs line " + std::to_string(line_no) +
                                          " needs two comma-separated values");
        try {
            double a = std::stod(fields[0]);
            double b = std::stod(fields[1]);
            pairs.emplace_back(a, b);
        } catch (const std::exception&) {
            if (line_no == 1 && pairs.empty()) continue;  // header row
            throw jargon::ValidationError("pairs line " + std::to_string(line_no) +
                                          " is not numeric");
        }
    }
    jargon::WilcoxonResult result = jargon::wilcoxon_signed_rank(pairs);
    std::cout << "n_pairs=" << result.n_pairs << "\n"
              << "n_nonzero=" << result.n_nonzero << "\n"
              << "w_plus=" << jargon::format_compact(result.w_plus) << "\n"
              << "w_minus=" << jargon::format_compact(result.w_minus) << "\n"
              << "mean_diff=" << jargon::format_compact(result.mean_diff) << "\n"
              << "method="
              << (result.method == jargon::WilcoxonMethod::exact ? "exact" : "normal-approx")
              << "\n"
              << "p_one_sided=" << jargon::format_compact(result.p_one_sided) << "\n"
              << "p_two_sided=" << jargon::format_compact(result.p_two_sided) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized medical-jargon extraction benchmark"};
    app.require_subcommand(1);

    // corpus validate
    auto* corpus_cmd = app.add_subcommand("corpus", "corpus utilities");
    corpus_cmd->require_subcommand(1);
    auto* validate_cmd = corpus_cmd->add_subcommand("validate", "parse a corpus and print stats");
    std::string validate_path;
    std::optional<int> expect_words;
    std::optional<int> expect_units;
    validate_cmd->add_option("path", validate_path, "corpus file, or 'bundled'")->required();
    validate_cmd->add_option("--expect-words", expect_words, "expected word total");
    validate_cmd->add_option("--expect-units", expect_units, "expected term-unit total");

    // labels build
    auto* labels_cmd = app.add_subcommand("labels", "gold label utilities");
    labels_cmd->require_subcommand(1);
    auto* labels_build_cmd =
        labels_cmd->add_subcommand("build", "derive per-group majority-vote labels");
    std::string labels_corpus = "bundled";
    std::string labels_annotations;
    std::string labels_out;
    labels_build_cmd->add_option("--corpus", labels_corpus, "corpus file, or 'bundled'");
    labels_build_cmd->add_option("--annotations", labels_annotations, "annotations JSON Lines")
        ->required();
    labels_build_cmd->add_option("--out", labels_out, "output JSON Lines path")->required();

    // prompts dump
    auto* prompts_cmd = app.add_subcommand("prompts", "prompt construction utilities");
    prompts_cmd->require_subcommand(1);
    auto* prompts_dump_cmd =
        prompts_cmd->add_subcommand("dump", "print persona and instruction strings as JSON");
    std::string prompts_corpus = "bundled";
    std::optional<unsigned> prompts_seed;
    prompts_dump_cmd->add_option("--corpus", prompts_corpus, "corpus file, or 'bundled'");
    prompts_dump_cmd->add_option("--seed", prompts_seed,
                                 "also dump the fold plan for this seed");

    // extract
    auto* extract_cmd = app.add_subcommand("extract", "run the extraction grid");
    std::string extract_config_path;
    std::map<std::string, std::string> extract_overrides;
    extract_cmd->add_option("--config", extract_config_path, "key = value config file");
    add_config_flags(extract_cmd, extract_overrides);

    // ingest-baseline
    auto* ingest_cmd =
        app.add_subcommand("ingest-baseline", "score externally produced extractor outputs");
    std::string ingest_corpus = "bundled";
    std::string ingest_baseline;
    std::string ingest_predictions = "out/predictions";
    ingest_cmd->add_option("--corpus", ingest_corpus, "corpus file, or 'bundled'");
    ingest_cmd->add_option("--baseline", ingest_baseline, "baseline outputs JSON Lines")
        ->required();
    ingest_cmd->add_option("--predictions", ingest_predictions, "prediction set directory");

    // score
    auto* score_cmd = app.add_subcommand("score", "score predictions against group labels");
    std::string score_config_path;
    std::map<std::string, std::string> score_overrides;
    score_cmd->add_option("--config", score_config_path, "key = value config file");
    add_config_flags(score_cmd, score_overrides);

    // report
    auto* report_cmd = app.add_subcommand("report", "render a score bundle as Markdown");
    std::string report_bundle;
    std::string report_out;
    report_cmd->add_option("--bundle", report_bundle, "directory written by score")->required();
    report_cmd->add_option("--out", report_out, "output file (default: stdout)");

    // stats wilcoxon
    auto* stats_cmd = app.add_subcommand("stats", "statistics utilities");
    stats_cmd->require_subcommand(1);
    auto* wilcoxon_cmd = stats_cmd->add_subcommand("wilcoxon", "paired signed-rank test");
    std::string pairs_path;
    wilcoxon_cmd->add_option("--pairs", pairs_path, "CSV of score_a,score_b rows")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) return run_corpus_validate(validate_path, expect_words, expect_units);

        if (labels_build_cmd->parsed()) {
            jargon::LabelsBuildOutcome outcome =
                jargon::cmd_labels_build(labels_corpus, labels_annotations, labels_out);
            for (const auto& [group, count] : outcome.group_sizes)
                std::cout << jargon::group_type_name(jargon::group_type(group)) << "/"
                          << jargon::group_label(group) << ": " << count << " members\n";
            for (jargon::Group g : outcome.skipped_empty)
                std::cerr << "warning: group " << jargon::group_label(g)
                          << " has no members, skipped\n";
            std::cout << "wrote " << outcome.groups_written << " group label sets to "
                      << labels_out << "\n";
            return kExitOk;
        }

        if (prompts_dump_cmd->parsed()) return run_prompts_dump(prompts_corpus, prompts_seed);

        if (extract_cmd->parsed()) {
            jargon::RunConfig config = build_config(extract_config_path, extract_overrides);
            jargon::ExtractOutcome outcome = jargon::cmd_extract(config);
            std::cout << "planned " << outcome.planned_requests << " requests across "
                      << outcome.cells << " grid cells\n"
                      << "cache: " << outcome.cache_hits << " hits, " << outcome.cache_misses
                      << " misses, " << outcome.live_calls << " live calls\n"
                      << "predictions written to " << config.effective_predictions_dir() << "\n";
            return kExitOk;
        }

        if (ingest_cmd->parsed()) {
            int count =
                jargon::cmd_ingest_baseline(ingest_corpus, ingest_baseline, ingest_predictions);
            std::cout << "ingested " << count << " baseline system(s) into "
                      << ingest_predictions << "\n";
            return kExitOk;
        }

        if (score_cmd->parsed()) {
            jargon::RunConfig config = build_config(score_config_path, score_overrides);
            jargon::ScoreOutcome outcome = jargon::cmd_score(config);
            std::cout << "scored " << outcome.cells_scored << " grid cells; bundle written to "
                      << config.out_dir << "\n";
            if (outcome.partial) {
                std::cerr << "warning: partial report, missing cells:\n";
                for (const std::string& slug : outcome.missing_cells)
                    std::cerr << "  " << slug << "\n";
                return kExitPartial;
            }
            return kExitOk;
        }

        if (report_cmd->parsed()) {
            std::string markdown = jargon::cmd_report(report_bundle);
            if (report_out.empty()) {
                std::cout << markdown;
            } else {
                std::ofstream out(report_out, std::ios::binary);
                if (!out) throw jargon::Error("cannot write " + report_out);
                out << markdown;
            }
            return kExitOk;
        }

        if (wilcoxon_cmd->parsed()) return run_stats_wilcoxon(pairs_path);

        std::cerr << "no subcommand selected\n";
        return kExitValidation;
    } catch (const jargon::TransportError& ex) {
        std::cerr << "transport error: " << ex.what() << "\n";
        return kExitTransport;
    } catch (const jargon::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const jargon::Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitValidation;
    }
}
