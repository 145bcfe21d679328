#include "jargon/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "jargon/errors.hpp"
#include "jargon/evalstat.hpp"
#include "jargon/extraction.hpp"
#include "jargon/llmgate.hpp"
#include "jargon/promptkit.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

int group_rank(Group group) {
    for (size_t i = 0; i < kAllGroups.size(); ++i)
        if (kAllGroups[i] == group) return static_cast<int>(i);
    return -1;
}

// Sort order for grid cells: model, temperature (absent first), role
// (none first, then canonical group order), then ICL.
struct CellOrder {
    bool operator()(const CellDescriptor& a, const CellDescriptor& b) const {
        if (a.model != b.model) return a.model < b.model;
        if (a.temperature.has_value() != b.temperature.has_value())
            return !a.temperature.has_value();
        if (a.temperature && *a.temperature != *b.temperature)
            return *a.temperature < *b.temperature;
        int ra = a.role ? 1 + group_rank(*a.role) : 0;
        int rb = b.role ? 1 + group_rank(*b.role) : 0;
        if (ra != rb) return ra < rb;
        return a.icl < b.icl;
    }
};

bool parse_bool_value(const std::string& value, const std::string& key) {
    std::string v = to_lower_ascii(trim(value));
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("config key '" + key + "' expects a boolean, got '" + value + "'");
}

int parse_int_value(const std::string& value, const std::string& key, int min_value) {
    try {
        size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        if (parsed < min_value)
            throw ConfigError("config key '" + key + "' must be >= " + std::to_string(min_value));
        return parsed;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
    }
}

std::vector<std::string> parse_list_value(const std::string& value) {
    std::vector<std::string> out;
    for (const std::string& item : split(value, ',')) {
        std::string trimmed(trim(item));
        if (!trimmed.empty()) out.push_back(trimmed);
    }
    return out;
}

std::string axis_value(const std::string& value, const std::string& key) {
    std::string v = to_lower_ascii(trim(value));
    if (v == "on" || v == "off" || v == "both") return v;
    throw ConfigError("config key '" + key + "' expects on|off|both, got '" + value + "'");
}

}  // namespace

std::string RunConfig::effective_labels_path() const {
    return labels_path.empty() ? out_dir + "/labels.jsonl" : labels_path;
}

std::string RunConfig::effective_predictions_dir() const {
    return predictions_dir.empty() ? out_dir + "/predictions" : predictions_dir;
}

std::string RunConfig::effective_cache_path() const {
    return cache_path.empty() ? out_dir + "/cache.jsonl" : cache_path;
}

std::string RunConfig::fingerprint() const {
    json groups = json::array();
    for (Group g : role_groups)
        groups.push_back(std::string(group_type_name(group_type(g))) + ":" +
                         std::string(group_label(g)));
    json logical = {
        {"models", models},
        {"temperatures", temperatures},
        {"role", role_axis},
        {"icl", icl_axis},
        {"role_groups", std::move(groups)},
        {"samples", samples},
        {"samples_icl", samples_icl},
        {"icl_exemplar_labels", icl_exemplar_labels},
        {"seed", seed},
    };
    return to_hex(fnv1a64(logical.dump()));
}

void apply_config_entry(RunConfig& config, const std::string& raw_key,
                        const std::string& raw_value) {
    std::string key = to_lower_ascii(trim(raw_key));
    std::string value(trim(raw_value));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
        value = value.substr(1, value.size() - 2);

    if (key == "corpus") config.corpus_path = value;
    else if (key == "annotations") config.annotations_path = value;
    else if (key == "labels") config.labels_path = value;
    else if (key == "predictions") config.predictions_dir = value;
    else if (key == "endpoint") config.endpoint = value;
    else if (key == "cache") config.cache_path = value;
    else if (key == "mock_fixtures") config.mock_fixtures_path = value;
    else if (key == "cache_only") config.cache_only = parse_bool_value(value, key);
    else if (key == "models") config.models = parse_list_value(value);
    else if (key == "temperatures") {
        config.temperatures.clear();
        for (const std::string& item : parse_list_value(value)) {
            try {
                config.temperatures.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("bad temperature '" + item + "'");
            }
        }
    } else if (key == "role") config.role_axis = axis_value(value, key);
    else if (key == "icl") config.icl_axis = axis_value(value, key);
    else if (key == "role_groups") {
        config.role_groups.clear();
        for (const std::string& item : parse_list_value(value)) {
            try {
                config.role_groups.push_back(parse_group_spec(item));
            } catch (const ValidationError& ex) {
                throw ConfigError(ex.what());
            }
        }
    } else if (key == "samples") config.samples = parse_int_value(value, key, 1);
    else if (key == "samples_icl") config.samples_icl = parse_int_value(value, key, 1);
    else if (key == "icl_exemplar_labels") {
        std::string v = to_lower_ascii(value);
        if (v != "group" && v != "pooled")
            throw ConfigError("icl_exemplar_labels expects group|pooled, got '" + value + "'");
        config.icl_exemplar_labels = v;
    } else if (key == "out") config.out_dir = value;
    else if (key == "seed")
        config.seed = static_cast<std::uint32_t>(parse_int_value(value, key, 0));
    else if (key == "max_in_flight") config.max_in_flight = parse_int_value(value, key, 1);
    else throw ConfigError("unknown config key '" + raw_key + "'");
}

RunConfig load_run_config(const std::string& path) {
    RunConfig config;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        size_t eq = content.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not a key = value pair");
        try {
            apply_config_entry(config, std::string(content.substr(0, eq)),
                               std::string(content.substr(eq + 1)));
        } catch (const ConfigError& ex) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return config;
}

Corpus load_corpus_file(const std::string& path) {
    return parse_corpus(read_file(path));
}

Corpus load_corpus_for(const RunConfig& config) {
    if (config.corpus_path.empty() || config.corpus_path == "bundled")
        return parse_corpus(bundled_corpus_text());
    return load_corpus_file(config.corpus_path);
}

LabelsBuildOutcome cmd_labels_build(const std::string& corpus_path,
                                    const std::string& annotations_path,
                                    const std::string& out_path) {
    Corpus corpus = corpus_path.empty() || corpus_path == "bundled"
                        ? parse_corpus(bundled_corpus_text())
                        : load_corpus_file(corpus_path);

    std::ifstream in(annotations_path);
    if (!in) throw ValidationError("cannot open annotations file " + annotations_path);
    std::vector<AnnotatorData> annotators = load_annotations_jsonl(in, corpus);

    std::vector<AnnotatorProfile> profiles;
    std::vector<AnnotationRecord> records;
    for (const AnnotatorData& a : annotators) {
        profiles.push_back(a.profile);
        records.insert(records.end(), a.records.begin(), a.records.end());
    }

    GroupMembership membership = group_membership(profiles);
    LabelsBuildOutcome outcome;
    outcome.annotators = static_cast<int>(profiles.size());

    std::vector<GroupLabelSet> sets;
    for (Group g : kAllGroups) {
        int count = membership.count(g);
        outcome.group_sizes.emplace_back(g, count);
        if (count == 0) {
            outcome.skipped_empty.push_back(g);
            continue;
        }
        sets.push_back(build_group_labels(corpus, records, profiles, g));
    }
    outcome.groups_written = static_cast<int>(sets.size());

    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream out_stream(out_path, std::ios::binary);
    if (!out_stream) throw Error("cannot write " + out_path);
    write_group_label_sets_jsonl(out_stream, sets, corpus);
    return outcome;
}

namespace {

RunMatrix matrix_from_config(const RunConfig& config) {
    if (config.models.empty()) throw ConfigError("extract needs at least one model");
    if (config.temperatures.empty()) throw ConfigError("extract needs at least one temperature");

    RunMatrix matrix;
    matrix.models = config.models;
    matrix.temperatures = config.temperatures;
    matrix.samples_per_request = config.samples;
    matrix.samples_per_request_icl = config.samples_icl;

    if (config.role_axis == "off") {
        matrix.include_no_role = true;
    } else if (config.role_axis == "on") {
        matrix.include_no_role = false;
        matrix.role_groups = config.role_groups;
    } else {
        matrix.include_no_role = true;
        matrix.role_groups = config.role_groups;
    }

    if (config.icl_axis == "off") matrix.icl_axis = {false};
    else if (config.icl_axis == "on") matrix.icl_axis = {true};
    else matrix.icl_axis = {false, true};

    return matrix;
}

}  // namespace

ExtractOutcome cmd_extract(const RunConfig& config) {
    Corpus corpus = load_corpus_for(config);
    RunMatrix matrix = matrix_from_config(config);

    fs::create_directories(config.out_dir);
    fs::create_directories(config.effective_predictions_dir());

    bool wants_icl = false;
    for (bool icl : matrix.icl_axis) wants_icl = wants_icl || icl;

    std::optional<FoldPlan> fold_plan;
    std::map<Group, std::set<UnitKey>> group_gold;
    std::optional<std::set<UnitKey>> pooled_gold;
    if (wants_icl) {
        if (config.annotations_path.empty())
            throw ConfigError("exemplar prompts need an annotations file for gold labels");
        std::ifstream in(config.annotations_path);
        if (!in) throw ValidationError("cannot open annotations file " + config.annotations_path);
        std::vector<AnnotatorData> annotators = load_annotations_jsonl(in, corpus);
        std::vector<AnnotatorProfile> profiles;
        std::vector<AnnotationRecord> records;
        for (const AnnotatorData& a : annotators) {
            profiles.push_back(a.profile);
            records.insert(records.end(), a.records.begin(), a.records.end());
        }

        fold_plan = build_fold_plan(corpus, config.seed);
        write_file(config.out_dir + "/fold_plan.jsonl", fold_plan_to_jsonl(*fold_plan));
        pooled_gold = pooled_jargon_units(corpus, records, profiles);
        for (Group g : matrix.role_groups) {
            if (config.icl_exemplar_labels == "pooled")
                group_gold[g] = *pooled_gold;
            else
                group_gold[g] = build_group_labels(corpus, records, profiles, g).jargon_units();
        }
    }

    std::vector<PlannedRequest> plan =
        plan_requests(corpus, matrix, fold_plan ? &*fold_plan : nullptr, &group_gold,
                      pooled_gold ? &*pooled_gold : nullptr);

    GatewayOptions gateway_options;
    gateway_options.endpoint = config.endpoint;
    if (const char* key = std::getenv("JARGON_BENCH_API_KEY")) gateway_options.api_key = key;
    gateway_options.cache_path = config.effective_cache_path();
    gateway_options.mock_fixtures_path = config.mock_fixtures_path;
    gateway_options.cache_only = config.cache_only;
    Gateway gateway(gateway_options);

    std::map<std::string, CompletionBatch> batches =
        run_plan(gateway, plan, config.max_in_flight);

    std::map<CellDescriptor, std::map<int, std::vector<std::string>>, CellOrder> cell_samples;
    std::map<CellDescriptor, int, CellOrder> cell_n;
    for (const PlannedRequest& planned : plan) {
        const CompletionBatch& batch = batches.at(planned.request.request_key());
        cell_samples[planned.cell][planned.sentence_id] = batch.samples;
        cell_n[planned.cell] = planned.request.config.n;
    }

    for (const auto& [cell, samples] : cell_samples) {
        PredictionSet set = build_prediction_set(corpus, cell, samples, cell_n[cell]);
        write_file(config.effective_predictions_dir() + "/" + cell.slug() + ".json",
                   prediction_set_to_json(set) + "\n");
    }

    ExtractOutcome outcome;
    outcome.planned_requests = static_cast<int>(plan.size());
    outcome.cells = static_cast<int>(cell_samples.size());
    outcome.cache_hits = gateway.cache_hits();
    outcome.cache_misses = gateway.cache_misses();
    outcome.live_calls = gateway.live_calls();

    CorpusStats stats = corpus_stats(corpus);
    json manifest = {
        {"planned_requests", outcome.planned_requests},
        {"cells", outcome.cells},
        {"cache_hits", outcome.cache_hits},
        {"cache_misses", outcome.cache_misses},
        {"live_calls", outcome.live_calls},
        {"seed", config.seed},
        {"config_fingerprint", config.fingerprint()},
        {"corpus", {{"sentences", stats.sentences},
                    {"words", stats.words},
                    {"units", stats.units},
                    {"multiword_units", stats.multiword_units}}},
    };
    write_file(config.out_dir + "/extract_manifest.json", manifest.dump(2) + "\n");
    return outcome;
}

namespace {

const std::vector<Group>& canonical_groups() {
    static const std::vector<Group> groups(kAllGroups.begin(), kAllGroups.end());
    return groups;
}

std::string role_csv_value(const CellDescriptor& cell) {
    return cell.role ? std::string(group_label(*cell.role)) : "none";
}

std::string temp_csv_value(const CellDescriptor& cell) {
    return cell.temperature ? format_temperature(*cell.temperature) : "";
}

// Key for one wilcoxon pairing and for improvement bookkeeping.
struct PairingKey {
    std::string model;
    std::optional<double> temperature;
    bool icl = false;

    bool operator<(const PairingKey& other) const {
        if (model != other.model) return model < other.model;
        if (temperature.has_value() != other.temperature.has_value())
            return !temperature.has_value();
        if (temperature && *temperature != *other.temperature)
            return *temperature < *other.temperature;
        return icl < other.icl;
    }
};

struct PairingScores {
    std::map<Group, double> no_role;
    std::map<Group, double> with_role;
    int n_samples = 1;
};

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
    std::string out = "|";
    for (const std::string& h : header) out += " " + h + " |";
    out += "\n|";
    for (size_t i = 0; i < header.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& row : rows) {
        out += "|";
        for (const std::string& cell : row) out += " " + cell + " |";
        out += "\n";
    }
    return out;
}

}  // namespace

ScoreOutcome cmd_score(const RunConfig& config) {
    Corpus corpus = load_corpus_for(config);
    fs::create_directories(config.out_dir);

    std::ifstream labels_in(config.effective_labels_path());
    if (!labels_in)
        throw ValidationError("cannot open labels file " + config.effective_labels_path());
    std::map<Group, GroupLabelSet> labels;
    for (GroupLabelSet& set : read_group_label_sets_jsonl(labels_in, corpus)) {
        Group group = set.group;
        if (!labels.emplace(group, std::move(set)).second)
            throw ValidationError(std::string("duplicate label set for group ") +
                                  std::string(group_label(group)));
    }

    const std::string predictions_dir = config.effective_predictions_dir();
    std::vector<fs::path> prediction_files;
    if (fs::exists(predictions_dir))
        for (const auto& entry : fs::directory_iterator(predictions_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                prediction_files.push_back(entry.path());
    std::sort(prediction_files.begin(), prediction_files.end());

    std::map<CellDescriptor, PredictionSet, CellOrder> predictions;
    for (const fs::path& path : prediction_files) {
        PredictionSet set = prediction_set_from_json(read_file(path.string()), corpus);
        CellDescriptor cell = set.cell;
        if (!predictions.emplace(cell, std::move(set)).second)
            throw ValidationError("duplicate prediction set for cell " + cell.slug());
    }

    // Expected grid, when the config names one.
    ScoreOutcome outcome;
    if (!config.models.empty() && !config.temperatures.empty()) {
        RunMatrix matrix = matrix_from_config(config);
        for (const std::string& model : matrix.models) {
            for (double temperature : matrix.temperatures) {
                for (bool icl : matrix.icl_axis) {
                    std::vector<std::optional<Group>> roles;
                    if (matrix.include_no_role) roles.push_back(std::nullopt);
                    for (Group g : matrix.role_groups) roles.emplace_back(g);
                    for (const auto& role : roles) {
                        CellDescriptor cell{model, temperature, role, icl};
                        if (!predictions.count(cell)) outcome.missing_cells.push_back(cell.slug());
                    }
                }
            }
        }
        outcome.partial = !outcome.missing_cells.empty();
    }
    outcome.cells_scored = static_cast<int>(predictions.size());

    // ---- Per-(cell, group) scores -------------------------------------
    std::string scores_csv = "model,temperature,role,icl,group_type,group,precision,recall,f1\n";
    std::map<PairingKey, PairingScores> pairings;

    struct DisplayKey {
        std::string model;
        std::optional<double> temperature;
        bool role = false;
        bool icl = false;

        bool operator<(const DisplayKey& other) const {
            if (model != other.model) return model < other.model;
            if (temperature.has_value() != other.temperature.has_value())
                return !temperature.has_value();
            if (temperature && *temperature != *other.temperature)
                return *temperature < *other.temperature;
            if (role != other.role) return role < other.role;
            return icl < other.icl;
        }
    };
    std::map<DisplayKey, std::map<Group, double>> display_rows;

    std::set<std::string> groups_without_labels;
    for (const auto& [cell, set] : predictions) {
        std::vector<std::pair<Group, ScoreRow>> rows;
        if (cell.role) {
            auto it = labels.find(*cell.role);
            if (it == labels.end()) {
                groups_without_labels.insert(std::string(group_label(*cell.role)));
                continue;
            }
            rows.emplace_back(*cell.role, score_group(set, it->second));
        } else {
            for (Group g : canonical_groups()) {
                auto it = labels.find(g);
                if (it == labels.end()) continue;
                rows.emplace_back(g, score_group(set, it->second));
            }
        }

        for (const auto& [group, row] : rows) {
            scores_csv += csv_escape(cell.model) + "," + temp_csv_value(cell) + "," +
                          csv_escape(role_csv_value(cell)) + "," + (cell.icl ? "yes" : "no") +
                          "," + std::string(group_type_name(group_type(group))) + "," +
                          csv_escape(group_label(group)) + "," + format_fixed2(row.precision) +
                          "," + format_fixed2(row.recall) + "," + format_fixed2(row.f1) + "\n";

            DisplayKey display{cell.model, cell.temperature, cell.role.has_value(), cell.icl};
            display_rows[display][group] = row.f1;

            PairingKey pairing{cell.model, cell.temperature, cell.icl};
            if (cell.role) {
                pairings[pairing].with_role[group] = row.f1;
                pairings[pairing].n_samples = set.n_samples;
            } else {
                pairings[pairing].no_role[group] = row.f1;
                pairings[pairing].n_samples = set.n_samples;
            }
        }
    }
    write_file(config.out_dir + "/scores.csv", scores_csv);

    // ---- Wilcoxon rows -------------------------------------------------
    std::string wilcoxon_csv =
        "model,temperature,n,icl,macro_no_role,macro_role,diff,p_one_sided,p_two_sided,method\n";
    std::vector<std::vector<std::string>> wilcoxon_md_rows;
    std::map<std::string, double> improvement_without[2];
    std::map<std::string, double> improvement_with[2];

    for (const auto& [pairing, scores] : pairings) {
        if (scores.no_role.empty() || scores.with_role.empty()) continue;

        std::vector<std::pair<double, double>> pairs;
        double sum_no = 0.0;
        double sum_with = 0.0;
        for (const auto& [group, f1_with] : scores.with_role) {
            auto it = scores.no_role.find(group);
            if (it == scores.no_role.end()) continue;
            pairs.emplace_back(it->second, f1_with);
            sum_no += it->second;
            sum_with += f1_with;

            std::string key = pairing.model + "|" +
                              (pairing.temperature ? format_temperature(*pairing.temperature)
                                                   : "NA") +
                              "|" + std::string(group_label(group));
            int icl_index = pairing.icl ? 1 : 0;
            improvement_without[icl_index][key] = it->second;
            improvement_with[icl_index][key] = f1_with;
        }
        if (pairs.empty()) continue;

        double macro_no = sum_no / static_cast<double>(pairs.size());
        double macro_with = sum_with / static_cast<double>(pairs.size());

        std::string p_one;
        std::string p_two;
        std::string method;
        double diff = macro_with - macro_no;
        try {
            WilcoxonResult result = wilcoxon_signed_rank(pairs);
            p_one = format_compact(result.p_one_sided);
            p_two = format_compact(result.p_two_sided);
            method = result.method == WilcoxonMethod::exact ? "exact" : "normal-approx";
            diff = result.mean_diff;
        } catch (const ValidationError&) {
            method = "degenerate";  // every paired difference was zero
        }

        std::string temp_text =
            pairing.temperature ? format_temperature(*pairing.temperature) : "";
        wilcoxon_csv += csv_escape(pairing.model) + "," + temp_text + "," +
                        std::to_string(scores.n_samples) + "," + (pairing.icl ? "yes" : "no") +
                        "," + format_fixed2(macro_no) + "," + format_fixed2(macro_with) + "," +
                        format_fixed2(diff) + "," + p_one + "," + p_two + "," + method + "\n";
        wilcoxon_md_rows.push_back({pairing.model, temp_text.empty() ? "-" : temp_text,
                                    std::to_string(scores.n_samples),
                                    pairing.icl ? "Yes" : "No", format_fixed2(macro_no),
                                    format_fixed2(macro_with), format_fixed2(diff),
                                    p_one.empty() ? "-" : p_one, p_two.empty() ? "-" : p_two,
                                    method});
    }
    write_file(config.out_dir + "/wilcoxon.csv", wilcoxon_csv);

    // ---- Improvement summary -------------------------------------------
    std::string improvement_text;
    for (int icl_index = 0; icl_index < 2; ++icl_index) {
        if (improvement_without[icl_index].empty()) continue;
        auto [improved, total] =
            improvement_count(improvement_without[icl_index], improvement_with[icl_index]);
        improvement_text += std::string(icl_index ? "ICL" : "non-ICL") + ": improved " +
                            std::to_string(improved) + "/" + std::to_string(total) + "\n";
    }
    if (improvement_text.empty())
        improvement_text = "no paired role/no-role configurations\n";
    write_file(config.out_dir + "/improvement.txt", improvement_text);

    // ---- Label agreement diagnostics -------------------------------------
    std::string label_diff_csv = "group_a_type,group_a,group_b_type,group_b,differing_units\n";
    std::set<UnitKey> divergent_units;
    int nonzero_pairs = 0;
    std::optional<std::tuple<Group, Group, int>> max_pair;
    std::vector<Group> present;
    for (Group g : canonical_groups())
        if (labels.count(g)) present.push_back(g);
    for (size_t i = 0; i < present.size(); ++i) {
        for (size_t j = i + 1; j < present.size(); ++j) {
            std::vector<UnitKey> diff = label_diff(labels.at(present[i]), labels.at(present[j]));
            divergent_units.insert(diff.begin(), diff.end());
            if (!diff.empty()) ++nonzero_pairs;
            if (!max_pair || static_cast<int>(diff.size()) > std::get<2>(*max_pair))
                max_pair = {present[i], present[j], static_cast<int>(diff.size())};
            label_diff_csv += std::string(group_type_name(group_type(present[i]))) + "," +
                              csv_escape(group_label(present[i])) + "," +
                              std::string(group_type_name(group_type(present[j]))) + "," +
                              csv_escape(group_label(present[j])) + "," +
                              std::to_string(diff.size()) + "\n";
        }
    }
    write_file(config.out_dir + "/label_diff.csv", label_diff_csv);

    // ---- Markdown tables -------------------------------------------------
    std::vector<std::string> score_header = {"Model", "Temp", "Role", "ICL"};
    for (Group g : canonical_groups()) score_header.emplace_back(group_label(g));
    score_header.emplace_back("Macro");

    std::vector<std::vector<std::string>> score_rows;
    for (const auto& [display, f1_by_group] : display_rows) {
        std::vector<std::string> row = {
            display.model,
            display.temperature ? format_temperature(*display.temperature) : "-",
            display.role ? "Yes" : "No",
            display.icl ? "Yes" : "No",
        };
        double sum = 0.0;
        size_t present_count = 0;
        for (Group g : canonical_groups()) {
            auto it = f1_by_group.find(g);
            if (it == f1_by_group.end()) {
                row.emplace_back("-");
            } else {
                row.push_back(format_fixed2(it->second));
                sum += it->second;
                ++present_count;
            }
        }
        row.push_back(present_count == kAllGroups.size()
                          ? format_fixed2(sum / static_cast<double>(kAllGroups.size()))
                          : "-");
        score_rows.push_back(std::move(row));
    }

    std::string tables_md = "## Scores\n\n";
    tables_md += markdown_table(score_header, score_rows);
    tables_md += "\n## Wilcoxon signed-rank (role-playing vs none)\n\n";
    tables_md += markdown_table({"Model", "Temp", "N", "ICL", "Macro F1 w/o Role",
                                 "Macro F1 w/ Role", "Diff", "p (one-sided)", "p (two-sided)",
                                 "Method"},
                                wilcoxon_md_rows);
    write_file(config.out_dir + "/tables.md", tables_md);

    // ---- Manifest ----------------------------------------------------------
    CorpusStats stats = corpus_stats(corpus);
    json cache_stats = nullptr;
    {
        fs::path extract_manifest = fs::path(config.out_dir) / "extract_manifest.json";
        if (fs::exists(extract_manifest)) {
            try {
                json extract = json::parse(read_file(extract_manifest.string()));
                cache_stats = {
                    {"hits", extract.value("cache_hits", 0)},
                    {"misses", extract.value("cache_misses", 0)},
                    {"live_calls", extract.value("live_calls", 0)},
                };
            } catch (const json::exception&) {
                // stale or foreign manifest: report without cache stats
            }
        }
    }

    json label_groups = json::array();
    for (Group g : present)
        label_groups.push_back(std::string(group_type_name(group_type(g))) + "/" +
                               std::string(group_label(g)));
    json cells = json::array();
    for (const auto& [cell, set] : predictions) cells.push_back(cell.slug());

    json diff_summary = {
        {"differing_units", divergent_units.size()},
        {"nonzero_pairs", nonzero_pairs},
        {"scored_groups", present.size()},
    };
    if (max_pair && std::get<2>(*max_pair) > 0) {
        diff_summary["max_pair"] = {
            {"a", group_label(std::get<0>(*max_pair))},
            {"b", group_label(std::get<1>(*max_pair))},
            {"count", std::get<2>(*max_pair)},
        };
    } else {
        diff_summary["max_pair"] = nullptr;
    }

    json manifest = {
        {"config_fingerprint", config.fingerprint()},
        {"seed", config.seed},
        {"corpus", {{"sentences", stats.sentences},
                    {"words", stats.words},
                    {"units", stats.units},
                    {"multiword_units", stats.multiword_units}}},
        {"cache", cache_stats},
        {"label_groups", std::move(label_groups)},
        {"cells", std::move(cells)},
        {"missing_cells", outcome.missing_cells},
        {"groups_without_labels",
         std::vector<std::string>(groups_without_labels.begin(), groups_without_labels.end())},
        {"label_diff", std::move(diff_summary)},
    };
    write_file(config.out_dir + "/manifest.json", manifest.dump(2) + "\n");

    return outcome;
}

std::string cmd_report(const std::string& bundle_dir) {
    fs::path dir(bundle_dir);
    for (const char* required : {"manifest.json", "tables.md", "improvement.txt", "scores.csv",
                                 "wilcoxon.csv", "label_diff.csv"}) {
        if (!fs::exists(dir / required))
            throw ValidationError("incomplete report bundle: missing " + std::string(required));
    }

    json manifest;
    try {
        manifest = json::parse(read_file((dir / "manifest.json").string()));
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed manifest.json: ") + ex.what());
    }

    std::string out = "# jargon-bench report\n\n";
    try {
        const json& corpus = manifest.at("corpus");
        out += "- corpus: " + std::to_string(corpus.at("sentences").get<int>()) +
               " sentences, " + std::to_string(corpus.at("words").get<int>()) + " words, " +
               std::to_string(corpus.at("units").get<int>()) + " term units (" +
               std::to_string(corpus.at("multiword_units").get<int>()) + " multi-word)\n";
        out += "- config fingerprint: `" +
               manifest.at("config_fingerprint").get<std::string>() + "`\n";
        out += "- seed: " + std::to_string(manifest.at("seed").get<std::uint32_t>()) + "\n";
        if (manifest.contains("cache") && !manifest.at("cache").is_null()) {
            const json& cache = manifest.at("cache");
            out += "- cache: " + std::to_string(cache.at("hits").get<int>()) + " hits, " +
                   std::to_string(cache.at("misses").get<int>()) + " misses, " +
                   std::to_string(cache.at("live_calls").get<int>()) + " live calls\n";
        }
        if (manifest.contains("missing_cells") && !manifest.at("missing_cells").empty()) {
            out += "- WARNING: partial report, missing cells:";
            for (const auto& slug : manifest.at("missing_cells"))
                out += " " + slug.get<std::string>();
            out += "\n";
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed manifest.json: ") + ex.what());
    }
    out += "\n";
    out += read_file((dir / "tables.md").string());
    out += "\n## Role-playing improvement\n\n";
    out += read_file((dir / "improvement.txt").string());
    out += "\n## Group label agreement\n\n";

    try {
        const json& diff = manifest.at("label_diff");
        int scored = diff.at("scored_groups").get<int>();
        if (scored == 0) {
            out += "no label sets scored\n";
        } else if (diff.at("differing_units").get<int>() == 0) {
            out += "all " + std::to_string(scored) + " scored groups agree on every unit\n";
        } else {
            out += std::to_string(diff.at("differing_units").get<int>()) +
                   " term units carry group-dependent labels across the " +
                   std::to_string(scored) + " scored groups";
            if (!diff.at("max_pair").is_null()) {
                const json& pair = diff.at("max_pair");
                out += "; most divergent pair: " + pair.at("a").get<std::string>() + " vs " +
                       pair.at("b").get<std::string>() + " (" +
                       std::to_string(pair.at("count").get<int>()) + " units)";
            }
            out += "\n";
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed manifest.json: ") + ex.what());
    }
    return out;
}

int cmd_ingest_baseline(const std::string& corpus_path, const std::string& baseline_path,
                        const std::string& predictions_dir) {
    Corpus corpus = corpus_path.empty() || corpus_path == "bundled"
                        ? parse_corpus(bundled_corpus_text())
                        : load_corpus_file(corpus_path);
    std::ifstream in(baseline_path);
    if (!in) throw ValidationError("cannot open baseline file " + baseline_path);
    std::vector<PredictionSet> sets = ingest_baseline_jsonl(in, corpus);
    fs::create_directories(predictions_dir);
    for (const PredictionSet& set : sets)
        write_file(predictions_dir + "/" + set.cell.slug() + ".json",
                   prediction_set_to_json(set) + "\n");
    return static_cast<int>(sets.size());
}

}  // namespace jargon
