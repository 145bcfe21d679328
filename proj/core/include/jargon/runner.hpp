#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jargon/cohort.hpp"
#include "jargon/corpus.hpp"

namespace jargon {

// Everything a full pipeline run needs. Loaded from a key/value config
// file, overridable by flags.
struct RunConfig {
    std::string corpus_path;        // "" or "bundled" selects the embedded corpus
    std::string annotations_path;
    std::string labels_path;        // defaults to <out>/labels.jsonl
    std::string predictions_dir;    // defaults to <out>/predictions
    std::string endpoint;
    std::string cache_path;         // defaults to <out>/cache.jsonl
    std::string mock_fixtures_path;
    bool cache_only = false;

    std::vector<std::string> models;
    std::vector<double> temperatures;
    std::string role_axis = "both";  // on | off | both
    std::string icl_axis = "off";    // on | off | both
    std::vector<Group> role_groups = {kAllGroups.begin(), kAllGroups.end()};
    int samples = 20;      // n per request at temperature > 0
    int samples_icl = 4;   // n per request at temperature > 0 with exemplars
    std::string icl_exemplar_labels = "group";  // group | pooled

    std::string out_dir = "out";
    std::uint32_t seed = 0;
    int max_in_flight = 4;

    std::string effective_labels_path() const;
    std::string effective_predictions_dir() const;
    std::string effective_cache_path() const;

    // Path-independent hash of the logical experiment settings; recorded
    // in the manifest and the report.
    std::string fingerprint() const;
};

RunConfig load_run_config(const std::string& path);
// Shared by the file parser and flag overrides. Throws ConfigError on
// unknown keys or bad values.
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

Corpus load_corpus_for(const RunConfig& config);
Corpus load_corpus_file(const std::string& path);

struct LabelsBuildOutcome {
    std::vector<std::pair<Group, int>> group_sizes;  // canonical order
    int annotators = 0;
    int groups_written = 0;
    std::vector<Group> skipped_empty;
};

LabelsBuildOutcome cmd_labels_build(const std::string& corpus_path,
                                    const std::string& annotations_path,
                                    const std::string& out_path);

struct ExtractOutcome {
    int planned_requests = 0;
    int cells = 0;
    int cache_hits = 0;
    int cache_misses = 0;
    int live_calls = 0;
};

ExtractOutcome cmd_extract(const RunConfig& config);

struct ScoreOutcome {
    bool partial = false;
    std::vector<std::string> missing_cells;
    int cells_scored = 0;
};

ScoreOutcome cmd_score(const RunConfig& config);

// Renders the report bundle written by cmd_score. Deterministic bytes for
// identical bundles; throws ValidationError on an incomplete bundle.
std::string cmd_report(const std::string& bundle_dir);

int cmd_ingest_baseline(const std::string& corpus_path, const std::string& baseline_path,
                        const std::string& predictions_dir);

}  // namespace jargon
