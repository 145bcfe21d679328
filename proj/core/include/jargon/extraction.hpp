#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jargon/corpus.hpp"
#include "jargon/llmgate.hpp"

namespace jargon {

enum class ParseStatus { clean, recovered, failed };
std::string_view parse_status_name(ParseStatus status);

struct ParsedSample {
    std::string raw;
    std::vector<std::string> terms;  // trimmed, in literal order
    ParseStatus status = ParseStatus::failed;
};

// Extracts the first balanced `[...]` region of comma-separated quoted
// strings. Total: never throws; `failed` carries no terms.
//   clean     - the whole trimmed input is the literal
//   recovered - the literal was found amid extra prose/fences
ParsedSample parse_list_literal(std::string_view raw);

struct MarkedSentence {
    int sentence_id = 0;
    std::set<int> marked;  // word indices
};

// Marks every occurrence of each term's word sequence in the sentence.
// Matching is case-insensitive with quote/dash folding; terms that never
// occur contribute nothing.
MarkedSentence mark_occurrences(const Corpus& corpus, int sentence_id,
                                const std::vector<std::string>& terms);

// Units whose full span is marked.
std::vector<UnitKey> collect_units(const Corpus& corpus, const MarkedSentence& marked);

struct UnitVotes {
    std::map<UnitKey, int> votes;
    int n_samples = 0;

    bool predicted(const UnitKey& key) const;  // strict majority
};

UnitVotes aggregate_samples(const std::vector<std::set<UnitKey>>& per_sample_units,
                            int n_samples);

// Binary per-unit predictions for one grid cell, aggregated from the n
// samples of every requested sentence.
struct PredictionSet {
    CellDescriptor cell;
    int n_samples = 1;
    int corpus_units = 0;                // guard against cross-corpus scoring
    std::map<UnitKey, int> sample_votes; // nonzero votes only
    int failed_parses = 0;
    std::set<int> sentences;             // sentence ids covered by the cell

    bool predicted(const UnitKey& key) const;
    std::set<UnitKey> predicted_units() const;
};

PredictionSet build_prediction_set(const Corpus& corpus, const CellDescriptor& cell,
                                   const std::map<int, std::vector<std::string>>& raw_samples,
                                   int n_samples);

std::string prediction_set_to_json(const PredictionSet& set);
PredictionSet prediction_set_from_json(std::string_view text, const Corpus& corpus);

// Externally produced extractor outputs, run through the identical
// cleaning path. JSON Lines: {"system": ..., "sentence_id": ..., "terms": [...]}.
// One PredictionSet per system, n_samples = 1.
std::vector<PredictionSet> ingest_baseline_jsonl(std::istream& in, const Corpus& corpus);

}  // namespace jargon
