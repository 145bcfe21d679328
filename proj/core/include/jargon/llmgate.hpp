#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jargon/cohort.hpp"
#include "jargon/corpus.hpp"
#include "jargon/promptkit.hpp"

namespace jargon {

struct SamplingConfig {
    std::string model;
    double temperature = 0.0;
    int n = 1;
    int max_tokens = 256;
    double top_p = 1.0;
    double frequency_penalty = 0.0;
    double presence_penalty = 0.0;

    // Validates ranges and the temperature-0 => n=1 rule.
    static SamplingConfig make(std::string model, double temperature, int n);
};

struct CompletionRequest {
    SamplingConfig config;
    std::vector<ChatMessage> messages;

    // Content hash of (model, messages, temperature, n, fixed params).
    // Identical logical requests share a key.
    std::string request_key() const;
};

enum class Provenance { live, cache, mock };
std::string_view provenance_name(Provenance p);

struct CompletionBatch {
    std::string request_key;
    std::vector<std::string> samples;  // exactly n raw completion strings
    Provenance provenance = Provenance::live;
    std::int64_t created_unix = 0;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_backoff{1000};  // doubles per attempt
    double jitter = 0.2;                           // +-20%
};

struct GatewayOptions {
    std::string endpoint;             // e.g. "https://api.openai.com/v1"
    std::string api_key;              // usually from JARGON_BENCH_API_KEY
    std::string cache_path;           // "" disables on-disk persistence
    std::string mock_fixtures_path;   // "" disables the mock backend
    bool cache_only = false;
    RetryPolicy retry;
};

// Chat-completion gateway with a disk-backed response cache, a scripted
// mock backend, and a retrying HTTP backend. Shareable across worker
// threads; cache writes are serialized.
class Gateway {
public:
    explicit Gateway(GatewayOptions options);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    CompletionBatch complete(const CompletionRequest& request);

    // True when no code path can open a network connection.
    bool offline() const;

    int cache_hits() const;
    int cache_misses() const;
    int live_calls() const;

private:
    CompletionBatch live_complete(const CompletionRequest& request);
    void persist(const CompletionBatch& batch);

    GatewayOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, CompletionBatch> cache_;
    std::map<std::string, std::vector<std::string>> mock_;
    std::unique_ptr<std::ostream> cache_out_;
    int cache_hits_ = 0;
    int cache_misses_ = 0;
    int live_calls_ = 0;
};

// One experiment-grid cell: everything but the sentence axis.
struct CellDescriptor {
    std::string model;
    std::optional<double> temperature;  // empty for ingested baselines
    std::optional<Group> role;          // empty = no persona
    bool icl = false;

    std::string slug() const;  // filesystem-safe identifier
    bool operator==(const CellDescriptor&) const = default;
};

struct PlannedRequest {
    CellDescriptor cell;
    int sentence_id = 0;
    CompletionRequest request;
};

struct RunMatrix {
    std::vector<std::string> models;
    std::vector<double> temperatures;
    bool include_no_role = true;
    std::vector<Group> role_groups;      // personas to run
    std::vector<bool> icl_axis = {false};
    int samples_per_request = 20;        // n at temperature > 0 without exemplars
    int samples_per_request_icl = 4;     // n at temperature > 0 with exemplars
};

// Enumerates the request grid in deterministic order
// (model, temperature, icl, role, sentence). Exemplar prompts need the fold
// plan plus per-group gold sets (persona cells) and a pooled gold set
// (no-persona cells).
std::vector<PlannedRequest> plan_requests(
    const Corpus& corpus, const RunMatrix& matrix,
    const FoldPlan* fold_plan = nullptr,
    const std::map<Group, std::set<UnitKey>>* group_gold = nullptr,
    const std::set<UnitKey>* pooled_gold = nullptr);

// Executes a plan with at most `max_in_flight` requests at once. Returns
// batches keyed by request_key. The first failure aborts outstanding work
// and is rethrown with the offending grid cell named.
std::map<std::string, CompletionBatch> run_plan(Gateway& gateway,
                                                const std::vector<PlannedRequest>& plan,
                                                int max_in_flight);

}  // namespace jargon
