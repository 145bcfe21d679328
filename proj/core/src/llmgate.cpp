#include "jargon/llmgate.hpp"

#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#ifdef JARGON_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "jargon/errors.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

using json = nlohmann::json;

SamplingConfig SamplingConfig::make(std::string model, double temperature, int n) {
    if (model.empty()) throw ConfigError("model name must not be empty");
    if (temperature < 0.0 || temperature > 1.0)
        throw ConfigError("temperature must be in [0, 1], got " + format_compact(temperature));
    if (n < 1) throw ConfigError("n must be >= 1, got " + std::to_string(n));
    if (temperature == 0.0 && n != 1)
        throw ConfigError("temperature 0 requires n = 1, got n = " + std::to_string(n));
    SamplingConfig config;
    config.model = std::move(model);
    config.temperature = temperature;
    config.n = n;
    return config;
}

std::string CompletionRequest::request_key() const {
    json rendered = json::array();
    for (const ChatMessage& m : messages)
        rendered.push_back({{"role", m.role}, {"content", m.content}});
    json body = {
        {"model", config.model},
        {"temperature", config.temperature},
        {"n", config.n},
        {"max_tokens", config.max_tokens},
        {"top_p", config.top_p},
        {"frequency_penalty", config.frequency_penalty},
        {"presence_penalty", config.presence_penalty},
        {"messages", std::move(rendered)},
    };
    return to_hex(fnv1a64(body.dump()));
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::live: return "live";
        case Provenance::cache: return "cache";
        case Provenance::mock: return "mock";
    }
    return "?";
}

namespace {

Provenance parse_provenance(std::string_view name) {
    if (name == "live") return Provenance::live;
    if (name == "mock") return Provenance::mock;
    return Provenance::cache;
}

}  // namespace

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
    if (!options_.mock_fixtures_path.empty()) {
        std::ifstream in(options_.mock_fixtures_path);
        if (!in) throw ConfigError("cannot open mock fixtures: " + options_.mock_fixtures_path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                json obj = json::parse(line);
                mock_[obj.at("request_key").get<std::string>()] =
                    obj.at("samples").get<std::vector<std::string>>();
            } catch (const json::exception& ex) {
                throw ConfigError("mock fixtures line " + std::to_string(line_no) + ": " +
                                  ex.what());
            }
        }
    }

    if (!options_.cache_path.empty()) {
        std::ifstream in(options_.cache_path);
        if (in) {
            std::string line;
            int line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (trim(line).empty()) continue;
                try {
                    json obj = json::parse(line);
                    CompletionBatch batch;
                    batch.request_key = obj.at("request_key").get<std::string>();
                    batch.samples = obj.at("samples").get<std::vector<std::string>>();
                    batch.provenance = parse_provenance(obj.value("provenance", "live"));
                    batch.created_unix = obj.value("created_unix", std::int64_t{0});
                    cache_[batch.request_key] = std::move(batch);
                } catch (const json::exception& ex) {
                    std::cerr << "warning: skipping corrupt cache line " << line_no << " in "
                              << options_.cache_path << ": " << ex.what() << "\n";
                }
            }
        }
        auto out = std::make_unique<std::ofstream>(options_.cache_path, std::ios::app);
        if (!*out) throw ConfigError("cannot open cache for writing: " + options_.cache_path);
        cache_out_ = std::move(out);
    }
}

Gateway::~Gateway() = default;

bool Gateway::offline() const {
    return !options_.mock_fixtures_path.empty() || options_.cache_only;
}

int Gateway::cache_hits() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_hits_;
}

int Gateway::cache_misses() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_misses_;
}

int Gateway::live_calls() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return live_calls_;
}

void Gateway::persist(const CompletionBatch& batch) {
    // Caller holds mutex_. Flushed per batch so an interrupted run can
    // resume from the cache.
    if (!cache_out_) return;
    json obj = {
        {"request_key", batch.request_key},
        {"samples", batch.samples},
        {"provenance", provenance_name(batch.provenance)},
        {"created_unix", batch.created_unix},
    };
    *cache_out_ << obj.dump() << "\n";
    cache_out_->flush();
}

CompletionBatch Gateway::complete(const CompletionRequest& request) {
    const std::string key = request.request_key();

    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            if (static_cast<int>(it->second.samples.size()) != request.config.n)
                throw ValidationError("cache entry for " + key + " holds " +
                                      std::to_string(it->second.samples.size()) +
                                      " samples, request wants " +
                                      std::to_string(request.config.n));
            ++cache_hits_;
            CompletionBatch batch = it->second;
            batch.provenance = Provenance::cache;
            return batch;
        }
        ++cache_misses_;
    }

    CompletionBatch batch;
    if (!options_.mock_fixtures_path.empty()) {
        std::vector<std::string> samples;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = mock_.find(key);
            if (it == mock_.end())
                throw TransportError("mock backend has no fixture for request_key " + key);
            samples = it->second;
        }
        if (static_cast<int>(samples.size()) != request.config.n)
            throw ValidationError("mock fixture for " + key + " has " +
                                  std::to_string(samples.size()) + " samples, expected " +
                                  std::to_string(request.config.n));
        batch.request_key = key;
        batch.samples = std::move(samples);
        batch.provenance = Provenance::mock;
        batch.created_unix = static_cast<std::int64_t>(std::time(nullptr));
    } else if (options_.cache_only) {
        throw CacheMissError(key);
    } else {
        batch = live_complete(request);
    }

    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto [it, inserted] = cache_.emplace(key, batch);
        if (inserted) persist(it->second);
    }
    return batch;
}

namespace {

struct ParsedEndpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading path prefix, may be empty
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    size_t scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must include a scheme: " + endpoint);
    size_t path_start = endpoint.find('/', scheme_end + 3);
    ParsedEndpoint parsed;
    if (path_start == std::string::npos) {
        parsed.base = endpoint;
    } else {
        parsed.base = endpoint.substr(0, path_start);
        parsed.path = endpoint.substr(path_start);
        while (!parsed.path.empty() && parsed.path.back() == '/') parsed.path.pop_back();
    }
    return parsed;
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
    double delay = static_cast<double>(policy.base_backoff.count()) * std::pow(2.0, attempt);
    static thread_local std::mt19937 rng(std::random_device{}());
    std::uniform_real_distribution<double> spread(1.0 - policy.jitter, 1.0 + policy.jitter);
    return std::chrono::milliseconds(static_cast<long>(delay * spread(rng)));
}

// Extracts choices[*].message.content in index order.
std::vector<std::string> parse_chat_response(const std::string& body) {
    json payload;
    try {
        payload = json::parse(body);
    } catch (const json::exception& ex) {
        throw TransportError(std::string("malformed completion response: ") + ex.what());
    }
    if (!payload.contains("choices") || !payload["choices"].is_array())
        throw TransportError("completion response has no choices array");
    std::vector<std::pair<int, std::string>> indexed;
    int fallback_index = 0;
    for (const json& choice : payload["choices"]) {
        int index = choice.value("index", fallback_index);
        ++fallback_index;
        indexed.emplace_back(index, choice.at("message").at("content").get<std::string>());
    }
    std::stable_sort(indexed.begin(), indexed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> samples;
    samples.reserve(indexed.size());
    for (auto& [index, content] : indexed) samples.push_back(std::move(content));
    return samples;
}

}  // namespace

CompletionBatch Gateway::live_complete(const CompletionRequest& request) {
    if (options_.endpoint.empty())
        throw ConfigError("no endpoint configured and neither mock nor cache-only mode is active");
    ParsedEndpoint endpoint = parse_endpoint(options_.endpoint);
#ifndef JARGON_WITH_TLS
    if (endpoint.base.rfind("https://", 0) == 0)
        throw ConfigError("https endpoint requires a TLS-enabled build");
#endif

    json messages = json::array();
    for (const ChatMessage& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});

    auto make_body = [&](int n) {
        json body = {
            {"model", request.config.model},
            {"messages", messages},
            {"temperature", request.config.temperature},
            {"n", n},
            {"max_tokens", request.config.max_tokens},
            {"top_p", request.config.top_p},
            {"frequency_penalty", request.config.frequency_penalty},
            {"presence_penalty", request.config.presence_penalty},
        };
        return body.dump();
    };

    httplib::Headers headers;
    if (!options_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + options_.api_key);

    const std::string path = endpoint.path + "/chat/completions";

    auto post_once = [&](int n) -> std::vector<std::string> {
        std::string last_failure;
        for (int attempt = 0; attempt < options_.retry.max_attempts; ++attempt) {
            if (attempt > 0) std::this_thread::sleep_for(backoff_delay(options_.retry, attempt - 1));
            httplib::Client client(endpoint.base);
            client.set_connection_timeout(10, 0);
            client.set_read_timeout(120, 0);
            {
                std::lock_guard<std::mutex> lock(mutex_);
                ++live_calls_;
            }
            httplib::Result result = client.Post(path, headers, make_body(n), "application/json");
            if (!result) {
                last_failure = "connection failure (" + httplib::to_string(result.error()) + ")";
                continue;
            }
            if (result->status == 401 || result->status == 403)
                throw CredentialError("endpoint rejected credentials (HTTP " +
                                      std::to_string(result->status) + ")");
            if (result->status == 200) return parse_chat_response(result->body);
            if (retryable_status(result->status)) {
                last_failure = "HTTP " + std::to_string(result->status);
                continue;
            }
            throw TransportError("endpoint returned HTTP " + std::to_string(result->status) +
                                 ": " + result->body.substr(0, 200));
        }
        throw TransportError("retry budget exhausted after " +
                             std::to_string(options_.retry.max_attempts) +
                             " attempts; last failure: " + last_failure);
    };

    std::vector<std::string> samples = post_once(request.config.n);
    // Some endpoints ignore `n`; fall back to sequential single-sample calls.
    while (static_cast<int>(samples.size()) < request.config.n) {
        std::vector<std::string> extra = post_once(1);
        if (extra.empty())
            throw TransportError("endpoint returned an empty choices array");
        samples.insert(samples.end(), extra.begin(), extra.end());
    }
    samples.resize(static_cast<size_t>(request.config.n));

    CompletionBatch batch;
    batch.request_key = request.request_key();
    batch.samples = std::move(samples);
    batch.provenance = Provenance::live;
    batch.created_unix = static_cast<std::int64_t>(std::time(nullptr));
    return batch;
}

std::string CellDescriptor::slug() const {
    auto sanitize = [](std::string_view s) {
        std::string out;
        for (size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == '<' && i + 1 < s.size() && s[i + 1] == '=') {
                out += "le";
                ++i;
            } else if (c == '>' && i + 1 < s.size() && s[i + 1] == '=') {
                out += "ge";
                ++i;
            } else if (c == '+') {
                out += "plus";
            } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                       c == '_') {
                out.push_back(c);
            } else {
                out.push_back('-');
            }
        }
        return out;
    };

    std::string slug = sanitize(model);
    slug += temperature ? "_t" + format_temperature(*temperature) : "_tNA";
    slug += role ? "_role-" + sanitize(group_label(*role)) : "_norole";
    slug += icl ? "_icl" : "_noicl";
    return slug;
}

std::vector<PlannedRequest> plan_requests(const Corpus& corpus, const RunMatrix& matrix,
                                          const FoldPlan* fold_plan,
                                          const std::map<Group, std::set<UnitKey>>* group_gold,
                                          const std::set<UnitKey>* pooled_gold) {
    if (matrix.models.empty()) throw ConfigError("request plan needs at least one model");
    if (matrix.temperatures.empty())
        throw ConfigError("request plan needs at least one temperature");
    if (matrix.icl_axis.empty()) throw ConfigError("request plan needs at least one ICL setting");
    if (!matrix.include_no_role && matrix.role_groups.empty())
        throw ConfigError("request plan has an empty role axis");
    if (corpus.sentences().empty()) throw ConfigError("request plan needs a non-empty corpus");

    bool wants_icl = false;
    for (bool icl : matrix.icl_axis) wants_icl = wants_icl || icl;
    if (wants_icl) {
        if (!fold_plan) throw ConfigError("exemplar requests need a fold plan");
        if (matrix.include_no_role && !pooled_gold)
            throw ConfigError("exemplar requests without a persona need pooled gold labels");
        for (Group g : matrix.role_groups)
            if (!group_gold || !group_gold->count(g))
                throw ConfigError(std::string("exemplar requests need gold labels for group ") +
                                  std::string(group_label(g)));
    }

    // Role axis: no-persona first, then groups in canonical order.
    std::vector<std::optional<Group>> roles;
    if (matrix.include_no_role) roles.push_back(std::nullopt);
    for (Group g : kAllGroups)
        if (std::find(matrix.role_groups.begin(), matrix.role_groups.end(), g) !=
            matrix.role_groups.end())
            roles.emplace_back(g);

    std::vector<PlannedRequest> plan;
    for (const std::string& model : matrix.models) {
        for (double temperature : matrix.temperatures) {
            for (bool icl : matrix.icl_axis) {
                int n = 1;
                if (temperature > 0.0)
                    n = icl ? matrix.samples_per_request_icl : matrix.samples_per_request;
                for (const std::optional<Group>& role : roles) {
                    CellDescriptor cell{model, temperature, role, icl};
                    std::optional<PersonaMessage> persona;
                    if (role) persona = persona_for(*role);
                    const std::set<UnitKey>* gold = nullptr;
                    if (icl) gold = role ? &group_gold->at(*role) : pooled_gold;
                    for (const Sentence& sentence : corpus.sentences()) {
                        PromptSpec prompt = render_prompt(corpus, sentence.id, persona,
                                                          icl ? fold_plan : nullptr, gold);
                        PlannedRequest planned;
                        planned.cell = cell;
                        planned.sentence_id = sentence.id;
                        planned.request.config = SamplingConfig::make(model, temperature, n);
                        planned.request.messages = std::move(prompt.rendered_messages);
                        plan.push_back(std::move(planned));
                    }
                }
            }
        }
    }
    return plan;
}

std::map<std::string, CompletionBatch> run_plan(Gateway& gateway,
                                                const std::vector<PlannedRequest>& plan,
                                                int max_in_flight) {
    if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");

    std::vector<std::optional<CompletionBatch>> results(plan.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::string error_context;

    auto worker = [&] {
        while (!failed.load()) {
            size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            try {
                results[i] = gateway.complete(plan[i].request);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                    error_context = "grid cell " + plan[i].cell.slug() + " sentence " +
                                    std::to_string(plan[i].sentence_id);
                }
                failed.store(true);
                return;
            }
        }
    };

    size_t n_workers = std::min<size_t>(static_cast<size_t>(max_in_flight), plan.size());
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (std::thread& t : workers) t.join();

    if (first_error) {
        try {
            std::rethrow_exception(first_error);
        } catch (const CredentialError& ex) {
            throw CredentialError(error_context + ": " + ex.what());
        } catch (const CacheMissError& ex) {
            throw TransportError(error_context + ": " + ex.what());
        } catch (const TransportError& ex) {
            throw TransportError(error_context + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError(error_context + ": " + ex.what());
        } catch (const std::exception& ex) {
            throw Error(error_context + ": " + ex.what());
        }
    }

    std::map<std::string, CompletionBatch> batches;
    for (const auto& result : results)
        if (result) batches[result->request_key] = *result;
    return batches;
}

}  // namespace jargon
