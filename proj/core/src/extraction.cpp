#include "jargon/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <optional>

#include <json.hpp>

#include "jargon/errors.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

using json = nlohmann::json;

std::string_view parse_status_name(ParseStatus status) {
    switch (status) {
        case ParseStatus::clean: return "clean";
        case ParseStatus::recovered: return "recovered";
        case ParseStatus::failed: return "failed";
    }
    return "?";
}

namespace {

struct LiteralParse {
    std::vector<std::string> terms;
    size_t end = 0;  // one past the closing bracket
};

// Attempts to read a list literal starting at raw[open] == '['.
std::optional<LiteralParse> try_parse_literal(std::string_view raw, size_t open) {
    size_t i = open + 1;
    auto skip_ws = [&] {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    };

    LiteralParse parse;
    skip_ws();
    if (i < raw.size() && raw[i] == ']') {
        parse.end = i + 1;
        return parse;
    }

    while (true) {
        skip_ws();
        if (i >= raw.size()) return std::nullopt;
        char quote = raw[i];
        if (quote != '\'' && quote != '"') return std::nullopt;
        ++i;
        std::string term;
        bool closed = false;
        while (i < raw.size()) {
            char c = raw[i];
            if (c == '\\' && i + 1 < raw.size()) {
                char escaped = raw[i + 1];
                switch (escaped) {
                    case 'n': term += '\n'; break;
                    case 't': term += '\t'; break;
                    case 'r': term += '\r'; break;
                    default: term += escaped; break;
                }
                i += 2;
                continue;
            }
            if (c == quote) {
                closed = true;
                ++i;
                break;
            }
            term += c;
            ++i;
        }
        if (!closed) return std::nullopt;
        parse.terms.emplace_back(trim(term));

        skip_ws();
        if (i >= raw.size()) return std::nullopt;
        if (raw[i] == ']') {
            parse.end = i + 1;
            return parse;
        }
        if (raw[i] != ',') return std::nullopt;
        ++i;
        skip_ws();
        if (i < raw.size() && raw[i] == ']') {  // trailing comma
            parse.end = i + 1;
            return parse;
        }
    }
}

}  // namespace

ParsedSample parse_list_literal(std::string_view raw) {
    ParsedSample sample;
    sample.raw = std::string(raw);

    for (size_t open = raw.find('['); open != std::string_view::npos;
         open = raw.find('[', open + 1)) {
        if (auto parsed = try_parse_literal(raw, open)) {
            sample.terms = std::move(parsed->terms);
            std::string_view literal = raw.substr(open, parsed->end - open);
            sample.status =
                trim(raw) == literal ? ParseStatus::clean : ParseStatus::recovered;
            return sample;
        }
    }

    sample.status = ParseStatus::failed;
    return sample;
}

MarkedSentence mark_occurrences(const Corpus& corpus, int sentence_id,
                                const std::vector<std::string>& terms) {
    const Sentence& sentence = corpus.sentence(sentence_id);

    std::vector<std::string> normalized_words;
    normalized_words.reserve(sentence.words.size());
    for (const Word& w : sentence.words) normalized_words.push_back(normalize_match_token(w.text));

    MarkedSentence marked;
    marked.sentence_id = sentence_id;

    // Duplicate extracted terms carry no signal; normalize then dedup.
    std::set<std::vector<std::string>> seen_sequences;
    for (const std::string& term : terms) {
        std::vector<std::string> sequence;
        for (const std::string& token : split_whitespace(term))
            sequence.push_back(normalize_match_token(token));
        if (sequence.empty() || !seen_sequences.insert(sequence).second) continue;

        size_t len = sequence.size();
        if (len > normalized_words.size()) continue;
        for (size_t start = 0; start + len <= normalized_words.size(); ++start) {
            bool match = true;
            for (size_t k = 0; k < len; ++k) {
                if (normalized_words[start + k] != sequence[k]) {
                    match = false;
                    break;
                }
            }
            if (match)
                for (size_t k = 0; k < len; ++k) marked.marked.insert(static_cast<int>(start + k));
        }
    }
    return marked;
}

std::vector<UnitKey> collect_units(const Corpus& corpus, const MarkedSentence& marked) {
    return unit_lookup(corpus, marked.sentence_id, marked.marked);
}

bool UnitVotes::predicted(const UnitKey& key) const {
    auto it = votes.find(key);
    return it != votes.end() && 2 * it->second > n_samples;
}

UnitVotes aggregate_samples(const std::vector<std::set<UnitKey>>& per_sample_units,
                            int n_samples) {
    if (per_sample_units.empty())
        throw ValidationError("aggregate_samples needs at least one sample");
    if (static_cast<int>(per_sample_units.size()) != n_samples)
        throw ValidationError("aggregate_samples got " +
                              std::to_string(per_sample_units.size()) + " samples, expected " +
                              std::to_string(n_samples));
    UnitVotes votes;
    votes.n_samples = n_samples;
    for (const std::set<UnitKey>& sample : per_sample_units)
        for (const UnitKey& key : sample) ++votes.votes[key];
    return votes;
}

bool PredictionSet::predicted(const UnitKey& key) const {
    auto it = sample_votes.find(key);
    return it != sample_votes.end() && 2 * it->second > n_samples;
}

std::set<UnitKey> PredictionSet::predicted_units() const {
    std::set<UnitKey> out;
    for (const auto& [key, votes] : sample_votes)
        if (2 * votes > n_samples) out.insert(key);
    return out;
}

PredictionSet build_prediction_set(const Corpus& corpus, const CellDescriptor& cell,
                                   const std::map<int, std::vector<std::string>>& raw_samples,
                                   int n_samples) {
    PredictionSet set;
    set.cell = cell;
    set.n_samples = n_samples;
    set.corpus_units = corpus.unit_count();

    for (const auto& [sentence_id, raws] : raw_samples) {
        if (static_cast<int>(raws.size()) != n_samples)
            throw ValidationError("sentence " + std::to_string(sentence_id) + " has " +
                                  std::to_string(raws.size()) + " samples, expected " +
                                  std::to_string(n_samples));
        set.sentences.insert(sentence_id);
        std::vector<std::set<UnitKey>> per_sample;
        per_sample.reserve(raws.size());
        for (const std::string& raw : raws) {
            ParsedSample parsed = parse_list_literal(raw);
            if (parsed.status == ParseStatus::failed) {
                ++set.failed_parses;  // counts as an empty sample
                per_sample.emplace_back();
                continue;
            }
            MarkedSentence marked = mark_occurrences(corpus, sentence_id, parsed.terms);
            std::vector<UnitKey> units = collect_units(corpus, marked);
            per_sample.emplace_back(units.begin(), units.end());
        }
        UnitVotes votes = aggregate_samples(per_sample, n_samples);
        for (const auto& [key, count] : votes.votes) set.sample_votes[key] += count;
    }
    return set;
}

std::string prediction_set_to_json(const PredictionSet& set) {
    json votes = json::object();
    for (const auto& [key, count] : set.sample_votes) votes[key.to_string()] = count;
    json obj = {
        {"model", set.cell.model},
        {"temperature",
         set.cell.temperature ? json(*set.cell.temperature) : json(nullptr)},
        {"role_type", set.cell.role
                          ? json(group_type_name(group_type(*set.cell.role)))
                          : json(nullptr)},
        {"role", set.cell.role ? json(group_label(*set.cell.role)) : json(nullptr)},
        {"icl", set.cell.icl},
        {"n_samples", set.n_samples},
        {"corpus_units", set.corpus_units},
        {"failed_parses", set.failed_parses},
        {"sentences", std::vector<int>(set.sentences.begin(), set.sentences.end())},
        {"votes", std::move(votes)},
    };
    return obj.dump();
}

PredictionSet prediction_set_from_json(std::string_view text, const Corpus& corpus) {
    try {
        json obj = json::parse(text);
        PredictionSet set;
        set.cell.model = obj.at("model").get<std::string>();
        if (!obj.at("temperature").is_null())
            set.cell.temperature = obj.at("temperature").get<double>();
        if (!obj.at("role").is_null())
            set.cell.role = parse_group(obj.at("role_type").get<std::string>(),
                                        obj.at("role").get<std::string>());
        set.cell.icl = obj.at("icl").get<bool>();
        set.n_samples = obj.at("n_samples").get<int>();
        if (set.n_samples < 1) throw ValidationError("n_samples must be >= 1");
        set.corpus_units = obj.at("corpus_units").get<int>();
        if (set.corpus_units != corpus.unit_count())
            throw ValidationError("prediction set was built against a different corpus");
        set.failed_parses = obj.value("failed_parses", 0);
        for (int sid : obj.at("sentences").get<std::vector<int>>()) {
            if (!corpus.has_sentence(sid))
                throw ValidationError("prediction set covers unknown sentence " +
                                      std::to_string(sid));
            set.sentences.insert(sid);
        }
        for (const auto& [key_text, count] : obj.at("votes").items()) {
            UnitKey key = UnitKey::parse(key_text);
            if (!corpus.find_unit(key))
                throw ValidationError("prediction for unknown unit " + key_text);
            int votes = count.get<int>();
            if (votes < 0 || votes > set.n_samples)
                throw ValidationError("vote count out of range for unit " + key_text);
            set.sample_votes[key] = votes;
        }
        return set;
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed prediction set: ") + ex.what());
    }
}

std::vector<PredictionSet> ingest_baseline_jsonl(std::istream& in, const Corpus& corpus) {
    std::map<std::string, std::map<int, std::vector<std::string>>> terms_by_system;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json obj = json::parse(line);
            std::string system = obj.at("system").get<std::string>();
            int sentence_id = obj.at("sentence_id").get<int>();
            if (!corpus.has_sentence(sentence_id))
                throw ValidationError("unknown sentence_id " + std::to_string(sentence_id));
            auto& per_sentence = terms_by_system[system];
            if (per_sentence.count(sentence_id))
                throw ValidationError("duplicate entry for system '" + system + "' sentence " +
                                      std::to_string(sentence_id));
            per_sentence[sentence_id] = obj.at("terms").get<std::vector<std::string>>();
        } catch (const json::exception& ex) {
            throw ValidationError("baseline line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError("baseline line " + std::to_string(line_no) + ": " + ex.what());
        }
    }

    std::vector<PredictionSet> sets;
    for (const auto& [system, per_sentence] : terms_by_system) {
        CellDescriptor cell;
        cell.model = system;
        PredictionSet set;
        set.cell = cell;
        set.n_samples = 1;
        set.corpus_units = corpus.unit_count();
        for (const auto& [sentence_id, terms] : per_sentence) {
            set.sentences.insert(sentence_id);
            MarkedSentence marked = mark_occurrences(corpus, sentence_id, terms);
            for (const UnitKey& key : collect_units(corpus, marked)) set.sample_votes[key] = 1;
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

}  // namespace jargon
