#include "jargon/cohort.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "jargon/errors.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

using json = nlohmann::json;

namespace {

std::string canon(std::string_view raw) {
    return to_lower_ascii(trim(raw));
}

[[noreturn]] void unknown_value(const char* field, std::string_view raw) {
    throw ValidationError(std::string("unknown ") + field + " value: '" + std::string(raw) + "'");
}

}  // namespace

AgeBand parse_age_band(std::string_view raw) {
    std::string v = canon(raw);
    if (v == "18-24") return AgeBand::A18_24;
    if (v == "25-34") return AgeBand::A25_34;
    if (v == "35-44") return AgeBand::A35_44;
    if (v == "45-54") return AgeBand::A45_54;
    if (v == "55-64") return AgeBand::A55_64;
    if (v == "65-74") return AgeBand::A65_74;
    if (v == "75+") return AgeBand::A75Plus;
    unknown_value("age_band", raw);
}

EducationLevel parse_education(std::string_view raw) {
    std::string v = canon(raw);
    if (v == "low") return EducationLevel::Low;
    if (v == "hs") return EducationLevel::HS;
    if (v == "ba") return EducationLevel::BA;
    if (v == "ma") return EducationLevel::MA;
    unknown_value("education", raw);
}

HealthLiteracyFreq parse_health_literacy(std::string_view raw) {
    std::string v = canon(raw);
    if (v == "never") return HealthLiteracyFreq::Never;
    if (v == "rarely") return HealthLiteracyFreq::Rarely;
    if (v == "sometimes") return HealthLiteracyFreq::Sometimes;
    if (v == "often") return HealthLiteracyFreq::Often;
    if (v == "always") return HealthLiteracyFreq::Always;
    unknown_value("health_literacy", raw);
}

GenderValue parse_gender(std::string_view raw) {
    std::string v = canon(raw);
    if (v == "f" || v == "female") return GenderValue::F;
    if (v == "m" || v == "male") return GenderValue::M;
    if (v == "other") return GenderValue::Other;
    unknown_value("gender", raw);
}

std::string_view age_band_name(AgeBand band) {
    switch (band) {
        case AgeBand::A18_24: return "18-24";
        case AgeBand::A25_34: return "25-34";
        case AgeBand::A35_44: return "35-44";
        case AgeBand::A45_54: return "45-54";
        case AgeBand::A55_64: return "55-64";
        case AgeBand::A65_74: return "65-74";
        case AgeBand::A75Plus: return "75+";
    }
    return "?";
}

std::string_view education_name(EducationLevel level) {
    switch (level) {
        case EducationLevel::Low: return "Low";
        case EducationLevel::HS: return "HS";
        case EducationLevel::BA: return "BA";
        case EducationLevel::MA: return "MA";
    }
    return "?";
}

std::string_view health_literacy_name(HealthLiteracyFreq freq) {
    switch (freq) {
        case HealthLiteracyFreq::Never: return "never";
        case HealthLiteracyFreq::Rarely: return "rarely";
        case HealthLiteracyFreq::Sometimes: return "sometimes";
        case HealthLiteracyFreq::Often: return "often";
        case HealthLiteracyFreq::Always: return "always";
    }
    return "?";
}

std::string_view gender_name(GenderValue gender) {
    switch (gender) {
        case GenderValue::F: return "F";
        case GenderValue::M: return "M";
        case GenderValue::Other: return "Other";
    }
    return "?";
}

GroupType group_type(Group group) {
    switch (group) {
        case Group::EduLeHS:
        case Group::EduBA:
        case Group::EduMA: return GroupType::Education;
        case Group::HlNever:
        case Group::HlRarely:
        case Group::HlGeSometimes: return GroupType::HealthLiteracy;
        case Group::GenderF:
        case Group::GenderM: return GroupType::Gender;
        default: return GroupType::Age;
    }
}

std::string_view group_label(Group group) {
    switch (group) {
        case Group::EduLeHS: return "<=HS";
        case Group::EduBA: return "BA";
        case Group::EduMA: return "MA";
        case Group::HlNever: return "never";
        case Group::HlRarely: return "rarely";
        case Group::HlGeSometimes: return ">=sometimes";
        case Group::GenderF: return "F";
        case Group::GenderM: return "M";
        case Group::Age18_24: return "18-24";
        case Group::Age25_34: return "25-34";
        case Group::Age35_44: return "35-44";
        case Group::Age45_54: return "45-54";
        case Group::Age55_64: return "55-64";
        case Group::Age65Plus: return "65+";
    }
    return "?";
}

std::string_view group_type_name(GroupType type) {
    switch (type) {
        case GroupType::Education: return "Education";
        case GroupType::HealthLiteracy: return "HealthLiteracy";
        case GroupType::Gender: return "Gender";
        case GroupType::Age: return "Age";
    }
    return "?";
}

Group parse_group(std::string_view type_name, std::string_view label) {
    std::string t = canon(type_name);
    std::string l = canon(label);
    for (Group g : kAllGroups) {
        if (canon(group_type_name(group_type(g))) == t && canon(group_label(g)) == l)
            return g;
    }
    throw ValidationError("unknown group: " + std::string(type_name) + "/" + std::string(label));
}

Group parse_group_spec(std::string_view spec) {
    size_t colon = spec.find(':');
    if (colon != std::string_view::npos)
        return parse_group(spec.substr(0, colon), spec.substr(colon + 1));
    std::string l = canon(spec);
    for (Group g : kAllGroups)
        if (canon(group_label(g)) == l) return g;
    throw ValidationError("unknown group label: " + std::string(spec));
}

std::vector<Group> assign_groups(const AnnotatorProfile& profile) {
    std::vector<Group> groups;

    switch (profile.education) {
        case EducationLevel::Low:
        case EducationLevel::HS: groups.push_back(Group::EduLeHS); break;
        case EducationLevel::BA: groups.push_back(Group::EduBA); break;
        case EducationLevel::MA: groups.push_back(Group::EduMA); break;
    }

    switch (profile.health_literacy) {
        case HealthLiteracyFreq::Never: groups.push_back(Group::HlNever); break;
        case HealthLiteracyFreq::Rarely: groups.push_back(Group::HlRarely); break;
        default: groups.push_back(Group::HlGeSometimes); break;
    }

    switch (profile.gender) {
        case GenderValue::F: groups.push_back(Group::GenderF); break;
        case GenderValue::M: groups.push_back(Group::GenderM); break;
        case GenderValue::Other: break;  // no Gender group
    }

    switch (profile.age) {
        case AgeBand::A18_24: groups.push_back(Group::Age18_24); break;
        case AgeBand::A25_34: groups.push_back(Group::Age25_34); break;
        case AgeBand::A35_44: groups.push_back(Group::Age35_44); break;
        case AgeBand::A45_54: groups.push_back(Group::Age45_54); break;
        case AgeBand::A55_64: groups.push_back(Group::Age55_64); break;
        case AgeBand::A65_74:
        case AgeBand::A75Plus: groups.push_back(Group::Age65Plus); break;
    }

    return groups;
}

int GroupMembership::count(Group group) const {
    auto it = members.find(group);
    return it == members.end() ? 0 : static_cast<int>(it->second.size());
}

GroupMembership group_membership(const std::vector<AnnotatorProfile>& cohort) {
    GroupMembership membership;
    membership.cohort_size = static_cast<int>(cohort.size());
    std::set<std::string> seen;
    for (const AnnotatorProfile& profile : cohort) {
        if (!seen.insert(profile.annotator_id).second)
            throw ValidationError("duplicate annotator_id: " + profile.annotator_id);
        for (Group g : assign_groups(profile))
            membership.members[g].push_back(profile.annotator_id);
    }
    return membership;
}

bool GroupLabelSet::jargon(const UnitKey& key) const {
    auto it = vote_counts.find(key);
    if (it == vote_counts.end()) return false;
    return 2 * it->second > member_count;
}

std::set<UnitKey> GroupLabelSet::jargon_units() const {
    std::set<UnitKey> out;
    for (const auto& [key, votes] : vote_counts)
        if (2 * votes > member_count) out.insert(key);
    return out;
}

namespace {

// Shared vote counting for group and pooled labels.
std::map<UnitKey, int> count_votes(const Corpus& corpus,
                                   const std::vector<AnnotationRecord>& records,
                                   const std::set<std::string>& member_ids) {
    std::map<UnitKey, int> votes;
    for (const UnitKey& key : corpus.all_unit_keys()) votes[key] = 0;

    std::set<std::pair<std::string, int>> seen;
    for (const AnnotationRecord& record : records) {
        if (!seen.insert({record.annotator_id, record.sentence_id}).second)
            throw ValidationError("duplicate record for annotator '" + record.annotator_id +
                                  "' sentence " + std::to_string(record.sentence_id));
        if (!corpus.has_sentence(record.sentence_id))
            throw ValidationError("record references unknown sentence_id " +
                                  std::to_string(record.sentence_id));
        if (!member_ids.count(record.annotator_id)) continue;
        for (const UnitKey& key : record.selected_units) {
            auto it = votes.find(key);
            if (it == votes.end() || key.sentence_id != record.sentence_id)
                throw ValidationError("record references unknown unit " + key.to_string());
            ++it->second;
        }
    }
    return votes;
}

std::set<std::string> cohort_ids(const std::vector<AnnotatorProfile>& cohort) {
    std::set<std::string> ids;
    for (const AnnotatorProfile& p : cohort) ids.insert(p.annotator_id);
    return ids;
}

}  // namespace

GroupLabelSet build_group_labels(const Corpus& corpus,
                                 const std::vector<AnnotationRecord>& records,
                                 const std::vector<AnnotatorProfile>& cohort,
                                 Group group) {
    GroupMembership membership = group_membership(cohort);
    std::set<std::string> all_ids = cohort_ids(cohort);
    for (const AnnotationRecord& record : records)
        if (!all_ids.count(record.annotator_id))
            throw ValidationError("record references unknown annotator '" +
                                  record.annotator_id + "'");

    auto it = membership.members.find(group);
    int member_count = it == membership.members.end() ? 0 : static_cast<int>(it->second.size());
    if (member_count == 0)
        throw ValidationError(std::string("group ") +
                              std::string(group_type_name(group_type(group))) + "/" +
                              std::string(group_label(group)) + " has no members");

    std::set<std::string> member_ids(it->second.begin(), it->second.end());
    GroupLabelSet labels;
    labels.group = group;
    labels.member_count = member_count;
    labels.vote_counts = count_votes(corpus, records, member_ids);
    return labels;
}

std::set<UnitKey> pooled_jargon_units(const Corpus& corpus,
                                      const std::vector<AnnotationRecord>& records,
                                      const std::vector<AnnotatorProfile>& cohort) {
    if (cohort.empty()) throw ValidationError("empty cohort");
    std::set<std::string> ids = cohort_ids(cohort);
    if (ids.size() != cohort.size()) throw ValidationError("duplicate annotator_id in cohort");
    std::map<UnitKey, int> votes = count_votes(corpus, records, ids);
    int n = static_cast<int>(cohort.size());
    std::set<UnitKey> out;
    for (const auto& [key, count] : votes)
        if (2 * count > n) out.insert(key);
    return out;
}

std::vector<UnitKey> label_diff(const GroupLabelSet& a, const GroupLabelSet& b) {
    if (a.vote_counts.size() != b.vote_counts.size())
        throw ValidationError("label sets cover different unit universes");
    std::vector<UnitKey> out;
    auto ia = a.vote_counts.begin();
    auto ib = b.vote_counts.begin();
    for (; ia != a.vote_counts.end(); ++ia, ++ib) {
        if (ia->first != ib->first)
            throw ValidationError("label sets cover different unit universes");
        if (a.jargon(ia->first) != b.jargon(ib->first)) out.push_back(ia->first);
    }
    return out;
}

// ---- JSON Lines ingestion / serialization --------------------------------

namespace {

// "start:length" within a sentence; anything else is treated as a surface.
std::optional<UnitKey> parse_span_selection(const std::string& text, int sentence_id) {
    size_t colon = text.find(':');
    if (colon == std::string::npos) return std::nullopt;
    std::string a = text.substr(0, colon);
    std::string b = text.substr(colon + 1);
    if (a.empty() || b.empty()) return std::nullopt;
    if (a.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    if (b.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return UnitKey{sentence_id, std::stoi(a), std::stoi(b)};
}

UnitKey resolve_selection(const Corpus& corpus, int sentence_id, const std::string& text) {
    if (auto span = parse_span_selection(text, sentence_id)) {
        if (!corpus.find_unit(*span))
            throw ValidationError("selection span '" + text + "' does not name a unit of sentence " +
                                  std::to_string(sentence_id));
        return *span;
    }
    const Sentence& sentence = corpus.sentence(sentence_id);
    const TermUnit* match = nullptr;
    for (const TermUnit& u : sentence.units) {
        if (u.surface == text) {
            if (match)
                throw ValidationError("ambiguous surface selection '" + text + "' in sentence " +
                                      std::to_string(sentence_id));
            match = &u;
        }
    }
    if (!match)
        throw ValidationError("surface selection '" + text + "' not found in sentence " +
                              std::to_string(sentence_id));
    return match->key();
}

}  // namespace

std::vector<AnnotatorData> load_annotations_jsonl(std::istream& in, const Corpus& corpus) {
    std::vector<AnnotatorData> out;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& ex) {
            throw ValidationError("annotations line " + std::to_string(line_no) +
                                  ": invalid JSON: " + ex.what());
        }
        try {
            AnnotatorData data;
            data.profile.annotator_id = obj.at("annotator_id").get<std::string>();
            data.profile.age = parse_age_band(obj.at("age_band").get<std::string>());
            data.profile.education = parse_education(obj.at("education").get<std::string>());
            data.profile.health_literacy =
                parse_health_literacy(obj.at("health_literacy").get<std::string>());
            data.profile.gender = parse_gender(obj.at("gender").get<std::string>());
            if (!seen_ids.insert(data.profile.annotator_id).second)
                throw ValidationError("duplicate annotator_id: " + data.profile.annotator_id);

            if (obj.contains("selections")) {
                for (const auto& [sid_text, values] : obj.at("selections").items()) {
                    int sentence_id = std::stoi(sid_text);
                    if (!corpus.has_sentence(sentence_id))
                        throw ValidationError("unknown sentence_id " + sid_text);
                    AnnotationRecord record;
                    record.annotator_id = data.profile.annotator_id;
                    record.sentence_id = sentence_id;
                    for (const auto& value : values)
                        record.selected_units.insert(
                            resolve_selection(corpus, sentence_id, value.get<std::string>()));
                    data.records.push_back(std::move(record));
                }
            }
            out.push_back(std::move(data));
        } catch (const json::exception& ex) {
            throw ValidationError("annotations line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError("annotations line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

void write_group_label_sets_jsonl(std::ostream& out,
                                  const std::vector<GroupLabelSet>& sets,
                                  const Corpus& corpus) {
    for (const GroupLabelSet& set : sets) {
        json votes = json::object();
        for (const auto& [key, count] : set.vote_counts)
            if (count > 0) votes[key.to_string()] = count;
        json obj = {
            {"group_type", group_type_name(group_type(set.group))},
            {"group", group_label(set.group)},
            {"member_count", set.member_count},
            {"corpus_units", corpus.unit_count()},
            {"votes", std::move(votes)},
        };
        out << obj.dump() << "\n";
    }
}

std::vector<GroupLabelSet> read_group_label_sets_jsonl(std::istream& in, const Corpus& corpus) {
    std::vector<GroupLabelSet> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json obj = json::parse(line);
            GroupLabelSet set;
            set.group = parse_group(obj.at("group_type").get<std::string>(),
                                    obj.at("group").get<std::string>());
            set.member_count = obj.at("member_count").get<int>();
            if (set.member_count <= 0) throw ValidationError("member_count must be positive");
            if (obj.at("corpus_units").get<int>() != corpus.unit_count())
                throw ValidationError("label set was built against a different corpus");
            for (const UnitKey& key : corpus.all_unit_keys()) set.vote_counts[key] = 0;
            for (const auto& [key_text, count] : obj.at("votes").items()) {
                UnitKey key = UnitKey::parse(key_text);
                auto it = set.vote_counts.find(key);
                if (it == set.vote_counts.end())
                    throw ValidationError("vote for unknown unit " + key_text);
                int votes = count.get<int>();
                if (votes < 0 || votes > set.member_count)
                    throw ValidationError("vote count out of range for unit " + key_text);
                it->second = votes;
            }
            out.push_back(std::move(set));
        } catch (const json::exception& ex) {
            throw ValidationError("labels line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const ValidationError& ex) {
            throw ValidationError("labels line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return out;
}

}  // namespace jargon
