#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jargon/corpus.hpp"

namespace jargon {

enum class AgeBand { A18_24, A25_34, A35_44, A45_54, A55_64, A65_74, A75Plus };
enum class EducationLevel { Low, HS, BA, MA };
enum class HealthLiteracyFreq { Never, Rarely, Sometimes, Often, Always };
enum class GenderValue { F, M, Other };

AgeBand parse_age_band(std::string_view raw);                  // throws ValidationError
EducationLevel parse_education(std::string_view raw);          // "
HealthLiteracyFreq parse_health_literacy(std::string_view raw);
GenderValue parse_gender(std::string_view raw);

std::string_view age_band_name(AgeBand);
std::string_view education_name(EducationLevel);
std::string_view health_literacy_name(HealthLiteracyFreq);
std::string_view gender_name(GenderValue);

struct AnnotatorProfile {
    std::string annotator_id;
    AgeBand age = AgeBand::A25_34;
    EducationLevel education = EducationLevel::BA;
    HealthLiteracyFreq health_literacy = HealthLiteracyFreq::Never;
    GenderValue gender = GenderValue::F;

    bool operator==(const AnnotatorProfile&) const = default;
};

enum class GroupType { Education, HealthLiteracy, Gender, Age };

// The 14 merged evaluation groups.
enum class Group {
    EduLeHS,
    EduBA,
    EduMA,
    HlNever,
    HlRarely,
    HlGeSometimes,
    GenderF,
    GenderM,
    Age18_24,
    Age25_34,
    Age35_44,
    Age45_54,
    Age55_64,
    Age65Plus,
};

inline constexpr std::array<Group, 14> kAllGroups = {
    Group::EduLeHS,   Group::EduBA,    Group::EduMA,    Group::HlNever,
    Group::HlRarely,  Group::HlGeSometimes, Group::GenderF, Group::GenderM,
    Group::Age18_24,  Group::Age25_34, Group::Age35_44, Group::Age45_54,
    Group::Age55_64,  Group::Age65Plus,
};

GroupType group_type(Group group);
std::string_view group_label(Group group);           // "<=HS", ">=sometimes", "65+", ...
std::string_view group_type_name(GroupType type);    // "Education", ...
Group parse_group(std::string_view type_name, std::string_view label);  // throws
// Accepts "Type:label" or a bare label (labels are unique across types).
Group parse_group_spec(std::string_view spec);       // throws

// The merging rules. One group per type, except Gender=Other, which
// contributes no Gender group.
std::vector<Group> assign_groups(const AnnotatorProfile& profile);

struct GroupMembership {
    std::map<Group, std::vector<std::string>> members;  // annotator ids, input order
    int cohort_size = 0;

    int count(Group group) const;
};

GroupMembership group_membership(const std::vector<AnnotatorProfile>& cohort);

struct AnnotationRecord {
    std::string annotator_id;
    int sentence_id = 0;
    std::set<UnitKey> selected_units;
};

// Per-group gold labels from strict-majority voting. A unit is jargon
// iff strictly more than half the members selected it; members without a
// record for a sentence count as selecting nothing there.
struct GroupLabelSet {
    Group group = Group::EduLeHS;
    int member_count = 0;
    std::map<UnitKey, int> vote_counts;  // one entry per corpus unit

    bool jargon(const UnitKey& key) const;
    std::set<UnitKey> jargon_units() const;
};

GroupLabelSet build_group_labels(const Corpus& corpus,
                                 const std::vector<AnnotationRecord>& records,
                                 const std::vector<AnnotatorProfile>& cohort,
                                 Group group);

// Majority vote over the whole cohort, used as pooled exemplar gold.
std::set<UnitKey> pooled_jargon_units(const Corpus& corpus,
                                      const std::vector<AnnotationRecord>& records,
                                      const std::vector<AnnotatorProfile>& cohort);

// Unit keys whose labels disagree between the two sets. Symmetric.
std::vector<UnitKey> label_diff(const GroupLabelSet& a, const GroupLabelSet& b);

// ---- File ingestion / serialization -------------------------------------

struct AnnotatorData {
    AnnotatorProfile profile;
    std::vector<AnnotationRecord> records;
};

// JSON Lines, one object per annotator:
//   {"annotator_id": ..., "age_band": ..., "education": ...,
//    "health_literacy": ..., "gender": ...,
//    "selections": {"<sentence_id>": ["start:length" | "<surface>", ...]}}
// Span strings are authoritative; surfaces are resolved against the
// sentence's units and rejected when ambiguous or unknown.
std::vector<AnnotatorData> load_annotations_jsonl(std::istream& in, const Corpus& corpus);

void write_group_label_sets_jsonl(std::ostream& out,
                                  const std::vector<GroupLabelSet>& sets,
                                  const Corpus& corpus);
std::vector<GroupLabelSet> read_group_label_sets_jsonl(std::istream& in,
                                                       const Corpus& corpus);

}  // namespace jargon
