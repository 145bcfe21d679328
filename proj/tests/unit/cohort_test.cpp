#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "../support/table1_cohort.hpp"
#include "jargon/cohort.hpp"
#include "jargon/errors.hpp"

using namespace jargon;

TEST_SUITE_BEGIN("cohort");

namespace {

AnnotatorProfile make_profile(const std::string& id, AgeBand age, EducationLevel education,
                              HealthLiteracyFreq literacy, GenderValue gender) {
    AnnotatorProfile profile;
    profile.annotator_id = id;
    profile.age = age;
    profile.education = education;
    profile.health_literacy = literacy;
    profile.gender = gender;
    return profile;
}

Corpus voting_corpus() {
    return parse_corpus("alpha beta [gamma delta] .");
}

// Cohort of n members that all look alike; votes are then controlled by
// how many records select a unit.
std::vector<AnnotatorProfile> uniform_cohort(int n) {
    std::vector<AnnotatorProfile> cohort;
    for (int i = 0; i < n; ++i)
        cohort.push_back(make_profile("a" + std::to_string(i), AgeBand::A25_34,
                                      EducationLevel::BA, HealthLiteracyFreq::Never,
                                      GenderValue::F));
    return cohort;
}

std::vector<AnnotationRecord> select_unit_by_first_k(const UnitKey& unit, int k) {
    std::vector<AnnotationRecord> records;
    for (int i = 0; i < k; ++i) {
        AnnotationRecord record;
        record.annotator_id = "a" + std::to_string(i);
        record.sentence_id = unit.sentence_id;
        record.selected_units = {unit};
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace

TEST_CASE("merging rules map profiles to groups") {
    auto merged = assign_groups(make_profile("t", AgeBand::A75Plus, EducationLevel::HS,
                                             HealthLiteracyFreq::Often, GenderValue::F));
    CHECK(merged == std::vector<Group>{Group::EduLeHS, Group::HlGeSometimes, Group::GenderF,
                                       Group::Age65Plus});

    auto identity = assign_groups(make_profile("t", AgeBand::A25_34, EducationLevel::BA,
                                               HealthLiteracyFreq::Never, GenderValue::M));
    CHECK(identity == std::vector<Group>{Group::EduBA, Group::HlNever, Group::GenderM,
                                         Group::Age25_34});

    auto other = assign_groups(make_profile("t", AgeBand::A35_44, EducationLevel::MA,
                                            HealthLiteracyFreq::Rarely, GenderValue::Other));
    CHECK(other.size() == 3);
    for (Group g : other) CHECK(group_type(g) != GroupType::Gender);
}

TEST_CASE("category parsing is trimmed and case-insensitive") {
    CHECK(parse_age_band(" 75+ ") == AgeBand::A75Plus);
    CHECK(parse_education("hs") == EducationLevel::HS);
    CHECK(parse_education("Low") == EducationLevel::Low);
    CHECK(parse_health_literacy("SOMETIMES") == HealthLiteracyFreq::Sometimes);
    CHECK(parse_gender("female") == GenderValue::F);
    CHECK_THROWS_AS(parse_age_band("80+"), ValidationError);
    CHECK_THROWS_AS(parse_education("phd"), ValidationError);
    CHECK_THROWS_AS(parse_gender(""), ValidationError);
}

TEST_CASE("group catalogue has 14 entries and parses back") {
    CHECK(kAllGroups.size() == 14);
    for (Group g : kAllGroups) {
        CHECK(parse_group(group_type_name(group_type(g)), group_label(g)) == g);
        CHECK(parse_group_spec(std::string(group_type_name(group_type(g))) + ":" +
                               std::string(group_label(g))) == g);
        CHECK(parse_group_spec(group_label(g)) == g);
    }
    CHECK_THROWS_AS(parse_group("Education", "PhD"), ValidationError);
}

TEST_CASE("reported cohort marginals give the merged group sizes") {
    GroupMembership membership = group_membership(jargon_tests::make_table1_cohort());
    CHECK(membership.cohort_size == 270);
    CHECK(membership.count(Group::Age65Plus) == 29);
    CHECK(membership.count(Group::HlGeSometimes) == 42);
    CHECK(membership.count(Group::EduLeHS) == 90);
    CHECK(membership.count(Group::GenderF) == 149);
    CHECK(membership.count(Group::GenderM) == 120);
}

TEST_CASE("duplicate annotator ids are rejected") {
    std::vector<AnnotatorProfile> cohort = uniform_cohort(2);
    cohort[1].annotator_id = cohort[0].annotator_id;
    CHECK_THROWS_AS(group_membership(cohort), ValidationError);
}

TEST_CASE("strict majority labels") {
    Corpus corpus = voting_corpus();
    UnitKey gamma_delta{1, 2, 2};

    SUBCASE("9 of 16 votes is jargon") {
        GroupLabelSet labels = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 9),
                                                  uniform_cohort(16), Group::EduBA);
        CHECK(labels.member_count == 16);
        CHECK(labels.jargon(gamma_delta));
    }
    SUBCASE("a 2-of-4 tie is not jargon") {
        GroupLabelSet labels = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 2),
                                                  uniform_cohort(4), Group::EduBA);
        CHECK_FALSE(labels.jargon(gamma_delta));
    }
    SUBCASE("unanimous and empty votes") {
        GroupLabelSet all = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 4),
                                               uniform_cohort(4), Group::EduBA);
        CHECK(all.jargon(gamma_delta));
        GroupLabelSet none =
            build_group_labels(corpus, {}, uniform_cohort(4), Group::EduBA);
        CHECK_FALSE(none.jargon(gamma_delta));
        CHECK(none.jargon_units().empty());
    }
}

TEST_CASE("missing records count as empty selections and order does not matter") {
    Corpus corpus = voting_corpus();
    UnitKey gamma_delta{1, 2, 2};
    std::vector<AnnotatorProfile> cohort = uniform_cohort(5);
    std::vector<AnnotationRecord> records = select_unit_by_first_k(gamma_delta, 3);

    GroupLabelSet forward = build_group_labels(corpus, records, cohort, Group::EduBA);
    std::reverse(records.begin(), records.end());
    GroupLabelSet backward = build_group_labels(corpus, records, cohort, Group::EduBA);
    CHECK(forward.vote_counts == backward.vote_counts);
    CHECK(forward.jargon(gamma_delta));
}

TEST_CASE("records referencing unknown annotators or units are rejected") {
    Corpus corpus = voting_corpus();
    std::vector<AnnotatorProfile> cohort = uniform_cohort(3);

    AnnotationRecord stranger;
    stranger.annotator_id = "nobody";
    stranger.sentence_id = 1;
    CHECK_THROWS_AS(build_group_labels(corpus, {stranger}, cohort, Group::EduBA),
                    ValidationError);

    AnnotationRecord bad_unit;
    bad_unit.annotator_id = "a0";
    bad_unit.sentence_id = 1;
    bad_unit.selected_units = {UnitKey{1, 2, 1}};  // splits the bracketed span
    CHECK_THROWS_AS(build_group_labels(corpus, {bad_unit}, cohort, Group::EduBA),
                    ValidationError);

    AnnotationRecord dup;
    dup.annotator_id = "a0";
    dup.sentence_id = 1;
    CHECK_THROWS_AS(build_group_labels(corpus, {dup, dup}, cohort, Group::EduBA),
                    ValidationError);
}

TEST_CASE("label_diff is symmetric and exhaustive") {
    Corpus corpus = voting_corpus();
    std::vector<AnnotatorProfile> cohort = uniform_cohort(3);
    UnitKey alpha{1, 0, 1};
    UnitKey gamma_delta{1, 2, 2};

    GroupLabelSet a = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 3), cohort,
                                         Group::EduBA);
    GroupLabelSet same = a;
    CHECK(label_diff(a, same).empty());

    std::vector<AnnotationRecord> records = select_unit_by_first_k(gamma_delta, 3);
    for (auto& record : records) record.selected_units.insert(alpha);
    GroupLabelSet b = build_group_labels(corpus, records, cohort, Group::EduBA);
    CHECK(label_diff(a, b) == std::vector<UnitKey>{alpha});
    CHECK(label_diff(a, b) == label_diff(b, a));
}

TEST_CASE("label_diff matches a brute-force comparison on a synthetic cohort") {
    Corpus corpus = parse_corpus("w0 w1 w2 w3 w4 w5 w6 w7");
    std::mt19937 rng(7);

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<AnnotatorProfile> cohort = uniform_cohort(5);
        auto random_records = [&] {
            std::vector<AnnotationRecord> records;
            for (int i = 0; i < 5; ++i) {
                AnnotationRecord record;
                record.annotator_id = "a" + std::to_string(i);
                record.sentence_id = 1;
                for (const UnitKey& key : corpus.all_unit_keys())
                    if (rng() % 2) record.selected_units.insert(key);
                records.push_back(std::move(record));
            }
            return records;
        };
        GroupLabelSet a = build_group_labels(corpus, random_records(), cohort, Group::EduBA);
        GroupLabelSet b = build_group_labels(corpus, random_records(), cohort, Group::EduBA);

        std::vector<UnitKey> expected;
        for (const UnitKey& key : corpus.all_unit_keys())
            if (a.jargon(key) != b.jargon(key)) expected.push_back(key);
        CHECK(label_diff(a, b) == expected);
    }
}

TEST_CASE("adding a vote never flips jargon to not-jargon") {
    Corpus corpus = voting_corpus();
    std::vector<AnnotatorProfile> cohort = uniform_cohort(7);
    UnitKey gamma_delta{1, 2, 2};
    for (int k = 0; k < 7; ++k) {
        GroupLabelSet before = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, k),
                                                  cohort, Group::EduBA);
        GroupLabelSet after = build_group_labels(corpus, select_unit_by_first_k(gamma_delta, k + 1),
                                                 cohort, Group::EduBA);
        if (before.jargon(gamma_delta)) CHECK(after.jargon(gamma_delta));
    }
}

TEST_CASE("partition property over random profiles") {
    std::mt19937 rng(11);
    std::vector<AnnotatorProfile> cohort;
    int other_count = 0;
    for (int i = 0; i < 300; ++i) {
        AnnotatorProfile profile;
        profile.annotator_id = "r" + std::to_string(i);
        profile.age = static_cast<AgeBand>(rng() % 7);
        profile.education = static_cast<EducationLevel>(rng() % 4);
        profile.health_literacy = static_cast<HealthLiteracyFreq>(rng() % 5);
        profile.gender = static_cast<GenderValue>(rng() % 3);
        if (profile.gender == GenderValue::Other) ++other_count;

        auto groups = assign_groups(profile);
        int per_type[4] = {0, 0, 0, 0};
        for (Group g : groups) ++per_type[static_cast<int>(group_type(g))];
        CHECK(per_type[static_cast<int>(GroupType::Education)] == 1);
        CHECK(per_type[static_cast<int>(GroupType::HealthLiteracy)] == 1);
        CHECK(per_type[static_cast<int>(GroupType::Age)] == 1);
        CHECK(per_type[static_cast<int>(GroupType::Gender)] ==
              (profile.gender == GenderValue::Other ? 0 : 1));
        cohort.push_back(std::move(profile));
    }

    GroupMembership membership = group_membership(cohort);
    int education_total = membership.count(Group::EduLeHS) + membership.count(Group::EduBA) +
                          membership.count(Group::EduMA);
    int gender_total = membership.count(Group::GenderF) + membership.count(Group::GenderM);
    CHECK(education_total == 300);
    CHECK(gender_total == 300 - other_count);
}

TEST_CASE("gender vote counts decompose the cohort total") {
    Corpus corpus = voting_corpus();
    UnitKey gamma_delta{1, 2, 2};

    std::vector<AnnotatorProfile> cohort;
    cohort.push_back(make_profile("f0", AgeBand::A25_34, EducationLevel::BA,
                                  HealthLiteracyFreq::Never, GenderValue::F));
    cohort.push_back(make_profile("f1", AgeBand::A25_34, EducationLevel::BA,
                                  HealthLiteracyFreq::Never, GenderValue::F));
    cohort.push_back(make_profile("m0", AgeBand::A25_34, EducationLevel::BA,
                                  HealthLiteracyFreq::Never, GenderValue::M));
    cohort.push_back(make_profile("x0", AgeBand::A25_34, EducationLevel::BA,
                                  HealthLiteracyFreq::Never, GenderValue::Other));

    std::vector<AnnotationRecord> records;
    for (const auto& profile : cohort) {
        AnnotationRecord record;
        record.annotator_id = profile.annotator_id;
        record.sentence_id = 1;
        record.selected_units = {gamma_delta};
        records.push_back(std::move(record));
    }

    GroupLabelSet f = build_group_labels(corpus, records, cohort, Group::GenderF);
    GroupLabelSet m = build_group_labels(corpus, records, cohort, Group::GenderM);
    int other_selections = 1;
    CHECK(f.vote_counts.at(gamma_delta) + m.vote_counts.at(gamma_delta) + other_selections == 4);

    CHECK(pooled_jargon_units(corpus, records, cohort).count(gamma_delta) == 1);
}

TEST_CASE("annotations JSON Lines ingestion resolves spans and surfaces") {
    Corpus corpus = parse_corpus("The [vein graft] was patent .\nThe CT and the CT again .");
    std::stringstream in;
    in << R"({"annotator_id":"a1","age_band":"25-34","education":"BA","health_literacy":"never","gender":"F","selections":{"1":["1:2","patent"]}})"
       << "\n";
    auto annotators = load_annotations_jsonl(in, corpus);
    REQUIRE(annotators.size() == 1);
    REQUIRE(annotators[0].records.size() == 1);
    CHECK(annotators[0].records[0].selected_units ==
          std::set<UnitKey>{UnitKey{1, 1, 2}, UnitKey{1, 4, 1}});

    SUBCASE("ambiguous surface is rejected") {
        std::stringstream bad;
        bad << R"({"annotator_id":"a1","age_band":"25-34","education":"BA","health_literacy":"never","gender":"F","selections":{"2":["CT"]}})"
            << "\n";
        CHECK_THROWS_AS(load_annotations_jsonl(bad, corpus), ValidationError);
    }
    SUBCASE("unknown surface is rejected") {
        std::stringstream bad;
        bad << R"({"annotator_id":"a1","age_band":"25-34","education":"BA","health_literacy":"never","gender":"F","selections":{"1":["zzz"]}})"
            << "\n";
        CHECK_THROWS_AS(load_annotations_jsonl(bad, corpus), ValidationError);
    }
    SUBCASE("duplicate annotator ids are rejected") {
        std::stringstream bad;
        for (int i = 0; i < 2; ++i)
            bad << R"({"annotator_id":"a1","age_band":"25-34","education":"BA","health_literacy":"never","gender":"F","selections":{}})"
                << "\n";
        CHECK_THROWS_AS(load_annotations_jsonl(bad, corpus), ValidationError);
    }
    SUBCASE("unknown category value is rejected") {
        std::stringstream bad;
        bad << R"({"annotator_id":"a1","age_band":"90+","education":"BA","health_literacy":"never","gender":"F","selections":{}})"
            << "\n";
        CHECK_THROWS_AS(load_annotations_jsonl(bad, corpus), ValidationError);
    }
}

TEST_CASE("group label sets round-trip through JSON Lines") {
    Corpus corpus = voting_corpus();
    std::vector<AnnotatorProfile> cohort = uniform_cohort(5);
    UnitKey gamma_delta{1, 2, 2};
    std::vector<GroupLabelSet> sets = {
        build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 4), cohort, Group::EduBA),
        build_group_labels(corpus, select_unit_by_first_k(gamma_delta, 1), cohort,
                            Group::HlNever),
    };

    std::stringstream buffer;
    write_group_label_sets_jsonl(buffer, sets, corpus);
    auto loaded = read_group_label_sets_jsonl(buffer, corpus);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].group == Group::EduBA);
    CHECK(loaded[0].member_count == 5);
    CHECK(loaded[0].vote_counts == sets[0].vote_counts);
    CHECK(loaded[1].vote_counts == sets[1].vote_counts);

    Corpus other = parse_corpus("just one sentence with more units here");
    std::stringstream again(buffer.str());
    CHECK_THROWS_AS(read_group_label_sets_jsonl(again, other), ValidationError);
}

TEST_SUITE_END();
