#pragma once

#include <string>
#include <vector>

#include "jargon/cohort.hpp"

namespace jargon_tests {

// A 270-annotator cohort matching the reported marginal distribution per
// demographic axis (joint assignment is arbitrary).
inline std::vector<jargon::AnnotatorProfile> make_table1_cohort() {
    using namespace jargon;

    std::vector<AgeBand> ages;
    auto add_ages = [&](AgeBand band, int count) {
        for (int i = 0; i < count; ++i) ages.push_back(band);
    };
    add_ages(AgeBand::A18_24, 16);
    add_ages(AgeBand::A25_34, 74);
    add_ages(AgeBand::A35_44, 65);
    add_ages(AgeBand::A45_54, 27);
    add_ages(AgeBand::A55_64, 59);
    add_ages(AgeBand::A65_74, 27);
    add_ages(AgeBand::A75Plus, 2);

    std::vector<HealthLiteracyFreq> literacy;
    auto add_literacy = [&](HealthLiteracyFreq freq, int count) {
        for (int i = 0; i < count; ++i) literacy.push_back(freq);
    };
    add_literacy(HealthLiteracyFreq::Never, 133);
    add_literacy(HealthLiteracyFreq::Rarely, 95);
    add_literacy(HealthLiteracyFreq::Sometimes, 30);
    add_literacy(HealthLiteracyFreq::Often, 10);
    add_literacy(HealthLiteracyFreq::Always, 2);

    std::vector<EducationLevel> education;
    auto add_education = [&](EducationLevel level, int count) {
        for (int i = 0; i < count; ++i) education.push_back(level);
    };
    add_education(EducationLevel::Low, 3);
    add_education(EducationLevel::HS, 87);
    add_education(EducationLevel::BA, 90);
    add_education(EducationLevel::MA, 90);

    std::vector<GenderValue> genders;
    auto add_genders = [&](GenderValue gender, int count) {
        for (int i = 0; i < count; ++i) genders.push_back(gender);
    };
    add_genders(GenderValue::F, 149);
    add_genders(GenderValue::M, 120);
    add_genders(GenderValue::Other, 1);

    std::vector<AnnotatorProfile> cohort;
    for (int i = 0; i < 270; ++i) {
        AnnotatorProfile profile;
        profile.annotator_id = "turker-" + std::to_string(i);
        profile.age = ages[static_cast<size_t>(i)];
        profile.health_literacy = literacy[static_cast<size_t>(i)];
        profile.education = education[static_cast<size_t>(i)];
        profile.gender = genders[static_cast<size_t>(i)];
        cohort.push_back(std::move(profile));
    }
    return cohort;
}

}  // namespace jargon_tests
