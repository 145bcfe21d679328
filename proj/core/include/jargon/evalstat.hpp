#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "jargon/cohort.hpp"
#include "jargon/extraction.hpp"

namespace jargon {

// Percent-scale precision/recall/F1 of one prediction set against one
// group's gold labels.
struct ScoreRow {
    Group group = Group::EduLeHS;
    int true_positives = 0;
    int predicted_count = 0;
    int reference_count = 0;
    double precision = 0.0;  // [0, 100]
    double recall = 0.0;
    double f1 = 0.0;
};

// Zero-denominator conventions: precision with no predictions and recall
// with no references are 0; F1 is 0 when P + R = 0.
ScoreRow score_group(const PredictionSet& predictions, const GroupLabelSet& labels);

// Set-level variant shared by score_group and the baseline path.
ScoreRow score_sets(Group group, const std::set<UnitKey>& predicted,
                    const std::set<UnitKey>& reference);

// Unweighted mean F1 over exactly one row per merged group.
double macro_f1(const std::vector<ScoreRow>& rows);

enum class WilcoxonMethod { exact, normal_approx };
enum class WilcoxonPolicy { automatic, force_exact, force_normal };

struct WilcoxonResult {
    int n_pairs = 0;
    int n_nonzero = 0;   // pairs left after dropping zero differences
    double w_plus = 0.0;
    double w_minus = 0.0;
    double p_one_sided = 1.0;  // H1: second scores exceed first
    double p_two_sided = 1.0;
    WilcoxonMethod method = WilcoxonMethod::exact;
    double mean_diff = 0.0;    // over all pairs, zeros included
};

// Paired signed-rank test on differences (b - a). Zero differences are
// dropped; tied magnitudes get average ranks. The exact distribution is
// used for n_nonzero <= 25 without rank ties, otherwise the tie-adjusted
// normal approximation with continuity correction.
// Throws ValidationError when no pairs remain after dropping zeros.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    WilcoxonPolicy policy = WilcoxonPolicy::automatic);

// Counts strictly positive (with - without) differences over paired keys.
// Both maps must cover identical keys.
std::pair<int, int> improvement_count(const std::map<std::string, double>& f1_without,
                                      const std::map<std::string, double>& f1_with);

}  // namespace jargon
