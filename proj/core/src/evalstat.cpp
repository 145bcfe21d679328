#include "jargon/evalstat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "jargon/errors.hpp"

namespace jargon {

ScoreRow score_sets(Group group, const std::set<UnitKey>& predicted,
                    const std::set<UnitKey>& reference) {
    ScoreRow row;
    row.group = group;
    row.predicted_count = static_cast<int>(predicted.size());
    row.reference_count = static_cast<int>(reference.size());
    for (const UnitKey& key : predicted)
        if (reference.count(key)) ++row.true_positives;

    row.precision =
        row.predicted_count > 0 ? 100.0 * row.true_positives / row.predicted_count : 0.0;
    row.recall =
        row.reference_count > 0 ? 100.0 * row.true_positives / row.reference_count : 0.0;
    row.f1 = (row.precision + row.recall) > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    return row;
}

ScoreRow score_group(const PredictionSet& predictions, const GroupLabelSet& labels) {
    if (predictions.corpus_units != static_cast<int>(labels.vote_counts.size()))
        throw ValidationError("predictions and labels cover different unit universes");
    for (const auto& [key, votes] : predictions.sample_votes)
        if (!labels.vote_counts.count(key))
            throw ValidationError("prediction for unit " + key.to_string() +
                                  " outside the label universe");
    return score_sets(labels.group, predictions.predicted_units(), labels.jargon_units());
}

double macro_f1(const std::vector<ScoreRow>& rows) {
    std::set<Group> seen;
    for (const ScoreRow& row : rows)
        if (!seen.insert(row.group).second)
            throw ValidationError(std::string("duplicate score row for group ") +
                                  std::string(group_label(row.group)));
    if (seen.size() != kAllGroups.size())
        throw ValidationError("macro F1 needs exactly one row per group, got " +
                              std::to_string(rows.size()));
    double sum = 0.0;
    for (const ScoreRow& row : rows) sum += row.f1;
    return sum / static_cast<double>(rows.size());
}

namespace {

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_pdf(double z) {
    static const double kInvSqrt2Pi = 0.3989422804014327;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// CDF of the null rank-sum distribution via a symmetric Edgeworth
// expansion: the skewness term vanishes, the kurtosis term uses
// kappa4 = -sum(r_i^4)/8 for iid sign flips over fixed ranks.
double edgeworth_cdf(double x, double sd, double excess_kurtosis) {
    double z = x / sd;
    double value = normal_cdf(z) - normal_pdf(z) * (excess_kurtosis / 24.0) * (z * z * z - 3.0 * z);
    return std::min(1.0, std::max(0.0, value));
}

struct RankedDiffs {
    std::vector<double> diffs;   // nonzero differences
    std::vector<double> ranks;   // ranks of |diff|, average for ties
    bool has_ties = false;
    std::vector<int> tie_sizes;  // sizes of tied magnitude groups
};

RankedDiffs rank_differences(const std::vector<double>& nonzero) {
    size_t n = nonzero.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return std::fabs(nonzero[a]) < std::fabs(nonzero[b]);
    });

    RankedDiffs ranked;
    ranked.diffs = nonzero;
    ranked.ranks.resize(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n &&
               std::fabs(nonzero[order[j + 1]]) == std::fabs(nonzero[order[i]]))
            ++j;
        // positions i..j share a magnitude; average rank over i+1..j+1
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranked.ranks[order[k]] = avg;
        int tie_size = static_cast<int>(j - i + 1);
        ranked.tie_sizes.push_back(tie_size);
        if (tie_size > 1) ranked.has_ties = true;
        i = j + 1;
    }
    return ranked;
}

// Exact null distribution of W+ over integer ranks 1..n: counts[w] =
// number of the 2^n sign assignments with positive-rank sum w.
std::vector<std::uint64_t> rank_sum_distribution(int n) {
    int max_sum = n * (n + 1) / 2;
    std::vector<std::uint64_t> counts(static_cast<size_t>(max_sum) + 1, 0);
    counts[0] = 1;
    for (int rank = 1; rank <= n; ++rank)
        for (int w = max_sum; w >= rank; --w)
            counts[static_cast<size_t>(w)] += counts[static_cast<size_t>(w - rank)];
    return counts;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    WilcoxonPolicy policy) {
    if (pairs.empty()) throw ValidationError("signed-rank test needs at least one pair");

    WilcoxonResult result;
    result.n_pairs = static_cast<int>(pairs.size());

    std::vector<double> nonzero;
    double diff_sum = 0.0;
    for (const auto& [a, b] : pairs) {
        double d = b - a;
        diff_sum += d;
        if (d != 0.0) nonzero.push_back(d);
    }
    result.mean_diff = diff_sum / static_cast<double>(pairs.size());
    result.n_nonzero = static_cast<int>(nonzero.size());
    if (nonzero.empty())
        throw ValidationError("signed-rank test is degenerate: all differences are zero");

    RankedDiffs ranked = rank_differences(nonzero);
    int n = result.n_nonzero;
    for (size_t i = 0; i < ranked.diffs.size(); ++i) {
        if (ranked.diffs[i] > 0)
            result.w_plus += ranked.ranks[i];
        else
            result.w_minus += ranked.ranks[i];
    }

    bool exact = policy == WilcoxonPolicy::force_exact ||
                 (policy == WilcoxonPolicy::automatic && n <= 25 && !ranked.has_ties);
    if (exact && ranked.has_ties)
        throw ValidationError("exact signed-rank p-values need tie-free ranks");

    if (exact) {
        std::vector<std::uint64_t> counts = rank_sum_distribution(n);
        std::uint64_t total = std::uint64_t{1} << n;
        std::uint64_t w = static_cast<std::uint64_t>(std::llround(result.w_plus));
        std::uint64_t at_most = 0;
        std::uint64_t at_least = 0;
        for (size_t s = 0; s < counts.size(); ++s) {
            if (s <= w) at_most += counts[s];
            if (s >= w) at_least += counts[s];
        }
        result.method = WilcoxonMethod::exact;
        result.p_one_sided = static_cast<double>(at_least) / static_cast<double>(total);
        double p_lo = static_cast<double>(at_most) / static_cast<double>(total);
        result.p_two_sided = std::min(1.0, 2.0 * std::min(p_lo, result.p_one_sided));
    } else {
        double mean = n * (n + 1) / 4.0;
        double variance = n * (n + 1) * (2.0 * n + 1) / 24.0;
        for (int t : ranked.tie_sizes)
            variance -= (static_cast<double>(t) * t * t - t) / 48.0;
        if (variance <= 0.0)
            throw ValidationError("signed-rank variance is zero after tie adjustment");
        double sd = std::sqrt(variance);
        double fourth = 0.0;
        for (double r : ranked.ranks) fourth += r * r * r * r;
        double excess_kurtosis = (-fourth / 8.0) / (variance * variance);
        // Continuity correction of 0.5 toward the mean.
        double p_hi =
            1.0 - edgeworth_cdf(result.w_plus - mean - 0.5, sd, excess_kurtosis);
        double p_lo = edgeworth_cdf(result.w_plus - mean + 0.5, sd, excess_kurtosis);
        result.method = WilcoxonMethod::normal_approx;
        result.p_one_sided = std::max(p_hi, 1e-300);
        result.p_two_sided = std::min(1.0, 2.0 * std::min(p_lo, p_hi));
        result.p_two_sided = std::max(result.p_two_sided, 1e-300);
    }
    return result;
}

std::pair<int, int> improvement_count(const std::map<std::string, double>& f1_without,
                                      const std::map<std::string, double>& f1_with) {
    if (f1_without.empty()) throw ValidationError("improvement count needs at least one pair");
    if (f1_without.size() != f1_with.size())
        throw ValidationError("improvement count: mismatched pair keys");
    int improved = 0;
    auto iw = f1_with.begin();
    for (auto io = f1_without.begin(); io != f1_without.end(); ++io, ++iw) {
        if (io->first != iw->first)
            throw ValidationError("improvement count: mismatched pair key '" + io->first + "'");
        if (iw->second > io->second) ++improved;
    }
    return {improved, static_cast<int>(f1_without.size())};
}

}  // namespace jargon
