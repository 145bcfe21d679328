#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "jargon/corpus.hpp"
#include "jargon/evalstat.hpp"
#include "jargon/extraction.hpp"

namespace {

using namespace jargon;

void BM_parse_corpus(benchmark::State& state) {
    std::string text(bundled_corpus_text());
    for (auto _ : state) {
        Corpus corpus = parse_corpus(text);
        benchmark::DoNotOptimize(corpus.unit_count());
    }
}
BENCHMARK(BM_parse_corpus);

void BM_parse_list_literal(benchmark::State& state) {
    std::string raw =
        "Sure, here you go: ['distal anastomosis', 'anterior tibial artery', "
        "'posterior tibial artery', 'pedal arch'] Let me know if you need more.";
    for (auto _ : state) {
        ParsedSample sample = parse_list_literal(raw);
        benchmark::DoNotOptimize(sample.terms.size());
    }
}
BENCHMARK(BM_parse_list_literal);

void BM_mark_occurrences(benchmark::State& state) {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    std::vector<std::string> terms = {"pulmonary embolism", "rheumatoid arthritis",
                                      "interstitial lung disease", "CT scan", "pulmonary"};
    for (auto _ : state) {
        MarkedSentence marked = mark_occurrences(corpus, 17, terms);
        benchmark::DoNotOptimize(marked.marked.size());
    }
}
BENCHMARK(BM_mark_occurrences);

void BM_wilcoxon_exact(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= n; ++i) pairs.emplace_back(0.0, (i % 3 == 0 ? -1.0 : 1.0) * i);
    for (auto _ : state) {
        WilcoxonResult result = wilcoxon_signed_rank(pairs, WilcoxonPolicy::force_exact);
        benchmark::DoNotOptimize(result.p_two_sided);
    }
}
BENCHMARK(BM_wilcoxon_exact)->Arg(14)->Arg(20)->Arg(25);

void BM_score_sets(benchmark::State& state) {
    std::mt19937 rng(1);
    std::set<UnitKey> predicted;
    std::set<UnitKey> reference;
    for (int i = 0; i < 709; ++i) {
        UnitKey key{1 + i / 40, i % 40, 1};
        if (rng() % 2) predicted.insert(key);
        if (rng() % 2) reference.insert(key);
    }
    for (auto _ : state) {
        ScoreRow row = score_sets(Group::EduBA, predicted, reference);
        benchmark::DoNotOptimize(row.f1);
    }
}
BENCHMARK(BM_score_sets);

}  // namespace

BENCHMARK_MAIN();
