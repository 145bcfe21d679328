#include <doctest.h>

#include <set>

#include "jargon/errors.hpp"
#include "jargon/promptkit.hpp"

using namespace jargon;

TEST_SUITE_BEGIN("promptkit");

TEST_CASE("persona table is verbatim, complete, and distinct") {
    CHECK(persona_for(Group::EduLeHS).text ==
          "Your highest level of education is up to a high school diploma or equivalent. "
          "This encompasses scenarios from having no formal schooling or partial schooling, "
          "to completing the standard education required before college or university, "
          "without pursuing further formal education.");
    CHECK(persona_for(Group::GenderM).text ==
          "You are a man. You identify your gender as a male.");
    CHECK(persona_for(Group::Age65Plus).text == "You are a person above the age of 65.");
    CHECK(persona_for(Group::Age25_34).text == "You are a person in the age range of 25-34.");

    std::set<std::string_view> texts;
    for (Group g : kAllGroups) {
        PersonaMessage persona = persona_for(g);
        CHECK(persona.group == g);
        CHECK_FALSE(persona.text.empty());
        texts.insert(persona.text);
    }
    CHECK(texts.size() == 14);
}

TEST_CASE("instruction strings") {
    std::string_view plain = extraction_instruction();
    CHECK(plain ==
          "Given the following sentence, please identify and enumerate all the medical terms "
          "present in a Python list format without any other descriptions: ");
    CHECK(plain.back() == ' ');
    CHECK(extraction_instruction_with_exemplars() ==
          "Given the following sentence, please identify and enumerate all the medical terms "
          "present in a Python list format without any other descriptions.");
}

TEST_CASE("fold plans partition the sentences deterministically") {
    Corpus corpus = parse_corpus(bundled_corpus_text());

    FoldPlan plan = build_fold_plan(corpus, 0);
    REQUIRE(plan.folds.size() == 5);
    std::set<int> seen;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
        CHECK(plan.folds[f].size() == 4);
        CHECK(plan.exemplar_map[f] == static_cast<int>((f + 1) % 5));
        for (int id : plan.folds[f]) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == 20);

    CHECK(build_fold_plan(corpus, 0).folds == plan.folds);
    CHECK(build_fold_plan(corpus, 1).folds != plan.folds);
}

TEST_CASE("fold plan on odd corpus sizes keeps folds disjoint") {
    Corpus corpus = parse_corpus("a a\nb b\nc c\nd d\ne e\nf f\ng g");
    FoldPlan plan = build_fold_plan(corpus, 3);
    std::set<int> seen;
    for (const auto& fold : plan.folds) {
        CHECK(fold.size() <= 2);  // ceil(7/5)
        for (int id : fold) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == 7);

    Corpus tiny = parse_corpus("only one");
    CHECK_THROWS_AS(build_fold_plan(tiny, 0), ConfigError);
}

TEST_CASE("fold plans round-trip through JSON Lines") {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    FoldPlan plan = build_fold_plan(corpus, 9);
    FoldPlan loaded = fold_plan_from_jsonl(fold_plan_to_jsonl(plan), corpus);
    CHECK(loaded.folds == plan.folds);
    CHECK(loaded.exemplar_map == plan.exemplar_map);

    CHECK_THROWS_AS(fold_plan_from_jsonl("{\"fold\":0}", corpus), ValidationError);
}

TEST_CASE("term lists render with single quotes and escapes") {
    CHECK(render_term_list({}) == "[]");
    CHECK(render_term_list({"distal anastomosis", "anterior tibial artery",
                            "posterior tibial artery"}) ==
          "['distal anastomosis', 'anterior tibial artery', 'posterior tibial artery']");
    CHECK(render_term_list({"it's"}) == "['it\\'s']");
}

TEST_CASE("plain prompt is the instruction plus the bracket-stripped sentence") {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    PromptSpec spec = render_prompt(corpus, 17, std::nullopt);
    REQUIRE(spec.rendered_messages.size() == 1);
    CHECK(spec.rendered_messages[0].role == "user");
    const std::string& content = spec.rendered_messages[0].content;
    CHECK(content.rfind(std::string(extraction_instruction()), 0) == 0);
    CHECK(content.find("pulmonary embolism") != std::string::npos);
    CHECK(content.find('[') == std::string::npos);
    CHECK(content.find(']') == std::string::npos);
    CHECK(spec.exemplars.empty());
    CHECK_FALSE(spec.persona_group.has_value());
}

TEST_CASE("persona prompt prepends the system message") {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    PromptSpec spec = render_prompt(corpus, 3, persona_for(Group::EduBA));
    REQUIRE(spec.rendered_messages.size() == 2);
    CHECK(spec.rendered_messages[0].role == "system");
    CHECK(spec.rendered_messages[0].content == persona_for(Group::EduBA).text);
    CHECK(spec.rendered_messages[1].role == "user");
    CHECK(spec.persona_group == Group::EduBA);
}

TEST_CASE("exemplar prompt renders Input/Output blocks from gold labels") {
    Corpus corpus = parse_corpus(bundled_corpus_text());

    // Force sentence 1 into the exemplar fold of whatever fold holds the query.
    FoldPlan plan;
    plan.folds = {{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16},
                  {17, 18, 19, 20}};
    plan.exemplar_map = {1, 2, 3, 4, 0};

    std::set<UnitKey> gold;
    for (const TermUnit& unit : corpus.sentence(1).units) {
        if (unit.surface == "distal anastomosis" || unit.surface == "anterior tibial artery" ||
            unit.surface == "posterior tibial artery")
            gold.insert(unit.key());
    }
    REQUIRE(gold.size() == 3);

    PromptSpec spec = render_prompt(corpus, 17, std::nullopt, &plan, &gold);
    REQUIRE(spec.rendered_messages.size() == 1);
    const std::string& content = spec.rendered_messages[0].content;

    CHECK(content.rfind(std::string(extraction_instruction_with_exemplars()) + "\n\n", 0) == 0);
    CHECK(content.find("Output: ['distal anastomosis', 'anterior tibial artery', "
                       "'posterior tibial artery']") != std::string::npos);
    CHECK(content.find("Input: " + corpus.sentence(17).text() + "\nOutput: ") ==
          content.size() - ("Input: " + corpus.sentence(17).text() + "\nOutput: ").size());
    CHECK(spec.exemplars.size() == 4);
    CHECK(content.find('[') != std::string::npos);       // only in Output lists
    CHECK(content.find("Input: [") == std::string::npos);  // sentences stay bracket-free

    // Query must never sit in its own exemplar fold.
    FoldPlan broken = plan;
    broken.exemplar_map = {1, 2, 3, 4, 4};
    CHECK_THROWS_AS(render_prompt(corpus, 17, std::nullopt, &broken, &gold), ValidationError);
}

TEST_CASE("rendering is deterministic") {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    FoldPlan plan = build_fold_plan(corpus, 5);
    std::set<UnitKey> gold = {corpus.sentence(1).units[1].key()};
    for (int sentence_id : {1, 5, 17}) {
        PromptSpec a = render_prompt(corpus, sentence_id, persona_for(Group::HlNever), &plan,
                                     &gold);
        PromptSpec b = render_prompt(corpus, sentence_id, persona_for(Group::HlNever), &plan,
                                     &gold);
        CHECK(a.rendered_messages == b.rendered_messages);
    }
}

TEST_CASE("bracket hygiene across every sentence and persona") {
    Corpus corpus = parse_corpus(bundled_corpus_text());
    for (const Sentence& sentence : corpus.sentences()) {
        PromptSpec spec = render_prompt(corpus, sentence.id, persona_for(Group::Age45_54));
        for (const ChatMessage& message : spec.rendered_messages) {
            CHECK(message.content.find('[') == std::string::npos);
            CHECK(message.content.find(']') == std::string::npos);
        }
    }
}

TEST_SUITE_END();
