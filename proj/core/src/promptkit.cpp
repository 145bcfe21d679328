#include "jargon/promptkit.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

#include "jargon/errors.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

using json = nlohmann::json;

PersonaMessage persona_for(Group group) {
    std::string_view text;
    switch (group) {
        case Group::EduLeHS:
            text = "Your highest level of education is up to a high school diploma or "
                   "equivalent. This encompasses scenarios from having no formal schooling or "
                   "partial schooling, to completing the standard education required before "
                   "college or university, without pursuing further formal education.";
            break;
        case Group::EduBA:
            text = "Your highest level of education is a Bachelor's degree from a college or "
                   "university. You've undergone tertiary education and have specialized in a "
                   "particular field or subject area.";
            break;
        case Group::EduMA:
            text = "Your highest level of education is a Master's degree. You've not only "
                   "completed your Bachelor's degree but have also undertaken advanced studies "
                   "in a specific field, gaining deeper knowledge and perhaps conducting some "
                   "level of research.";
            break;
        case Group::HlNever:
            text = "You less than rarely engaged with health literacy materials and are "
                   "unfamiliar with basic health information and medical terms.";
            break;
        case Group::HlRarely:
            text = "You rarely come across health literacy materials and only occasionally "
                   "glance at health-related information.";
            break;
        case Group::HlGeSometimes:
            text = "Your interaction with health literacy materials is frequent, indicating "
                   "that you engage with them sometimes, often, or always in your everyday "
                   "life.";
            break;
        case Group::GenderF:
            text = "You are a woman. You identify your gender as a female.";
            break;
        case Group::GenderM:
            text = "You are a man. You identify your gender as a male.";
            break;
        case Group::Age18_24:
            text = "You are a person in the age range of 18-24.";
            break;
        case Group::Age25_34:
            text = "You are a person in the age range of 25-34.";
            break;
        case Group::Age35_44:
            text = "You are a person in the age range of 35-44.";
            break;
        case Group::Age45_54:
            text = "You are a person in the age range of 45-54.";
            break;
        case Group::Age55_64:
            text = "You are a person in the age range of 55-64.";
            break;
        case Group::Age65Plus:
            text = "You are a person above the age of 65.";
            break;
    }
    return {group, text};
}

std::string_view extraction_instruction() {
    return "Given the following sentence, please identify and enumerate all the medical "
           "terms present in a Python list format without any other descriptions: ";
}

std::string_view extraction_instruction_with_exemplars() {
    return "Given the following sentence, please identify and enumerate all the medical "
           "terms present in a Python list format without any other descriptions.";
}

FoldPlan build_fold_plan(const Corpus& corpus, std::uint32_t seed) {
    int n = static_cast<int>(corpus.sentences().size());
    std::vector<int> ids(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<size_t>(i)] = i + 1;

    // Seeded Fisher-Yates; mt19937 output is platform-stable.
    std::mt19937 rng(seed);
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng() % static_cast<std::uint32_t>(i + 1));
        std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
    }

    int fold_size = (n + 4) / 5;
    int n_folds = (n + fold_size - 1) / fold_size;
    if (n_folds < 2)
        throw ConfigError("cannot build an exemplar fold plan from " + std::to_string(n) +
                          " sentence(s): fewer than 2 folds constructible");

    FoldPlan plan;
    plan.seed = seed;
    for (int f = 0; f < n_folds; ++f) {
        auto begin = ids.begin() + std::min<std::ptrdiff_t>(f * fold_size, n);
        auto end = ids.begin() + std::min<std::ptrdiff_t>((f + 1) * fold_size, n);
        std::vector<int> fold(begin, end);
        std::sort(fold.begin(), fold.end());
        plan.folds.push_back(std::move(fold));
        plan.exemplar_map.push_back((f + 1) % n_folds);
    }
    return plan;
}

std::string fold_plan_to_jsonl(const FoldPlan& plan) {
    std::string out;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
        json obj = {
            {"fold", f},
            {"sentences", plan.folds[f]},
            {"exemplar_fold", plan.exemplar_map[f]},
            {"seed", plan.seed},
        };
        out += obj.dump();
        out += "\n";
    }
    return out;
}

FoldPlan fold_plan_from_jsonl(std::string_view text, const Corpus& corpus) {
    FoldPlan plan;
    for (const std::string& line : split(text, '\n')) {
        if (trim(line).empty()) continue;
        try {
            json obj = json::parse(line);
            size_t fold = obj.at("fold").get<size_t>();
            if (fold != plan.folds.size())
                throw ValidationError("fold plan lines out of order");
            plan.folds.push_back(obj.at("sentences").get<std::vector<int>>());
            plan.exemplar_map.push_back(obj.at("exemplar_fold").get<int>());
            plan.seed = obj.value("seed", 0u);
        } catch (const json::exception& ex) {
            throw ValidationError(std::string("malformed fold plan: ") + ex.what());
        }
    }
    if (plan.folds.size() < 2) throw ValidationError("fold plan has fewer than 2 folds");

    std::set<int> seen;
    for (size_t f = 0; f < plan.folds.size(); ++f) {
        if (plan.exemplar_map[f] == static_cast<int>(f) || plan.exemplar_map[f] < 0 ||
            plan.exemplar_map[f] >= static_cast<int>(plan.folds.size()))
            throw ValidationError("invalid exemplar fold mapping");
        for (int id : plan.folds[f]) {
            if (!corpus.has_sentence(id))
                throw ValidationError("fold plan references unknown sentence " + std::to_string(id));
            if (!seen.insert(id).second)
                throw ValidationError("fold plan repeats sentence " + std::to_string(id));
        }
    }
    if (static_cast<int>(seen.size()) != static_cast<int>(corpus.sentences().size()))
        throw ValidationError("fold plan does not cover every sentence");
    return plan;
}

std::string render_term_list(const std::vector<std::string>& terms) {
    std::string out = "[";
    for (size_t i = 0; i < terms.size(); ++i) {
        if (i > 0) out += ", ";
        out += '\'';
        for (char c : terms[i]) {
            if (c == '\\' || c == '\'') out += '\\';
            out += c;
        }
        out += '\'';
    }
    out += "]";
    return out;
}

namespace {

std::vector<std::string> gold_terms(const Corpus& corpus, int sentence_id,
                                    const std::set<UnitKey>& jargon) {
    std::vector<std::string> terms;
    for (const TermUnit& unit : corpus.sentence(sentence_id).units)
        if (jargon.count(unit.key())) terms.push_back(unit.surface);
    return terms;
}

}  // namespace

PromptSpec render_prompt(const Corpus& corpus, int sentence_id,
                         const std::optional<PersonaMessage>& persona,
                         const FoldPlan* fold_plan,
                         const std::set<UnitKey>* exemplar_jargon) {
    const Sentence& query = corpus.sentence(sentence_id);

    PromptSpec spec;
    spec.query_sentence_id = sentence_id;
    if (persona) {
        spec.persona_group = persona->group;
        spec.rendered_messages.push_back({"system", std::string(persona->text)});
    }

    if (!fold_plan) {
        spec.rendered_messages.push_back(
            {"user", std::string(extraction_instruction()) + query.text()});
        return spec;
    }

    if (!exemplar_jargon)
        throw ValidationError("exemplar prompts need a gold label set");

    int query_fold = -1;
    for (size_t f = 0; f < fold_plan->folds.size(); ++f) {
        if (std::find(fold_plan->folds[f].begin(), fold_plan->folds[f].end(), sentence_id) !=
            fold_plan->folds[f].end()) {
            query_fold = static_cast<int>(f);
            break;
        }
    }
    if (query_fold < 0)
        throw ValidationError("sentence " + std::to_string(sentence_id) +
                              " is not covered by the fold plan");

    int exemplar_fold = fold_plan->exemplar_map[static_cast<size_t>(query_fold)];
    const std::vector<int>& exemplar_ids =
        fold_plan->folds[static_cast<size_t>(exemplar_fold)];
    if (std::find(exemplar_ids.begin(), exemplar_ids.end(), sentence_id) != exemplar_ids.end())
        throw ValidationError("query sentence " + std::to_string(sentence_id) +
                              " appears in its own exemplar fold");

    std::string content = std::string(extraction_instruction_with_exemplars());
    content += "\n\n";
    for (int exemplar_id : exemplar_ids) {
        std::string text = corpus.sentence(exemplar_id).text();
        std::vector<std::string> terms = gold_terms(corpus, exemplar_id, *exemplar_jargon);
        content += "Input: " + text + "\n";
        content += "Output: " + render_term_list(terms) + "\n\n";
        spec.exemplars.emplace_back(std::move(text), std::move(terms));
    }
    content += "Input: " + query.text() + "\nOutput: ";
    spec.rendered_messages.push_back({"user", std::move(content)});
    return spec;
}

PromptSpec render_prompt(const Corpus& corpus, int sentence_id,
                         const std::optional<PersonaMessage>& persona,
                         const FoldPlan& fold_plan, const GroupLabelSet& labels) {
    std::set<UnitKey> jargon = labels.jargon_units();
    return render_prompt(corpus, sentence_id, persona, &fold_plan, &jargon);
}

}  // namespace jargon
