#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jargon/cohort.hpp"
#include "jargon/corpus.hpp"

namespace jargon {

struct PersonaMessage {
    Group group = Group::EduLeHS;
    std::string_view text;  // verbatim system-message string
};

// Verbatim persona system message for a merged group. Total table has
// 14 entries.
PersonaMessage persona_for(Group group);

// User-message instruction strings. The plain variant ends in a trailing
// space and is followed directly by the sentence text; the exemplar
// variant ends in a period and is followed by a blank line and the
// Input/Output blocks.
std::string_view extraction_instruction();
std::string_view extraction_instruction_with_exemplars();

// Cross-validation folds for exemplar selection: sentence ids split into
// (up to) five disjoint folds; fold i draws its exemplars from fold
// exemplar_map[i] != i.
struct FoldPlan {
    std::vector<std::vector<int>> folds;
    std::vector<int> exemplar_map;
    std::uint32_t seed = 0;
};

FoldPlan build_fold_plan(const Corpus& corpus, std::uint32_t seed);

std::string fold_plan_to_jsonl(const FoldPlan& plan);
FoldPlan fold_plan_from_jsonl(std::string_view text, const Corpus& corpus);

struct ChatMessage {
    std::string role;  // "system" or "user"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct PromptSpec {
    std::optional<Group> persona_group;
    // (sentence text, gold term list) in prompt order.
    std::vector<std::pair<std::string, std::vector<std::string>>> exemplars;
    int query_sentence_id = 0;
    std::vector<ChatMessage> rendered_messages;
};

// Single-quoted bracketed list: ['a', 'b']. Quotes and backslashes in
// terms are escaped.
std::string render_term_list(const std::vector<std::string>& terms);

// Renders the optional system message plus exactly one user message.
// Exemplars are enabled by passing both a fold plan and a gold set; the
// gold list of an exemplar sentence is its units inside `exemplar_jargon`,
// ordered by first occurrence.
PromptSpec render_prompt(const Corpus& corpus, int sentence_id,
                         const std::optional<PersonaMessage>& persona,
                         const FoldPlan* fold_plan = nullptr,
                         const std::set<UnitKey>* exemplar_jargon = nullptr);

PromptSpec render_prompt(const Corpus& corpus, int sentence_id,
                         const std::optional<PersonaMessage>& persona,
                         const FoldPlan& fold_plan, const GroupLabelSet& labels);

}  // namespace jargon
