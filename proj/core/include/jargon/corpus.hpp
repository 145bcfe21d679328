#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace jargon {

struct Word {
    std::string text;  // never empty, never contains whitespace
    int index = 0;     // 0-based position within the sentence

    bool operator==(const Word&) const = default;
};

// Identifies one term unit across the whole corpus. Serializes as
// "sentence:start:length" (e.g. "1:6:2").
struct UnitKey {
    int sentence_id = 0;
    int start = 0;
    int length = 0;

    auto operator<=>(const UnitKey&) const = default;

    std::string to_string() const;
    static UnitKey parse(std::string_view text);  // throws ValidationError
};

// A segmentation atom: either a bracketed multi-word jargon span or a
// single word/punctuation token.
struct TermUnit {
    int sentence_id = 0;  // 1-based
    int index = 0;        // 0-based position within the sentence's unit list
    int start = 0;        // first word index
    int length = 1;       // word count
    std::string surface;  // words joined by single spaces

    bool multiword() const { return length > 1; }
    UnitKey key() const { return {sentence_id, start, length}; }

    bool operator==(const TermUnit&) const = default;
};

struct Sentence {
    int id = 0;  // 1-based, dense
    std::vector<Word> words;
    std::vector<TermUnit> units;  // ordered by start, covering every word once

    std::string text() const;  // words joined by single spaces, no brackets

    bool operator==(const Sentence&) const = default;
};

struct CorpusStats {
    int sentences = 0;
    int words = 0;          // every token, punctuation included
    int units = 0;
    int multiword_units = 0;
    int content_words = 0;  // tokens containing at least one alphanumeric
    int content_units = 0;

    bool operator==(const CorpusStats&) const = default;
};

class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Sentence> sentences);

    const std::vector<Sentence>& sentences() const { return sentences_; }
    const Sentence& sentence(int id) const;  // throws ValidationError on unknown id
    bool has_sentence(int id) const;

    int word_count() const { return word_count_; }
    int unit_count() const { return unit_count_; }

    const TermUnit* find_unit(const UnitKey& key) const;  // nullptr when absent
    const TermUnit& unit(const UnitKey& key) const;       // throws ValidationError
    std::vector<UnitKey> all_unit_keys() const;           // document order

    bool operator==(const Corpus&) const = default;

private:
    std::vector<Sentence> sentences_;
    int word_count_ = 0;
    int unit_count_ = 0;
};

// Parses the line format: one sentence per line, single-space-separated
// tokens, `[w1 ... wk]` (k >= 2) marking one multi-word term unit.
// Throws FormatError with line/column on malformed input.
Corpus parse_corpus(std::string_view text);

// Inverse of parse_corpus; parse(serialize(c)) == c.
std::string serialize_corpus(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

// Units of `sentence_id` whose span is fully contained in `word_indices`.
std::vector<UnitKey> unit_lookup(const Corpus& corpus, int sentence_id,
                                 const std::set<int>& word_indices);

// The 20-sentence corpus shipped with the project.
std::string_view bundled_corpus_text();

}  // namespace jargon
