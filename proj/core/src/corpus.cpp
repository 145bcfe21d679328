#include "jargon/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "jargon/errors.hpp"
#include "jargon/strutil.hpp"

namespace jargon {

std::string UnitKey::to_string() const {
    return std::to_string(sentence_id) + ":" + std::to_string(start) + ":" +
           std::to_string(length);
}

UnitKey UnitKey::parse(std::string_view text) {
    auto parts = split(text, ':');
    if (parts.size() != 3) throw ValidationError("malformed unit key: " + std::string(text));
    UnitKey key;
    int* fields[3] = {&key.sentence_id, &key.start, &key.length};
    for (int i = 0; i < 3; ++i) {
        const std::string& p = parts[i];
        auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), *fields[i]);
        if (ec != std::errc() || ptr != p.data() + p.size())
            throw ValidationError("malformed unit key: " + std::string(text));
    }
    if (key.sentence_id < 1 || key.start < 0 || key.length < 1)
        throw ValidationError("malformed unit key: " + std::string(text));
    return key;
}

std::string Sentence::text() const {
    std::string out;
    for (const Word& w : words) {
        if (!out.empty()) out += ' ';
        out += w.text;
    }
    return out;
}

Corpus::Corpus(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {
    for (const Sentence& s : sentences_) {
        word_count_ += static_cast<int>(s.words.size());
        unit_count_ += static_cast<int>(s.units.size());
    }
}

const Sentence& Corpus::sentence(int id) const {
    if (!has_sentence(id))
        throw ValidationError("unknown sentence_id " + std::to_string(id));
    return sentences_[static_cast<size_t>(id - 1)];
}

bool Corpus::has_sentence(int id) const {
    return id >= 1 && static_cast<size_t>(id) <= sentences_.size();
}

const TermUnit* Corpus::find_unit(const UnitKey& key) const {
    if (!has_sentence(key.sentence_id)) return nullptr;
    for (const TermUnit& u : sentences_[static_cast<size_t>(key.sentence_id - 1)].units) {
        if (u.start == key.start && u.length == key.length) return &u;
    }
    return nullptr;
}

const TermUnit& Corpus::unit(const UnitKey& key) const {
    const TermUnit* u = find_unit(key);
    if (!u) throw ValidationError("unknown term unit " + key.to_string());
    return *u;
}

std::vector<UnitKey> Corpus::all_unit_keys() const {
    std::vector<UnitKey> keys;
    keys.reserve(static_cast<size_t>(unit_count_));
    for (const Sentence& s : sentences_)
        for (const TermUnit& u : s.units) keys.push_back(u.key());
    return keys;
}

namespace {

struct RawToken {
    std::string text;
    int column = 0;  // 1-based character offset of the token start
};

std::vector<RawToken> tokenize_line(const std::string& line) {
    std::vector<RawToken> tokens;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(' ', start);
        size_t end = (pos == std::string::npos) ? line.size() : pos;
        tokens.push_back({line.substr(start, end - start), static_cast<int>(start) + 1});
        if (pos == std::string::npos) return tokens;
        start = pos + 1;
    }
}

Sentence parse_sentence_line(const std::string& line, int sentence_id, int line_no) {
    Sentence sentence;
    sentence.id = sentence_id;

    bool in_group = false;
    int group_start = 0;
    int group_words = 0;
    int group_column = 0;

    for (const RawToken& tok : tokenize_line(line)) {
        if (tok.text.empty())
            throw FormatError("empty token (consecutive or trailing spaces)", line_no, tok.column);

        std::string core = tok.text;
        bool opens = core.front() == '[';
        if (opens) core.erase(core.begin());
        bool closes = !core.empty() && core.back() == ']';
        if (closes) core.pop_back();

        if (opens && in_group)
            throw FormatError("nested bracket group", line_no, tok.column);
        if (opens && closes && core.empty())
            throw FormatError("empty bracket group", line_no, tok.column);
        if (core.find('[') != std::string::npos || core.find(']') != std::string::npos)
            throw FormatError("stray bracket inside token", line_no, tok.column);
        if (core.empty())
            throw FormatError("empty token inside bracket group", line_no, tok.column);

        if (opens) {
            in_group = true;
            group_start = static_cast<int>(sentence.words.size());
            group_words = 0;
            group_column = tok.column;
        }

        int word_index = static_cast<int>(sentence.words.size());
        sentence.words.push_back({core, word_index});

        if (in_group) {
            ++group_words;
            if (closes) {
                if (group_words < 2)
                    throw FormatError("single-word bracket group", line_no, tok.column);
                TermUnit unit;
                unit.sentence_id = sentence_id;
                unit.index = static_cast<int>(sentence.units.size());
                unit.start = group_start;
                unit.length = group_words;
                for (int i = group_start; i < group_start + group_words; ++i) {
                    if (i > group_start) unit.surface += ' ';
                    unit.surface += sentence.words[static_cast<size_t>(i)].text;
                }
                sentence.units.push_back(std::move(unit));
                in_group = false;
            }
        } else {
            if (closes)
                throw FormatError("unbalanced ']'", line_no, tok.column);
            TermUnit unit;
            unit.sentence_id = sentence_id;
            unit.index = static_cast<int>(sentence.units.size());
            unit.start = word_index;
            unit.length = 1;
            unit.surface = core;
            sentence.units.push_back(std::move(unit));
        }
    }

    if (in_group)
        throw FormatError("unbalanced '['", line_no, group_column);
    return sentence;
}

}  // namespace

Corpus parse_corpus(std::string_view text) {
    std::vector<Sentence> sentences;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, (nl == std::string_view::npos ? text.size() : nl) - pos);
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (!trim(raw).empty()) {
            sentences.push_back(parse_sentence_line(std::string(raw),
                                                    static_cast<int>(sentences.size()) + 1,
                                                    line_no));
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (sentences.empty()) throw FormatError("empty document: no sentences found");
    return Corpus(std::move(sentences));
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const Sentence& s : corpus.sentences()) {
        std::string line;
        for (const TermUnit& u : s.units) {
            if (!line.empty()) line += ' ';
            if (u.multiword()) {
                line += '[';
                line += u.surface;
                line += ']';
            } else {
                line += u.surface;
            }
        }
        out += line;
        out += '\n';
    }
    return out;
}

namespace {

bool has_alnum(std::string_view text) {
    for (char c : text)
        if (std::isalnum(static_cast<unsigned char>(c))) return true;
    return false;
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.sentences = static_cast<int>(corpus.sentences().size());
    stats.words = corpus.word_count();
    stats.units = corpus.unit_count();
    for (const Sentence& s : corpus.sentences()) {
        for (const Word& w : s.words)
            if (has_alnum(w.text)) ++stats.content_words;
        for (const TermUnit& u : s.units) {
            if (u.multiword()) ++stats.multiword_units;
            if (has_alnum(u.surface)) ++stats.content_units;
        }
    }
    return stats;
}

std::vector<UnitKey> unit_lookup(const Corpus& corpus, int sentence_id,
                                 const std::set<int>& word_indices) {
    const Sentence& sentence = corpus.sentence(sentence_id);
    std::vector<UnitKey> out;
    for (const TermUnit& u : sentence.units) {
        bool covered = true;
        for (int i = u.start; i < u.start + u.length; ++i) {
            if (!word_indices.count(i)) {
                covered = false;
                break;
            }
        }
        if (covered) out.push_back(u.key());
    }
    return out;
}

}  // namespace jargon
