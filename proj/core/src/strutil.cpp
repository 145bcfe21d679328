#include "jargon/strutil.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace jargon {

std::string_view trim(std::string_view s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string to_lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::string normalize_match_token(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    size_t i = 0;
    while (i < token.size()) {
        unsigned char c = static_cast<unsigned char>(token[i]);
        // UTF-8 punctuation folding: curly quotes to straight, dashes to '-'.
        if (c == 0xE2 && i + 2 < token.size()) {
            unsigned char b1 = static_cast<unsigned char>(token[i + 1]);
            unsigned char b2 = static_cast<unsigned char>(token[i + 2]);
            if (b1 == 0x80) {
                if (b2 == 0x98 || b2 == 0x99) {  // U+2018, U+2019
                    out.push_back('\'');
                    i += 3;
                    continue;
                }
                if (b2 == 0x9C || b2 == 0x9D) {  // U+201C, U+201D
                    out.push_back('"');
                    i += 3;
                    continue;
                }
                if (b2 == 0x90 || b2 == 0x91 || b2 == 0x93 || b2 == 0x94) {
                    // U+2010 hyphen, U+2011 nb-hyphen, U+2013 en dash, U+2014 em dash
                    out.push_back('-');
                    i += 3;
                    continue;
                }
            }
        }
        out.push_back(static_cast<char>(std::tolower(c)));
        ++i;
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (char c : data) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_fixed2(double value) {
    // Integer cents keep the rounding rule (half-up) out of printf's hands.
    long long cents = static_cast<long long>(std::floor(std::fabs(value) * 100.0 + 0.5));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", value < 0.0 && cents != 0 ? "-" : "",
                  cents / 100, cents % 100);
    return buf;
}

std::string format_temperature(double value) {
    double tenths = value * 10.0;
    if (std::fabs(tenths - std::round(tenths)) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", value);
        return buf;
    }
    return format_compact(value);
}

std::string format_compact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

}  // namespace jargon
