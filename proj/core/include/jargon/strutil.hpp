#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace jargon {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Matching normalization for occurrence marking: ASCII lowercase plus
// curly-quote and dash folding. No stemming.
std::string normalize_match_token(std::string_view token);

// 64-bit FNV-1a, used for content-addressed request keys and config
// fingerprints. Stable across platforms.
std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// Fixed 2-decimal rendering with half-up rounding, period separator.
// Values are expected non-negative (percent scores).
std::string format_fixed2(double value);

// Temperatures print as "0.0", "0.2", "1.0"; non-tenth values fall back
// to shortest form.
std::string format_temperature(double value);

// p-values and other small reals: shortest round-trippable-ish form.
std::string format_compact(double value);

std::string csv_escape(std::string_view field);

}  // namespace jargon
