#pragma once
// String helpers shared by the parser, the template engine and the metrics.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace saltdialog {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase, drop '(' and ')', collapse whitespace runs into one underscore,
// strip leading/trailing underscores. "top loin (chops)" -> "top_loin_chops".
std::string normalize_term(std::string_view s);

// Inverse surface form: underscores become spaces.
std::string denormalize_term(std::string_view s);

bool is_normalized_term(std::string_view s);

// Shortest decimal text that parses back to the same double.
std::string format_exact(double value);

// Presentation form: at most two decimals, trailing zeros removed.
std::string format_presentation(double value);

double round_presentation(double value);

// Strict full-string parse; nullopt on trailing junk or non-finite values.
std::optional<double> parse_double(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

} // namespace saltdialog
