#include "saltdialog/text.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace saltdialog {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

} // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b]))
        ++b;
    while (e > b && is_space(s[e - 1]))
        --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_term(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_sep = false;
    for (char c : s) {
        if (c == '(' || c == ')')
            continue;
        if (is_space(c) || c == '_') {
            pending_sep = true;
            continue;
        }
        if (pending_sep && !out.empty())
            out.push_back('_');
        pending_sep = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string denormalize_term(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c == '_')
            c = ' ';
    return out;
}

bool is_normalized_term(std::string_view s) {
    return !s.empty() && normalize_term(s) == s;
}

std::string format_exact(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc())
        return std::to_string(value);
    return std::string(buf.data(), ptr);
}

double round_presentation(double value) { return std::round(value * 100.0) / 100.0; }

std::string format_presentation(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), round_presentation(value),
                                   std::chars_format::fixed, 2);
    std::string out = ec == std::errc() ? std::string(buf.data(), ptr) : std::to_string(value);
    while (!out.empty() && out.back() == '0')
        out.pop_back();
    if (!out.empty() && out.back() == '.')
        out.pop_back();
    if (out == "-0")
        out = "0";
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    std::string t = trim(s);
    if (t.empty())
        return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

} // namespace saltdialog
