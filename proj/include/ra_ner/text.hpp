#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ra_ner::text {

/// Decodes the code point starting at `pos`, advancing `pos`. Malformed bytes
/// decode as themselves (one byte each) so that arbitrary input never fails.
inline char32_t next_code_point(std::string_view s, std::size_t& pos) noexcept
{
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char c = byte(pos);
    std::size_t extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
        ++pos;
        return c;
    }
    if ((c & 0xE0) == 0xC0) {
        extra = 1;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        extra = 2;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        extra = 3;
        cp = c & 0x07;
    } else {
        ++pos;
        return c;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
        if (pos + k >= s.size() || (byte(pos + k) & 0xC0) != 0x80) {
            ++pos;
            return c;
        }
        cp = (cp << 6) | (byte(pos + k) & 0x3F);
    }
    pos += extra + 1;
    return cp;
}

inline std::size_t code_point_length(std::string_view s) noexcept
{
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size();) {
        next_code_point(s, pos);
        ++n;
    }
    return n;
}

/// Byte offset of the `cp_index`-th code point; `s.size()` when it equals the
/// code point length, nullopt past the end.
inline std::optional<std::size_t> byte_offset(std::string_view s, std::size_t cp_index) noexcept
{
    std::size_t pos = 0;
    for (std::size_t i = 0; i < cp_index; ++i) {
        if (pos >= s.size()) {
            return std::nullopt;
        }
        next_code_point(s, pos);
    }
    return pos;
}

constexpr bool is_space(char32_t c) noexcept
{
    switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
        return true;
    default:
        return c >= 0x2000 && c <= 0x200A;
    }
}

constexpr bool is_punct(char32_t c) noexcept
{
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60)
               || (c >= 0x7B && c <= 0x7E);
    }
    // danda, double danda, abbreviation sign
    if (c == 0x0964 || c == 0x0965 || c == 0x0970) {
        return true;
    }
    return (c >= 0xA1 && c <= 0xBF && c != 0xAA && c != 0xB2 && c != 0xB3 && c != 0xB5 && c != 0xB9 && c != 0xBA
            && c != 0xBC && c != 0xBD && c != 0xBE)
           || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003)
           || (c >= 0x3008 && c <= 0x3011);
}

/// Splits on Unicode whitespace; empty pieces are dropped.
inline std::vector<std::string> split_whitespace(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = std::string_view::npos;
    for (std::size_t pos = 0; pos < s.size();) {
        std::size_t here = pos;
        char32_t c = next_code_point(s, pos);
        if (is_space(c)) {
            if (start != std::string_view::npos) {
                out.emplace_back(s.substr(start, here - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = here;
        }
    }
    if (start != std::string_view::npos) {
        out.emplace_back(s.substr(start));
    }
    return out;
}

inline bool contains_whitespace(std::string_view s) noexcept
{
    for (std::size_t pos = 0; pos < s.size();) {
        if (is_space(next_code_point(s, pos))) {
            return true;
        }
    }
    return false;
}

/// Removes leading and trailing punctuation code points.
inline std::string_view strip_punct(std::string_view s) noexcept
{
    std::size_t first = 0;
    while (first < s.size()) {
        std::size_t pos = first;
        if (!is_punct(next_code_point(s, pos))) {
            break;
        }
        first = pos;
    }
    std::size_t last = first;
    for (std::size_t pos = first; pos < s.size();) {
        if (!is_punct(next_code_point(s, pos))) {
            last = pos;
        }
    }
    return s.substr(first, last - first);
}

inline std::string ascii_lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

/// Index-time and query-time term extraction: whitespace split, punctuation
/// stripped at both ends, ASCII-only case folding. No stemming or stopwords.
inline std::vector<std::string> analyze(std::string_view s)
{
    std::vector<std::string> terms;
    for (auto const& piece : split_whitespace(s)) {
        auto stripped = strip_punct(piece);
        if (!stripped.empty()) {
            terms.push_back(ascii_lower(stripped));
        }
    }
    return terms;
}

inline std::string trim(std::string_view s)
{
    std::size_t first = 0;
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t pos = 0; pos < s.size();) {
        std::size_t here = pos;
        if (!is_space(next_code_point(s, pos))) {
            if (!seen) {
                first = here;
                seen = true;
            }
            last = pos;
        }
    }
    return seen ? std::string(s.substr(first, last - first)) : std::string{};
}

inline std::string join(std::vector<std::string> const& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

}  // namespace ra_ner::text
