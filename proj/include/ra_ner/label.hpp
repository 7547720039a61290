#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace ra_ner {

enum class EntityType : std::uint8_t { LOC, PER, PROD, GRP, CORP, CW };

inline constexpr std::size_t num_entity_types = 6;
inline constexpr std::array<EntityType, num_entity_types> all_entity_types = {
    EntityType::LOC, EntityType::PER, EntityType::PROD, EntityType::GRP, EntityType::CORP, EntityType::CW};

constexpr std::string_view to_string(EntityType t) noexcept
{
    switch (t) {
    case EntityType::LOC: return "LOC";
    case EntityType::PER: return "PER";
    case EntityType::PROD: return "PROD";
    case EntityType::GRP: return "GRP";
    case EntityType::CORP: return "CORP";
    case EntityType::CW: return "CW";
    }
    return "?";
}

constexpr std::optional<EntityType> parse_entity_type(std::string_view s) noexcept
{
    for (auto t : all_entity_types) {
        if (to_string(t) == s) {
            return t;
        }
    }
    return std::nullopt;
}

/// A BIO label. X marks words of the augmented (retrieved) tail and
/// serializes as "B-X".
class Label {
  public:
    enum class Kind : std::uint8_t { O, B, I, X };

    constexpr Label() noexcept = default;

    static constexpr Label outside() noexcept { return Label{Kind::O, EntityType::LOC}; }
    static constexpr Label augmented() noexcept { return Label{Kind::X, EntityType::LOC}; }
    static constexpr Label begin(EntityType t) noexcept { return Label{Kind::B, t}; }
    static constexpr Label inside(EntityType t) noexcept { return Label{Kind::I, t}; }

    constexpr Kind kind() const noexcept { return m_kind; }
    constexpr bool is_outside() const noexcept { return m_kind == Kind::O; }
    constexpr bool is_augmented() const noexcept { return m_kind == Kind::X; }
    constexpr bool is_begin() const noexcept { return m_kind == Kind::B; }
    constexpr bool is_inside() const noexcept { return m_kind == Kind::I; }
    constexpr bool has_type() const noexcept { return m_kind == Kind::B || m_kind == Kind::I; }

    /// Only meaningful when has_type().
    constexpr EntityType type() const noexcept { return m_type; }

    /// Fixed class index: O, then B/I pairs per type in declaration order, then X.
    constexpr std::size_t index() const noexcept
    {
        switch (m_kind) {
        case Kind::O: return 0;
        case Kind::B: return 1 + 2 * static_cast<std::size_t>(m_type);
        case Kind::I: return 2 + 2 * static_cast<std::size_t>(m_type);
        case Kind::X: return 13;
        }
        return 0;
    }

    static constexpr Label from_index(std::size_t i) noexcept
    {
        if (i == 0) {
            return outside();
        }
        if (i >= 13) {
            return augmented();
        }
        auto t = static_cast<EntityType>((i - 1) / 2);
        return (i % 2 == 1) ? begin(t) : inside(t);
    }

    std::string str() const
    {
        switch (m_kind) {
        case Kind::O: return "O";
        case Kind::X: return "B-X";
        case Kind::B: return "B-" + std::string(to_string(m_type));
        case Kind::I: return "I-" + std::string(to_string(m_type));
        }
        return "O";
    }

    static std::optional<Label> parse(std::string_view s) noexcept
    {
        if (s == "O") {
            return outside();
        }
        if (s == "B-X") {
            return augmented();
        }
        if (s.size() < 3 || s[1] != '-') {
            return std::nullopt;
        }
        auto t = parse_entity_type(s.substr(2));
        if (!t) {
            return std::nullopt;
        }
        if (s[0] == 'B') {
            return begin(*t);
        }
        if (s[0] == 'I') {
            return inside(*t);
        }
        return std::nullopt;
    }

    friend constexpr bool operator==(Label a, Label b) noexcept { return a.index() == b.index(); }

  private:
    constexpr Label(Kind k, EntityType t) noexcept : m_kind(k), m_type(t) {}

    Kind m_kind = Kind::O;
    EntityType m_type = EntityType::LOC;
};

inline constexpr std::size_t num_labels = 14;

using LabelSeq = std::vector<Label>;

struct Example {
    std::string id;
    std::vector<std::string> tokens;
    LabelSeq labels;

    friend bool operator==(Example const&, Example const&) = default;
};

/// Half-open word range [start, end) of one entity.
struct EntitySpan {
    std::size_t start = 0;
    std::size_t end = 0;
    EntityType type = EntityType::LOC;
    std::string surface;

    std::size_t length() const noexcept { return end - start; }

    friend bool operator==(EntitySpan const&, EntitySpan const&) = default;
};

inline std::string join_words(std::vector<std::string> const& words, std::size_t first, std::size_t last,
                              std::string_view sep = " ")
{
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) {
            out += sep;
        }
        out += words[i];
    }
    return out;
}

inline std::string join_words(std::vector<std::string> const& words, std::string_view sep = " ")
{
    return join_words(words, 0, words.size(), sep);
}

}  // namespace ra_ner
