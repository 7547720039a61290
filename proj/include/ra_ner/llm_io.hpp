#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "label.hpp"
#include "retrieval.hpp"
#include "text.hpp"

namespace ra_ner::llm_io {

struct ParsedEntity {
    std::string surface;
    EntityType type = EntityType::LOC;

    friend bool operator==(ParsedEntity const&, ParsedEntity const&) = default;
};

using ParsedEntities = std::vector<ParsedEntity>;

/// Case-insensitive map from free-form type names to canonical types.
class TypeSynonyms {
  public:
    TypeSynonyms()
    {
        auto add_all = [&](EntityType t, std::initializer_list<std::string_view> names) {
            for (auto n : names) {
                add(n, t);
            }
        };
        add_all(EntityType::LOC, {"loc", "location", "locations", "place", "places", "location name", "geo",
                                  "geographical location", "city", "country"});
        add_all(EntityType::PER, {"per", "person", "persons", "people", "person name", "name", "individual"});
        add_all(EntityType::PROD, {"prod", "product", "products", "production", "product name"});
        add_all(EntityType::GRP, {"grp", "group", "groups", "organization", "organisation", "org", "team", "band"});
        add_all(EntityType::CORP, {"corp", "corporation", "corporations", "company", "companies", "business",
                                   "firm", "brand"});
        add_all(EntityType::CW, {"cw", "creative work", "creative works", "creativework", "creative-work",
                                 "creative_work", "work", "title"});
    }

    void add(std::string_view name, EntityType t) { m_table[key(name)] = t; }

    std::optional<EntityType> lookup(std::string_view raw) const
    {
        auto k = key(raw);
        if (k.size() > 2 && (k.rfind("b-", 0) == 0 || k.rfind("i-", 0) == 0)) {
            k = k.substr(2);
        }
        auto it = m_table.find(k);
        if (it == m_table.end()) {
            return std::nullopt;
        }
        return it->second;
    }

  private:
    /// ASCII-lowercased with surrounding quotes/brackets dropped and inner
    /// whitespace collapsed.
    static std::string key(std::string_view raw)
    {
        auto words = text::split_whitespace(raw);
        std::string k = text::ascii_lower(text::join(words, " "));
        auto strip = [](char c) { return c == '"' || c == '\'' || c == '[' || c == ']' || c == '(' || c == ')' || c == '.'; };
        while (!k.empty() && strip(k.front())) {
            k.erase(k.begin());
        }
        while (!k.empty() && strip(k.back())) {
            k.pop_back();
        }
        return k;
    }

    std::map<std::string, EntityType> m_table;
};

inline TypeSynonyms const& default_synonyms()
{
    static TypeSynonyms const table;
    return table;
}

inline std::optional<EntityType> normalize_type(std::string_view raw, TypeSynonyms const& syn = default_synonyms())
{
    return syn.lookup(raw);
}

/// "surface: TYPE, surface: TYPE" in the given order.
inline std::string format_listing(ParsedEntities const& entities)
{
    std::string out;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += entities[i].surface + ": " + std::string(to_string(entities[i].type));
    }
    return out;
}

inline ParsedEntities from_spans(std::vector<EntitySpan> const& spans)
{
    ParsedEntities out;
    for (auto const& s : spans) {
        out.push_back({s.surface, s.type});
    }
    return out;
}

namespace detail {

inline bool is_quote_or_space(std::string_view s, std::size_t pos, std::size_t& len)
{
    static constexpr std::string_view multi[] = {"“", "”", "‘", "’"};
    char c = s[pos];
    if (c == '"' || c == '\'' || c == '`' || c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        len = 1;
        return true;
    }
    for (auto m : multi) {
        if (s.compare(pos, m.size(), m) == 0) {
            len = m.size();
            return true;
        }
    }
    return false;
}

inline std::string clean_surface(std::string_view s)
{
    std::size_t len = 0;
    while (!s.empty() && is_quote_or_space(s, 0, len)) {
        s.remove_prefix(len);
    }
    bool again = true;
    while (again && !s.empty()) {
        again = false;
        for (std::size_t back = 1; back <= std::min<std::size_t>(3, s.size()); ++back) {
            if (is_quote_or_space(s, s.size() - back, len) && len == back) {
                s.remove_suffix(back);
                again = true;
                break;
            }
        }
    }
    return text::join(text::split_whitespace(s), " ");
}

/// Strips "-", "*", "•", "1." and "1)" list markers.
inline std::string_view strip_bullet(std::string_view line)
{
    auto t = line;
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) {
        t.remove_prefix(1);
    }
    if (t.starts_with("- ") || t.starts_with("* ")) {
        return t.substr(2);
    }
    if (t.starts_with("•")) {
        return t.substr(3);
    }
    std::size_t d = 0;
    while (d < t.size() && t[d] >= '0' && t[d] <= '9') {
        ++d;
    }
    if (d > 0 && d < t.size() && (t[d] == '.' || t[d] == ')')) {
        return t.substr(d + 1);
    }
    return t;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

/// "surface: Type" where the surface is the text between the last two colons.
inline std::optional<ParsedEntity> colon_pair(std::string_view item, TypeSynonyms const& syn)
{
    auto colon = item.rfind(':');
    if (colon == std::string_view::npos) {
        return std::nullopt;
    }
    auto type = normalize_type(item.substr(colon + 1), syn);
    if (!type) {
        return std::nullopt;
    }
    auto left = item.substr(0, colon);
    if (auto prev = left.rfind(':'); prev != std::string_view::npos) {
        left = left.substr(prev + 1);
    }
    auto surface = clean_surface(strip_bullet(left));
    if (surface.empty() || surface.find_first_of("{}") != std::string::npos) {
        return std::nullopt;
    }
    return ParsedEntity{std::move(surface), *type};
}

inline ParsedEntities tier_braces(std::string_view text, TypeSynonyms const& syn)
{
    ParsedEntities out;
    auto open = text.find('{');
    if (open == std::string_view::npos) {
        return out;
    }
    auto close = text.find('}', open + 1);
    if (close == std::string_view::npos) {
        return out;
    }
    auto inner = text.substr(open + 1, close - open - 1);
    for (auto line : split(inner, '\n')) {
        for (auto item : split(line, ',')) {
            if (auto e = colon_pair(item, syn)) {
                out.push_back(std::move(*e));
            }
        }
    }
    return out;
}

inline ParsedEntities tier_colon_list(std::string_view text, TypeSynonyms const& syn)
{
    ParsedEntities out;
    for (auto line : split(text, '\n')) {
        for (auto item : split(line, ',')) {
            if (auto e = colon_pair(item, syn)) {
                out.push_back(std::move(*e));
            }
        }
    }
    return out;
}

inline ParsedEntities tier_bullets(std::string_view text, TypeSynonyms const& syn)
{
    ParsedEntities out;
    for (auto raw : split(text, '\n')) {
        auto line = strip_bullet(raw);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) {
            line.remove_suffix(1);
        }
        std::optional<ParsedEntity> e;
        if (!line.empty() && line.back() == ')') {
            if (auto open = line.rfind('('); open != std::string_view::npos) {
                auto type = normalize_type(line.substr(open + 1, line.size() - open - 2), syn);
                auto surface = clean_surface(line.substr(0, open));
                if (type && !surface.empty()) {
                    e = ParsedEntity{std::move(surface), *type};
                }
            }
        }
        if (!e) {
            for (std::string_view dash : {" - ", " \xe2\x80\x93 ", " \xe2\x80\x94 "}) {
                if (auto at = line.rfind(dash); at != std::string_view::npos) {
                    auto type = normalize_type(line.substr(at + dash.size()), syn);
                    auto surface = clean_surface(line.substr(0, at));
                    if (type && !surface.empty()) {
                        e = ParsedEntity{std::move(surface), *type};
                        break;
                    }
                }
            }
        }
        if (e) {
            out.push_back(std::move(*e));
        }
    }
    return out;
}

inline ParsedEntities dedupe(ParsedEntities in)
{
    std::set<std::string> seen;
    ParsedEntities out;
    for (auto& e : in) {
        if (seen.insert(e.surface).second) {
            out.push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace detail

/// Extracts (surface, type) pairs from free-form model output. Tiers are tried
/// in order (brace listing, comma-separated colon pairs, per-line bullets) and
/// the first tier yielding a valid pair wins. Never throws.
inline ParsedEntities parse_generation(std::string_view text, TypeSynonyms const& syn = default_synonyms()) noexcept
{
    try {
        for (auto tier : {detail::tier_braces, detail::tier_colon_list, detail::tier_bullets}) {
            auto found = tier(text, syn);
            if (!found.empty()) {
                return detail::dedupe(std::move(found));
            }
        }
    } catch (...) {
    }
    return {};
}

/// Writes each parsed entity at its leftmost word-aligned occurrence that does
/// not overlap an earlier match. Unmatched entities are dropped.
inline LabelSeq entities_to_bio(std::vector<std::string> const& tokens, ParsedEntities const& parsed)
{
    LabelSeq labels(tokens.size(), Label::outside());
    std::vector<bool> taken(tokens.size(), false);
    for (auto const& e : parsed) {
        auto words = text::split_whitespace(e.surface);
        if (words.empty() || words.size() > tokens.size()) {
            continue;
        }
        for (std::size_t s = 0; s + words.size() <= tokens.size(); ++s) {
            bool ok = true;
            for (std::size_t k = 0; k < words.size() && ok; ++k) {
                ok = !taken[s + k] && tokens[s + k] == words[k];
            }
            if (!ok) {
                continue;
            }
            labels[s] = Label::begin(e.type);
            taken[s] = true;
            for (std::size_t k = 1; k < words.size(); ++k) {
                labels[s + k] = Label::inside(e.type);
                taken[s + k] = true;
            }
            break;
        }
    }
    return corpus::repair_bio(std::move(labels));
}

struct Shot {
    std::string sentence;
    std::string listing;
};

struct PromptSpec {
    std::string system_prompt;
    std::string instruction;
    std::vector<Shot> shots;
    std::size_t window_budget = 7680;
    bool ra_enabled = true;
};

/// Context-window defaults per target model, in whitespace tokens.
inline constexpr std::size_t llama2_budget = 3100;
inline constexpr std::size_t llama3_budget = 7680;
inline constexpr std::size_t gpt35_budget = 16385;

inline std::size_t count_words(std::string_view s) { return text::split_whitespace(s).size(); }

/// Sections: system prompt, instruction, demonstrations, cleaned context,
/// target sentence, answer cue. Only the context is truncated, from its end.
inline std::string build_fewshot_prompt(std::vector<std::string> const& tokens,
                                        retrieval::RetrievedContext const& ctx, PromptSpec const& spec)
{
    std::string head;
    head += spec.system_prompt + "\n\n" + spec.instruction + "\n\n";
    for (auto const& shot : spec.shots) {
        head += "Sentence: " + shot.sentence + "\nEntities: " + shot.listing + "\n\n";
    }
    std::string tail = "Sentence: " + join_words(tokens) + "\nEntities:";

    auto fixed = count_words(head);
    if (fixed >= spec.window_budget) {
        throw error("prompt budget " + std::to_string(spec.window_budget)
                    + " does not exceed system prompt + instruction + shots (" + std::to_string(fixed) + " words)");
    }
    auto mandatory = fixed + count_words(tail);
    if (mandatory > spec.window_budget) {
        throw error("prompt budget " + std::to_string(spec.window_budget) + " is smaller than the mandatory "
                    + std::to_string(mandatory) + " words");
    }

    std::string context;
    if (spec.ra_enabled && !ctx.empty()) {
        std::vector<std::string> words;
        for (auto const& e : ctx.entries) {
            for (auto& w : text::split_whitespace(retrieval::cleaned_text(e))) {
                words.push_back(std::move(w));
            }
        }
        auto room = spec.window_budget - mandatory;
        // one word goes to the "Context:" label
        if (room >= 2 && !words.empty()) {
            words.resize(std::min(words.size(), room - 1));
            context = "Context: " + text::join(words, " ") + "\n\n";
        }
    }
    return head + context + tail;
}

}  // namespace ra_ner::llm_io
