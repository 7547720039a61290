#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kb.hpp"
#include "label.hpp"

namespace ra_ner::retrieval {

struct RetrievalConfig {
    std::size_t k_sentence = 10;
    std::size_t k_title_per_entity = 1;
    std::size_t max_context_entries = 20;

    void validate() const
    {
        if (k_sentence == 0 || k_title_per_entity == 0 || max_context_entries == 0) {
            throw error("retrieval config values must be positive");
        }
    }
};

enum class Origin : std::uint8_t { sentence_retrieval, entity_retrieval };

inline std::string_view to_string(Origin o) noexcept
{
    return o == Origin::sentence_retrieval ? "sentence" : "entity";
}

inline Origin parse_origin(std::string_view s)
{
    if (s == "sentence") {
        return Origin::sentence_retrieval;
    }
    if (s == "entity") {
        return Origin::entity_retrieval;
    }
    throw error("unknown context origin '" + std::string(s) + "'");
}

struct ContextEntry {
    std::string source_title;
    std::string rendered_text;
    Origin origin = Origin::sentence_retrieval;

    friend bool operator==(ContextEntry const&, ContextEntry const&) = default;
};

struct RetrievedContext {
    std::vector<ContextEntry> entries;

    bool empty() const noexcept { return entries.empty(); }
    std::size_t size() const noexcept { return entries.size(); }

    friend bool operator==(RetrievedContext const&, RetrievedContext const&) = default;
};

inline std::string title_prefix(std::string_view title) { return "[" + std::string(title) + "] "; }

/// Prefixes each sentence with `[TITLE] ` and wraps link ranges as
/// `<e:TARGET>SURFACE</e>`.
inline ContextEntry render_paragraph(std::string_view title, kb::Paragraph const& p,
                                     Origin origin = Origin::sentence_retrieval)
{
    auto ptext = p.text();
    // byte offsets of link boundaries
    std::vector<std::pair<std::size_t, std::size_t>> links;
    std::size_t prev_end = 0;
    for (auto const& l : p.hyperlinks) {
        auto bs = text::byte_offset(ptext, l.char_start);
        auto be = text::byte_offset(ptext, l.char_end);
        if (!bs || !be || l.char_start >= l.char_end) {
            throw error("hyperlink out of range in '" + std::string(title) + "'");
        }
        if (!links.empty() && *bs < prev_end) {
            throw error("overlapping hyperlinks in '" + std::string(title) + "'");
        }
        links.emplace_back(*bs, *be);
        prev_end = *be;
    }

    std::string out;
    std::size_t cursor = 0;
    std::size_t li = 0;
    auto prefix = title_prefix(title);
    for (std::size_t s = 0; s < p.sentences.size(); ++s) {
        if (s > 0) {
            out += ' ';
            ++cursor;
        }
        out += prefix;
        auto end = cursor + p.sentences[s].size();
        while (cursor < end) {
            if (li < links.size() && links[li].first < cursor) {
                throw error("hyperlink starts between sentences in '" + std::string(title) + "'");
            }
            if (li < links.size() && links[li].first == cursor) {
                auto const& l = p.hyperlinks[li];
                if (links[li].second > end) {
                    throw error("hyperlink crosses a sentence boundary in '" + std::string(title) + "'");
                }
                out += "<e:" + l.target_title + ">";
                out.append(ptext, links[li].first, links[li].second - links[li].first);
                out += "</e>";
                cursor = links[li].second;
                ++li;
            } else {
                auto stop = li < links.size() ? std::min(end, links[li].first) : end;
                out.append(ptext, cursor, stop - cursor);
                cursor = stop;
            }
        }
    }
    return {std::string(title), std::move(out), origin};
}

/// Removes `<e:TARGET>` openers and `</e>` closers, keeping the surfaces.
inline std::string strip_link_markup(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s.compare(i, 3, "<e:") == 0) {
            auto close = s.find('>', i + 3);
            if (close != std::string_view::npos) {
                i = close + 1;
                continue;
            }
        }
        if (s.compare(i, 4, "</e>") == 0) {
            i += 4;
            continue;
        }
        out += s[i++];
    }
    return out;
}

/// Inverse of render_paragraph: drops sentence prefixes and link markup.
inline std::string unrender(ContextEntry const& e)
{
    auto prefix = title_prefix(e.source_title);
    auto const& r = e.rendered_text;
    std::string out;
    std::size_t i = 0;
    if (r.compare(0, prefix.size(), prefix) == 0) {
        i = prefix.size();
    }
    auto sep = " " + prefix;
    while (i < r.size()) {
        auto next = r.find(sep, i);
        if (next == std::string::npos) {
            out.append(r, i);
            break;
        }
        out.append(r, i, next - i);
        out += ' ';
        i = next + sep.size();
    }
    return strip_link_markup(out);
}

/// Text handed to generative models: link markup removed, title brackets kept.
inline std::string cleaned_text(ContextEntry const& e) { return strip_link_markup(e.rendered_text); }

/// Keeps the first occurrence of each (source_title, rendered_text) pair.
inline RetrievedContext dedupe(RetrievedContext ctx)
{
    std::set<std::pair<std::string, std::string>> seen;
    RetrievedContext out;
    for (auto& e : ctx.entries) {
        if (seen.emplace(e.source_title, e.rendered_text).second) {
            out.entries.push_back(std::move(e));
        }
    }
    return out;
}

/// Sentence-field document retrieval with the example words as query; each
/// retrieved document contributes the paragraph of its best sentence.
inline RetrievedContext retrieve_by_sentence(std::vector<std::string> const& tokens, kb::Index const& index,
                                             kb::DocumentStore const& store, RetrievalConfig const& cfg)
{
    RetrievedContext ctx;
    auto query = join_words(tokens);
    for (auto const& hit : index.search_documents(kb::Field::sentence, query, cfg.k_sentence)) {
        auto ref = kb::get_paragraph(store, hit);
        ctx.entries.push_back(render_paragraph(ref.title, *ref.paragraph, Origin::sentence_retrieval));
    }
    return dedupe(std::move(ctx));
}

inline RetrievedContext retrieve_by_sentence(Example const& ex, kb::Index const& index, kb::DocumentStore const& store,
                                             RetrievalConfig const& cfg)
{
    return retrieve_by_sentence(ex.tokens, index, store, cfg);
}

/// Title-field search per distinct entity surface; each hit contributes the
/// document's first paragraph. A title appears at most once.
inline RetrievedContext retrieve_by_entities(std::vector<EntitySpan> const& entities, kb::Index const& index,
                                             kb::DocumentStore const& store, RetrievalConfig const& cfg)
{
    RetrievedContext ctx;
    std::set<std::string> surfaces_seen;
    std::set<std::uint32_t> docs_seen;
    for (auto const& e : entities) {
        if (!surfaces_seen.insert(e.surface).second) {
            continue;
        }
        for (auto const& hit : index.search(kb::Field::title, e.surface, cfg.k_title_per_entity)) {
            if (!docs_seen.insert(hit.doc_id).second) {
                continue;
            }
            auto const& doc = store.at(hit.doc_id);
            if (doc.paragraphs.empty()) {
                continue;
            }
            auto ref = kb::get_paragraph(store, hit);
            ctx.entries.push_back(render_paragraph(ref.title, *ref.paragraph, Origin::entity_retrieval));
        }
    }
    return dedupe(std::move(ctx));
}

/// Entity entries first, then sentence entries; deduplicated and capped.
inline RetrievedContext combine(RetrievedContext const& sentence_ctx, RetrievedContext const& entity_ctx,
                                RetrievalConfig const& cfg)
{
    RetrievedContext all;
    all.entries = entity_ctx.entries;
    all.entries.insert(all.entries.end(), sentence_ctx.entries.begin(), sentence_ctx.entries.end());
    auto out = dedupe(std::move(all));
    if (out.entries.size() > cfg.max_context_entries) {
        out.entries.resize(cfg.max_context_entries);
    }
    return out;
}

inline nlohmann::json to_json(std::string const& example_id, RetrievedContext const& ctx)
{
    nlohmann::json entries = nlohmann::json::array();
    for (auto const& e : ctx.entries) {
        entries.push_back({{"title", e.source_title}, {"text", e.rendered_text}, {"origin", to_string(e.origin)}});
    }
    return {{"example_id", example_id}, {"entries", entries}};
}

inline std::pair<std::string, RetrievedContext> from_json(nlohmann::json const& j)
{
    if (!j.is_object() || !j.contains("example_id") || !j.contains("entries") || !j["entries"].is_array()) {
        throw format_error("context record needs 'example_id' and 'entries'");
    }
    RetrievedContext ctx;
    for (auto const& e : j["entries"]) {
        ctx.entries.push_back({e.at("title").get<std::string>(), e.at("text").get<std::string>(),
                               parse_origin(e.at("origin").get<std::string>())});
    }
    auto const& id = j["example_id"];
    return {id.is_string() ? id.get<std::string>() : id.dump(), std::move(ctx)};
}

}  // namespace ra_ner::retrieval
