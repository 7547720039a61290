#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "parallel.hpp"
#include "tagger.hpp"

namespace ra_ner::tagger {

/// Exact surface (space-joined words) -> entity type.
using GazetteerTable = std::map<std::string, EntityType>;

/// Reads `surface<TAB>TYPE` lines; blank lines and `#` comments are skipped.
inline GazetteerTable load_gazetteer(std::istream& in)
{
    GazetteerTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (text::trim(line).empty() || line.front() == '#') {
            continue;
        }
        auto tab = line.rfind('\t');
        if (tab == std::string::npos) {
            throw parse_error("gazetteer line needs surface<TAB>TYPE", line_no);
        }
        auto type = parse_entity_type(text::trim(line.substr(tab + 1)));
        if (!type) {
            throw parse_error("unknown entity type '" + line.substr(tab + 1) + "'", line_no);
        }
        auto surface = text::join(text::split_whitespace(line.substr(0, tab)), " ");
        if (!surface.empty()) {
            table.emplace(std::move(surface), *type);
        }
    }
    return table;
}

/// Gazetteer built from gold spans (first type seen per surface wins).
inline GazetteerTable gazetteer_from_examples(std::vector<Example> const& examples)
{
    GazetteerTable table;
    for (auto const& ex : examples) {
        for (auto const& s : corpus::extract_spans(Example{ex.id, ex.tokens, corpus::repair_bio(ex.labels)})) {
            table.emplace(s.surface, s.type);
        }
    }
    return table;
}

struct Match {
    std::size_t start = 0;
    std::size_t end = 0;
    EntityType type = EntityType::LOC;
};

/// All candidate matches in words[0, limit), resolved longest first, then
/// leftmost, dropping candidates that overlap an accepted match.
template <typename Lookup>
std::vector<Match> longest_matches(std::vector<std::string> const& words, std::size_t limit, Lookup&& lookup,
                                   std::size_t max_words)
{
    std::vector<Match> cands;
    for (std::size_t s = 0; s < limit; ++s) {
        std::string key;
        for (std::size_t e = s; e < limit && e - s < max_words; ++e) {
            if (e > s) {
                key += ' ';
            }
            key += words[e];
            if (std::optional<EntityType> t = lookup(key)) {
                cands.push_back({s, e + 1, *t});
            }
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](Match const& a, Match const& b) {
        if (a.end - a.start != b.end - b.start) {
            return a.end - a.start > b.end - b.start;
        }
        return a.start < b.start;
    });
    std::vector<bool> taken(limit, false);
    std::vector<Match> accepted;
    for (auto const& m : cands) {
        bool free = true;
        for (auto k = m.start; k < m.end && free; ++k) {
            free = !taken[k];
        }
        if (!free) {
            continue;
        }
        for (auto k = m.start; k < m.end; ++k) {
            taken[k] = true;
        }
        accepted.push_back(m);
    }
    std::sort(accepted.begin(), accepted.end(), [](Match const& a, Match const& b) { return a.start < b.start; });
    return accepted;
}

/// Tags only what its table knows. With context matching on, a retrieved link
/// `<e:T>S</e>` whose target T (or surface S) is in the table teaches the
/// tagger that S has T's type for this example. Matches are emitted only
/// inside the original words; the retrieved tail is always X.
class GazetteerTagger final : public Tagger {
  public:
    explicit GazetteerTagger(GazetteerTable table, bool use_context = true, std::size_t workers = 1)
        : m_table(std::move(table)), m_use_context(use_context), m_workers(workers)
    {
        for (auto const& [surface, t] : m_table) {
            m_max_words = std::max(m_max_words, text::split_whitespace(surface).size());
        }
    }

    LabelSeq tag_one(augment::AugmentedExample const& aug) const
    {
        auto base = aug.base_length();
        LabelSeq labels(aug.full_tokens.size(), Label::augmented());
        for (std::size_t i = 0; i < base; ++i) {
            labels[i] = Label::outside();
        }
        GazetteerTable aliases;
        auto max_words = m_max_words;
        if (m_use_context && !aug.aug_tokens.empty()) {
            for (auto const& link : scan_context(aug).links) {
                auto surface = text::join(text::split_whitespace(link.surface), " ");
                auto target = text::join(text::split_whitespace(link.target), " ");
                auto known = m_table.find(target);
                if (known == m_table.end()) {
                    known = m_table.find(surface);
                }
                if (known != m_table.end()) {
                    aliases.emplace(surface, known->second);
                    max_words = std::max(max_words, text::split_whitespace(surface).size());
                }
            }
        }
        auto lookup = [&](std::string const& key) -> std::optional<EntityType> {
            if (auto it = m_table.find(key); it != m_table.end()) {
                return it->second;
            }
            if (auto it = aliases.find(key); it != aliases.end()) {
                return it->second;
            }
            return std::nullopt;
        };
        auto matches = longest_matches(aug.full_tokens, base, lookup, max_words);
        for (auto const& m : matches) {
            labels[m.start] = Label::begin(m.type);
            for (auto k = m.start + 1; k < m.end; ++k) {
                labels[k] = Label::inside(m.type);
            }
        }
        return labels;
    }

    std::vector<LabelSeq> tag(std::span<augment::AugmentedExample const> batch) override
    {
        std::vector<LabelSeq> out(batch.size());
        parallel_for(batch.size(), m_workers, [&](std::size_t i) { out[i] = tag_one(batch[i]); });
        return out;
    }

    std::string name() const override { return "gazetteer"; }

    GazetteerTable const& table() const noexcept { return m_table; }

  private:
    GazetteerTable m_table;
    bool m_use_context;
    std::size_t m_workers;
    std::size_t m_max_words = 0;
};

}  // namespace ra_ner::tagger
