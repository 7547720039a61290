#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "binary_io.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "text.hpp"

namespace ra_ner::kb {

/// Link annotation; offsets are code points into the paragraph text (the
/// sentences joined by single spaces).
struct Hyperlink {
    std::string surface;
    std::string target_title;
    std::size_t char_start = 0;
    std::size_t char_end = 0;

    friend bool operator==(Hyperlink const&, Hyperlink const&) = default;
};

struct Paragraph {
    std::vector<std::string> sentences;
    std::vector<Hyperlink> hyperlinks;

    std::string text() const { return text::join(sentences, " "); }

    friend bool operator==(Paragraph const&, Paragraph const&) = default;
};

struct Document {
    std::uint32_t doc_id = 0;
    std::string title;
    std::vector<Paragraph> paragraphs;

    friend bool operator==(Document const&, Document const&) = default;
};

/// Position of a sentence inside its document.
struct SentenceLocation {
    std::uint32_t paragraph = 0;
    std::uint32_t sentence_in_paragraph = 0;
};

class DocumentStore {
  public:
    DocumentStore() = default;

    /// Assigns the next dense id and validates hyperlinks.
    std::uint32_t add(std::string title, std::vector<Paragraph> paragraphs);

    std::size_t size() const noexcept { return m_docs.size(); }
    bool empty() const noexcept { return m_docs.empty(); }
    Document const& at(std::uint32_t doc_id) const
    {
        if (doc_id >= m_docs.size()) {
            throw error("unknown doc_id " + std::to_string(doc_id));
        }
        return m_docs[doc_id];
    }
    std::vector<Document> const& documents() const noexcept { return m_docs; }

    /// Sentence units are numbered across the whole document.
    std::size_t num_sentences(std::uint32_t doc_id) const { return m_locations.at(doc_id).size(); }
    SentenceLocation locate(std::uint32_t doc_id, std::uint32_t sentence) const
    {
        auto const& locs = m_locations.at(doc_id);
        if (sentence >= locs.size()) {
            throw error("doc " + std::to_string(doc_id) + " has no sentence " + std::to_string(sentence));
        }
        return locs[sentence];
    }
    std::string const& sentence(std::uint32_t doc_id, std::uint32_t sentence) const
    {
        auto loc = locate(doc_id, sentence);
        return m_docs[doc_id].paragraphs[loc.paragraph].sentences[loc.sentence_in_paragraph];
    }

    friend bool operator==(DocumentStore const& a, DocumentStore const& b) { return a.m_docs == b.m_docs; }

  private:
    std::vector<Document> m_docs;
    std::vector<std::vector<SentenceLocation>> m_locations;
};

/// Checks offsets, fills in surfaces, and sorts links by start. Links must not
/// overlap and must stay inside one sentence.
inline void validate_links(std::string const& title, Paragraph& p)
{
    auto ptext = p.text();
    auto length = text::code_point_length(ptext);
    // code point boundaries of each sentence
    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    std::size_t cursor = 0;
    for (auto const& s : p.sentences) {
        auto n = text::code_point_length(s);
        bounds.emplace_back(cursor, cursor + n);
        cursor += n + 1;
    }
    std::sort(p.hyperlinks.begin(), p.hyperlinks.end(),
              [](auto const& a, auto const& b) { return a.char_start < b.char_start; });
    std::size_t prev_end = 0;
    for (auto& link : p.hyperlinks) {
        if (link.char_start >= link.char_end || link.char_end > length) {
            throw error("hyperlink offset out of range in '" + title + "': [" + std::to_string(link.char_start) + ","
                        + std::to_string(link.char_end) + ")");
        }
        if (link.char_start < prev_end) {
            throw error("overlapping hyperlinks in '" + title + "'");
        }
        bool inside_sentence = std::any_of(bounds.begin(), bounds.end(), [&](auto const& b) {
            return link.char_start >= b.first && link.char_end <= b.second;
        });
        if (!inside_sentence) {
            throw error("hyperlink crosses a sentence boundary in '" + title + "'");
        }
        auto bs = *text::byte_offset(ptext, link.char_start);
        auto be = *text::byte_offset(ptext, link.char_end);
        auto surface = ptext.substr(bs, be - bs);
        if (!link.surface.empty() && link.surface != surface) {
            throw error("hyperlink surface mismatch in '" + title + "'");
        }
        link.surface = std::move(surface);
        prev_end = link.char_end;
    }
}

inline std::uint32_t DocumentStore::add(std::string title, std::vector<Paragraph> paragraphs)
{
    if (text::trim(title).empty()) {
        throw error("document title must be non-empty");
    }
    for (auto& p : paragraphs) {
        validate_links(title, p);
    }
    auto id = static_cast<std::uint32_t>(m_docs.size());
    std::vector<SentenceLocation> locs;
    for (std::uint32_t pi = 0; pi < paragraphs.size(); ++pi) {
        for (std::uint32_t si = 0; si < paragraphs[pi].sentences.size(); ++si) {
            locs.push_back({pi, si});
        }
    }
    m_docs.push_back({id, std::move(title), std::move(paragraphs)});
    m_locations.push_back(std::move(locs));
    return id;
}

/// Reads KB-JSONL: one `{"title", "paragraphs": [{"sentences", "links"}]}`
/// object per line. Blank lines are skipped; record numbers are 1-based.
inline DocumentStore ingest(std::istream& in)
{
    DocumentStore store;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) {
            continue;
        }
        ++record;
        auto fail = [&](std::string const& why) -> error {
            return error("KB record " + std::to_string(record) + ": " + why);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (nlohmann::json::exception const& e) {
            throw fail(std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("title") || !j["title"].is_string()) {
            throw fail("missing string field 'title'");
        }
        if (!j.contains("paragraphs") || !j["paragraphs"].is_array()) {
            throw fail("missing array field 'paragraphs'");
        }
        std::vector<Paragraph> paragraphs;
        for (auto const& jp : j["paragraphs"]) {
            if (!jp.is_object() || !jp.contains("sentences") || !jp["sentences"].is_array()) {
                throw fail("paragraph without 'sentences' array");
            }
            Paragraph p;
            for (auto const& s : jp["sentences"]) {
                if (!s.is_string()) {
                    throw fail("sentence is not a string");
                }
                p.sentences.push_back(s.get<std::string>());
            }
            if (jp.contains("links")) {
                if (!jp["links"].is_array()) {
                    throw fail("'links' is not an array");
                }
                for (auto const& jl : jp["links"]) {
                    if (!jl.is_object() || !jl.contains("s") || !jl.contains("e") || !jl.contains("t")
                        || !jl["s"].is_number_unsigned() || !jl["e"].is_number_unsigned() || !jl["t"].is_string()) {
                        throw fail("link needs unsigned 's', 'e' and string 't'");
                    }
                    Hyperlink h;
                    h.char_start = jl["s"].get<std::size_t>();
                    h.char_end = jl["e"].get<std::size_t>();
                    h.target_title = jl["t"].get<std::string>();
                    p.hyperlinks.push_back(std::move(h));
                }
            }
            paragraphs.push_back(std::move(p));
        }
        try {
            store.add(j["title"].get<std::string>(), std::move(paragraphs));
        } catch (error const& e) {
            throw fail(e.what());
        }
    }
    return store;
}

inline DocumentStore ingest(std::string_view jsonl)
{
    std::istringstream in{std::string(jsonl)};
    return ingest(in);
}

inline nlohmann::json to_json(Document const& d)
{
    nlohmann::json paragraphs = nlohmann::json::array();
    for (auto const& p : d.paragraphs) {
        nlohmann::json links = nlohmann::json::array();
        for (auto const& l : p.hyperlinks) {
            links.push_back({{"s", l.char_start}, {"e", l.char_end}, {"t", l.target_title}});
        }
        paragraphs.push_back({{"sentences", p.sentences}, {"links", links}});
    }
    return {{"title", d.title}, {"paragraphs", paragraphs}};
}

enum class Field : std::uint8_t { sentence = 0, title = 1 };

inline std::string_view to_string(Field f) noexcept { return f == Field::sentence ? "sentence" : "title"; }

inline Field parse_field(std::string_view s)
{
    if (s == "sentence") {
        return Field::sentence;
    }
    if (s == "title") {
        return Field::title;
    }
    throw error("unknown field '" + std::string(s) + "' (expected sentence or title)");
}

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
    /// When set, replaces the corpus average unit length in scoring.
    std::optional<double> fixed_avg_length;

    friend bool operator==(Bm25Params const&, Bm25Params const&) = default;
};

/// Okapi BM25 with the non-negative idf variant ln(1 + (N - df + 0.5) / (df + 0.5)).
struct Bm25 {
    Bm25Params params;

    double idf(std::size_t df, std::size_t num_units) const noexcept
    {
        auto n = static_cast<double>(num_units);
        auto d = static_cast<double>(df);
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }

    double term_weight(std::uint32_t tf, std::uint32_t unit_len, double avg_len) const noexcept
    {
        auto f = static_cast<double>(tf);
        auto norm = avg_len > 0 ? static_cast<double>(unit_len) / avg_len : 0.0;
        return f * (params.k1 + 1.0) / (f + params.k1 * (1.0 - params.b + params.b * norm));
    }
};

struct Posting {
    std::uint32_t unit = 0;
    std::uint32_t tf = 0;

    friend bool operator==(Posting const&, Posting const&) = default;
};

/// A scored field unit: a sentence (unit id = sentence number within the
/// document) or a title (unit id 0).
struct UnitRef {
    std::uint32_t doc_id = 0;
    std::uint32_t unit_id = 0;

    friend auto operator<=>(UnitRef const&, UnitRef const&) = default;
};

struct FieldIndex {
    std::vector<UnitRef> units;
    std::vector<std::uint32_t> unit_lengths;
    double avg_length = 0.0;
    /// Sorted term dictionary; postings[i] belongs to terms[i].
    std::vector<std::string> terms;
    std::vector<std::vector<Posting>> postings;

    std::optional<std::size_t> find(std::string_view term) const
    {
        auto it = std::lower_bound(terms.begin(), terms.end(), term);
        if (it == terms.end() || *it != term) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - terms.begin());
    }

    std::size_t df(std::string_view term) const
    {
        auto i = find(term);
        return i ? postings[*i].size() : 0;
    }

    friend bool operator==(FieldIndex const&, FieldIndex const&) = default;
};

struct Hit {
    std::uint32_t doc_id = 0;
    std::uint32_t field_unit_id = 0;
    double score = 0.0;
    Field field = Field::sentence;

    friend bool operator==(Hit const&, Hit const&) = default;
};

/// Inverted index over the sentence and title fields of a document store.
class Index {
  public:
    Index() = default;
    Index(Index const& o) : m_params(o.m_params), m_fields(o.m_fields), m_num_docs(o.m_num_docs) {}
    Index& operator=(Index const& o)
    {
        m_params = o.m_params;
        m_fields = o.m_fields;
        m_num_docs = o.m_num_docs;
        return *this;
    }
    Index(Index&& o) noexcept
        : m_params(o.m_params), m_fields(std::move(o.m_fields)), m_num_docs(o.m_num_docs)
    {}
    Index& operator=(Index&& o) noexcept
    {
        m_params = o.m_params;
        m_fields = std::move(o.m_fields);
        m_num_docs = o.m_num_docs;
        return *this;
    }

    Bm25Params const& params() const noexcept { return m_params; }
    void set_params(Bm25Params p) noexcept { m_params = p; }
    FieldIndex const& field(Field f) const noexcept { return m_fields[static_cast<std::size_t>(f)]; }
    std::size_t num_docs() const noexcept { return m_num_docs; }

    double effective_avg_length(Field f) const noexcept
    {
        return m_params.fixed_avg_length ? *m_params.fixed_avg_length : field(f).avg_length;
    }

    /// Number of search() calls made against `f` on this instance.
    std::size_t query_count(Field f) const noexcept
    {
        return m_queries[static_cast<std::size_t>(f)].load(std::memory_order_relaxed);
    }

    /// Top-k field units by BM25; ties broken by ascending (doc_id, unit_id).
    std::vector<Hit> search(Field f, std::string_view query, std::size_t k) const;

    /// Top-k documents where a document scores as its best unit in `f`.
    std::vector<Hit> search_documents(Field f, std::string_view query, std::size_t k) const;

    friend bool operator==(Index const& a, Index const& b)
    {
        return a.m_params == b.m_params && a.m_fields == b.m_fields && a.m_num_docs == b.m_num_docs;
    }

    friend Index build_index(DocumentStore const& store, Bm25Params params, std::size_t workers);
    friend Index decode_index(binary::Reader& r);

  private:
    std::vector<Hit> score_all(Field f, std::string_view query) const;

    Bm25Params m_params;
    std::array<FieldIndex, 2> m_fields;
    std::size_t m_num_docs = 0;
    mutable std::array<std::atomic<std::size_t>, 2> m_queries{};
};

namespace detail {

struct ShardUnits {
    std::vector<UnitRef> units;
    std::vector<std::uint32_t> lengths;
    std::map<std::string, std::vector<Posting>> postings;  // unit ids shard-local
};

inline void add_unit(ShardUnits& shard, UnitRef ref, std::string_view text)
{
    auto terms = text::analyze(text);
    auto local = static_cast<std::uint32_t>(shard.units.size());
    shard.units.push_back(ref);
    shard.lengths.push_back(static_cast<std::uint32_t>(terms.size()));
    std::map<std::string, std::uint32_t> tf;
    for (auto& t : terms) {
        ++tf[std::move(t)];
    }
    for (auto& [term, n] : tf) {
        shard.postings[term].push_back({local, n});
    }
}

inline FieldIndex merge_shards(std::vector<ShardUnits>& shards)
{
    FieldIndex fi;
    std::vector<std::uint32_t> offset(shards.size());
    std::map<std::string, std::vector<Posting>> merged;
    for (std::size_t s = 0; s < shards.size(); ++s) {
        offset[s] = static_cast<std::uint32_t>(fi.units.size());
        fi.units.insert(fi.units.end(), shards[s].units.begin(), shards[s].units.end());
        fi.unit_lengths.insert(fi.unit_lengths.end(), shards[s].lengths.begin(), shards[s].lengths.end());
    }
    for (std::size_t s = 0; s < shards.size(); ++s) {
        for (auto& [term, plist] : shards[s].postings) {
            auto& dst = merged[term];
            for (auto p : plist) {
                dst.push_back({p.unit + offset[s], p.tf});
            }
        }
    }
    fi.terms.reserve(merged.size());
    fi.postings.reserve(merged.size());
    for (auto& [term, plist] : merged) {
        fi.terms.push_back(term);
        fi.postings.push_back(std::move(plist));
    }
    double total = 0;
    for (auto len : fi.unit_lengths) {
        total += len;
    }
    fi.avg_length = fi.units.empty() ? 0.0 : total / static_cast<double>(fi.units.size());
    return fi;
}

}  // namespace detail

/// Shards documents into contiguous ranges and merges in document order, so
/// the result does not depend on `workers`.
inline Index build_index(DocumentStore const& store, Bm25Params params = {}, std::size_t workers = 1)
{
    if (store.empty()) {
        throw error("cannot build an index over an empty document store");
    }
    auto n = store.size();
    auto nshards = std::max<std::size_t>(1, std::min(workers, n));
    std::vector<detail::ShardUnits> sent(nshards), title(nshards);
    parallel_for(nshards, nshards, [&](std::size_t s) {
        auto first = n * s / nshards;
        auto last = n * (s + 1) / nshards;
        for (auto d = first; d < last; ++d) {
            auto const& doc = store.documents()[d];
            detail::add_unit(title[s], {doc.doc_id, 0}, doc.title);
            std::uint32_t unit = 0;
            for (auto const& p : doc.paragraphs) {
                for (auto const& sentence : p.sentences) {
                    detail::add_unit(sent[s], {doc.doc_id, unit++}, sentence);
                }
            }
        }
    });
    Index idx;
    idx.m_params = params;
    idx.m_num_docs = n;
    idx.m_fields[0] = detail::merge_shards(sent);
    idx.m_fields[1] = detail::merge_shards(title);
    return idx;
}

inline std::vector<Hit> Index::score_all(Field f, std::string_view query) const
{
    m_queries[static_cast<std::size_t>(f)].fetch_add(1, std::memory_order_relaxed);
    auto const& fi = field(f);
    auto terms = text::analyze(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    Bm25 bm25{m_params};
    auto avg = effective_avg_length(f);
    std::unordered_map<std::uint32_t, double> acc;
    for (auto const& t : terms) {
        auto ti = fi.find(t);
        if (!ti) {
            continue;
        }
        auto const& plist = fi.postings[*ti];
        auto idf = bm25.idf(plist.size(), fi.units.size());
        for (auto p : plist) {
            acc[p.unit] += idf * bm25.term_weight(p.tf, fi.unit_lengths[p.unit], avg);
        }
    }
    std::vector<Hit> hits;
    hits.reserve(acc.size());
    for (auto [unit, score] : acc) {
        auto ref = fi.units[unit];
        hits.push_back({ref.doc_id, ref.unit_id, score, f});
    }
    return hits;
}

inline bool hit_order(Hit const& a, Hit const& b) noexcept
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return UnitRef{a.doc_id, a.field_unit_id} < UnitRef{b.doc_id, b.field_unit_id};
}

inline std::vector<Hit> top_k(std::vector<Hit> hits, std::size_t k)
{
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_order);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), hit_order);
    }
    return hits;
}

inline std::vector<Hit> Index::search(Field f, std::string_view query, std::size_t k) const
{
    if (k == 0) {
        throw error("k must be positive");
    }
    return top_k(score_all(f, query), k);
}

inline std::vector<Hit> Index::search_documents(Field f, std::string_view query, std::size_t k) const
{
    if (k == 0) {
        throw error("k must be positive");
    }
    std::unordered_map<std::uint32_t, Hit> best;
    for (auto const& h : score_all(f, query)) {
        auto [it, inserted] = best.try_emplace(h.doc_id, h);
        if (!inserted && hit_order(h, it->second)) {
            it->second = h;
        }
    }
    std::vector<Hit> hits;
    hits.reserve(best.size());
    for (auto& [doc, h] : best) {
        hits.push_back(h);
    }
    return top_k(std::move(hits), k);
}

struct ParagraphRef {
    std::string title;
    Paragraph const* paragraph = nullptr;
    std::uint32_t doc_id = 0;
    std::uint32_t paragraph_index = 0;
};

/// Paragraph holding the matched sentence, or the first paragraph for a
/// title hit.
inline ParagraphRef get_paragraph(DocumentStore const& store, Hit const& hit)
{
    if (hit.doc_id >= store.size()) {
        throw error("stale hit: doc_id " + std::to_string(hit.doc_id) + " not in store");
    }
    auto const& doc = store.at(hit.doc_id);
    if (hit.field == Field::title) {
        if (hit.field_unit_id != 0) {
            throw error("stale hit: title unit id must be 0");
        }
        if (doc.paragraphs.empty()) {
            throw error("document '" + doc.title + "' has no paragraphs");
        }
        return {doc.title, &doc.paragraphs.front(), doc.doc_id, 0};
    }
    if (hit.field_unit_id >= store.num_sentences(hit.doc_id)) {
        throw error("stale hit: doc " + std::to_string(hit.doc_id) + " has no sentence "
                    + std::to_string(hit.field_unit_id));
    }
    auto loc = store.locate(hit.doc_id, hit.field_unit_id);
    return {doc.title, &doc.paragraphs[loc.paragraph], doc.doc_id, loc.paragraph};
}

inline constexpr std::string_view index_magic = "RANERIDX1";

inline void encode_field(binary::Writer& w, FieldIndex const& fi)
{
    w.u64(fi.units.size());
    for (std::size_t i = 0; i < fi.units.size(); ++i) {
        w.u32(fi.units[i].doc_id);
        w.u32(fi.units[i].unit_id);
        w.u32(fi.unit_lengths[i]);
    }
    w.f64(fi.avg_length);
    w.u64(fi.terms.size());
    for (std::size_t t = 0; t < fi.terms.size(); ++t) {
        w.str(fi.terms[t]);
        w.u64(fi.postings[t].size());
        for (auto p : fi.postings[t]) {
            w.u32(p.unit);
            w.u32(p.tf);
        }
    }
}

inline FieldIndex decode_field(binary::Reader& r)
{
    FieldIndex fi;
    auto nunits = r.u64();
    if (nunits > r.remaining() / 12) {
        throw format_error("corrupt index: unit count");
    }
    fi.units.resize(nunits);
    fi.unit_lengths.resize(nunits);
    for (std::size_t i = 0; i < nunits; ++i) {
        fi.units[i].doc_id = r.u32();
        fi.units[i].unit_id = r.u32();
        fi.unit_lengths[i] = r.u32();
    }
    fi.avg_length = r.f64();
    auto nterms = r.u64();
    if (nterms > r.remaining() / 12) {
        throw format_error("corrupt index: term count");
    }
    fi.terms.resize(nterms);
    fi.postings.resize(nterms);
    for (std::size_t t = 0; t < nterms; ++t) {
        fi.terms[t] = r.str();
        auto np = r.u64();
        if (np > r.remaining() / 8) {
            throw format_error("corrupt index: posting count");
        }
        fi.postings[t].resize(np);
        for (auto& p : fi.postings[t]) {
            p.unit = r.u32();
            p.tf = r.u32();
            if (p.unit >= nunits) {
                throw format_error("corrupt index: posting unit out of range");
            }
        }
    }
    return fi;
}

inline void encode_store(binary::Writer& w, DocumentStore const& store)
{
    w.u64(store.size());
    for (auto const& d : store.documents()) {
        w.str(d.title);
        w.u32(static_cast<std::uint32_t>(d.paragraphs.size()));
        for (auto const& p : d.paragraphs) {
            w.u32(static_cast<std::uint32_t>(p.sentences.size()));
            for (auto const& s : p.sentences) {
                w.str(s);
            }
            w.u32(static_cast<std::uint32_t>(p.hyperlinks.size()));
            for (auto const& l : p.hyperlinks) {
                w.u64(l.char_start);
                w.u64(l.char_end);
                w.str(l.target_title);
            }
        }
    }
}

inline DocumentStore decode_store(binary::Reader& r)
{
    DocumentStore store;
    auto ndocs = r.u64();
    for (std::uint64_t d = 0; d < ndocs; ++d) {
        auto title = r.str();
        std::vector<Paragraph> paragraphs(r.u32());
        for (auto& p : paragraphs) {
            p.sentences.resize(r.u32());
            for (auto& s : p.sentences) {
                s = r.str();
            }
            p.hyperlinks.resize(r.u32());
            for (auto& l : p.hyperlinks) {
                l.char_start = r.u64();
                l.char_end = r.u64();
                l.target_title = r.str();
            }
        }
        store.add(std::move(title), std::move(paragraphs));
    }
    return store;
}

inline Index decode_index(binary::Reader& r)
{
    Index idx;
    idx.m_params.k1 = r.f64();
    idx.m_params.b = r.f64();
    auto has_fixed = r.u8();
    auto fixed = r.f64();
    if (has_fixed) {
        idx.m_params.fixed_avg_length = fixed;
    }
    idx.m_num_docs = r.u64();
    idx.m_fields[0] = decode_field(r);
    idx.m_fields[1] = decode_field(r);
    return idx;
}

/// Index file: magic, BM25 parameters, both fields, then the document store
/// the index was built from. Integers are little-endian; strings carry a u32
/// byte length.
inline std::string serialize(Index const& idx, DocumentStore const& store)
{
    binary::Writer w;
    w.bytes(index_magic);
    w.f64(idx.params().k1);
    w.f64(idx.params().b);
    w.u8(idx.params().fixed_avg_length ? 1 : 0);
    w.f64(idx.params().fixed_avg_length.value_or(0.0));
    w.u64(idx.num_docs());
    encode_field(w, idx.field(Field::sentence));
    encode_field(w, idx.field(Field::title));
    encode_store(w, store);
    return w.release();
}

struct LoadedIndex {
    Index index;
    DocumentStore store;
};

inline LoadedIndex deserialize(std::string_view bytes)
{
    binary::Reader r(bytes);
    r.expect_magic(index_magic);
    LoadedIndex out;
    out.index = decode_index(r);
    out.store = decode_store(r);
    if (!r.at_end()) {
        throw format_error("trailing bytes after index");
    }
    if (out.store.size() != out.index.num_docs()) {
        throw format_error("index and embedded store disagree on document count");
    }
    return out;
}

inline LoadedIndex load_index(std::string const& path) { return deserialize(binary::read_file(path)); }

inline void save_index(std::string const& path, Index const& idx, DocumentStore const& store)
{
    binary::write_file(path, serialize(idx, store));
}

}  // namespace ra_ner::kb
