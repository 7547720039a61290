#pragma once

// Independent reference implementations and random generators shared by the
// unit tests and the acceptance binary. Nothing here calls the library code
// it is used to check.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ra_ner/ra_ner.hpp"

namespace oracle {

inline std::vector<std::string> const type_names = {"LOC", "PER", "PROD", "GRP", "CORP", "CW"};

/// Random valid BIO tag strings (no X).
inline std::vector<std::string> random_bio(std::mt19937_64& rng, std::size_t n, double entity_rate = 0.4)
{
    std::vector<std::string> tags;
    while (tags.size() < n) {
        if (std::uniform_real_distribution<double>(0, 1)(rng) < entity_rate) {
            auto const& t = type_names[rng() % type_names.size()];
            auto len = std::min<std::size_t>(1 + rng() % 3, n - tags.size());
            tags.push_back("B-" + t);
            for (std::size_t k = 1; k < len; ++k) {
                tags.push_back("I-" + t);
            }
        } else {
            tags.push_back("O");
        }
    }
    return tags;
}

inline ra_ner::LabelSeq to_labels(std::vector<std::string> const& tags)
{
    ra_ner::LabelSeq out;
    for (auto const& t : tags) {
        out.push_back(*ra_ner::Label::parse(t));
    }
    return out;
}

struct NaiveCounts {
    std::array<long, 6> tp{}, fp{}, fn{};
};

/// Every (i, j, type) triple is tested against the raw tag strings: an entity
/// is B-t at i, I-t on (i, j), and no I-t at j.
inline std::set<std::tuple<std::size_t, std::size_t, std::size_t>> naive_spans(std::vector<std::string> const& tags)
{
    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> out;
    auto n = tags.size();
    for (std::size_t t = 0; t < type_names.size(); ++t) {
        auto b = "B-" + type_names[t];
        auto i_tag = "I-" + type_names[t];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j <= n; ++j) {
                bool ok = tags[i] == b;
                for (std::size_t k = i + 1; k < j && ok; ++k) {
                    ok = tags[k] == i_tag;
                }
                ok = ok && (j == n || tags[j] != i_tag);
                if (ok) {
                    out.emplace(i, j, t);
                }
            }
        }
    }
    return out;
}

inline NaiveCounts naive_counts(std::vector<std::vector<std::string>> const& gold,
                                std::vector<std::vector<std::string>> const& pred)
{
    NaiveCounts c;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        auto g = naive_spans(gold[s]);
        auto p = naive_spans(pred[s]);
        for (auto const& x : p) {
            (g.count(x) ? c.tp : c.fp)[std::get<2>(x)]++;
        }
        for (auto const& x : g) {
            if (!p.count(x)) {
                c.fn[std::get<2>(x)]++;
            }
        }
    }
    return c;
}

struct NaivePRF {
    double p = 0, r = 0, f = 0;
};

inline NaivePRF naive_prf(long tp, long fp, long fn)
{
    NaivePRF m;
    if (tp + fp > 0) {
        m.p = double(tp) / double(tp + fp);
    }
    if (tp + fn > 0) {
        m.r = double(tp) / double(tp + fn);
    }
    if (m.p + m.r > 0) {
        m.f = 2 * m.p * m.r / (m.p + m.r);
    }
    return m;
}

// ---- BM25 -----------------------------------------------------------------

struct PlainDoc {
    std::string title;
    std::vector<std::vector<std::string>> paragraphs;
};

/// Lowercase, then trim '.' and ',' from both ends. Enough for the ASCII
/// corpora generated below.
inline std::vector<std::string> plain_terms(std::string const& s)
{
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        while (!cur.empty() && (cur.back() == '.' || cur.back() == ',')) {
            cur.pop_back();
        }
        std::size_t a = 0;
        while (a < cur.size() && (cur[a] == '.' || cur[a] == ',')) {
            ++a;
        }
        cur = cur.substr(a);
        if (!cur.empty()) {
            out.push_back(cur);
        }
        cur.clear();
    };
    for (char ch : s) {
        if (ch == ' ') {
            flush();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    flush();
    return out;
}

struct ScoredUnit {
    std::uint32_t doc = 0;
    std::uint32_t unit = 0;
    double score = 0;
};

/// Scores every unit of the field directly from the raw text.
inline std::vector<ScoredUnit> exhaustive_bm25(std::vector<PlainDoc> const& docs, bool title_field,
                                               std::string const& query, double k1 = 1.2, double b = 0.75)
{
    struct Unit {
        std::uint32_t doc, unit;
        std::vector<std::string> terms;
    };
    std::vector<Unit> units;
    for (std::uint32_t d = 0; d < docs.size(); ++d) {
        if (title_field) {
            units.push_back({d, 0, plain_terms(docs[d].title)});
            continue;
        }
        std::uint32_t u = 0;
        for (auto const& p : docs[d].paragraphs) {
            for (auto const& s : p) {
                units.push_back({d, u++, plain_terms(s)});
            }
        }
    }
    double total = 0;
    for (auto const& u : units) {
        total += double(u.terms.size());
    }
    double avg = total / double(units.size());
    auto q = plain_terms(query);
    std::set<std::string> distinct(q.begin(), q.end());
    double n = double(units.size());
    std::map<std::string, double> df;
    for (auto const& t : distinct) {
        for (auto const& v : units) {
            if (std::find(v.terms.begin(), v.terms.end(), t) != v.terms.end()) {
                df[t] += 1;
            }
        }
    }
    std::vector<ScoredUnit> out;
    for (auto const& u : units) {
        double score = 0;
        bool any = false;
        for (auto const& t : distinct) {
            double tf = double(std::count(u.terms.begin(), u.terms.end(), t));
            if (tf == 0) {
                continue;
            }
            any = true;
            double idf = std::log(1 + (n - df[t] + 0.5) / (df[t] + 0.5));
            score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * double(u.terms.size()) / avg));
        }
        if (any) {
            out.push_back({u.doc, u.unit, score});
        }
    }
    std::sort(out.begin(), out.end(), [](ScoredUnit const& x, ScoredUnit const& y) {
        if (x.score != y.score) {
            return x.score > y.score;
        }
        return std::tie(x.doc, x.unit) < std::tie(y.doc, y.unit);
    });
    return out;
}

/// Synthetic ASCII KB with a skewed vocabulary, occasional capitals and
/// sentence-final periods.
inline std::vector<PlainDoc> synthetic_docs(std::size_t n, std::uint64_t seed, std::size_t vocab = 300)
{
    std::mt19937_64 rng(seed);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < vocab; ++i) {
        std::string w;
        auto len = 3 + rng() % 5;
        for (std::size_t k = 0; k < len; ++k) {
            w += static_cast<char>('a' + rng() % 26);
        }
        words.push_back(w + std::to_string(i));
    }
    auto pick = [&] {
        // roughly Zipfian
        double u = std::uniform_real_distribution<double>(0, 1)(rng);
        auto i = static_cast<std::size_t>(std::pow(u, 2.5) * double(vocab));
        return words[std::min(i, vocab - 1)];
    };
    std::vector<PlainDoc> docs;
    for (std::size_t d = 0; d < n; ++d) {
        PlainDoc doc;
        doc.title = pick() + " " + pick();
        auto np = 1 + rng() % 3;
        for (std::size_t p = 0; p < np; ++p) {
            std::vector<std::string> sents;
            auto ns = 1 + rng() % 4;
            for (std::size_t s = 0; s < ns; ++s) {
                std::string sent;
                auto len = 3 + rng() % 12;
                for (std::size_t k = 0; k < len; ++k) {
                    auto w = pick();
                    if (rng() % 10 == 0) {
                        w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
                    }
                    sent += (k ? " " : "") + w;
                }
                sents.push_back(sent + ".");
            }
            doc.paragraphs.push_back(sents);
        }
        docs.push_back(doc);
    }
    return docs;
}

inline ra_ner::kb::DocumentStore to_store(std::vector<PlainDoc> const& docs)
{
    ra_ner::kb::DocumentStore store;
    for (auto const& d : docs) {
        std::vector<ra_ner::kb::Paragraph> ps;
        for (auto const& p : d.paragraphs) {
            ps.push_back({p, {}});
        }
        store.add(d.title, ps);
    }
    return store;
}

inline std::string random_query(std::vector<PlainDoc> const& docs, std::mt19937_64& rng)
{
    std::string q;
    auto n = 1 + rng() % 4;
    for (std::size_t k = 0; k < n; ++k) {
        auto const& d = docs[rng() % docs.size()];
        auto const& p = d.paragraphs[rng() % d.paragraphs.size()];
        auto terms = plain_terms(p[rng() % p.size()]);
        q += (k ? " " : "") + terms[rng() % terms.size()];
    }
    return q;
}

// ---- misc ---------------------------------------------------------------

/// Distinct Devanagari-ish words.
inline std::vector<std::string> distinct_words(std::mt19937_64& rng, std::size_t n)
{
    static std::vector<std::string> const cons = {"क", "ख", "ग", "च", "ज", "ट", "ड", "त", "द", "न",
                                                  "प", "ब", "म", "य", "र", "ल", "व", "स", "ह"};
    static std::vector<std::string> const vowels = {"", "ा", "ि", "ी", "ु", "े", "ो"};
    std::set<std::string> seen;
    std::vector<std::string> out;
    while (out.size() < n) {
        std::string w;
        auto syl = 1 + rng() % 3;
        for (std::size_t k = 0; k < syl; ++k) {
            w += cons[rng() % cons.size()] + vowels[rng() % vowels.size()];
        }
        if (seen.insert(w).second) {
            out.push_back(w);
        }
    }
    return out;
}

}  // namespace oracle
