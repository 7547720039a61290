#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "corpus.hpp"
#include "label.hpp"

namespace ra_ner::eval {

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    Counts& operator+=(Counts const& o) noexcept
    {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }

    friend bool operator==(Counts const&, Counts const&) = default;
};

using TypeCounts = std::array<Counts, num_entity_types>;

inline TypeCounts& operator+=(TypeCounts& a, TypeCounts const& b) noexcept
{
    for (std::size_t t = 0; t < num_entity_types; ++t) {
        a[t] += b[t];
    }
    return a;
}

/// Exact (start, end, type) matching between two span lists of one sentence.
inline TypeCounts strict_counts(std::vector<EntitySpan> const& gold, std::vector<EntitySpan> const& pred)
{
    using Key = std::tuple<std::size_t, std::size_t, EntityType>;
    std::set<Key> gold_set, pred_set;
    for (auto const& s : gold) {
        gold_set.emplace(s.start, s.end, s.type);
    }
    for (auto const& s : pred) {
        pred_set.emplace(s.start, s.end, s.type);
    }
    TypeCounts c{};
    for (auto const& k : pred_set) {
        auto t = static_cast<std::size_t>(std::get<2>(k));
        if (gold_set.count(k)) {
            ++c[t].tp;
        } else {
            ++c[t].fp;
        }
    }
    for (auto const& k : gold_set) {
        if (!pred_set.count(k)) {
            ++c[static_cast<std::size_t>(std::get<2>(k))].fn;
        }
    }
    return c;
}

struct TypeMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
    std::size_t predicted = 0;
};

inline TypeMetrics metrics(Counts c) noexcept
{
    TypeMetrics m;
    m.support = c.tp + c.fn;
    m.predicted = c.tp + c.fp;
    m.precision = m.predicted ? static_cast<double>(c.tp) / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.support ? static_cast<double>(c.tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

struct EvalReport {
    TypeCounts counts{};
    std::array<TypeMetrics, num_entity_types> per_type{};
    double macro_f1 = 0.0;
    std::size_t num_examples = 0;
    std::size_t num_tokens = 0;

    TypeMetrics const& of(EntityType t) const noexcept { return per_type[static_cast<std::size_t>(t)]; }
};

/// Micro within each type, macro (plain mean) over the six types.
inline EvalReport finalize(TypeCounts const& counts, std::size_t examples, std::size_t tokens)
{
    EvalReport r;
    r.counts = counts;
    r.num_examples = examples;
    r.num_tokens = tokens;
    double sum = 0.0;
    for (std::size_t t = 0; t < num_entity_types; ++t) {
        r.per_type[t] = metrics(counts[t]);
        sum += r.per_type[t].f1;
    }
    r.macro_f1 = sum / static_cast<double>(num_entity_types);
    return r;
}

/// Augmented-tail X labels are treated as O; ill-formed I- runs are repaired.
inline std::vector<EntitySpan> evaluable_spans(Example const& ex)
{
    auto labels = ex.labels;
    for (auto& l : labels) {
        if (l.is_augmented()) {
            l = Label::outside();
        }
    }
    return corpus::extract_spans(ex.tokens, corpus::repair_bio(std::move(labels)));
}

/// Validates alignment by id and token count; lists every offender.
inline void check_aligned(std::vector<Example> const& gold, std::vector<Example> const& pred)
{
    std::vector<std::string> problems;
    if (gold.size() != pred.size()) {
        problems.push_back("gold has " + std::to_string(gold.size()) + " examples, predictions have "
                           + std::to_string(pred.size()));
    }
    for (std::size_t i = 0; i < std::min(gold.size(), pred.size()); ++i) {
        if (gold[i].id != pred[i].id) {
            problems.push_back("#" + std::to_string(i) + ": id '" + gold[i].id + "' vs '" + pred[i].id + "'");
        } else if (gold[i].tokens.size() != pred[i].tokens.size()) {
            problems.push_back("'" + gold[i].id + "': " + std::to_string(gold[i].tokens.size()) + " vs "
                               + std::to_string(pred[i].tokens.size()) + " tokens");
        }
    }
    if (!problems.empty()) {
        std::string msg = "gold/prediction misalignment:";
        for (std::size_t i = 0; i < problems.size() && i < 20; ++i) {
            msg += "\n  " + problems[i];
        }
        if (problems.size() > 20) {
            msg += "\n  ... " + std::to_string(problems.size() - 20) + " more";
        }
        throw error(msg);
    }
}

inline std::vector<TypeCounts> per_example_counts(std::vector<Example> const& gold, std::vector<Example> const& pred)
{
    check_aligned(gold, pred);
    std::vector<TypeCounts> out(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        out[i] = strict_counts(evaluable_spans(gold[i]), evaluable_spans(pred[i]));
    }
    return out;
}

inline EvalReport report(std::vector<Example> const& gold, std::vector<Example> const& pred)
{
    auto per = per_example_counts(gold, pred);
    TypeCounts total{};
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < per.size(); ++i) {
        total += per[i];
        tokens += gold[i].tokens.size();
    }
    return finalize(total, gold.size(), tokens);
}

struct LengthwiseReport {
    std::size_t max_length = 15;
    /// Keyed by sentence length; only lengths present in the data appear.
    std::map<std::size_t, EvalReport> rows;
    EvalReport all;
};

/// Partitions examples by length; lengths above `max_length` only feed "all".
inline LengthwiseReport lengthwise(std::vector<Example> const& gold, std::vector<Example> const& pred,
                                   std::size_t max_length = 15)
{
    auto per = per_example_counts(gold, pred);
    std::map<std::size_t, std::tuple<TypeCounts, std::size_t, std::size_t>> acc;
    TypeCounts total{};
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < per.size(); ++i) {
        auto len = gold[i].tokens.size();
        total += per[i];
        tokens += len;
        if (len >= 1 && len <= max_length) {
            auto& [c, n, tk] = acc[len];
            c += per[i];
            ++n;
            tk += len;
        }
    }
    LengthwiseReport out;
    out.max_length = max_length;
    for (auto& [len, v] : acc) {
        auto& [c, n, tk] = v;
        out.rows.emplace(len, finalize(c, n, tk));
    }
    out.all = finalize(total, gold.size(), tokens);
    return out;
}

/// Rows/columns 0..5 are the entity types, 6 is O. Row t counts gold spans of
/// type t by the type of the predicted span with identical boundaries (O when
/// none); row O counts predicted spans whose boundaries match no gold span.
struct ConfusionMatrix {
    static constexpr std::size_t size = num_entity_types + 1;
    static constexpr std::size_t outside = num_entity_types;
    std::array<std::array<std::size_t, size>, size> cells{};

    std::size_t row_sum(std::size_t r) const noexcept
    {
        std::size_t s = 0;
        for (auto v : cells[r]) {
            s += v;
        }
        return s;
    }

    double percent(std::size_t r, std::size_t c) const noexcept
    {
        auto s = row_sum(r);
        return s ? 100.0 * static_cast<double>(cells[r][c]) / static_cast<double>(s) : 0.0;
    }
};

inline ConfusionMatrix confusion(std::vector<Example> const& gold, std::vector<Example> const& pred)
{
    check_aligned(gold, pred);
    ConfusionMatrix m;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto gs = evaluable_spans(gold[i]);
        auto ps = evaluable_spans(pred[i]);
        std::map<std::pair<std::size_t, std::size_t>, EntityType> gold_at, pred_at;
        for (auto const& s : gs) {
            gold_at.emplace(std::pair{s.start, s.end}, s.type);
        }
        for (auto const& s : ps) {
            pred_at.emplace(std::pair{s.start, s.end}, s.type);
        }
        for (auto const& [range, t] : gold_at) {
            auto it = pred_at.find(range);
            auto col = it == pred_at.end() ? ConfusionMatrix::outside : static_cast<std::size_t>(it->second);
            ++m.cells[static_cast<std::size_t>(t)][col];
        }
        for (auto const& [range, t] : pred_at) {
            if (!gold_at.count(range)) {
                ++m.cells[ConfusionMatrix::outside][static_cast<std::size_t>(t)];
            }
        }
    }
    return m;
}

inline std::string fmt4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline std::string format_report(EvalReport const& r)
{
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %10s %10s %10s %9s %9s\n", "Type", "Precision", "Recall", "F1", "Support",
                  "Predicted");
    os << line;
    for (auto t : all_entity_types) {
        auto const& m = r.of(t);
        std::snprintf(line, sizeof line, "%-6s %10.4f %10.4f %10.4f %9zu %9zu\n", std::string(to_string(t)).c_str(),
                      m.precision, m.recall, m.f1, m.support, m.predicted);
        os << line;
    }
    std::snprintf(line, sizeof line, "%-6s %32.4f\n", "Macro", r.macro_f1);
    os << line;
    os << "examples " << r.num_examples << ", tokens " << r.num_tokens << '\n';
    return os.str();
}

inline std::string report_csv(EvalReport const& r)
{
    std::string out = "type,precision,recall,f1,support,predicted,tp,fp,fn\n";
    for (auto t : all_entity_types) {
        auto const& m = r.of(t);
        auto const& c = r.counts[static_cast<std::size_t>(t)];
        out += std::string(to_string(t)) + "," + fmt4(m.precision) + "," + fmt4(m.recall) + "," + fmt4(m.f1) + ","
               + std::to_string(m.support) + "," + std::to_string(m.predicted) + "," + std::to_string(c.tp) + ","
               + std::to_string(c.fp) + "," + std::to_string(c.fn) + "\n";
    }
    out += "macro,,," + fmt4(r.macro_f1) + ",,,,,\n";
    return out;
}

/// One row per length plus "all": per-type F1 and macro F1.
inline std::string format_lengthwise(LengthwiseReport const& lw)
{
    std::ostringstream os;
    char line[200];
    std::snprintf(line, sizeof line, "%-7s %8s", "Length", "Examples");
    os << line;
    for (auto t : all_entity_types) {
        std::snprintf(line, sizeof line, " %7s", std::string(to_string(t)).c_str());
        os << line;
    }
    os << "   Macro\n";
    auto row = [&](std::string const& key, EvalReport const& r) {
        std::snprintf(line, sizeof line, "%-7s %8zu", key.c_str(), r.num_examples);
        os << line;
        for (auto t : all_entity_types) {
            std::snprintf(line, sizeof line, " %7.4f", r.of(t).f1);
            os << line;
        }
        std::snprintf(line, sizeof line, " %7.4f\n", r.macro_f1);
        os << line;
    };
    for (auto const& [len, r] : lw.rows) {
        row(std::to_string(len), r);
    }
    row("all", lw.all);
    return os.str();
}

inline std::string lengthwise_csv(LengthwiseReport const& lw)
{
    std::string out = "length,examples,LOC,PER,PROD,GRP,CORP,CW,macro\n";
    auto row = [&](std::string const& key, EvalReport const& r) {
        out += key + "," + std::to_string(r.num_examples);
        for (auto t : all_entity_types) {
            out += "," + fmt4(r.of(t).f1);
        }
        out += "," + fmt4(r.macro_f1) + "\n";
    };
    for (auto const& [len, r] : lw.rows) {
        row(std::to_string(len), r);
    }
    row("all", lw.all);
    return out;
}

inline std::string confusion_header(std::size_t i)
{
    return i == ConfusionMatrix::outside ? "O" : std::string(to_string(static_cast<EntityType>(i)));
}

inline std::string format_confusion(ConfusionMatrix const& m)
{
    std::ostringstream os;
    char cell[64];
    os << "gold\\pred";
    for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
        std::snprintf(cell, sizeof cell, " %14s", confusion_header(c).c_str());
        os << cell;
    }
    os << '\n';
    for (std::size_t r = 0; r < ConfusionMatrix::size; ++r) {
        std::snprintf(cell, sizeof cell, "%-9s", confusion_header(r).c_str());
        os << cell;
        for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
            std::snprintf(cell, sizeof cell, " %6zu (%5.1f%%)", m.cells[r][c], m.percent(r, c));
            os << cell;
        }
        os << '\n';
    }
    return os.str();
}

inline std::string confusion_csv(ConfusionMatrix const& m)
{
    std::string out = "gold";
    for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
        out += "," + confusion_header(c);
    }
    for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
        out += "," + confusion_header(c) + "_pct";
    }
    out += "\n";
    for (std::size_t r = 0; r < ConfusionMatrix::size; ++r) {
        out += confusion_header(r);
        for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
            out += "," + std::to_string(m.cells[r][c]);
        }
        for (std::size_t c = 0; c < ConfusionMatrix::size; ++c) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", m.percent(r, c));
            out += "," + std::string(buf);
        }
        out += "\n";
    }
    return out;
}

}  // namespace ra_ner::eval
