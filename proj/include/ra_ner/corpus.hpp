#pragma once

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "label.hpp"
#include "text.hpp"

namespace ra_ner::corpus {

/// Parses blank-line separated CoNLL blocks. The first whitespace field of a
/// line is the word and the last field is the tag; middle columns are ignored.
/// A `# id <value>` line names the following sentence.
inline std::vector<Example> parse_conll(std::string_view input)
{
    std::vector<Example> out;
    Example cur;
    std::string pending_id;
    std::size_t line_no = 0;

    auto flush = [&] {
        if (!cur.tokens.empty()) {
            cur.id = pending_id.empty() ? std::to_string(out.size()) : pending_id;
            out.push_back(std::move(cur));
        }
        cur = Example{};
        pending_id.clear();
    };

    std::size_t pos = 0;
    while (pos <= input.size()) {
        auto nl = input.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = input.size();
        }
        auto line = input.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        auto fields = text::split_whitespace(line);
        if (fields.empty()) {
            flush();
            if (nl == input.size()) {
                break;
            }
            continue;
        }
        if (fields[0] == "#" && fields.size() >= 2 && fields[1] == "id") {
            if (!cur.tokens.empty()) {
                flush();
            }
            pending_id = fields.size() >= 3 ? fields[2] : std::string{};
        } else {
            if (fields.size() < 2) {
                throw parse_error("missing tag column for word '" + fields[0] + "'", line_no);
            }
            auto label = Label::parse(fields.back());
            if (!label) {
                throw parse_error("unknown tag '" + fields.back() + "'", line_no);
            }
            cur.tokens.push_back(fields.front());
            cur.labels.push_back(*label);
        }
        if (nl == input.size()) {
            break;
        }
    }
    flush();
    return out;
}

/// Writes `# id` lines only for examples whose id differs from the sequential
/// default, so parse(write(x)) == x.
inline std::string write_conll(std::vector<Example> const& examples)
{
    std::string out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        auto const& ex = examples[i];
        if (ex.id != std::to_string(i)) {
            out += "# id " + ex.id + "\n";
        }
        for (std::size_t k = 0; k < ex.tokens.size(); ++k) {
            out += ex.tokens[k];
            out += ' ';
            out += ex.labels[k].str();
            out += '\n';
        }
        out += '\n';
    }
    return out;
}

struct BioViolation {
    enum class Kind { orphan_inside, type_mismatch_inside };

    Kind kind;
    std::size_t index;
    /// Type of the I- label at `index`.
    EntityType actual;
    /// Type of the preceding B/I label (type mismatch only).
    std::optional<EntityType> expected;

    friend bool operator==(BioViolation const&, BioViolation const&) = default;
};

inline std::vector<BioViolation> validate_bio(LabelSeq const& labels)
{
    std::vector<BioViolation> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto l = labels[i];
        if (!l.is_inside()) {
            continue;
        }
        if (i == 0 || !labels[i - 1].has_type()) {
            out.push_back({BioViolation::Kind::orphan_inside, i, l.type(), std::nullopt});
        } else if (labels[i - 1].type() != l.type()) {
            out.push_back({BioViolation::Kind::type_mismatch_inside, i, l.type(), labels[i - 1].type()});
        }
    }
    return out;
}

/// Promotes every orphan or type-mismatched I-t to B-t.
inline LabelSeq repair_bio(LabelSeq labels)
{
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto l = labels[i];
        if (!l.is_inside()) {
            continue;
        }
        bool continues = i > 0 && labels[i - 1].has_type() && labels[i - 1].type() == l.type();
        if (!continues) {
            labels[i] = Label::begin(l.type());
        }
    }
    return labels;
}

inline std::vector<EntitySpan> extract_spans(std::vector<std::string> const& tokens, LabelSeq const& labels)
{
    if (tokens.size() != labels.size()) {
        throw invalid_bio("token/label length mismatch");
    }
    if (auto v = validate_bio(labels); !v.empty()) {
        throw invalid_bio("invalid BIO at position " + std::to_string(v.front().index)
                          + "; call repair_bio before extracting spans");
    }
    std::vector<EntitySpan> spans;
    for (std::size_t i = 0; i < labels.size();) {
        if (!labels[i].is_begin()) {
            ++i;
            continue;
        }
        auto t = labels[i].type();
        std::size_t j = i + 1;
        while (j < labels.size() && labels[j].is_inside() && labels[j].type() == t) {
            ++j;
        }
        spans.push_back({i, j, t, join_words(tokens, i, j)});
        i = j;
    }
    return spans;
}

inline std::vector<EntitySpan> extract_spans(Example const& ex) { return extract_spans(ex.tokens, ex.labels); }

inline LabelSeq spans_to_labels(std::vector<EntitySpan> const& spans, std::size_t length)
{
    LabelSeq labels(length, Label::outside());
    for (auto const& s : spans) {
        if (s.start >= s.end || s.end > length) {
            throw invalid_bio("span [" + std::to_string(s.start) + "," + std::to_string(s.end)
                              + ") out of range for length " + std::to_string(length));
        }
        labels[s.start] = Label::begin(s.type);
        for (auto k = s.start + 1; k < s.end; ++k) {
            labels[k] = Label::inside(s.type);
        }
    }
    return labels;
}

struct DatasetStats {
    std::array<std::size_t, num_labels> label_counts{};
    std::size_t total_tokens = 0;
    std::size_t num_examples = 0;
    std::map<std::size_t, std::size_t> length_histogram;

    std::size_t count(Label l) const noexcept { return label_counts[l.index()]; }

    friend bool operator==(DatasetStats const&, DatasetStats const&) = default;
};

inline DatasetStats dataset_stats(std::vector<Example> const& examples)
{
    DatasetStats st;
    st.num_examples = examples.size();
    for (auto const& ex : examples) {
        for (auto l : ex.labels) {
            ++st.label_counts[l.index()];
        }
        st.total_tokens += ex.labels.size();
        ++st.length_histogram[ex.tokens.size()];
    }
    return st;
}

/// Label rows in the order B-*, I-*, O used by the published entity table.
inline std::vector<Label> table_label_order()
{
    std::vector<Label> order;
    for (auto t : all_entity_types) {
        order.push_back(Label::begin(t));
    }
    for (auto t : all_entity_types) {
        order.push_back(Label::inside(t));
    }
    order.push_back(Label::outside());
    return order;
}

inline std::string format_stats_table(DatasetStats const& st)
{
    std::ostringstream os;
    os << std::left << std::setw(8) << "Tag" << "Count\n";
    for (auto l : table_label_order()) {
        os << std::setw(8) << l.str() << st.count(l) << '\n';
    }
    if (st.count(Label::augmented()) > 0) {
        os << std::setw(8) << "B-X" << st.count(Label::augmented()) << '\n';
    }
    os << std::setw(8) << "Total" << st.total_tokens << "\n\n";
    os << "Examples " << st.num_examples << "\n\n";
    os << std::setw(8) << "Length" << "Examples\n";
    for (auto [len, n] : st.length_histogram) {
        os << std::setw(8) << len << n << '\n';
    }
    return os.str();
}

/// Machine-readable `key<TAB>value` lines.
inline std::string format_stats_kv(DatasetStats const& st)
{
    std::string out;
    auto put = [&](std::string const& k, std::size_t v) { out += k + '\t' + std::to_string(v) + '\n'; };
    put("examples", st.num_examples);
    put("tokens", st.total_tokens);
    for (auto l : table_label_order()) {
        put("label." + l.str(), st.count(l));
    }
    put("label.B-X", st.count(Label::augmented()));
    for (auto [len, n] : st.length_histogram) {
        put("length." + std::to_string(len), n);
    }
    return out;
}

}  // namespace ra_ner::corpus
