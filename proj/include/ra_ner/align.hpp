#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"
#include "label.hpp"
#include "text.hpp"

namespace ra_ner::align {

/// Piece inventory for greedy longest-match-first subword segmentation. An
/// empty continuation prefix gives sentencepiece-style inventories.
class SubwordVocab {
  public:
    SubwordVocab(std::vector<std::string> pieces, std::string continuation_prefix = "##",
                 std::string unknown_piece = "[UNK]")
        : m_prefix(std::move(continuation_prefix)), m_unknown(std::move(unknown_piece))
    {
        for (auto& p : pieces) {
            if (p.size() > m_max_piece_bytes) {
                m_max_piece_bytes = p.size();
            }
            m_pieces.insert(std::move(p));
        }
        m_pieces.insert(m_unknown);
    }

    bool contains(std::string_view piece) const { return m_pieces.count(std::string(piece)) > 0; }
    std::string const& continuation_prefix() const noexcept { return m_prefix; }
    std::string const& unknown_piece() const noexcept { return m_unknown; }
    std::size_t size() const noexcept { return m_pieces.size(); }

    /// Greedy longest match at code point granularity; the whole word maps to
    /// the unknown piece when some remainder has no matching prefix.
    std::vector<std::string> tokenize_word(std::string_view word) const
    {
        if (word.empty()) {
            return {m_unknown};
        }
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start < word.size()) {
            // candidate ends at code point boundaries
            std::vector<std::size_t> ends;
            for (std::size_t pos = start; pos < word.size();) {
                text::next_code_point(word, pos);
                ends.push_back(pos);
            }
            bool matched = false;
            for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
                auto piece = std::string(start > 0 ? m_prefix : std::string{}) + std::string(word.substr(start, *it - start));
                if (piece.size() > m_max_piece_bytes) {
                    continue;
                }
                if (m_pieces.count(piece)) {
                    out.push_back(std::move(piece));
                    start = *it;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                return {m_unknown};
            }
        }
        return out;
    }

  private:
    std::unordered_set<std::string> m_pieces;
    std::string m_prefix;
    std::string m_unknown;
    std::size_t m_max_piece_bytes = 0;
};

/// One piece per line, UTF-8. Blank lines are ignored.
inline SubwordVocab load_vocab(std::istream& in, std::string continuation_prefix = "##",
                               std::string unknown_piece = "[UNK]")
{
    std::vector<std::string> pieces;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            pieces.push_back(line);
        }
    }
    return SubwordVocab(std::move(pieces), std::move(continuation_prefix), std::move(unknown_piece));
}

struct Alignment {
    /// [first, last) piece range per word.
    std::vector<std::pair<std::size_t, std::size_t>> word_to_pieces;
    std::vector<std::string> pieces;
    LabelSeq piece_labels;

    std::size_t num_pieces() const noexcept { return pieces.size(); }
};

/// Every piece of word i receives labels[i].
inline Alignment expand_labels(std::vector<std::string> const& words, LabelSeq const& labels, SubwordVocab const& vocab)
{
    if (words.size() != labels.size()) {
        throw error("expand_labels: " + std::to_string(words.size()) + " words but " + std::to_string(labels.size())
                    + " labels");
    }
    Alignment a;
    for (std::size_t i = 0; i < words.size(); ++i) {
        auto first = a.pieces.size();
        for (auto& p : vocab.tokenize_word(words[i])) {
            a.pieces.push_back(std::move(p));
            a.piece_labels.push_back(labels[i]);
        }
        a.word_to_pieces.emplace_back(first, a.pieces.size());
    }
    return a;
}

/// Word label = prediction on the word's first piece.
inline LabelSeq collapse_labels(Alignment const& a, LabelSeq const& predicted)
{
    if (predicted.size() != a.num_pieces()) {
        throw error("collapse_labels: expected " + std::to_string(a.num_pieces()) + " piece labels, got "
                    + std::to_string(predicted.size()));
    }
    LabelSeq out;
    out.reserve(a.word_to_pieces.size());
    for (auto [first, last] : a.word_to_pieces) {
        out.push_back(predicted[first]);
    }
    return out;
}

}  // namespace ra_ner::align
