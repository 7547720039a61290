#pragma once

#include <span>
#include <string>
#include <vector>

#include "augment.hpp"
#include "corpus.hpp"
#include "label.hpp"
#include "retrieval.hpp"

namespace ra_ner::tagger {

/// Labels full-length augmented examples. Output i has exactly
/// batch[i].full_tokens.size() labels and passes validate_bio.
class Tagger {
  public:
    virtual ~Tagger() = default;
    virtual std::vector<LabelSeq> tag(std::span<augment::AugmentedExample const> batch) = 0;
    virtual std::string name() const = 0;
};

/// Link and title markup found in the retrieved tail of an example.
struct ContextMarkup {
    struct Link {
        std::string surface;
        std::string target;
    };
    std::vector<Link> links;
    std::vector<std::string> titles;
};

/// Scans the words after the end marker for `<e:TARGET>SURFACE</e>` and
/// `[TITLE]` markup.
inline ContextMarkup scan_context(augment::AugmentedExample const& aug)
{
    ContextMarkup m;
    auto tail = text::join(aug.aug_tokens, " ");
    std::size_t i = 0;
    while (i < tail.size()) {
        if (tail.compare(i, 3, "<e:") == 0) {
            auto gt = tail.find('>', i + 3);
            auto close = gt == std::string::npos ? std::string::npos : tail.find("</e>", gt + 1);
            if (close != std::string::npos) {
                auto target = text::trim(std::string_view(tail).substr(i + 3, gt - i - 3));
                auto surface = text::trim(std::string_view(tail).substr(gt + 1, close - gt - 1));
                if (!surface.empty()) {
                    m.links.push_back({std::move(surface), std::move(target)});
                }
                i = close + 4;
                continue;
            }
        }
        if (tail[i] == '[') {
            auto close = tail.find(']', i + 1);
            if (close != std::string::npos) {
                auto title = text::trim(std::string_view(tail).substr(i + 1, close - i - 1));
                if (!title.empty() && (m.titles.empty() || m.titles.back() != title)) {
                    m.titles.push_back(std::move(title));
                }
                i = close + 1;
                continue;
            }
        }
        ++i;
    }
    return m;
}

inline std::vector<LabelSeq> base_region_only(std::vector<LabelSeq> const& full,
                                              std::span<augment::AugmentedExample const> batch)
{
    std::vector<LabelSeq> out;
    out.reserve(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        out.push_back(augment::strip_augmentation(full[i], batch[i].base_length()));
    }
    return out;
}

/// Checks a tagger's output against the contract for one example.
inline void check_output(augment::AugmentedExample const& aug, LabelSeq const& labels, std::string const& who)
{
    if (labels.size() != aug.full_tokens.size()) {
        throw tagger_error(who + " returned " + std::to_string(labels.size()) + " labels for "
                               + std::to_string(aug.full_tokens.size()) + " tokens",
                           aug.base.id);
    }
}

}  // namespace ra_ner::tagger
