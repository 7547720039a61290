#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "corpus.hpp"
#include "label.hpp"
#include "llm_io.hpp"
#include "retrieval.hpp"
#include "text.hpp"

namespace ra_ner::augment {

struct AugmentConfig {
    std::string eos_marker = "<EOS>";
    /// Model segment separator placed between context entries ("</s>" for
    /// XLM-R style vocabularies, "[SEP]" for BERT style ones).
    std::string separator_token = "</s>";
    std::size_t token_budget = 512;
};

/// Original words, the end-of-sentence marker, then the retrieved words. Every
/// label from the marker on is X.
struct AugmentedExample {
    Example base;
    std::vector<std::string> aug_tokens;
    std::vector<std::string> full_tokens;
    LabelSeq full_labels;

    std::size_t base_length() const noexcept { return base.tokens.size(); }
    std::size_t eos_position() const noexcept { return base.tokens.size(); }

    friend bool operator==(AugmentedExample const&, AugmentedExample const&) = default;
};

/// Greedy prefix fill: whole entries while they fit, then the leading words of
/// the first entry that does not. The sentence and marker are never cut.
inline AugmentedExample augment_example(Example const& ex, retrieval::RetrievedContext const& ctx,
                                        AugmentConfig const& cfg)
{
    if (cfg.token_budget < ex.tokens.size() + 1) {
        throw error("token budget " + std::to_string(cfg.token_budget) + " cannot hold example '" + ex.id + "' ("
                    + std::to_string(ex.tokens.size()) + " words + marker)");
    }
    AugmentedExample out;
    out.base = ex;
    auto room = cfg.token_budget - ex.tokens.size() - 1;
    for (std::size_t i = 0; i < ctx.entries.size() && room > 0; ++i) {
        auto words = text::split_whitespace(ctx.entries[i].rendered_text);
        if (words.empty()) {
            continue;
        }
        bool need_sep = !out.aug_tokens.empty();
        auto cost = words.size() + (need_sep ? 1 : 0);
        if (cost <= room) {
            if (need_sep) {
                out.aug_tokens.push_back(cfg.separator_token);
            }
            out.aug_tokens.insert(out.aug_tokens.end(), words.begin(), words.end());
            room -= cost;
            continue;
        }
        if (need_sep && room >= 2) {
            out.aug_tokens.push_back(cfg.separator_token);
            --room;
        } else if (need_sep) {
            break;
        }
        out.aug_tokens.insert(out.aug_tokens.end(), words.begin(), words.begin() + static_cast<std::ptrdiff_t>(room));
        room = 0;
    }
    out.full_tokens = ex.tokens;
    out.full_tokens.push_back(cfg.eos_marker);
    out.full_tokens.insert(out.full_tokens.end(), out.aug_tokens.begin(), out.aug_tokens.end());
    out.full_labels = ex.labels;
    out.full_labels.resize(out.full_tokens.size(), Label::augmented());
    return out;
}

/// Projects full-length labels back onto the original words; X inside the
/// original region becomes O.
inline LabelSeq strip_augmentation(LabelSeq const& full_labels, std::size_t base_length)
{
    if (full_labels.size() < base_length) {
        throw error("label sequence of length " + std::to_string(full_labels.size()) + " is shorter than base length "
                    + std::to_string(base_length));
    }
    LabelSeq out(full_labels.begin(), full_labels.begin() + static_cast<std::ptrdiff_t>(base_length));
    for (auto& l : out) {
        if (l.is_augmented()) {
            l = Label::outside();
        }
    }
    return out;
}

inline LabelSeq strip_augmentation(AugmentedExample const& aug) { return strip_augmentation(aug.full_labels, aug.base_length()); }

/// The augmented view as a plain Example (full tokens and labels).
inline Example as_example(AugmentedExample const& aug)
{
    return {aug.base.id, aug.full_tokens, aug.full_labels};
}

inline nlohmann::json sidecar_record(AugmentedExample const& aug)
{
    return {{"example_id", aug.base.id}, {"base_len", aug.base_length()}, {"eos_pos", aug.eos_position()}};
}

/// Rebuilds AugmentedExamples from full-length CoNLL examples plus sidecar
/// records (matched by position and id).
inline std::vector<AugmentedExample> from_materialized(std::vector<Example> const& full,
                                                       std::vector<nlohmann::json> const& sidecar,
                                                       std::string const& eos_marker = "<EOS>")
{
    if (full.size() != sidecar.size()) {
        throw format_error("sidecar has " + std::to_string(sidecar.size()) + " records for " +
                           std::to_string(full.size()) + " examples");
    }
    std::vector<AugmentedExample> out;
    out.reserve(full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        auto const& ex = full[i];
        auto const& rec = sidecar[i];
        auto base_len = rec.at("base_len").get<std::size_t>();
        if (rec.at("example_id").get<std::string>() != ex.id) {
            throw format_error("sidecar record " + std::to_string(i) + " names example '"
                               + rec.at("example_id").get<std::string>() + "', expected '" + ex.id + "'");
        }
        if (base_len >= ex.tokens.size() || ex.tokens[base_len] != eos_marker) {
            throw format_error("example '" + ex.id + "': no end marker at base length " + std::to_string(base_len));
        }
        AugmentedExample aug;
        aug.base.id = ex.id;
        aug.base.tokens.assign(ex.tokens.begin(), ex.tokens.begin() + static_cast<std::ptrdiff_t>(base_len));
        aug.base.labels.assign(ex.labels.begin(), ex.labels.begin() + static_cast<std::ptrdiff_t>(base_len));
        aug.aug_tokens.assign(ex.tokens.begin() + static_cast<std::ptrdiff_t>(base_len) + 1, ex.tokens.end());
        aug.full_tokens = ex.tokens;
        aug.full_labels = ex.labels;
        out.push_back(std::move(aug));
    }
    return out;
}

struct FinetunePrompts {
    std::string system_prompt;
    std::string instruction;
    /// Cap on words in instruction + sentence + context.
    std::size_t max_input_words = 800;
};

struct FinetuneRecord {
    std::string system_prompt;
    std::string instruction;
    std::string sentence;
    std::string ra_context;
    std::string output;

    /// `<s><system> <INST> instruction sentence context </INST> output </s>`
    std::string serialized() const
    {
        std::string s = "<s>" + system_prompt + " <INST> " + instruction + " " + sentence;
        if (!ra_context.empty()) {
            s += " " + ra_context;
        }
        s += " </INST>";
        if (!output.empty()) {
            s += " " + output;
        }
        s += " </s>";
        return s;
    }

    nlohmann::json to_json() const
    {
        return {{"system", system_prompt}, {"instruction", instruction}, {"sentence", sentence},
                {"context", ra_context},   {"output", output},           {"serialized", serialized()}};
    }
};

/// Extracts the output listing from a serialized record.
inline std::string output_section(std::string_view serialized)
{
    auto open = serialized.rfind("</INST>");
    auto close = serialized.rfind("</s>");
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return {};
    }
    return text::trim(serialized.substr(open + 7, close - open - 7));
}

inline FinetuneRecord build_finetune_record(Example const& ex, retrieval::RetrievedContext const& ctx,
                                            FinetunePrompts const& prompts)
{
    FinetuneRecord rec;
    rec.system_prompt = prompts.system_prompt;
    rec.instruction = prompts.instruction;
    rec.sentence = join_words(ex.tokens);
    rec.output = llm_io::format_listing(llm_io::from_spans(corpus::extract_spans(ex)));

    auto used = llm_io::count_words(rec.instruction) + ex.tokens.size();
    std::vector<std::string> words;
    if (used < prompts.max_input_words) {
        auto room = prompts.max_input_words - used;
        for (auto const& e : ctx.entries) {
            for (auto& w : text::split_whitespace(retrieval::cleaned_text(e))) {
                if (words.size() == room) {
                    break;
                }
                words.push_back(std::move(w));
            }
        }
    }
    rec.ra_context = text::join(words, " ");
    return rec;
}

}  // namespace ra_ner::augment
