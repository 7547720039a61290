#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "augment.hpp"
#include "corpus.hpp"
#include "eval.hpp"
#include "kb.hpp"
#include "parallel.hpp"
#include "retrieval.hpp"
#include "tagger.hpp"

namespace ra_ner::iterate {

using EntitySets = std::vector<std::vector<EntitySpan>>;

struct PipelineConfig {
    retrieval::RetrievalConfig retrieval;
    augment::AugmentConfig augment;
    std::size_t workers = 1;
};

struct IterationResult {
    std::vector<LabelSeq> predictions;
    EntitySets entities;
    /// Contexts used for each example (kept for inspection and tests).
    std::vector<retrieval::RetrievedContext> contexts;
};

/// Builds the augmented inputs for one round: sentence retrieval always,
/// entity retrieval when entities from a previous round are given.
inline std::vector<augment::AugmentedExample> prepare(std::vector<Example> const& dataset, kb::Index const& index,
                                                      kb::DocumentStore const& store,
                                                      EntitySets const* prev_entities, PipelineConfig const& cfg,
                                                      std::vector<retrieval::RetrievedContext>* contexts = nullptr)
{
    if (prev_entities && prev_entities->size() != dataset.size()) {
        throw error("entity seeds cover " + std::to_string(prev_entities->size()) + " examples, dataset has "
                    + std::to_string(dataset.size()));
    }
    std::vector<augment::AugmentedExample> out(dataset.size());
    std::vector<retrieval::RetrievedContext> ctxs(dataset.size());
    parallel_for(dataset.size(), cfg.workers, [&](std::size_t i) {
        auto sent = retrieval::retrieve_by_sentence(dataset[i], index, store, cfg.retrieval);
        retrieval::RetrievedContext ent;
        if (prev_entities) {
            ent = retrieval::retrieve_by_entities((*prev_entities)[i], index, store, cfg.retrieval);
        }
        ctxs[i] = retrieval::combine(sent, ent, cfg.retrieval);
        out[i] = augment::augment_example(dataset[i], ctxs[i], cfg.augment);
    });
    if (contexts) {
        *contexts = std::move(ctxs);
    }
    return out;
}

/// Retrieve, augment, tag, project back to the original words, and collect
/// the predicted spans for the next round.
inline IterationResult run_iteration(std::vector<Example> const& dataset, kb::Index const& index,
                                     kb::DocumentStore const& store, tagger::Tagger& tagger,
                                     EntitySets const* prev_entities, PipelineConfig const& cfg)
{
    IterationResult res;
    auto batch = prepare(dataset, index, store, prev_entities, cfg, &res.contexts);
    auto full = tagger.tag(batch);
    if (full.size() != batch.size()) {
        throw tagger_error(tagger.name() + " returned " + std::to_string(full.size()) + " outputs for "
                               + std::to_string(batch.size()) + " examples",
                           "");
    }
    res.predictions.resize(batch.size());
    res.entities.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        tagger::check_output(batch[i], full[i], tagger.name());
        res.predictions[i] = corpus::repair_bio(augment::strip_augmentation(full[i], batch[i].base_length()));
        res.entities[i] = corpus::extract_spans(dataset[i].tokens, res.predictions[i]);
    }
    return res;
}

/// Fraction of examples whose predicted labels differ.
inline double change_ratio(std::vector<LabelSeq> const& prev, std::vector<LabelSeq> const& cur)
{
    if (cur.empty()) {
        return 0.0;
    }
    std::size_t changed = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        if (i >= prev.size() || prev[i] != cur[i]) {
            ++changed;
        }
    }
    return static_cast<double>(changed) / static_cast<double>(cur.size());
}

struct IterationRecord {
    std::vector<LabelSeq> predictions;
    EntitySets entities;
    /// 1.0 for the first iteration of a non-empty dataset (nothing to compare).
    double change_ratio = 1.0;
    std::optional<eval::EvalReport> report;
};

struct IterationTrace {
    std::vector<IterationRecord> iterations;
    bool saturated = false;
};

struct SaturationConfig {
    std::size_t max_iters = 4;
    double epsilon = 0.001;
};

inline std::vector<Example> with_labels(std::vector<Example> const& dataset, std::vector<LabelSeq> const& labels)
{
    std::vector<Example> out = dataset;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].labels = labels[i];
    }
    return out;
}

/// Iteration 1 uses sentence retrieval only, unless `seeds` supplies entities;
/// each later iteration adds entity retrieval from the previous predictions.
/// Stops once change_ratio < epsilon or after max_iters.
inline IterationTrace run_until_saturation(std::vector<Example> const& dataset, kb::Index const& index,
                                           kb::DocumentStore const& store, tagger::Tagger& tagger,
                                           PipelineConfig const& cfg, SaturationConfig const& sat,
                                           std::vector<Example> const* gold = nullptr,
                                           EntitySets const* seeds = nullptr)
{
    if (sat.max_iters == 0) {
        throw error("max_iters must be at least 1");
    }
    IterationTrace trace;
    EntitySets const* prev = seeds;
    for (std::size_t it = 0; it < sat.max_iters; ++it) {
        auto res = run_iteration(dataset, index, store, tagger, prev, cfg);
        IterationRecord rec;
        rec.change_ratio = it == 0 ? (dataset.empty() ? 0.0 : 1.0)
                                   : change_ratio(trace.iterations.back().predictions, res.predictions);
        rec.predictions = std::move(res.predictions);
        rec.entities = std::move(res.entities);
        if (gold) {
            rec.report = eval::report(*gold, with_labels(dataset, rec.predictions));
        }
        trace.iterations.push_back(std::move(rec));
        prev = &trace.iterations.back().entities;
        if (trace.iterations.back().change_ratio < sat.epsilon) {
            trace.saturated = true;
            break;
        }
    }
    return trace;
}

inline nlohmann::json entities_to_json(std::string const& example_id, std::vector<EntitySpan> const& spans)
{
    nlohmann::json arr = nlohmann::json::array();
    for (auto const& s : spans) {
        arr.push_back({{"start", s.start}, {"end", s.end}, {"type", to_string(s.type)}, {"surface", s.surface}});
    }
    return {{"example_id", example_id}, {"entities", arr}};
}

/// Reads entity JSONL keyed by example id into per-example seeds. Examples
/// absent from the file get an empty set; unknown ids are an error.
inline EntitySets seed_with_external_entities(std::vector<Example> const& dataset, std::istream& in)
{
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        index_of.emplace(dataset[i].id, i);
    }
    EntitySets seeds(dataset.size());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (nlohmann::json::exception const& e) {
            throw parse_error(std::string("malformed entities record: ") + e.what(), line_no);
        }
        if (!j.is_object() || !j.contains("example_id") || !j.contains("entities") || !j["entities"].is_array()) {
            throw parse_error("entities record needs 'example_id' and 'entities'", line_no);
        }
        auto id = j["example_id"].is_string() ? j["example_id"].get<std::string>() : j["example_id"].dump();
        auto it = index_of.find(id);
        if (it == index_of.end()) {
            throw parse_error("unknown example id '" + id + "'", line_no);
        }
        auto const& ex = dataset[it->second];
        std::vector<EntitySpan> spans;
        for (auto const& e : j["entities"]) {
            auto type = parse_entity_type(e.at("type").get<std::string>());
            if (!type) {
                throw parse_error("unknown entity type " + e.at("type").dump(), line_no);
            }
            EntitySpan s;
            s.start = e.at("start").get<std::size_t>();
            s.end = e.at("end").get<std::size_t>();
            s.type = *type;
            if (s.start >= s.end || s.end > ex.tokens.size()) {
                throw parse_error("span out of range for example '" + id + "'", line_no);
            }
            s.surface = e.contains("surface") ? e["surface"].get<std::string>() : join_words(ex.tokens, s.start, s.end);
            spans.push_back(std::move(s));
        }
        seeds[it->second] = std::move(spans);
    }
    return seeds;
}

}  // namespace ra_ner::iterate
