#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "parallel.hpp"
#include "tagger.hpp"

namespace ra_ner::tagger {

inline constexpr std::size_t num_classes = num_labels;

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Softmax with max subtraction.
inline std::vector<double> softmax(std::span<double const> logits)
{
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - mx);
        z += p[c];
    }
    for (auto& v : p) {
        v /= z;
    }
    return p;
}

/// Cross-entropy of softmax(logits) against `gold`; grad = softmax - onehot.
inline LossGrad loss_and_grad(std::span<double const> logits, std::size_t gold)
{
    if (logits.empty() || gold >= logits.size()) {
        throw error("gold class " + std::to_string(gold) + " out of range");
    }
    for (auto v : logits) {
        if (!std::isfinite(v)) {
            throw error("non-finite logit");
        }
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (auto v : logits) {
        z += std::exp(v - mx);
    }
    double log_z = mx + std::log(z);
    LossGrad out;
    out.loss = log_z - logits[gold];
    out.grad.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out.grad[c] = std::exp(logits[c] - log_z);
    }
    out.grad[gold] -= 1.0;
    return out;
}

/// Seeded 64-bit FNV-1a with a splitmix64 finalizer.
inline std::uint64_t feature_hash(std::string_view s, std::uint64_t seed) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    h += 0x9E3779B97F4A7C15ULL;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
    return h ^ (h >> 31);
}

struct FeatureConfig {
    std::uint64_t dim = 1ULL << 20;
    std::uint64_t seed = 0;
};

/// Per-token active feature ids.
using FeatureSet = std::vector<std::vector<std::uint32_t>>;

/// Word identity, lowercase form, neighbours at ±1/±2, region, and two context
/// flags for original words: the word occurs inside a retrieved link surface
/// (plus the link target), and the word occurs in a retrieved page title.
inline FeatureSet featurize(augment::AugmentedExample const& aug, FeatureConfig const& fc)
{
    auto const& toks = aug.full_tokens;
    auto n = toks.size();
    auto base = aug.base_length();
    auto markup = scan_context(aug);

    std::set<std::string> link_words, title_words;
    std::map<std::string, std::string> word_target;
    for (auto const& l : markup.links) {
        for (auto& w : text::split_whitespace(l.surface)) {
            word_target.emplace(w, l.target);
            link_words.insert(std::move(w));
        }
    }
    for (auto const& t : markup.titles) {
        for (auto& w : text::split_whitespace(t)) {
            title_words.insert(std::move(w));
        }
    }

    auto at = [&](std::ptrdiff_t i) -> std::string {
        if (i < 0) {
            return "^";
        }
        if (static_cast<std::size_t>(i) >= n) {
            return "$";
        }
        return toks[static_cast<std::size_t>(i)];
    };

    FeatureSet fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> names;
        auto si = static_cast<std::ptrdiff_t>(i);
        bool in_base = i < base;
        names.push_back("bias");
        names.push_back(in_base ? "seg=base" : "seg=aug");
        if (in_base) {
            names.push_back("w=" + toks[i]);
            names.push_back("lw=" + text::ascii_lower(toks[i]));
            names.push_back("w-1=" + at(si - 1));
            names.push_back("w+1=" + at(si + 1));
            names.push_back("w-2=" + at(si - 2));
            names.push_back("w+2=" + at(si + 2));
            if (link_words.count(toks[i])) {
                names.push_back("inent");
                names.push_back("inent_target=" + word_target[toks[i]]);
            }
            if (title_words.count(toks[i])) {
                names.push_back("intitle");
            }
        }
        auto& ids = fs[i];
        for (auto const& name : names) {
            ids.push_back(static_cast<std::uint32_t>(feature_hash(name, fc.seed) % fc.dim));
        }
    }
    return fs;
}

/// Hashed feature id -> 14 class weights, stored densely.
class LinearModel {
  public:
    LinearModel() = default;
    explicit LinearModel(FeatureConfig fc) : m_fc(fc), m_weights(fc.dim * num_classes, 0.0F)
    {
        if (fc.dim == 0 || fc.dim > (1ULL << 32)) {
            throw error("feature dimension must be in [1, 2^32]");
        }
    }

    FeatureConfig const& features() const noexcept { return m_fc; }
    std::span<float const> weights() const noexcept { return m_weights; }
    std::span<float> weights() noexcept { return m_weights; }

    std::vector<double> logits(std::vector<std::uint32_t> const& active) const
    {
        std::vector<double> z(num_classes, 0.0);
        for (auto f : active) {
            auto const* row = &m_weights[static_cast<std::size_t>(f) * num_classes];
            for (std::size_t c = 0; c < num_classes; ++c) {
                z[c] += row[c];
            }
        }
        return z;
    }

    void update(std::vector<std::uint32_t> const& active, std::vector<double> const& grad, double lr)
    {
        for (auto f : active) {
            auto* row = &m_weights[static_cast<std::size_t>(f) * num_classes];
            for (std::size_t c = 0; c < num_classes; ++c) {
                row[c] -= static_cast<float>(lr * grad[c]);
            }
        }
    }

    friend bool operator==(LinearModel const& a, LinearModel const& b)
    {
        return a.m_fc.dim == b.m_fc.dim && a.m_fc.seed == b.m_fc.seed && a.m_weights == b.m_weights;
    }

  private:
    FeatureConfig m_fc;
    std::vector<float> m_weights;
};

struct TrainConfig {
    std::size_t epochs = 20;
    double learning_rate = 0.1;
    std::uint64_t dim = 1ULL << 20;
    std::uint64_t seed = 0;
};

struct TrainResult {
    LinearModel model;
    /// Mean per-token loss observed during each epoch's pass.
    std::vector<double> epoch_loss;
};

/// Plain SGD over per-token cross entropy, examples visited in a seeded
/// Fisher-Yates order each epoch. Single-threaded and deterministic.
inline TrainResult train_linear(std::vector<augment::AugmentedExample> const& train, TrainConfig const& cfg)
{
    if (train.empty()) {
        throw error("cannot train on an empty training set");
    }
    FeatureConfig fc{cfg.dim, cfg.seed};
    TrainResult out{LinearModel(fc), {}};
    std::vector<FeatureSet> feats;
    feats.reserve(train.size());
    for (auto const& ex : train) {
        feats.push_back(featurize(ex, fc));
    }
    std::vector<std::size_t> order(train.size());
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        for (std::size_t i = order.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        double total = 0.0;
        std::size_t tokens = 0;
        for (auto idx : order) {
            auto const& ex = train[idx];
            for (std::size_t t = 0; t < ex.full_tokens.size(); ++t) {
                auto z = out.model.logits(feats[idx][t]);
                auto lg = loss_and_grad(z, ex.full_labels[t].index());
                total += lg.loss;
                ++tokens;
                out.model.update(feats[idx][t], lg.grad, cfg.learning_rate);
            }
        }
        out.epoch_loss.push_back(tokens ? total / static_cast<double>(tokens) : 0.0);
    }
    return out;
}

/// Argmax per token (lowest class index wins ties), then BIO repair.
inline LabelSeq predict_linear(LinearModel const& model, augment::AugmentedExample const& aug)
{
    auto fs = featurize(aug, model.features());
    LabelSeq out;
    out.reserve(fs.size());
    for (auto const& active : fs) {
        auto z = model.logits(active);
        std::size_t best = 0;
        for (std::size_t c = 1; c < num_classes; ++c) {
            if (z[c] > z[best]) {
                best = c;
            }
        }
        out.push_back(Label::from_index(best));
    }
    return corpus::repair_bio(std::move(out));
}

inline constexpr std::string_view linear_magic = "RANERLIN1";

/// Magic, D, seed, C, the C class names in index order, then D*C float32
/// weights row-major by feature id. Little-endian.
inline std::string serialize(LinearModel const& m)
{
    binary::Writer w;
    w.bytes(linear_magic);
    w.u64(m.features().dim);
    w.u64(m.features().seed);
    w.u32(static_cast<std::uint32_t>(num_classes));
    for (std::size_t c = 0; c < num_classes; ++c) {
        w.str(Label::from_index(c).str());
    }
    for (auto v : m.weights()) {
        w.f32(v);
    }
    return w.release();
}

inline LinearModel deserialize_linear(std::string_view bytes)
{
    binary::Reader r(bytes);
    r.expect_magic(linear_magic);
    FeatureConfig fc;
    fc.dim = r.u64();
    fc.seed = r.u64();
    auto classes = r.u32();
    if (classes != num_classes) {
        throw format_error("model has " + std::to_string(classes) + " classes, expected 14");
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (r.str() != Label::from_index(c).str()) {
            throw format_error("model class order differs from O, B-LOC, I-LOC, ..., B-X");
        }
    }
    if (fc.dim == 0 || r.remaining() != fc.dim * num_classes * 4) {
        throw format_error("model weight block has the wrong size");
    }
    LinearModel m(fc);
    for (auto& v : m.weights()) {
        v = r.f32();
        if (!std::isfinite(v)) {
            throw format_error("non-finite weight in model");
        }
    }
    return m;
}

class LinearTagger final : public Tagger {
  public:
    explicit LinearTagger(LinearModel model, std::size_t workers = 1) : m_model(std::move(model)), m_workers(workers) {}

    std::vector<LabelSeq> tag(std::span<augment::AugmentedExample const> batch) override
    {
        std::vector<LabelSeq> out(batch.size());
        parallel_for(batch.size(), m_workers, [&](std::size_t i) { out[i] = predict_linear(m_model, batch[i]); });
        return out;
    }

    std::string name() const override { return "linear"; }

  private:
    LinearModel m_model;
    std::size_t m_workers;
};

}  // namespace ra_ner::tagger
