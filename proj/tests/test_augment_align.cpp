#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ra_ner/ra_ner.hpp"

using namespace ra_ner;

namespace {

retrieval::RetrievedContext random_context(std::mt19937_64& rng)
{
    retrieval::RetrievedContext ctx;
    auto n = rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
        auto words = oracle::distinct_words(rng, 1 + rng() % 60);
        ctx.entries.push_back({"T" + std::to_string(i), "[T" + std::to_string(i) + "] " + text::join(words, " "),
                               retrieval::Origin::sentence_retrieval});
    }
    return ctx;
}

Example random_example(std::mt19937_64& rng, std::size_t max_len = 12)
{
    auto n = 1 + rng() % max_len;
    return {"ex" + std::to_string(rng() % 100000), oracle::distinct_words(rng, n),
            oracle::to_labels(oracle::random_bio(rng, n))};
}

}  // namespace

TEST(Augment, BurmeseLiteratureLayout)
{
    auto store = kb::ingest(binary::read_file(RA_NER_DATA_DIR "/kb_sample.jsonl"));
    auto idx = kb::build_index(store);
    Example ex{"0", {"विकी", "बर्मी", "साहित्य"}, oracle::to_labels({"O", "B-CW", "I-CW"})};
    auto ctx = retrieval::retrieve_by_sentence(ex, idx, store, {});
    auto aug = augment::augment_example(ex, ctx, {});
    auto text = text::join(aug.full_tokens, " ");
    EXPECT_EQ(text.rfind("विकी बर्मी साहित्य <EOS> [बर्मी साहित्य] इस युग को", 0), 0U) << text.substr(0, 200);
}

TEST(Augment, EmptyContext)
{
    Example ex{"0", {"a", "b"}, oracle::to_labels({"B-PER", "I-PER"})};
    auto aug = augment::augment_example(ex, {}, {});
    EXPECT_EQ(aug.full_tokens, (std::vector<std::string>{"a", "b", "<EOS>"}));
    EXPECT_EQ(aug.full_labels, oracle::to_labels({"B-PER", "I-PER", "B-X"}));
}

TEST(Augment, BudgetTooSmall)
{
    Example ex{"0", {"a", "b"}, oracle::to_labels({"O", "O"})};
    augment::AugmentConfig cfg;
    cfg.token_budget = 2;
    EXPECT_THROW(augment::augment_example(ex, {}, cfg), error);
}

TEST(Augment, RandomInvariantsBudget128)
{
    std::mt19937_64 rng(21);
    augment::AugmentConfig cfg;
    cfg.token_budget = 128;
    for (int i = 0; i < 300; ++i) {
        auto ex = random_example(rng);
        auto ctx = random_context(rng);
        auto aug = augment::augment_example(ex, ctx, cfg);
        ASSERT_LE(aug.full_tokens.size(), 128U);
        ASSERT_EQ(aug.full_tokens.size(), aug.full_labels.size());
        EXPECT_EQ(aug.full_tokens[ex.tokens.size()], "<EOS>");
        for (std::size_t k = 0; k < ex.tokens.size(); ++k) {
            EXPECT_EQ(aug.full_tokens[k], ex.tokens[k]);
            EXPECT_EQ(aug.full_labels[k], ex.labels[k]);
        }
        for (std::size_t k = ex.tokens.size(); k < aug.full_labels.size(); ++k) {
            EXPECT_TRUE(aug.full_labels[k].is_augmented());
        }
        // the tail is a prefix of the entries joined by separators
        std::vector<std::string> all;
        for (auto const& e : ctx.entries) {
            if (!all.empty()) {
                all.push_back("</s>");
            }
            for (auto& w : text::split_whitespace(e.rendered_text)) {
                all.push_back(w);
            }
        }
        ASSERT_LE(aug.aug_tokens.size(), all.size());
        EXPECT_TRUE(std::equal(aug.aug_tokens.begin(), aug.aug_tokens.end(), all.begin()));
        if (all.size() + ex.tokens.size() + 1 > 128) {
            EXPECT_GE(aug.full_tokens.size(), 127U);  // filled unless a trailing separator was dropped
        }
        EXPECT_EQ(augment::strip_augmentation(aug), ex.labels);
    }
}

TEST(Strip, Rules)
{
    auto gold = oracle::to_labels({"B-LOC", "O"});
    auto full = gold;
    full.push_back(Label::augmented());
    full.push_back(Label::augmented());
    EXPECT_EQ(augment::strip_augmentation(full, 2), gold);
    EXPECT_EQ(augment::strip_augmentation(oracle::to_labels({"O", "B-X", "B-X"}), 2), oracle::to_labels({"O", "O"}));
    EXPECT_THROW(augment::strip_augmentation(gold, 3), error);
}

TEST(Materialize, SidecarRoundTrip)
{
    std::mt19937_64 rng(8);
    std::vector<augment::AugmentedExample> augs;
    std::vector<Example> full;
    std::vector<nlohmann::json> side;
    for (int i = 0; i < 50; ++i) {
        auto ex = random_example(rng);
        ex.id = "e" + std::to_string(i);
        augs.push_back(augment::augment_example(ex, random_context(rng), {}));
        full.push_back(augment::as_example(augs.back()));
        side.push_back(augment::sidecar_record(augs.back()));
    }
    auto back = augment::from_materialized(corpus::parse_conll(corpus::write_conll(full)), side);
    ASSERT_EQ(back.size(), augs.size());
    for (std::size_t i = 0; i < augs.size(); ++i) {
        EXPECT_EQ(back[i].base, augs[i].base);
        EXPECT_EQ(back[i].aug_tokens, augs[i].aug_tokens);
        EXPECT_EQ(back[i].full_labels, augs[i].full_labels);
    }
    side[3]["base_len"] = 0;
    EXPECT_THROW(augment::from_materialized(full, side), format_error);
}

TEST(Finetune, RecordFormat)
{
    augment::FinetunePrompts prompts{"SYS", "Tag entities.", 800};
    Example none{"0", {"क", "ख"}, oracle::to_labels({"O", "O"})};
    auto r = augment::build_finetune_record(none, {}, prompts);
    EXPECT_EQ(augment::output_section(r.serialized()), "");
    EXPECT_EQ(r.serialized(), "<s>SYS <INST> Tag entities. क ख </INST> </s>");

    Example one{"1", {"विकी", "बर्मी", "साहित्य"}, oracle::to_labels({"O", "B-CW", "I-CW"})};
    r = augment::build_finetune_record(one, {}, prompts);
    EXPECT_NE(r.output.find("बर्मी साहित्य: CW"), std::string::npos);
}

TEST(Finetune, ContextCleanedAndCapped)
{
    retrieval::RetrievedContext ctx{{{"T", "[T] <e:X>क</e> " + std::string(2000, 'a'), retrieval::Origin::sentence_retrieval}}};
    for (int i = 0; i < 900; ++i) {
        ctx.entries[0].rendered_text += " w";
    }
    augment::FinetunePrompts prompts{"S", "one two three", 800};
    Example ex{"0", {"a", "b"}, oracle::to_labels({"O", "O"})};
    auto r = augment::build_finetune_record(ex, ctx, prompts);
    EXPECT_EQ(r.ra_context.find("<e:"), std::string::npos);
    EXPECT_EQ(llm_io::count_words(r.instruction) + ex.tokens.size() + llm_io::count_words(r.ra_context), 800U);
}

TEST(Finetune, RandomOutputsParseBack)
{
    std::mt19937_64 rng(33);
    augment::FinetunePrompts prompts{"S", "I", 800};
    for (int i = 0; i < 100; ++i) {
        auto ex = random_example(rng);
        auto r = augment::build_finetune_record(ex, {}, prompts);
        auto parsed = llm_io::parse_generation(augment::output_section(r.serialized()));
        auto gold = corpus::extract_spans(ex);
        ASSERT_EQ(parsed.size(), gold.size());
        for (std::size_t k = 0; k < gold.size(); ++k) {
            EXPECT_EQ(parsed[k].surface, gold[k].surface);
            EXPECT_EQ(parsed[k].type, gold[k].type);
        }
    }
}

TEST(Align, Tokenize)
{
    align::SubwordVocab v({"साहित्य", "सा", "##हित्य"});
    EXPECT_EQ(v.tokenize_word("साहित्य"), (std::vector<std::string>{"साहित्य"}));
    align::SubwordVocab v2({"सा", "##हित्य"});
    EXPECT_EQ(v2.tokenize_word("साहित्य"), (std::vector<std::string>{"सा", "##हित्य"}));
    EXPECT_EQ(v2.tokenize_word("क"), (std::vector<std::string>{"[UNK]"}));
}

TEST(Align, RandomWordsReassemble)
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        auto alphabet = oracle::distinct_words(rng, 6);
        std::vector<std::string> pieces;
        for (int p = 0; p < 20; ++p) {
            std::string piece;
            auto n = 1 + rng() % 2;
            for (std::size_t k = 0; k < n; ++k) {
                piece += alphabet[rng() % alphabet.size()];
            }
            pieces.push_back(rng() % 2 ? piece : "##" + piece);
        }
        align::SubwordVocab v(pieces);
        std::string word;
        auto n = 1 + rng() % 4;
        for (std::size_t k = 0; k < n; ++k) {
            word += alphabet[rng() % alphabet.size()];
        }
        auto out = v.tokenize_word(word);
        if (out == std::vector<std::string>{"[UNK]"}) {
            continue;
        }
        std::string joined;
        for (std::size_t k = 0; k < out.size(); ++k) {
            joined += k == 0 ? out[k] : out[k].substr(2);
            if (k > 0) {
                EXPECT_EQ(out[k].rfind("##", 0), 0U);
            }
        }
        EXPECT_EQ(joined, word);
    }
}

TEST(Align, ExpandAndCollapse)
{
    align::SubwordVocab v({"सा", "##हित्य", "क"});
    auto a = align::expand_labels({"साहित्य"}, oracle::to_labels({"B-LOC"}), v);
    EXPECT_EQ(a.piece_labels, oracle::to_labels({"B-LOC", "B-LOC"}));
    auto single = align::expand_labels({"क", "क"}, oracle::to_labels({"B-PER", "I-PER"}), v);
    EXPECT_EQ(single.piece_labels, oracle::to_labels({"B-PER", "I-PER"}));
    EXPECT_EQ(align::collapse_labels(a, oracle::to_labels({"B-PER", "O"})), oracle::to_labels({"B-PER"}));
    EXPECT_THROW(align::collapse_labels(a, oracle::to_labels({"O"})), error);
    EXPECT_THROW(align::expand_labels({"क"}, {}, v), error);
}
