#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ra_ner/ra_ner.hpp"

using namespace ra_ner;
using namespace ra_ner::llm_io;

TEST(Synonyms, Table)
{
    EXPECT_EQ(normalize_type("PER"), EntityType::PER);
    EXPECT_EQ(normalize_type("person"), EntityType::PER);
    EXPECT_EQ(normalize_type("Person Name"), EntityType::PER);
    EXPECT_EQ(normalize_type("corporation"), EntityType::CORP);
    EXPECT_EQ(normalize_type("Company"), EntityType::CORP);
    EXPECT_EQ(normalize_type("creative work"), EntityType::CW);
    EXPECT_EQ(normalize_type("CW"), EntityType::CW);
    EXPECT_EQ(normalize_type("group"), EntityType::GRP);
    EXPECT_EQ(normalize_type("location"), EntityType::LOC);
    EXPECT_EQ(normalize_type("place"), EntityType::LOC);
    EXPECT_EQ(normalize_type("product"), EntityType::PROD);
    EXPECT_FALSE(normalize_type("banana").has_value());
    for (auto t : all_entity_types) {
        EXPECT_EQ(normalize_type(to_string(t)), t);
    }
}

TEST(Parse, ColonPairs)
{
    auto p = parse_generation("बर्मी साहित्य: CW, विकी: PROD");
    ASSERT_EQ(p.size(), 2U);
    EXPECT_EQ(p[0], (ParsedEntity{"बर्मी साहित्य", EntityType::CW}));
    EXPECT_EQ(p[1], (ParsedEntity{"विकी", EntityType::PROD}));
}

TEST(Parse, ProseGivesNothing)
{
    EXPECT_TRUE(parse_generation("I could not find any entities in this sentence.").empty());
    EXPECT_TRUE(parse_generation("").empty());
}

TEST(Parse, Bullets)
{
    auto p = parse_generation("- दिल्ली (Location)");
    ASSERT_EQ(p.size(), 1U);
    EXPECT_EQ(p[0], (ParsedEntity{"दिल्ली", EntityType::LOC}));
    auto q = parse_generation("* भारत - Place\n* नेहरू - Person");
    ASSERT_EQ(q.size(), 2U);
    EXPECT_EQ(q[1].type, EntityType::PER);
}

TEST(Parse, Braces)
{
    auto p = parse_generation("Answer: {\"दिल्ली\": \"LOC\", \"टाटा\": \"company\"}");
    ASSERT_EQ(p.size(), 2U);
    EXPECT_EQ(p[1].type, EntityType::CORP);
}

TEST(Parse, DuplicatesCollapse)
{
    auto p = parse_generation("क: LOC, क: PER");
    ASSERT_EQ(p.size(), 1U);
}

TEST(ToBio, Cases)
{
    std::vector<std::string> t = {"विकी", "बर्मी", "साहित्य"};
    EXPECT_EQ(entities_to_bio(t, {{"बर्मी साहित्य", EntityType::CW}}), oracle::to_labels({"O", "B-CW", "I-CW"}));
    EXPECT_EQ(entities_to_bio(t, {{"दिल्ली", EntityType::LOC}}), oracle::to_labels({"O", "O", "O"}));
}

TEST(ToBio, RoundTripWithUniqueSurfaces)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        auto n = 1 + rng() % 12;
        auto words = oracle::distinct_words(rng, n);
        auto gold = oracle::to_labels(oracle::random_bio(rng, n));
        auto listing = format_listing(from_spans(corpus::extract_spans(words, gold)));
        EXPECT_EQ(entities_to_bio(words, parse_generation(listing)), gold) << listing;
    }
}

TEST(Prompt, NoContextWhenDisabled)
{
    PromptSpec spec{"sys", "inst", {{"क ख", "क: LOC"}}, 3100, false};
    retrieval::RetrievedContext ctx{{{"T", "[T] ग घ", retrieval::Origin::sentence_retrieval}}};
    auto p = build_fewshot_prompt({"a"}, ctx, spec);
    EXPECT_EQ(p.find("Context:"), std::string::npos);
    EXPECT_NE(p.find("Sentence: क ख\nEntities: क: LOC"), std::string::npos);
    EXPECT_TRUE(p.ends_with("\n\nSentence: a\nEntities:"));
}

TEST(Prompt, OversizedContextIsTruncated)
{
    PromptSpec spec{"sys", "inst", {}, llama2_budget, true};
    std::string big = "[T]";
    for (int i = 0; i < 5000; ++i) {
        big += " w" + std::to_string(i);
    }
    retrieval::RetrievedContext ctx{{{"T", big, retrieval::Origin::sentence_retrieval}}};
    auto p = build_fewshot_prompt({"a", "b"}, ctx, spec);
    EXPECT_EQ(count_words(p), llama2_budget);
    EXPECT_EQ(p.rfind("sys\n\ninst\n\nContext: [T] w0 w1", 0), 0U);
    EXPECT_NE(p.find("Sentence: a b\nEntities:"), std::string::npos);
}

TEST(Prompt, BudgetTooSmall)
{
    PromptSpec spec{"one two three", "four five", {}, 6, true};
    EXPECT_THROW(build_fewshot_prompt({"a", "b", "c"}, {}, spec), error);
}

TEST(Prompt, RandomStaysWithinBudget)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        PromptSpec spec{"s y s", "i n s t r", {}, 40 + rng() % 200, rng() % 2 == 0};
        retrieval::RetrievedContext ctx;
        auto ne = rng() % 4;
        for (std::size_t e = 0; e < ne; ++e) {
            ctx.entries.push_back({"T", "[T] " + text::join(oracle::distinct_words(rng, 1 + rng() % 80), " "),
                                   retrieval::Origin::sentence_retrieval});
        }
        auto p = build_fewshot_prompt(oracle::distinct_words(rng, 1 + rng() % 20), ctx, spec);
        EXPECT_LE(count_words(p), spec.window_budget);
    }
}
