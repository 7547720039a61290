#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ra_ner/ra_ner.hpp"

using namespace ra_ner;

namespace {

LabelSeq L(std::initializer_list<char const*> tags)
{
    LabelSeq out;
    for (auto t : tags) {
        out.push_back(*Label::parse(t));
    }
    return out;
}

}  // namespace

TEST(Label, IndexOrderIsFixed)
{
    std::vector<std::string> expected = {"O",     "B-LOC",  "I-LOC", "B-PER",  "I-PER", "B-PROD", "I-PROD",
                                         "B-GRP", "I-GRP",  "B-CORP", "I-CORP", "B-CW", "I-CW",   "B-X"};
    ASSERT_EQ(num_labels, expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(Label::from_index(i).str(), expected[i]);
        EXPECT_EQ(Label::parse(expected[i])->index(), i);
    }
    EXPECT_FALSE(Label::parse("B-FOO").has_value());
    EXPECT_FALSE(Label::parse("I-X").has_value());
}

TEST(Text, AnalyzerStripsPunctuationAndLowercasesAscii)
{
    EXPECT_EQ(text::analyze("Hello, World! दिल्ली।"), (std::vector<std::string>{"hello", "world", "दिल्ली"}));
    EXPECT_EQ(text::analyze("  ... , "), std::vector<std::string>{});
    EXPECT_EQ(text::code_point_length("साहित्य"), 7U);
    EXPECT_EQ(text::split_whitespace("a b\tc"), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Conll, ParsesThreeLineExample)
{
    auto ex = corpus::parse_conll("विकी O\nबर्मी B-CW\nसाहित्य I-CW\n");
    ASSERT_EQ(ex.size(), 1U);
    EXPECT_EQ(ex[0].tokens, (std::vector<std::string>{"विकी", "बर्मी", "साहित्य"}));
    EXPECT_EQ(ex[0].labels, L({"O", "B-CW", "I-CW"}));
    EXPECT_EQ(ex[0].id, "0");
}

TEST(Conll, EmptyInput) { EXPECT_TRUE(corpus::parse_conll("").empty()); }

TEST(Conll, MiddleColumnsAndIdComments)
{
    auto ex = corpus::parse_conll("# id abc\tdomain=hi\nदिल्ली _ _ B-LOC\n\nक _ _ O\n");
    ASSERT_EQ(ex.size(), 2U);
    EXPECT_EQ(ex[0].id, "abc");
    EXPECT_EQ(ex[0].labels, L({"B-LOC"}));
    EXPECT_EQ(ex[1].id, "1");
}

TEST(Conll, ErrorsCarryLineNumbers)
{
    try {
        corpus::parse_conll("a O\nb\n");
        FAIL();
    } catch (parse_error const& e) {
        EXPECT_EQ(e.line(), 2U);
    }
    try {
        corpus::parse_conll("a O\nb B-FOO\n");
        FAIL();
    } catch (parse_error const& e) {
        EXPECT_NE(std::string(e.what()).find("B-FOO"), std::string::npos);
    }
}

TEST(Conll, WriteSmallCases)
{
    EXPECT_EQ(corpus::write_conll({}), "");
    EXPECT_EQ(corpus::write_conll({Example{"0", {"क"}, L({"O"})}}), "क O\n\n");
}

TEST(Conll, RandomRoundTrip)
{
    std::mt19937_64 rng(11);
    for (int round = 0; round < 50; ++round) {
        std::vector<Example> exs;
        auto n = rng() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            auto len = 1 + rng() % 10;
            Example ex;
            ex.id = (rng() % 2) ? std::to_string(i) : "id-" + std::to_string(rng() % 1000) + "-" + std::to_string(i);
            ex.tokens = oracle::distinct_words(rng, len);
            ex.labels = oracle::to_labels(oracle::random_bio(rng, len));
            exs.push_back(ex);
        }
        EXPECT_EQ(corpus::parse_conll(corpus::write_conll(exs)), exs);
    }
}

TEST(Bio, Validate)
{
    EXPECT_TRUE(corpus::validate_bio(L({"O", "B-LOC", "I-LOC"})).empty());
    auto v = corpus::validate_bio(L({"I-LOC"}));
    ASSERT_EQ(v.size(), 1U);
    EXPECT_EQ(v[0].kind, corpus::BioViolation::Kind::orphan_inside);
    EXPECT_EQ(v[0].index, 0U);
    v = corpus::validate_bio(L({"B-PER", "I-LOC"}));
    ASSERT_EQ(v.size(), 1U);
    EXPECT_EQ(v[0].kind, corpus::BioViolation::Kind::type_mismatch_inside);
    EXPECT_EQ(v[0].index, 1U);
}

TEST(Bio, Repair)
{
    EXPECT_EQ(corpus::repair_bio(L({"I-LOC", "I-LOC"})), L({"B-LOC", "I-LOC"}));
    EXPECT_EQ(corpus::repair_bio(L({"B-PER", "I-LOC"})), L({"B-PER", "B-LOC"}));
    auto ok = L({"O", "B-CW", "I-CW", "B-X"});
    EXPECT_EQ(corpus::repair_bio(ok), ok);
}

TEST(Bio, RepairIsIdempotentAndYieldsValid)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        LabelSeq seq;
        auto n = rng() % 12;
        for (std::size_t k = 0; k < n; ++k) {
            seq.push_back(Label::from_index(rng() % num_labels));
        }
        auto fixed = corpus::repair_bio(seq);
        EXPECT_TRUE(corpus::validate_bio(fixed).empty());
        EXPECT_EQ(corpus::repair_bio(fixed), fixed);
    }
}

TEST(Spans, Extract)
{
    std::vector<std::string> w = {"a", "b", "c"};
    auto s = corpus::extract_spans(w, L({"B-CW", "I-CW", "O"}));
    ASSERT_EQ(s.size(), 1U);
    EXPECT_EQ(s[0].start, 0U);
    EXPECT_EQ(s[0].end, 2U);
    EXPECT_EQ(s[0].type, EntityType::CW);
    EXPECT_EQ(s[0].surface, "a b");
    EXPECT_TRUE(corpus::extract_spans(w, L({"O", "O", "O"})).empty());
    auto two = corpus::extract_spans({"a", "b"}, L({"B-LOC", "B-LOC"}));
    ASSERT_EQ(two.size(), 2U);
    EXPECT_EQ(two[1].start, 1U);
    EXPECT_THROW(corpus::extract_spans({"a"}, L({"I-LOC"})), invalid_bio);
}

TEST(Spans, LabelsRoundTrip)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        auto n = 1 + rng() % 12;
        auto labels = oracle::to_labels(oracle::random_bio(rng, n));
        auto words = oracle::distinct_words(rng, n);
        EXPECT_EQ(corpus::spans_to_labels(corpus::extract_spans(words, labels), n), labels);
    }
}

TEST(Stats, EmptyDatasetIsAllZero)
{
    auto st = corpus::dataset_stats({});
    EXPECT_EQ(st.total_tokens, 0U);
    EXPECT_EQ(st.num_examples, 0U);
    EXPECT_TRUE(st.length_histogram.empty());
    for (std::size_t i = 0; i < num_labels; ++i) {
        EXPECT_EQ(st.count(Label::from_index(i)), 0U);
    }
}

TEST(Stats, FixtureMatchesCommittedCounts)
{
    auto data = corpus::parse_conll(binary::read_file(RA_NER_DATA_DIR "/fixture/hi_fixture.conll"));
    EXPECT_EQ(corpus::format_stats_kv(corpus::dataset_stats(data)),
              binary::read_file(RA_NER_DATA_DIR "/fixture/expected_stats.tsv"));
}
