#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ra_ner/ra_ner.hpp"

using namespace ra_ner;

namespace {

Example ex(std::string id, std::vector<std::string> tags)
{
    std::vector<std::string> words;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        words.push_back("w" + std::to_string(i));
    }
    return {std::move(id), words, oracle::to_labels(tags)};
}

}  // namespace

TEST(StrictCounts, Basics)
{
    std::vector<EntitySpan> g = {{0, 2, EntityType::LOC, ""}, {3, 4, EntityType::PER, ""}};
    auto c = eval::strict_counts(g, g);
    EXPECT_EQ(c[0].tp, 1U);
    EXPECT_EQ(c[1].tp, 1U);
    EXPECT_EQ(c[0].fp + c[0].fn + c[1].fp + c[1].fn, 0U);
    auto m = eval::strict_counts({{0, 2, EntityType::LOC, ""}}, {{0, 1, EntityType::LOC, ""}});
    EXPECT_EQ(m[0].tp, 0U);
    EXPECT_EQ(m[0].fp, 1U);
    EXPECT_EQ(m[0].fn, 1U);
}

TEST(StrictCounts, MatchesSetOracle)
{
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        auto n = 1 + rng() % 12;
        auto g = oracle::random_bio(rng, n);
        auto p = oracle::random_bio(rng, n);
        auto words = oracle::distinct_words(rng, n);
        auto c = eval::strict_counts(corpus::extract_spans(words, oracle::to_labels(g)),
                                     corpus::extract_spans(words, oracle::to_labels(p)));
        auto o = oracle::naive_counts({g}, {p});
        for (std::size_t t = 0; t < 6; ++t) {
            EXPECT_EQ(long(c[t].tp), o.tp[t]);
            EXPECT_EQ(long(c[t].fp), o.fp[t]);
            EXPECT_EQ(long(c[t].fn), o.fn[t]);
        }
    }
}

TEST(Report, PerfectAndAllO)
{
    std::vector<Example> gold = {ex("a", {"B-LOC", "O"}), ex("b", {"B-PER", "B-PROD"}), ex("c", {"B-GRP", "I-GRP"}),
                                 ex("d", {"B-CORP", "B-CW"})};
    auto r = eval::report(gold, gold);
    EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
    for (auto t : all_entity_types) {
        EXPECT_DOUBLE_EQ(r.of(t).f1, 1.0);
    }
    auto none = gold;
    for (auto& e : none) {
        e.labels.assign(e.labels.size(), Label::outside());
    }
    auto z = eval::report(gold, none);
    EXPECT_DOUBLE_EQ(z.macro_f1, 0.0);
}

TEST(Report, XCountsAsO)
{
    auto g = ex("a", {"B-LOC", "O"});
    auto p = ex("a", {"B-LOC", "B-X"});
    EXPECT_DOUBLE_EQ(eval::report({g}, {p}).of(EntityType::LOC).f1, 1.0);
}

TEST(Report, Misalignment)
{
    EXPECT_THROW(eval::report({ex("a", {"O"})}, {ex("b", {"O"})}), error);
    EXPECT_THROW(eval::report({ex("a", {"O"})}, {ex("a", {"O", "O"})}), error);
    EXPECT_THROW(eval::report({ex("a", {"O"})}, {}), error);
}

TEST(Report, MatchesNaiveEvaluator)
{
    std::mt19937_64 rng(8);
    for (int round = 0; round < 20; ++round) {
        std::vector<Example> gold, pred;
        std::vector<std::vector<std::string>> gt, pt;
        for (int i = 0; i < 30; ++i) {
            auto n = 1 + rng() % 12;
            gt.push_back(oracle::random_bio(rng, n));
            pt.push_back(oracle::random_bio(rng, n));
            gold.push_back(ex(std::to_string(i), gt.back()));
            pred.push_back(ex(std::to_string(i), pt.back()));
        }
        auto r = eval::report(gold, pred);
        auto o = oracle::naive_counts(gt, pt);
        double macro = 0;
        for (std::size_t t = 0; t < 6; ++t) {
            auto m = oracle::naive_prf(o.tp[t], o.fp[t], o.fn[t]);
            EXPECT_NEAR(r.per_type[t].precision, m.p, 1e-12);
            EXPECT_NEAR(r.per_type[t].recall, m.r, 1e-12);
            EXPECT_NEAR(r.per_type[t].f1, m.f, 1e-12);
            macro += m.f / 6;
        }
        EXPECT_NEAR(r.macro_f1, macro, 1e-12);
    }
}

TEST(Lengthwise, OnlyPresentLengths)
{
    std::vector<Example> gold = {ex("a", {"B-LOC", "O", "O"}), ex("b", {"O", "B-PER", "I-PER"})};
    auto lw = eval::lengthwise(gold, gold, 15);
    ASSERT_EQ(lw.rows.size(), 1U);
    EXPECT_EQ(lw.rows.begin()->first, 3U);
    EXPECT_EQ(lw.all.num_examples, 2U);
    auto txt = eval::format_lengthwise(lw);
    EXPECT_NE(txt.find("all"), std::string::npos);
}

TEST(Confusion, Cells)
{
    std::vector<Example> gold = {ex("a", {"B-GRP", "I-GRP", "B-LOC", "O"})};
    auto m = eval::confusion(gold, gold);
    EXPECT_EQ(m.cells[3][3], 1U);
    EXPECT_EQ(m.cells[0][0], 1U);
    std::vector<Example> pred = {ex("a", {"B-CORP", "I-CORP", "O", "B-CW"})};
    auto c = eval::confusion(gold, pred);
    EXPECT_EQ(c.cells[3][4], 1U);  // GRP -> CORP
    EXPECT_EQ(c.cells[0][6], 1U);  // LOC missed
    EXPECT_EQ(c.cells[6][5], 1U);  // spurious CW
}

TEST(Confusion, RowSumsAreGoldCounts)
{
    std::mt19937_64 rng(12);
    std::vector<Example> gold, pred;
    for (int i = 0; i < 200; ++i) {
        auto n = 1 + rng() % 10;
        gold.push_back(ex(std::to_string(i), oracle::random_bio(rng, n)));
        pred.push_back(ex(std::to_string(i), oracle::random_bio(rng, n)));
    }
    auto m = eval::confusion(gold, pred);
    auto r = eval::report(gold, pred);
    for (std::size_t t = 0; t < 6; ++t) {
        EXPECT_EQ(m.row_sum(t), r.per_type[t].support);
    }
}

TEST(Format, CsvHasHeaderAndMacro)
{
    std::vector<Example> gold = {ex("a", {"B-LOC"})};
    auto csv = eval::report_csv(eval::report(gold, gold));
    EXPECT_EQ(csv.rfind("type,", 0), 0U);
    EXPECT_NE(csv.find("macro,,,0.1667"), std::string::npos);
}
