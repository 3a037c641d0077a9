#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"

using namespace hetnet;

using testing_fixtures::random_sequence;

TEST(Shift, DropsLeadingSymbols) {
    const auto s = SymbolSequence::finite({1, 2, 3, 4});
    EXPECT_EQ(shift(s, 1).head(), (Word{2, 3, 4}));
    EXPECT_EQ(shift(s, 0), s);
    EXPECT_EQ(shift(s, 4).head(), Word{});
    EXPECT_THROW(shift(s, 5), DomainError);
}

TEST(Shift, RotatesPeriodicTail) {
    const auto p = SymbolSequence::periodic({1, 2, 3});
    EXPECT_EQ(shift(p, 1), SymbolSequence::periodic({2, 3, 1}));
    EXPECT_EQ(shift(p, 3), p);
    const auto q = SymbolSequence::eventually_periodic({5}, {1, 2, 3});
    EXPECT_EQ(shift(q, 1), p);
    EXPECT_EQ(shift(q, 2), SymbolSequence::periodic({2, 3, 1}));
}

TEST(Shift, NormalisationMergesHeadIntoTail) {
    // 3 (1,2,3)^inf is the same sequence as (3,1,2)^inf
    const auto q = SymbolSequence::eventually_periodic({3}, {1, 2, 3});
    EXPECT_TRUE(q.head().empty());
    EXPECT_EQ(q.tail(), (Word{3, 1, 2}));
    EXPECT_EQ(SymbolSequence::periodic({1, 2, 1, 2}).tail(), (Word{1, 2}));
}

TEST(Shift, SemigroupProperty) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<std::size_t> k(0, 12);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto s = random_sequence(rng);
        const std::size_t a = k(rng), b = k(rng);
        const auto lhs = shift(shift(s, a), b);
        const auto rhs = shift(s, a + b);
        ASSERT_EQ(lhs.prefix(40), rhs.prefix(40)) << to_string(s) << " a=" << a << " b=" << b;
        for (std::size_t i = 0; i < 10; ++i) ASSERT_EQ(shift(s, a).at(i), s.at(a + i));
    }
}

TEST(Periodicity, ExplicitEncodings) {
    auto p = classify_periodicity(SymbolSequence::periodic({1, 2, 3}), 10);
    EXPECT_EQ(p.kind, Periodicity::Kind::periodic);
    EXPECT_EQ(p.period, 3u);
    p = classify_periodicity(SymbolSequence::eventually_periodic({5}, {1, 2, 3}), 10);
    EXPECT_EQ(p.kind, Periodicity::Kind::preperiodic);
    EXPECT_EQ(p.period, 3u);
    EXPECT_EQ(p.preperiod, 1u);
    EXPECT_THROW(classify_periodicity(SymbolSequence::periodic({1}), 1), DomainError);
}

TEST(Periodicity, StaircaseIsAperiodicWithinHorizon) {
    // A B^1 A B^2 A B^3 ... with A = 123, B = 145
    const auto s = SymbolSequence::generated({{1, 2, 3}, {1, 4, 5}, 1, 1});
    EXPECT_EQ(s.prefix(12), (Word{1, 2, 3, 1, 4, 5, 1, 2, 3, 1, 4, 5}));
    EXPECT_EQ(s.prefix(21).back(), 5);
    EXPECT_EQ(classify_periodicity(s, 10000).kind, Periodicity::Kind::aperiodic_within_horizon);
}

TEST(Periodicity, MinimalAndShiftStable) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> sym(1, 3), len(1, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        Word tail, head;
        for (int i = len(rng); i > 0; --i) tail.push_back(sym(rng));
        for (int i = len(rng) - 1; i > 0; --i) head.push_back(sym(rng));
        const auto s = SymbolSequence::eventually_periodic(head, tail);
        const auto p = classify_periodicity(s, 100);
        const std::size_t K = p.period, K0 = p.preperiod;
        EXPECT_EQ(shift(s, K0 + K).prefix(30), shift(s, K0).prefix(30));
        for (std::size_t d = 1; d < K; ++d)
            if (K % d == 0) { EXPECT_NE(shift(s, K0 + d).prefix(30), shift(s, K0).prefix(30)); }
        // the finite-word detector agrees with the exact encoding on a long prefix
        const auto detected = detect_periodic_tail(s.prefix(K0 + 6 * K + 3), 2, 0.5);
        ASSERT_TRUE(detected);
        EXPECT_EQ(detected->period, K);
        EXPECT_EQ(detected->preperiod, K0);
    }
}

TEST(Periodicity, ExtrapolateAndShiftOffset) {
    const Word w{2, 3, 1, 4, 5, 1, 4, 5, 1, 4, 5, 1};
    const auto e = extrapolate(w);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->head(), (Word{2, 3}));
    EXPECT_EQ(e->tail(), (Word{1, 4, 5}));
    const auto q = SymbolSequence::eventually_periodic({1, 2, 3}, {1, 4, 5});
    EXPECT_EQ(shift_offset(q, *e), 1u);
    EXPECT_EQ(shift_offset(*e, q), std::nullopt);
    EXPECT_FALSE(extrapolate(Word{1, 2, 3, 4}));
}

TEST(Words, FactorsSuffixesRotations) {
    EXPECT_TRUE(is_factor(Word{4, 5}, Word{1, 4, 5, 1}));
    EXPECT_FALSE(is_factor(Word{5, 4}, Word{1, 4, 5, 1}));
    EXPECT_TRUE(is_suffix(Word{5, 1}, Word{1, 4, 5, 1}));
    EXPECT_EQ(min_rotation(Word{4, 5, 1}), (Word{1, 4, 5}));
    EXPECT_EQ(to_string(Word{1, 2}), "1,2");
}
