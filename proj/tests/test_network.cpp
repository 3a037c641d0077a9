#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace hetnet;
using testing_fixtures::ks_net;

namespace {

HeteroclinicNetwork single_cycle() {
    return HeteroclinicNetwork(2, {{1, {1, 0}, "a"}, {2, {0, 1}, "b"}}, {{1, 1, 2, {0.7, 0.7}}, {2, 2, 1, {0.5, 0.1}}});
}

}  // namespace

TEST(Network, KirkSilberHasDistributionNodeXi2) {
    EXPECT_EQ(ks_net().equilibria().size(), 4u);
    EXPECT_EQ(ks_net().connections().size(), 5u);
    EXPECT_EQ(distribution_nodes(ks_net()), std::vector<int>{2});
}

TEST(Network, SingleCycleHasNoDistributionNode) { EXPECT_TRUE(distribution_nodes(single_cycle()).empty()); }

TEST(Network, PodviginaGraphHasDistributionNodeXi2) {
    const auto spec = load_network_spec(HETNET_DEMOS_DIR "/networks/podvigina.json");
    EXPECT_EQ(distribution_nodes(spec.network), std::vector<int>{2});
    const auto& coding = spec.codings.front();
    EXPECT_TRUE(validate_sequence(spec.network, decode(coding, split_code(coding, "ABBA"))).valid);
}

TEST(Network, HomoclinicLoopIsValid) {
    const HeteroclinicNetwork net(2, {{1, {0, 0}, ""}}, {{1, 1, 1, {1.5, 0}}});
    EXPECT_EQ(net.connection(1).source, net.connection(1).target);
    const auto inv = invariant_set(net, SymbolSequence::periodic({1}));
    EXPECT_EQ(inv.equilibria, std::set<int>{1});
    EXPECT_EQ(inv.connections, std::set<int>{1});
}

TEST(Network, MalformedSpecsAreRejected) {
    const std::vector<Equilibrium> eqs{{1, {1, 0}, ""}, {2, {0, 1}, ""}};
    // dangling endpoint
    EXPECT_THROW(HeteroclinicNetwork(2, eqs, {{1, 1, 9, {0.5, 0.5}}}), SpecError);
    // duplicate ids
    EXPECT_THROW(HeteroclinicNetwork(2, {{1, {1, 0}, ""}, {1, {0, 1}, ""}}, {}), SpecError);
    // dimension mismatch
    EXPECT_THROW(HeteroclinicNetwork(2, {{1, {1, 0, 0}, ""}, {2, {0, 1}, ""}}, {{1, 1, 2, {0.5, 0.5}}}), SpecError);
    // disconnected
    EXPECT_THROW(HeteroclinicNetwork(2, {{1, {1, 0}, ""}, {2, {0, 1}, ""}, {3, {2, 2}, ""}}, {{1, 1, 2, {0.5, 0.5}}}), SpecError);
    // witness on an equilibrium
    EXPECT_THROW(HeteroclinicNetwork(2, eqs, {{1, 1, 2, {1, 0}}}), SpecError);
}

TEST(Network, ValidateSequence) {
    EXPECT_TRUE(validate_sequence(ks_net(), Word{1, 2, 3}).valid);
    const auto bad = validate_sequence(ks_net(), Word{1, 3});
    EXPECT_FALSE(bad.valid);
    EXPECT_EQ(bad.first_violation, 1u);
    EXPECT_TRUE(validate_sequence(ks_net(), Word{}).valid);
    EXPECT_THROW(validate_sequence(ks_net(), Word{1, 7}), DomainError);
    // periodic tails must close up
    EXPECT_FALSE(validate_sequence(ks_net(), SymbolSequence::periodic({1, 2}), 10).valid);
    EXPECT_TRUE(validate_sequence(ks_net(), SymbolSequence::eventually_periodic({1, 2, 3}, {1, 4, 5}), 10).valid);
}

TEST(Network, InvariantSets) {
    auto inv = invariant_set(ks_net(), SymbolSequence::periodic({1, 2, 3}));
    EXPECT_EQ(inv.equilibria, (std::set<int>{1, 2, 3}));
    EXPECT_EQ(inv.connections, (std::set<int>{1, 2, 3}));
    inv = invariant_set(ks_net(), SymbolSequence::periodic({1, 2, 3, 1, 4, 5}));
    EXPECT_EQ(inv.equilibria, (std::set<int>{1, 2, 3, 4}));
    EXPECT_EQ(inv.connections, (std::set<int>{1, 2, 3, 4, 5}));
    // the head does not recur
    inv = invariant_set(ks_net(), SymbolSequence::eventually_periodic({1, 2, 3}, {1, 4, 5}));
    EXPECT_EQ(inv.connections, (std::set<int>{1, 4, 5}));
    // finite words contribute every symbol
    inv = invariant_set(ks_net(), SymbolSequence::finite({2, 3, 1}));
    EXPECT_EQ(inv.connections, (std::set<int>{1, 2, 3}));
}

TEST(Network, InvariantSetShrinksUnderShift) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> coin(0, 1), len(0, 4);
    const Word A{1, 2, 3}, B{1, 4, 5};
    std::set<int> all;
    for (const auto& c : ks_net().connections()) all.insert(c.id);
    for (int trial = 0; trial < 500; ++trial) {
        Word head, tail;
        for (int i = len(rng); i > 0; --i) {
            const Word& b = coin(rng) ? A : B;
            head.insert(head.end(), b.begin(), b.end());
        }
        for (int i = len(rng) + 1; i > 0; --i) {
            const Word& b = coin(rng) ? A : B;
            tail.insert(tail.end(), b.begin(), b.end());
        }
        if (!validate_sequence(ks_net(), head).valid) continue;
        const auto s = SymbolSequence::eventually_periodic(head, tail);
        const auto inv = invariant_set(ks_net(), s);
        for (int c : inv.connections) EXPECT_TRUE(all.count(c));
        for (std::size_t k = 0; k <= s.head().size(); ++k) {
            const auto sub = invariant_set(ks_net(), shift(s, k));
            for (int c : sub.connections) EXPECT_TRUE(inv.connections.count(c));
        }
    }
}

TEST(Coding, KirkSilberExamples) {
    const auto& coding = testing_fixtures::ks_spec().codings.front();
    EXPECT_EQ(recode(coding, Word{1, 2, 3, 1, 4, 5}).joined(), "AB");
    EXPECT_EQ(decode(coding, split_code(coding, "A")), (Word{1, 2, 3}));
    EXPECT_THROW(recode(coding, Word{2, 3, 1}), DomainError);
    const auto partial = recode(coding, Word{1, 2, 3, 1, 4}, true);
    EXPECT_EQ(partial.joined(), "A");
    EXPECT_EQ(partial.remainder, (Word{1, 4}));
    EXPECT_THROW(recode(coding, Word{1, 2, 3, 1, 4}), DomainError);
    const auto tail = recode_periodic_tail(coding, Word{4, 5, 1});
    ASSERT_TRUE(tail);
    EXPECT_EQ(tail->joined(), "B");
}

TEST(Coding, RoundTripOverRandomWords) {
    const auto& coding = testing_fixtures::ks_spec().codings.front();
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> coin(0, 1), len(0, 20);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        for (int i = len(rng); i > 0; --i) text += coin(rng) ? 'A' : 'B';
        const Word w = decode(coding, split_code(coding, text));
        EXPECT_TRUE(validate_sequence(ks_net(), w).valid);
        EXPECT_EQ(recode(coding, w).joined(), text);
    }
}

TEST(Coding, RejectsBadCodings) {
    EXPECT_THROW(CycleCoding(1, {{"A", {1, 2, 3}}, {"B", {2, 4, 5}}}), SpecError);
    EXPECT_THROW(CycleCoding(1, {{"A", {1, 2}}, {"B", {1, 2, 3}}}), SpecError);
    const CycleCoding broken(1, {{"A", {1, 2}}, {"B", {1, 4, 5}}});
    EXPECT_THROW(broken.check_against(ks_net()), SpecError);
}
