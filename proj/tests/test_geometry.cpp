#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace hetnet;
using testing_fixtures::ks_geometry;
using testing_fixtures::ks_net;

namespace {

Polyline straight(int id, int src, int dst, const State& a, const State& b, int n = 101) {
    Polyline pl;
    pl.connection = id;
    pl.source = src;
    pl.target = dst;
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        pl.points.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])});
    }
    return pl;
}

// Triangle network with both witnesses next to equilibrium 1.
struct Triangle {
    HeteroclinicNetwork net;
    std::shared_ptr<const NetworkGeometry> geom;
};

Triangle triangle(double w) {
    const State e1{0, 0}, e2{1, 0}, e3{0, 1};
    HeteroclinicNetwork net(2, {{1, e1, ""}, {2, e2, ""}, {3, e3, ""}},
                            {{1, 1, 2, {w, 0}}, {2, 3, 1, {0, w}}, {3, 2, 3, {0.5, 0.5}}});
    auto geom = std::make_shared<const NetworkGeometry>(
        2, std::map<int, State>{{1, e1}, {2, e2}, {3, e3}},
        std::vector<Polyline>{straight(1, 1, 2, e1, e2), straight(2, 3, 1, e3, e1), straight(3, 2, 3, e2, e3)});
    return {std::move(net), std::move(geom)};
}

void expect_disjoint_and_contained(const NeighborhoodSet& nb) {
    std::vector<const Ball*> balls;
    for (const auto& [id, b] : nb.U) balls.push_back(&b);
    for (const auto& [id, b] : nb.V) balls.push_back(&b);
    for (std::size_t i = 0; i < balls.size(); ++i) {
        EXPECT_GT(balls[i]->radius, 0.0);
        EXPECT_LT(nb.geometry->distance(balls[i]->center) + balls[i]->radius, nb.delta);
        for (std::size_t j = i + 1; j < balls.size(); ++j) {
            double d2 = 0;
            for (std::size_t k = 0; k < balls[i]->center.size(); ++k)
                d2 += (balls[i]->center[k] - balls[j]->center[k]) * (balls[i]->center[k] - balls[j]->center[k]);
            EXPECT_GT(std::sqrt(d2), balls[i]->radius + balls[j]->radius) << "balls " << i << " and " << j;
        }
    }
}

}  // namespace

TEST(Trace, KirkSilberPolylinesJoinTheirEquilibria) {
    const auto& g = *ks_geometry();
    ASSERT_EQ(g.polylines().size(), 5u);
    for (const auto& c : ks_net().connections()) {
        const auto& pl = g.polyline(c.id);
        EXPECT_LT(distance(pl.points.front(), ks_net().equilibrium(c.source).position), 1e-6);
        EXPECT_LT(distance(pl.points.back(), ks_net().equilibrium(c.target).position), 1e-6);
        EXPECT_LT(pl.distance_to(c.witness), 1e-3);
        EXPECT_LE(pl.max_segment(), 0.003 * 1.05);
        EXPECT_GE(pl.points.size(), 500u);
    }
}

TEST(Distance, PointsOnTheSetAndBesideIt) {
    const auto t = triangle(0.5);
    EXPECT_EQ(t.geom->distance(State{0.3, 0.0}), 0.0);
    EXPECT_EQ(t.geom->distance(State{1.0, 0.0}), 0.0);
    const double delta = 0.05;
    const State p{1.0 + delta / 2, 0.0};
    EXPECT_NEAR(t.geom->distance(p), delta / 2, 1e-12);
    EXPECT_NEAR(distance_to_network(*t.geom, State{0.5, -0.3}), 0.3, 1e-12);
}

TEST(Distance, AgreesWithRefinedVertexOracle) {
    const auto& g = *ks_geometry();
    const auto fine = g.refined(10);
    const double h = g.max_segment_length();
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-0.08, 0.08);
    std::uniform_int_distribution<std::size_t> pick_pl(0, g.polylines().size() - 1);
    for (int trial = 0; trial < 300; ++trial) {
        const auto& pl = g.polylines()[pick_pl(rng)];
        State x = pl.points[std::uniform_int_distribution<std::size_t>(0, pl.points.size() - 1)(rng)];
        for (double& v : x) v += u(rng);
        double oracle = std::numeric_limits<double>::infinity();
        for (const auto& [id, p] : fine.equilibria()) oracle = std::min(oracle, distance(x, p));
        for (const auto& fpl : fine.polylines())
            for (const auto& v : fpl.points) oracle = std::min(oracle, distance(x, v));
        const double d = g.distance(x);
        EXPECT_LE(d, oracle + 1e-15);
        EXPECT_LE(oracle - d, h);
    }
}

TEST(Distance, SegmentIndexIsExactWithinReach) {
    const auto& g = *ks_geometry();
    const SegmentIndex idx(g, 0.1);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto& pl = g.polylines()[static_cast<std::size_t>(trial) % g.polylines().size()];
        State x = pl.points[static_cast<std::size_t>(trial * 7919) % pl.points.size()];
        for (double& v : x) v += u(rng);
        const double exact = g.distance(x);
        if (exact < 0.1) EXPECT_NEAR(idx.distance(x), exact, 1e-14);
        else EXPECT_DOUBLE_EQ(idx.distance(x), 0.1);
    }
}

TEST(Neighborhoods, KirkSilberBallsAreDisjointAndInsideTheTube) {
    const auto nb = make_neighborhoods(ks_net(), ks_geometry(), 0.05);
    EXPECT_EQ(nb.U.size(), 4u);
    EXPECT_EQ(nb.V.size(), 5u);
    EXPECT_EQ(nb.size(), 10u);
    expect_disjoint_and_contained(nb);
    EXPECT_THROW(make_neighborhoods(ks_net(), ks_geometry(), 0.0), DomainError);
}

TEST(Neighborhoods, CollidingBallsAreShrunk) {
    const auto t = triangle(0.06);
    const auto nb = make_neighborhoods(t.net, t.geom, 0.05);
    EXPECT_LT(nb.V.at(1).radius, 0.9 * 0.05);
    EXPECT_LT(nb.U.at(1).radius, 0.9 * 0.05);
    EXPECT_DOUBLE_EQ(nb.U.at(2).radius, 0.9 * 0.05);
    expect_disjoint_and_contained(nb);
}

TEST(Neighborhoods, OverridesAndSelfIntersection) {
    const auto t = triangle(0.5);
    RadiiOverrides r;
    r.v[3] = 0.01;
    const auto nb = make_neighborhoods(t.net, t.geom, 0.05, r);
    EXPECT_DOUBLE_EQ(nb.V.at(3).radius, 0.01);
    r.u[2] = 0.06;
    EXPECT_THROW(make_neighborhoods(t.net, t.geom, 0.05, r), DomainError);

    // a return path running 0.1 above the outgoing one
    const State e1{0, 0}, e2{1, 0};
    HeteroclinicNetwork net(2, {{1, e1, ""}, {2, e2, ""}}, {{1, 1, 2, {0.5, 0}}, {2, 2, 1, {0.5, 0.1}}});
    Polyline back = straight(2, 2, 1, e2, State{0.9, 0.1}, 21);
    for (const auto& pts : {straight(2, 2, 1, State{0.9, 0.1}, State{0.1, 0.1}, 81), straight(2, 2, 1, State{0.1, 0.1}, e1, 21)})
        back.points.insert(back.points.end(), pts.points.begin() + 1, pts.points.end());
    const auto geom = std::make_shared<const NetworkGeometry>(2, std::map<int, State>{{1, e1}, {2, e2}},
                                                              std::vector<Polyline>{straight(1, 1, 2, e1, e2), back});
    EXPECT_NO_THROW(make_neighborhoods(net, geom, 0.04));
    EXPECT_THROW(make_neighborhoods(net, geom, 0.06), DomainError);
}

TEST(Neighborhoods, ProbeSignsMatchGeometry) {
    const auto t = triangle(0.5);
    const auto nb = make_neighborhoods(t.net, t.geom, 0.05);
    std::vector<double> out(nb.size());
    nb.evaluate(State{0.25, 0.01}, out);
    // U1..U3, V1..V3, tube
    for (std::size_t i = 0; i < 6; ++i) EXPECT_GT(out[i], 0.0) << i;
    EXPECT_LE(out[6], 0.0);
    EXPECT_TRUE(nb.in_tube(State{0.25, 0.01}));
    EXPECT_FALSE(nb.in_tube(State{0.25, 0.07}));
    nb.evaluate(State{0.5, 0.5}, out);
    EXPECT_LE(out[5], 0.0);
}
