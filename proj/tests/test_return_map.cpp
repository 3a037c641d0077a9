#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hetnet/return_map.hpp"

using namespace hetnet;

namespace {

// T(d) + T(d^nu) + ... summed term by term.
double summed_time(double delta0, double nu, int n, double c_tilde) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += c_tilde * std::pow(nu, k) * std::log(delta0);
    return s;
}

// Solves (1 - a^n)/(1 - a) = target for n by bisection.
double bisect_turns(double a, double target) {
    auto g = [&](double n) { return (1.0 - std::pow(a, n)) / (1.0 - a) - target; };
    double lo = 0.0, hi = 200.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(LocalMap, Examples) {
    ReturnMapParams p;
    p.c = 2.0;
    p.e = 1.0;
    EXPECT_DOUBLE_EQ(local_map(0.5, p, true), 0.25);
    p.c = 1.0;
    EXPECT_DOUBLE_EQ(local_map(0.37, p, true), 0.37);
    p.c = 1.5;
    p.c_hat = 2.0;
    EXPECT_NEAR(local_map(0.5, p), 2.0 * 0.5 * std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(local_map(0.5, p), 0.70710678118654752, 1e-15);
    EXPECT_THROW(local_map(0.0, p), DomainError);
    EXPECT_THROW(local_map(1.5, p), DomainError);
}

TEST(LocalMap, Iteration) {
    auto orbit = iterate_local_map(0.5, 2.0, 3);
    ASSERT_EQ(orbit.values.size(), 4u);
    EXPECT_NEAR(orbit.values.back(), 0.00390625, 1e-17);
    orbit = iterate_local_map(0.3, 1.0, 7);
    for (double v : orbit.values) EXPECT_DOUBLE_EQ(v, 0.3);
    orbit = iterate_local_map(0.9, 1.5, 50);
    for (std::size_t k = 1; k < orbit.values.size(); ++k)
        if (orbit.values[k - 1] > 0.0) { EXPECT_LT(orbit.values[k], orbit.values[k - 1]); }
    EXPECT_EQ(orbit.values.back(), 0.0);
    EXPECT_TRUE(orbit.underflow);
    EXPECT_THROW(iterate_local_map(1.0, 2.0, 3), DomainError);
}

TEST(LocalMap, MatchesPowerTowerBeforeUnderflow) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> d(0.05, 0.95), nu(0.3, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double d0 = d(rng), v = nu(rng);
        const auto orbit = iterate_local_map(d0, v, 12);
        for (std::size_t k = 0; k < orbit.values.size(); ++k) {
            const double expect = std::exp(std::pow(v, static_cast<double>(k)) * std::log(d0));
            if (expect < 1e-300) break;
            EXPECT_NEAR(orbit.values[k], expect, 1e-12 * expect);
        }
    }
}

TEST(LocalMap, ConvergesToZeroIffStable) {
    const std::pair<double, double> rates[] = {{2, 1}, {1.2, 1}, {1, 2}, {1, 1}, {3, 3.5}};
    for (auto [c, e] : rates) {
        const auto orbit = iterate_local_map(0.6, c / e, 200);
        const bool to_zero = orbit.values.back() < 1e-100;
        EXPECT_EQ(to_zero, cycle_stability(c, e) == Stability::stable) << c << "," << e;
    }
}

TEST(TransitionTime, Examples) {
    EXPECT_DOUBLE_EQ(transition_time(std::exp(-1.0), -1.0), 1.0);
    EXPECT_NEAR(transition_time(0.5, -2.0), 2.0 * std::log(2.0), 1e-15);
    EXPECT_NEAR(transition_time(0.5, -2.0), 1.3863, 1e-4);
    const double near_one = transition_time(1.0 - 1e-12, -1.0);
    EXPECT_GT(near_one, 0.0);
    EXPECT_LT(near_one, 1e-11);
    EXPECT_THROW(transition_time(1.0, -1.0), DomainError);
    EXPECT_THROW(transition_time(0.0, -1.0), DomainError);
}

TEST(TotalTime, Examples) {
    EXPECT_DOUBLE_EQ(total_time_n_turns(0.3, 1.7, 1, -1.5), transition_time(0.3, -1.5));
    EXPECT_NEAR(total_time_n_turns(0.5, 2.0, 3, -1.0), 7.0 * std::log(2.0), 1e-14);
    EXPECT_NEAR(total_time_n_turns(0.5, 2.0, 3, -1.0), summed_time(0.5, 2.0, 3, -1.0), 1e-14);
    EXPECT_DOUBLE_EQ(total_time_n_turns(0.4, 1.0, 5, -2.0), 5.0 * -2.0 * std::log(0.4));
    EXPECT_THROW(total_time_n_turns(0.5, 2.0, 0, -1.0), DomainError);
}

TEST(TotalTime, ClosedFormMatchesSummation) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> d(0.01, 0.99), nu(0.2, 2.5), ct(-3.0, -0.1);
    std::uniform_int_distribution<int> n(1, 40);
    for (int trial = 0; trial < 2000; ++trial) {
        const double d0 = d(rng), v = nu(rng), c = ct(rng);
        if (std::abs(v - 1.0) < 1e-3) continue;
        const int k = n(rng);
        const double closed = total_time_n_turns(d0, v, k, c);
        EXPECT_NEAR(closed, summed_time(d0, v, k, c), 1e-12 * std::abs(closed));
    }
}

TEST(TotalTime, IncreasingAndConvexForStableCycles) {
    for (double v : {1.1, 1.5, 2.0, 4.0}) {
        double prev = 0.0, prev_step = 0.0;
        for (int k = 1; k <= 30; ++k) {
            const double t = total_time_n_turns(0.5, v, k, -1.0);
            EXPECT_GT(t, prev);
            if (k > 1) { EXPECT_GT(t - prev, prev_step); }
            prev_step = t - prev;
            prev = t;
        }
    }
}

TEST(TurnsInTime, Examples) {
    EXPECT_NEAR(turns_in_time(7.0 * std::log(2.0), 0.5, 2.0, -1.0), 3.0, 1e-12);
    EXPECT_NEAR(turns_in_time(3.0 * -1.0 * std::log(0.2), 0.2, 1.0, -1.0), 3.0, 1e-12);
    // nu < 1 saturates: the sum is bounded by c_tilde ln(d0) / (1 - nu)
    EXPECT_THROW(turns_in_time(100.0, 0.5, 0.5, -1.0), DomainError);
}

TEST(TurnsInTime, RoundTrip) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(0.05, 0.95), nu(0.5, 2.0), ct(-3.0, -0.1);
    for (int trial = 0; trial < 500; ++trial) {
        const double d0 = d(rng), v = nu(rng), c = ct(rng);
        for (int k = 1; k <= 60; ++k) {
            const double T = total_time_n_turns(d0, v, k, c);
            // T at the saturation bound is not invertible in floating point
            if (!std::isfinite(T) || (v < 1.0 && std::pow(v, k) < 1e-8)) break;
            // inversion amplifies rounding in T by T / (dT/dn), large near saturation
            const double dT = c * std::log(d0) * std::log(v) * std::pow(v, k) / (v - 1.0);
            const double tol = 1e-9 + 1e-14 * std::abs(T / dT);
            EXPECT_NEAR(turns_in_time(T, d0, v, c), k, tol) << "d0=" << d0 << " nu=" << v << " k=" << k;
        }
    }
}

TEST(TurnCount, Examples) {
    EXPECT_DOUBLE_EQ(n_of_m(7.0, 1.5, 1.5), 7.0);
    // oracle: (1 - 2^n)/(1 - 2) = (1 - 4^3)/(1 - 4) = 21
    const double oracle = bisect_turns(2.0, 21.0);
    EXPECT_NEAR(oracle, std::log2(22.0), 1e-12);
    EXPECT_NEAR(n_of_m(3.0, 2.0, 4.0), oracle, 1e-12);
    EXPECT_NEAR(n_of_m(3.0, 2.0, 4.0), 4.4594, 1e-4);
    EXPECT_THROW(n_of_m(3.0, 1.0, 2.0), DomainError);
    try {
        n_of_m(6.0, 0.5, 2.0);
        FAIL() << "expected a domain error";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("critical m"), std::string::npos);
    }
}

TEST(TurnCount, EqualRatesGiveEqualCountsPastCancellation) {
    // for nu < 1 the log argument is nu^m, far below machine epsilon here
    for (double v : {0.2, 0.5, 0.9, 1.3, 4.0})
        for (int m = 1; m <= 50; ++m) EXPECT_NEAR(n_of_m(m, v, v), m, 1e-12 * m) << v << " " << m;
    // argument (nu_A - nu_B)/(1 - nu_B) + r nu_B^m, checked against a long double evaluation
    const long double a = 0.3L, b = 0.25L, m = 40.0L;
    const long double arg = (a - b) / (1.0L - b) + (1.0L - a) / (1.0L - b) * std::pow(b, m);
    EXPECT_NEAR(n_of_m(40.0, 0.3, 0.25), static_cast<double>(std::log(arg) / std::log(a)), 1e-12);
}

TEST(TurnCount, OneTurnBalancesOneTurn) {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> nu(0.2, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = nu(rng), b = nu(rng);
        if (a == 1.0) continue;
        EXPECT_NEAR(n_of_m(1.0, a, b), 1.0, 1e-14) << a << "," << b;
    }
}

TEST(TurnCount, IncreasingInM) {
    for (auto [a, b] : {std::pair{1.2, 1.5}, std::pair{2.0, 4.0}, std::pair{3.0, 1.1}}) {
        double prev = 0.0;
        for (int m = 1; m <= 40; ++m) {
            const double n = n_of_m(m, a, b);
            EXPECT_GT(n, prev);
            prev = n;
        }
    }
}

TEST(Linearity, SymmetricCaseIsExact) {
    const auto r = asymptotic_linearity_report(1.5, 1.5, 1, 20);
    EXPECT_NEAR(r.tail_fit.slope, 1.0, 1e-12);
    EXPECT_LT(r.tail_fit.max_abs_residual, 1e-10);
    EXPECT_DOUBLE_EQ(r.conjectured_slope, 1.0);
}

TEST(Linearity, TailFitResidualAndSlopeScan) {
    const auto r = asymptotic_linearity_report(1.2, 1.5, 10, 60);
    EXPECT_LT(r.tail_fit.max_rel_residual, 1e-3);
    EXPECT_NEAR(r.tail_fit.slope, r.conjectured_slope, 1e-2);
    ASSERT_GE(r.slope_scan.size(), 3u);
    // narrowing the window towards large m moves the slope monotonically
    const double sign = r.slope_scan[1] - r.slope_scan[0];
    for (std::size_t i = 1; i < r.slope_scan.size(); ++i) EXPECT_GT((r.slope_scan[i] - r.slope_scan[i - 1]) * sign, 0.0);
    EXPECT_THROW(asymptotic_linearity_report(0.9, 1.5, 1, 20), DomainError);
}

TEST(Stability, Criterion) {
    EXPECT_EQ(cycle_stability(2, 1), Stability::stable);
    EXPECT_EQ(cycle_stability(1, 2), Stability::unstable);
    EXPECT_EQ(cycle_stability(1, 1), Stability::boundary);
    EXPECT_THROW(cycle_stability(0, 1), DomainError);
    ReturnMapParams p;
    p.delta0 = 2.0;
    EXPECT_THROW(p.validate(), DomainError);
}
