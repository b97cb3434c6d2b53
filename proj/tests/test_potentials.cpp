#include <gtest/gtest.h>

#include <mbvp/conditions.hpp>
#include <mbvp/capacity.hpp>
#include <mbvp/reduced.hpp>

#include "oracles.hpp"

using namespace mbvp;

TEST(Potentials, Evaluate) {
    BallDomain d(2, 1.0);
    EXPECT_DOUBLE_EQ(evaluate(bounded(3.0), d, polar_point(0.4, 1.0)), 3.0);
    EXPECT_DOUBLE_EQ(evaluate(bounded(3.0), d, polar_point(1.0, 1.0)), 3.0);
    EXPECT_NEAR(evaluate(distance_power(1.0, 2.0), d, polar_point(0.5, 0.3)), 4.0, 1e-12);
    EXPECT_THROW(evaluate(distance_power(1.0, 2.0), d, polar_point(1.0, 0.3)), DomainError);
    auto cone = cone_singular(0.0, 0.5, 1.0, 2.5);
    EXPECT_EQ(evaluate(cone, d, polar_point(0.99, 1.0)), 0.0);  // far from the vertex, thin layer
    EXPECT_GT(evaluate(cone, d, polar_point(0.9, 0.0)), 0.0);   // on the axis
    EXPECT_THROW(cone_singular(0.0, 1.5, 1.0, 2.0), ConfigError);
}

TEST(Potentials, Truncate) {
    BallDomain d(2, 1.0);
    auto b = truncate(bounded(3.0), 10.0);
    EXPECT_EQ(b.kind, PotentialKind::Bounded);
    EXPECT_DOUBLE_EQ(b.c, 3.0);
    EXPECT_DOUBLE_EQ(evaluate(truncate(distance_power(1.0, 2.0), 16.0), d, polar_point(0.9, 0.0)), 16.0);
    EXPECT_DOUBLE_EQ(evaluate(truncate(distance_power(1.0, 2.0), 16.0), d, polar_point(1.0, 0.0)), 16.0);
    EXPECT_THROW(truncate(bounded(1.0), 0.0), DomainError);
}

TEST(Potentials, TruncationLattice) {
    BallDomain d(2, 1.0);
    auto V = distance_power(1.0, 2.5);
    for (double k : {1.0, 7.0, 100.0})
        for (double k2 : {2.0, 50.0})
            for (double r : {0.0, 0.5, 0.9, 0.999}) {
                Point x = polar_point(r, 0.2);
                EXPECT_DOUBLE_EQ(evaluate(truncate(truncate(V, k), k2), d, x), evaluate(truncate(V, std::min(k, k2)), d, x));
            }
}

TEST(Potentials, TruncationIncreasesToV) {
    auto g = make_grid(2, 1.0, 32, 16);
    auto V = distance_power(2.0, 2.0);
    auto full = sample_on_grid(V, *g);
    std::vector<double> prev(g->num_nodes(), 0.0);
    for (double k : geometric_schedule(14, 4.0)) {
        auto vk = sample_on_grid(truncate(V, k), *g);
        for (int n = 0; n < g->num_nodes(); ++n) {
            EXPECT_GE(vk[n], prev[n]);
            EXPECT_LE(vk[n], full[n]);
        }
        prev = vk;
    }
    EXPECT_EQ(prev, full);  // 4^13 exceeds 2 / delta_min^2 on this grid
}

TEST(Potentials, ScaledAndSampled) {
    auto g = make_grid(2, 1.0, 16, 16);
    BallDomain d(2, 1.0);
    EXPECT_NEAR(evaluate(scaled(distance_power(1.0, 1.5), 2.0), d, polar_point(0.75, 0)), 2.0 * std::pow(0.25, -1.5), 1e-12);
    auto f = sample(g, [](Point x) { return 1.0 + x.x * x.x; });
    auto V = grid_sampled(f);
    for (int n = 0; n < g->num_nodes(); n += 7) EXPECT_NEAR(evaluate(V, d, g->coord(n)), f[n], 1e-12);
    Field neg(g, -1.0);
    EXPECT_THROW(grid_sampled(neg), ConfigError);
}

TEST(Potentials, RadialProfileInterpolatesLogLog) {
    auto V = radial_profile({0.01, 0.1, 1.0}, {1e4, 1e2, 1.0});  // delta^-2
    EXPECT_NEAR(V.profile(0.05), 400.0, 1e-9);
    EXPECT_NEAR(V.profile(0.001), 1e6, 1e-6);
}

TEST(Conditions, CheckT1) {
    auto a = check_t1([](double t) { return std::pow(t, -1.5); }, 1.0);
    EXPECT_EQ(a.classification, Classification::convergent);
    EXPECT_NEAR(a.value, 2.0, 1e-3);  // int_0^1 t^-0.5
    EXPECT_EQ(check_t1([](double t) { return std::pow(t, -2.0); }, 1.0).classification, Classification::divergent_log);
    auto c = check_t1([](double) { return 3.0; }, 1.0);
    EXPECT_EQ(c.classification, Classification::convergent);
    EXPECT_NEAR(c.value, 1.5, 1e-10);
    EXPECT_THROW(check_t1(cone_singular(0, 0.5, 1, 2), 1.0), DomainError);
}

TEST(Conditions, I3BoundedAgreesWithDirectQuadrature) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    auto v = condition_I3(bounded(1.0), *g, e, 0.0);
    ASSERT_TRUE(v.verdict.convergent());
    // int over the disk of phi^2 (|x-y|^-2 - 1/4) / 2, y = (1, 0), by nested Simpson
    double j0 = oracle::j0_zero();
    double direct = oracle::simpson(
        [&](double r) {
            double ph = std::cyl_bessel_j(0.0, j0 * r);
            double in = oracle::simpson(
                [&](double t) { return (1.0 / (1 - 2 * r * std::cos(t) + r * r) - 0.25) / 2.0; }, -oracle::pi,
                oracle::pi, 800);
            return r * ph * ph * in;
        },
        0.0, 0.999, 800);
    EXPECT_NEAR(v.value / direct, 1.0, 0.05);
}

TEST(Conditions, I3DivergesForInverseSquare) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    EXPECT_EQ(condition_I3(distance_power(1.0, 2.0), *g, e, 0.0).verdict.classification, Classification::divergent_log);
    auto z = condition_I3(bounded(0.0), *g, e, 0.0);
    EXPECT_TRUE(z.verdict.convergent());
    EXPECT_EQ(z.value, 0.0);
}

TEST(Conditions, UniformTailCondition) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    EXPECT_TRUE(condition_marc0(distance_power(1.0, 1.5), *g, e).uniform_vanishing);
    EXPECT_FALSE(condition_marc0(distance_power(1.0, 2.0), *g, e).uniform_vanishing);
    EXPECT_TRUE(condition_marc0(bounded(2.0), *g, e).uniform_vanishing);
}

TEST(Conditions, LevelSetCondition) {
    auto g = make_grid(3, 1.0, 256, 1);
    auto e = first_eigenpair(*g);
    EXPECT_TRUE(condition_3_1(bounded(1.0), *g, e).uniform_vanishing);
    EXPECT_FALSE(condition_3_1(distance_power(1.0, 2.0), *g, e).uniform_vanishing);
    auto z = condition_3_1(bounded(0.0), *g, e);
    EXPECT_TRUE(z.uniform_vanishing);
    for (const auto& row : z.T)
        for (double v : row) EXPECT_EQ(v, 0.0);
}

// V1 <= V2 pointwise: every cutoff integral of V1 is below that of V2,
// and a finite verdict for V2 forces one for V1.
TEST(Conditions, ClassifiersAreMonotoneInV) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    const auto& dom = g->domain();
    std::vector<std::pair<Potential, Potential>> pairs{{distance_power(1.0, 1.0), distance_power(1.0, 1.5)},
                                                       {bounded(1.0), distance_power(1.0, 1.9)},
                                                       {distance_power(1.0, 1.5), distance_power(2.0, 2.0)}};
    for (const auto& [V1, V2] : pairs) {
        std::vector<DivergenceVerdict> a{check_t1(V1, 0.5), condition_I3(V1, *g, e, 0).verdict,
                                         cone_criterion(V1, dom, {0.0, 0.5}), adjoint_tail(V1, dom, e, 0.0)};
        std::vector<DivergenceVerdict> b{check_t1(V2, 0.5), condition_I3(V2, *g, e, 0).verdict,
                                         cone_criterion(V2, dom, {0.0, 0.5}), adjoint_tail(V2, dom, e, 0.0)};
        for (std::size_t k = 0; k < a.size(); ++k) {
            ASSERT_EQ(a[k].samples.size(), b[k].samples.size());
            for (std::size_t i = 0; i < a[k].samples.size(); ++i)
                EXPECT_LE(a[k].samples[i].second, b[k].samples[i].second * (1 + 1e-12) + 1e-300)
                    << V1.label << " vs " << V2.label << " test " << k;
            if (b[k].convergent()) EXPECT_TRUE(a[k].convergent()) << V1.label << " test " << k;
        }
    }
}

TEST(Conditions, AlphaFamilyVerdictsStableUnderRefinement) {
    auto g1 = make_grid(2, 1.0, 64, 64), g2 = make_grid(2, 1.0, 128, 128);
    auto e1 = eigenpair_for(*g1), e2 = eigenpair_for(*g2);
    for (double a : {1.0, 1.5, 2.0, 2.5}) {
        auto V = distance_power(1.0, a);
        EXPECT_EQ(condition_I3(V, *g1, e1, 0).verdict.classification, condition_I3(V, *g2, e2, 0).verdict.classification);
        EXPECT_EQ(condition_marc0(V, *g1, e1).uniform_vanishing, condition_marc0(V, *g2, e2).uniform_vanishing);
        EXPECT_EQ(zv_detect(V, g1, e1).singular.size() == 0, zv_detect(V, g2, e2).singular.size() == 0);
        EXPECT_EQ(condition_marc0(V, *g2, e2).uniform_vanishing, a < 2.0) << a;
    }
}
