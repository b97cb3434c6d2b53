#include <gtest/gtest.h>

#include <mbvp/solver.hpp>

#include "oracles.hpp"

using namespace mbvp;

TEST(Domain, DistanceToBoundary) {
    BallDomain d(2, 1.0);
    EXPECT_DOUBLE_EQ(distance_to_boundary(d, {0, 0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(distance_to_boundary(d, polar_point(1.0, 0.7)), 0.0);
    EXPECT_NEAR(distance_to_boundary(d, polar_point(0.75, 2.0)), 0.25, 1e-15);
    EXPECT_THROW(distance_to_boundary(d, {1.5, 0, 0}), DomainError);
    EXPECT_THROW(BallDomain(4, 1.0), DomainError);
    EXPECT_THROW(BallDomain(2, -1.0), DomainError);
}

TEST(Domain, DiskEigenvalueIsSquaredBesselZero) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    double j0 = oracle::j0_zero();
    EXPECT_NEAR(e.lambda, j0 * j0, 1e-10);
    EXPECT_NEAR(e.lambda, 5.783185962946784, 1e-10);  // frozen
    EXPECT_NEAR(e.lambda_shooting, e.lambda, 1e-7);
    EXPECT_DOUBLE_EQ(e.value(0.0), 1.0);
    EXPECT_EQ(e.phi.back(), 0.0);
    EXPECT_NEAR(e.value(0.5), std::cyl_bessel_j(0.0, j0 * 0.5), 1e-12);
}

TEST(Domain, BallEigenvalueIsPiSquared) {
    auto g = make_grid(3, 1.0, 256, 1);
    auto e = first_eigenpair(*g);
    EXPECT_NEAR(e.lambda, oracle::pi * oracle::pi, 1e-10);
    for (double r : {0.1, 0.4, 0.9}) EXPECT_NEAR(e.value(r), std::sin(oracle::pi * r) / (oracle::pi * r), 1e-12);
    EXPECT_EQ(e.phi.back(), 0.0);
}

TEST(Domain, EigenpairResidualAndComparability) {
    auto g = make_grid(2, 1.0, 256, 8);
    auto e = first_eigenpair(*g);
    EXPECT_LT(e.residual, 1e-8);
    EXPECT_GT(e.c1, 0.0);
    EXPECT_GE(e.c2, e.c1);
    for (int i = 0; i < g->M(); ++i) {
        double q = e.phi[i] / g->delta(i);
        EXPECT_GE(q, e.c1 - 1e-15);
        EXPECT_LE(q, e.c2 + 1e-15);
    }
}

TEST(Domain, CoarseGridEigenpairFallsBackToFineRadii) {
    auto g = make_grid(2, 1.0, 64, 8);
    EXPECT_THROW(first_eigenpair(*g), DomainError);
    auto e = eigenpair_for(*g);
    EXPECT_NEAR(e.lambda, 5.783185962946784, 1e-10);
    EXPECT_EQ(static_cast<int>(e.phi.size()), g->M() + 1);
}

TEST(Domain, LayerGeometry) {
    auto g = make_grid(2, 1.0, 64, 64);
    auto L = layer(*g, 0.25);
    EXPECT_NEAR(L.total_surface(), 2 * oracle::pi * 0.75, 1e-10);
    for (std::size_t j = 0; j < L.points.size(); ++j) {
        EXPECT_NEAR(norm(L.points[j]), 0.75, 1e-14);
        EXPECT_NEAR(norm(L.projection[j]), 1.0, 1e-14);
        EXPECT_NEAR(dot(L.points[j], L.projection[j]), 0.75, 1e-14);  // same direction
    }
    EXPECT_THROW(layer(*g, 0.0), DomainError);
    EXPECT_THROW(layer(*g, 0.6), DomainError);
    auto g3 = make_grid(3, 1.0, 64, 1);
    EXPECT_NEAR(layer(*g3, 0.1).total_surface(), 4 * oracle::pi * 0.81, 1e-12);
}

class Quadrature : public ::testing::TestWithParam<int> {};

TEST_P(Quadrature, IntegratesOneAndRadiusSquared) {
    const int N = GetParam();
    auto g = make_grid(N, 1.0, 256, N == 2 ? 256 : 1);
    double vol = N == 2 ? oracle::pi : 4 * oracle::pi / 3;
    double r2 = N == 2 ? oracle::pi / 2 : 4 * oracle::pi / 5;
    EXPECT_NEAR(integrate(Field(g, 1.0)) / vol, 1.0, 1e-6);
    EXPECT_NEAR(integrate(sample(g, [](Point x) { return dot(x, x); })) / r2, 1.0, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Dimensions, Quadrature, ::testing::Values(2, 3));

TEST(Domain, GradingShrinksTowardBoundary) {
    for (double gamma : {1.0, 2.0, 3.0}) {
        auto g = make_grid(2, 1.0, 128, 8, gamma);
        for (int i = 1; i < g->M(); ++i)
            EXPECT_LE(g->r(i + 1) - g->r(i), g->r(i) - g->r(i - 1) + 1e-14) << "gamma " << gamma << " ring " << i;
        EXPECT_DOUBLE_EQ(g->r(g->M()), 1.0);
        EXPECT_DOUBLE_EQ(g->r(0), 0.0);
    }
}

TEST(Domain, NodeIndexing) {
    auto g = make_grid(2, 2.0, 16, 12);
    EXPECT_EQ(g->num_nodes(), 1 + 16 * 12);
    for (int i = 1; i <= g->M(); ++i)
        for (int j = 0; j < g->Mt(); ++j) {
            int n = g->node(i, j);
            EXPECT_EQ(g->ring_of(n), i);
            EXPECT_EQ(g->angle_index_of(n), j);
        }
    EXPECT_TRUE(g->is_boundary(g->boundary_node(3)));
    EXPECT_NEAR(norm(g->coord(g->boundary_node(5))), 2.0, 1e-14);
    EXPECT_NEAR(g->boundary_weight() * g->Mt(), 4 * oracle::pi, 1e-12);
}

TEST(Domain, DescriptorIsJson) {
    auto g = make_grid(2, 1.0, 32, 16, 2.0);
    auto s = g->descriptor_json();
    for (const char* key : {"dimension", "radius", "M_radial", "M_angular", "gamma"})
        EXPECT_NE(s.find(key), std::string::npos) << key;
}
