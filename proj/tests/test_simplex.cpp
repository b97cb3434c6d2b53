#include <gtest/gtest.h>

#include <mbvp/simplex.hpp>

using namespace mbvp;

TEST(Simplex, TextbookMaximum) {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    auto r = simplex_max({{1, 0}, {0, 2}, {3, 2}}, {4, 12, 18}, {3, 5});
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.value, 36.0, 1e-12);
    EXPECT_NEAR(r.x[0], 2.0, 1e-12);
    EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(Simplex, NegativeRightHandSideNeedsPhaseOne) {
    // max -x - y with x + y >= 2 (written -x - y <= -2), x <= 3 -> -2
    auto r = simplex_max({{-1, -1}, {1, 0}}, {-2, 3}, {-1, -1});
    ASSERT_EQ(r.status, LpStatus::optimal);
    EXPECT_NEAR(r.value, -2.0, 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
    EXPECT_EQ(simplex_max({{1}, {-1}}, {1, -2}, {1}).status, LpStatus::infeasible);
    EXPECT_EQ(simplex_max({{-1, 1}}, {1}, {1, 0}).status, LpStatus::unbounded);
}

TEST(Simplex, StrongDualityOnRandomPrograms) {
    // primal max c.x, Ax <= b, x >= 0; dual min b.y, A^T y >= c, y >= 0
    std::uint64_t s = 12345;
    auto rnd = [&] {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) / 9007199254740992.0;
    };
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 6, n = 4;
        std::vector<std::vector<double>> A(m, std::vector<double>(n)), At(n, std::vector<double>(m));
        std::vector<double> b(m), c(n);
        for (int i = 0; i < m; ++i) {
            b[i] = 1.0 + rnd();
            for (int j = 0; j < n; ++j) A[i][j] = At[j][i] = 0.1 + rnd();
        }
        for (auto& v : c) v = rnd();
        auto p = simplex_max(A, b, c);
        std::vector<std::vector<double>> negAt(n, std::vector<double>(m));
        std::vector<double> negc(n), negb(m);
        for (int j = 0; j < n; ++j) {
            negc[j] = -c[j];
            for (int i = 0; i < m; ++i) negAt[j][i] = -At[j][i];
        }
        for (int i = 0; i < m; ++i) negb[i] = -b[i];
        auto d = simplex_max(negAt, negc, negb);
        ASSERT_EQ(p.status, LpStatus::optimal);
        ASSERT_EQ(d.status, LpStatus::optimal);
        EXPECT_NEAR(p.value, -d.value, 1e-10);
        for (int i = 0; i < m; ++i) {
            double lhs = 0;
            for (int j = 0; j < n; ++j) lhs += A[i][j] * p.x[j];
            EXPECT_LE(lhs, b[i] + 1e-10);
        }
    }
}

TEST(Simplex, ShapeMismatchRejected) {
    EXPECT_THROW(simplex_max({{1, 2}}, {1, 2}, {1, 1}), DomainError);
    EXPECT_THROW(simplex_max({{1}}, {1}, {1, 1}), DomainError);
}
