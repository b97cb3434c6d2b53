#pragma once

// Dense two-phase simplex with Bland's rule:
//   maximize c.x  subject to  A x <= b,  x >= 0   (b of any sign).
// Sized for a few hundred rows; used as an independent check on the
// capacity programs.

#include <cmath>
#include <limits>
#include <vector>

#include "core.hpp"

namespace mbvp {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    std::vector<double> x;
    int pivots = 0;
};

namespace detail {

class Tableau {
public:
    // rows x (cols + 1); the last column is the right-hand side
    Tableau(int rows, int cols) : m(rows), n(cols), t(static_cast<std::size_t>(rows) * (cols + 1), 0.0), basis(rows) {}

    double& at(int i, int j) { return t[static_cast<std::size_t>(i) * (n + 1) + j]; }
    double at(int i, int j) const { return t[static_cast<std::size_t>(i) * (n + 1) + j]; }
    double& rhs(int i) { return at(i, n); }

    void pivot(int r, int c) {
        double p = at(r, c);
        for (int j = 0; j <= n; ++j) at(r, j) /= p;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            double f = at(i, c);
            if (f == 0.0) continue;
            for (int j = 0; j <= n; ++j) at(i, j) -= f * at(r, j);
            at(i, c) = 0.0;
        }
        basis[r] = c;
    }

    // Maximize obj.x over the current basis; columns with allowed[j] ==
    // false never enter.
    LpStatus optimize(const std::vector<double>& obj, const std::vector<char>& allowed, int& pivots, int max_pivots) {
        const double tol = 1e-11;
        while (pivots < max_pivots) {
            // reduced costs d_j = obj_j - sum_i obj_{basis i} a_ij
            int enter = -1;
            for (int j = 0; j < n && enter < 0; ++j) {
                if (!allowed[j]) continue;
                double d = obj[j];
                for (int i = 0; i < m; ++i) d -= obj[basis[i]] * at(i, j);
                if (d > tol) enter = j;  // Bland: lowest index
            }
            if (enter < 0) return LpStatus::optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                double a = at(i, enter);
                if (a <= tol) continue;
                double ratio = rhs(i) / a;
                if (leave < 0 || ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::unbounded;
            pivot(leave, enter);
            ++pivots;
        }
        return LpStatus::iteration_limit;
    }

    int m, n;
    std::vector<double> t;
    std::vector<int> basis;
};

}  // namespace detail

inline LpResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                            const std::vector<double>& c, int max_pivots = 100000) {
    const int m = static_cast<int>(A.size());
    const int nv = static_cast<int>(c.size());
    if (static_cast<int>(b.size()) != m) throw DomainError("LP: row count mismatch");
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != nv) throw DomainError("LP: column count mismatch");

    // columns: x (nv), slack/surplus (m), artificial (one per negative row)
    std::vector<int> art_row;
    for (int i = 0; i < m; ++i)
        if (b[i] < 0) art_row.push_back(i);
    const int na = static_cast<int>(art_row.size());
    const int ncol = nv + m + na;
    detail::Tableau T(m, ncol);
    int ai = 0;
    for (int i = 0; i < m; ++i) {
        double s = b[i] < 0 ? -1.0 : 1.0;
        for (int j = 0; j < nv; ++j) T.at(i, j) = s * A[i][j];
        T.at(i, nv + i) = s;  // slack (or surplus after the sign flip)
        T.rhs(i) = s * b[i];
        if (b[i] < 0) {
            T.at(i, nv + m + ai) = 1.0;
            T.basis[i] = nv + m + ai;
            ++ai;
        } else {
            T.basis[i] = nv + i;
        }
    }
    LpResult res;
    std::vector<char> allowed(ncol, 1);
    if (na > 0) {
        std::vector<double> obj1(ncol, 0.0);
        for (int k = 0; k < na; ++k) obj1[nv + m + k] = -1.0;
        auto st = T.optimize(obj1, allowed, res.pivots, max_pivots);
        if (st == LpStatus::iteration_limit) {
            res.status = st;
            return res;
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i)
            if (T.basis[i] >= nv + m) infeas += T.rhs(i);
        double scale = 1.0;
        for (double v : b) scale = std::max(scale, std::abs(v));
        if (infeas > 1e-9 * scale) {
            res.status = LpStatus::infeasible;
            return res;
        }
        // drive remaining (zero-level) artificials out of the basis
        for (int i = 0; i < m; ++i) {
            if (T.basis[i] < nv + m) continue;
            for (int j = 0; j < nv + m; ++j)
                if (std::abs(T.at(i, j)) > 1e-11) {
                    T.pivot(i, j);
                    break;
                }
        }
        for (int k = 0; k < na; ++k) allowed[nv + m + k] = 0;
    }
    std::vector<double> obj(ncol, 0.0);
    for (int j = 0; j < nv; ++j) obj[j] = c[j];
    res.status = T.optimize(obj, allowed, res.pivots, max_pivots);
    if (res.status != LpStatus::optimal) return res;
    res.x.assign(nv, 0.0);
    for (int i = 0; i < m; ++i)
        if (T.basis[i] < nv) res.x[T.basis[i]] = T.rhs(i);
    for (int j = 0; j < nv; ++j) res.value += c[j] * res.x[j];
    return res;
}

}  // namespace mbvp
