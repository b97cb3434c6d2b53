#pragma once

// Finite-volume discretisation of -Lap + V on the graded polar grid.
// The matrix is a symmetric M-matrix whenever V >= 0. Radially symmetric
// V is solved exactly by a DFT in the angle and one tridiagonal system per
// Fourier mode; anything else goes through a sparse LDL^T (CG on large grids).

#include <chrono>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <vector>

#include <fftw3.h>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "field.hpp"

namespace mbvp {

struct SolveReport {
    double residual = 0.0;  // normwise backward error of the linear solve
    int iterations = 0;     // 0 for direct solves
    bool monotone = true;   // truncation-chain certificate (solve_measure)
    double monotonicity_violation = 0.0;
    double cauchy_gap = 0.0;
    double wall_seconds = 0.0;
    std::string method;
};

namespace detail {
inline std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}
// Thomas algorithm on a (possibly nonsymmetric) tridiagonal system.
template <class T>
void thomas(const std::vector<double>& lo, const std::vector<double>& di, const std::vector<double>& up,
            std::vector<T>& rhs) {
    const std::size_t n = di.size();
    std::vector<double> c(n);
    double den = di[0];
    c[0] = n > 1 ? up[0] / den : 0.0;
    rhs[0] = rhs[0] / den;
    for (std::size_t i = 1; i < n; ++i) {
        den = di[i] - lo[i] * c[i - 1];
        c[i] = i + 1 < n ? up[i] / den : 0.0;
        rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / den;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}
}  // namespace detail

class DiscreteSystem {
public:
    // v: potential at every grid node (boundary entries ignored).
    DiscreteSystem(GridPtr g, std::vector<double> v, double iterative_tol = 1e-10)
        : g_(std::move(g)), v_(std::move(v)), cg_tol_(iterative_tol) {
        const auto& G = *g_;
        if (static_cast<int>(v_.size()) != G.num_nodes()) throw DomainError("potential sample size mismatch");
        for (int n = 0; n < G.num_nodes(); ++n) {
            if (G.is_boundary(n)) continue;
            if (!(v_[n] >= 0.0) || !std::isfinite(v_[n]))
                throw DomainError("potential must be finite and nonnegative at interior nodes");
        }
        const int M = G.M();
        aE_.assign(M, 0.0);
        aW_.assign(M, 0.0);
        aN_.assign(M, 0.0);
        vol_.assign(M, 0.0);
        const double dt = G.dtheta();
        if (G.dim() == 2) {
            vol_[0] = pi * sqr(G.rhalf(0));
            ac_ = G.rhalf(0) * dt / G.r(1);
            for (int i = 1; i < M; ++i) {
                double rp = G.rhalf(i), rm = G.rhalf(i - 1);
                aE_[i] = rp * dt / (G.r(i + 1) - G.r(i));
                aW_[i] = rm * dt / (G.r(i) - G.r(i - 1));
                aN_[i] = (rp - rm) / (G.r(i) * dt);
                vol_[i] = 0.5 * (rp * rp - rm * rm) * dt;
            }
        } else {
            vol_[0] = 4.0 * pi * std::pow(G.rhalf(0), 3) / 3.0;
            aE_[0] = 4.0 * pi * sqr(G.rhalf(0)) / G.r(1);
            for (int i = 1; i < M; ++i) {
                double rp = G.rhalf(i), rm = G.rhalf(i - 1);
                aE_[i] = 4.0 * pi * rp * rp / (G.r(i + 1) - G.r(i));
                aW_[i] = 4.0 * pi * rm * rm / (G.r(i) - G.r(i - 1));
                vol_[i] = 4.0 * pi * (rp * rp * rp - rm * rm * rm) / 3.0;
            }
        }
        radial_ = true;
        if (G.dim() == 2)
            for (int i = 1; i < M && radial_; ++i)
                for (int j = 1; j < G.Mt(); ++j)
                    if (std::abs(v_[G.node(i, j)] - v_[G.node(i, 0)]) > 1e-13 * std::abs(v_[G.node(i, 0)])) {
                        radial_ = false;
                        break;
                    }
    }

    const PolarGrid& grid() const { return *g_; }
    GridPtr grid_ptr() const { return g_; }
    bool radial() const { return radial_; }
    const std::vector<double>& potential() const { return v_; }

    // control volume of node n
    double volume(int n) const {
        const auto& G = *g_;
        int i = G.ring_of(n);
        if (i == G.M()) return 0.0;
        return vol_[i];
    }
    // boundary coupling coefficient of boundary node j (flux weight from
    // the last interior ring)
    double boundary_coupling() const { return aE_[g_->M() - 1]; }

    int num_unknowns() const { return g_->dim() == 2 ? 1 + (g_->M() - 1) * g_->Mt() : g_->M(); }

    // (A u)_n for interior nodes, u given on all nodes including boundary.
    // With `absolute`, (|A| |u|)_n instead.
    std::vector<double> apply(const std::vector<double>& u_in, bool absolute = false) const {
        std::vector<double> ua;
        if (absolute) {
            ua = u_in;
            for (auto& x : ua) x = std::abs(x);
        }
        const std::vector<double>& u = absolute ? ua : u_in;
        const double sg = absolute ? -1.0 : 1.0;
        const auto& G = *g_;
        std::vector<double> out(G.num_nodes(), 0.0);
        const int M = G.M();
        if (G.dim() == 3) {
            out[0] = (aE_[0] + v_[0] * vol_[0]) * u[0] - sg * aE_[0] * u[1];
            for (int i = 1; i < M; ++i)
                out[i] = (aE_[i] + aW_[i] + v_[i] * vol_[i]) * u[i] - sg * (aW_[i] * u[i - 1] + aE_[i] * u[i + 1]);
            return out;
        }
        const int Mt = G.Mt();
        double s = 0.0;
        for (int j = 0; j < Mt; ++j) s += u[G.node(1, j)];
        out[0] = (Mt * ac_ + v_[0] * vol_[0]) * u[0] - sg * ac_ * s;
        for (int i = 1; i < M; ++i)
            for (int j = 0; j < Mt; ++j) {
                int n = G.node(i, j);
                double west = i == 1 ? u[0] : u[G.node(i - 1, j)];
                out[n] = (aE_[i] + aW_[i] + 2 * aN_[i] + v_[n] * vol_[i]) * u[n] -
                         sg * (aW_[i] * west + aE_[i] * u[G.node(i + 1, j)] +
                               aN_[i] * (u[G.node(i, j + 1)] + u[G.node(i, j - 1)]));
            }
        return out;
    }

    // Checks the sign pattern and weak diagonal dominance row by row.
    bool is_m_matrix(std::string* why = nullptr) const {
        const auto& G = *g_;
        auto fail = [&](const std::string& s) {
            if (why) *why = s;
            return false;
        };
        const int M = G.M();
        for (int i = 0; i < M; ++i) {
            double offsum, diag;
            if (G.dim() == 2 && i == 0) {
                offsum = G.Mt() * ac_;
                diag = offsum + v_[0] * vol_[0];
            } else if (G.dim() == 3) {
                offsum = aE_[i] + aW_[i];
                diag = offsum + v_[i] * vol_[i];
            } else {
                offsum = aE_[i] + aW_[i] + 2 * aN_[i];
                double vmin = 1e300;
                for (int j = 0; j < G.Mt(); ++j) vmin = std::min(vmin, v_[G.node(i, j)]);
                diag = offsum + vmin * vol_[i];
            }
            if (!(aE_[i] >= 0 && aW_[i] >= 0 && aN_[i] >= 0)) return fail("positive off-diagonal entry");
            if (!(diag > 0)) return fail("nonpositive diagonal");
            if (diag < offsum * (1 - 1e-14)) return fail("diagonal dominance lost");
        }
        return true;
    }

    // Solves A u = source*vol + boundary coupling of g. `source` is per node
    // (nullptr for none); g has one value per boundary node.
    Field solve(const std::vector<double>& g, const std::vector<double>* source, SolveReport* rep = nullptr) const {
        auto t0 = std::chrono::steady_clock::now();
        const auto& G = *g_;
        if (static_cast<int>(g.size()) != G.num_boundary()) throw DomainError("boundary data size mismatch");
        std::vector<double> rhs(G.num_nodes(), 0.0);
        for (int n = 0; n < G.num_nodes(); ++n) {
            if (G.is_boundary(n)) continue;
            if (source) rhs[n] = (*source)[n] * volume(n);
        }
        const std::vector<double> src = rhs;
        const int M = G.M();
        for (int j = 0; j < G.num_boundary(); ++j) rhs[G.node(M - 1, j)] += aE_[M - 1] * g[j];

        Field u(g_);
        SolveReport local;
        if (G.dim() == 3) {
            solve_radial_3d(rhs, u.values);
            local.method = "tridiagonal";
        } else if (radial_) {
            solve_fourier(rhs, u.values);
            local.method = "fourier-tridiagonal";
        } else {
            solve_sparse(rhs, u.values, local);
        }
        for (int j = 0; j < G.num_boundary(); ++j) u[G.boundary_node(j)] = g[j];

        // normwise backward error of the interior equations (boundary values
        // included in u): max |Au - b| / max (|A||u| + |b|)
        auto Au = apply(u.values);
        auto Aa = apply(u.values, true);
        double rn = 0.0, bn = 0.0;
        for (int n = 0; n < G.num_nodes(); ++n) {
            if (G.is_boundary(n)) continue;
            rn = std::max(rn, std::abs(Au[n] - src[n]));
            bn = std::max(bn, Aa[n] + std::abs(src[n]));
        }
        local.residual = bn > 0 ? rn / bn : rn;
        local.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double tol = local.method == "cg" ? 1e-8 : 1e-10;
        if (!(local.residual <= tol) || !u.all_finite()) {
            std::ostringstream os;
            os << "linear solve (" << local.method << ") residual " << local.residual << " above " << tol;
            throw NumericalError(os.str());
        }
        if (rep) *rep = local;
        return u;
    }

    // Centre value of the solution with zero source; only the angular mean
    // of g matters when V is radial.
    double center_value(const std::vector<double>& g) const {
        const auto& G = *g_;
        if (!radial_ || G.dim() != 2) return solve(g, nullptr)[0];
        const int M = G.M(), Mt = G.Mt();
        double gs = 0.0;
        for (double x : g) gs += x;
        std::vector<double> lo(M, 0.0), di(M, 0.0), up(M, 0.0), b(M, 0.0);
        fill_mode(0, lo, di, up);
        b[M - 1] = aE_[M - 1] * gs;
        detail::thomas(lo, di, up, b);
        return b[0] / Mt;
    }

private:
    // tridiagonal for Fourier mode n in unknowns (X0 = Mt*u0, U_1..U_{M-1}).
    // For n != 0 the centre row decouples (identity).
    void fill_mode(int n, std::vector<double>& lo, std::vector<double>& di, std::vector<double>& up) const {
        const auto& G = *g_;
        const int M = G.M(), Mt = G.Mt();
        const double cn = 1.0 - std::cos(2.0 * pi * n / Mt);
        if (n == 0) {
            di[0] = (Mt * ac_ + v_[0] * vol_[0]) / Mt;
            up[0] = -ac_;
        } else {
            di[0] = 1.0;
            up[0] = 0.0;
        }
        for (int i = 1; i < M; ++i) {
            double vi = v_[G.node(i, 0)];
            di[i] = aE_[i] + aW_[i] + 2 * aN_[i] * cn + vi * vol_[i];
            lo[i] = (i == 1 && n != 0) ? 0.0 : -aW_[i];
            up[i] = i + 1 < M ? -aE_[i] : 0.0;
        }
    }

    void solve_fourier(const std::vector<double>& rhs, std::vector<double>& u) const {
        const auto& G = *g_;
        const int M = G.M(), Mt = G.Mt(), nm = Mt / 2 + 1, rings = M - 1;
        std::vector<double> in(static_cast<std::size_t>(rings) * Mt);
        std::vector<std::complex<double>> spec(static_cast<std::size_t>(rings) * nm);
        for (int i = 1; i < M; ++i)
            for (int j = 0; j < Mt; ++j) in[(i - 1) * Mt + j] = rhs[G.node(i, j)];
        fftw_plan fwd, bwd;
        {
            std::lock_guard<std::mutex> lk(detail::fftw_mutex());
            int nn[1] = {Mt};
            fwd = fftw_plan_many_dft_r2c(1, nn, rings, in.data(), nullptr, 1, Mt,
                                         reinterpret_cast<fftw_complex*>(spec.data()), nullptr, 1, nm, FFTW_ESTIMATE);
            bwd = fftw_plan_many_dft_c2r(1, nn, rings, reinterpret_cast<fftw_complex*>(spec.data()), nullptr, 1, nm,
                                         in.data(), nullptr, 1, Mt, FFTW_ESTIMATE);
        }
        fftw_execute(fwd);
        std::vector<double> lo(M), di(M), up(M);
        std::vector<std::complex<double>> b(M);
        for (int n = 0; n < nm; ++n) {
            fill_mode(n, lo, di, up);
            b[0] = n == 0 ? std::complex<double>(rhs[0], 0.0) : 0.0;
            for (int i = 1; i < M; ++i) b[i] = spec[(i - 1) * nm + n];
            detail::thomas(lo, di, up, b);
            if (n == 0) u[0] = b[0].real() / Mt;
            for (int i = 1; i < M; ++i) spec[(i - 1) * nm + n] = b[i];
        }
        fftw_execute(bwd);
        for (int i = 1; i < M; ++i)
            for (int j = 0; j < Mt; ++j) u[G.node(i, j)] = in[(i - 1) * Mt + j] / Mt;
        {
            std::lock_guard<std::mutex> lk(detail::fftw_mutex());
            fftw_destroy_plan(fwd);
            fftw_destroy_plan(bwd);
        }
    }

    void solve_radial_3d(const std::vector<double>& rhs, std::vector<double>& u) const {
        const int M = g_->M();
        std::vector<double> lo(M, 0.0), di(M), up(M, 0.0), b(rhs.begin(), rhs.begin() + M);
        di[0] = aE_[0] + v_[0] * vol_[0];
        up[0] = -aE_[0];
        for (int i = 1; i < M; ++i) {
            di[i] = aE_[i] + aW_[i] + v_[i] * vol_[i];
            lo[i] = -aW_[i];
            up[i] = i + 1 < M ? -aE_[i] : 0.0;
        }
        detail::thomas(lo, di, up, b);
        for (int i = 0; i < M; ++i) u[i] = b[i];
    }

    void solve_sparse(const std::vector<double>& rhs, std::vector<double>& u, SolveReport& rep) const {
        const auto& G = *g_;
        const int M = G.M(), Mt = G.Mt();
        const int nu = num_unknowns();
        // unknown index == node index for interior nodes
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<std::size_t>(nu) * 5 + Mt);
        t.emplace_back(0, 0, Mt * ac_ + v_[0] * vol_[0]);
        for (int j = 0; j < Mt; ++j) {
            t.emplace_back(0, G.node(1, j), -ac_);
            t.emplace_back(G.node(1, j), 0, -ac_);
        }
        for (int i = 1; i < M; ++i)
            for (int j = 0; j < Mt; ++j) {
                int n = G.node(i, j);
                t.emplace_back(n, n, aE_[i] + aW_[i] + 2 * aN_[i] + v_[n] * vol_[i]);
                if (i > 1) t.emplace_back(n, G.node(i - 1, j), -aW_[i]);
                if (i + 1 < M) t.emplace_back(n, G.node(i + 1, j), -aE_[i]);
                t.emplace_back(n, G.node(i, j + 1), -aN_[i]);
                t.emplace_back(n, G.node(i, j - 1), -aN_[i]);
            }
        Eigen::SparseMatrix<double> A(nu, nu);
        A.setFromTriplets(t.begin(), t.end());
        Eigen::VectorXd b(nu);
        for (int n = 0; n < nu; ++n) b[n] = rhs[n];
        Eigen::VectorXd x;
        if (static_cast<long>(M) * Mt <= 256L * 256L) {
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
            if (ldlt.info() != Eigen::Success) throw NumericalError("sparse factorisation failed");
            x = ldlt.solve(b);
            rep.method = "ldlt";
        } else {
            Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                     Eigen::DiagonalPreconditioner<double>>
                cg;
            cg.setTolerance(cg_tol_ * 1e-2);
            cg.setMaxIterations(20 * nu);
            cg.compute(A);
            x = cg.solve(b);
            rep.iterations = static_cast<int>(cg.iterations());
            rep.method = "cg";
            if (cg.info() != Eigen::Success) {
                std::ostringstream os;
                os << "conjugate gradient did not converge: error " << cg.error() << " after " << cg.iterations();
                throw NumericalError(os.str());
            }
        }
        for (int n = 0; n < nu; ++n) u[n] = x[n];
    }

    GridPtr g_;
    std::vector<double> v_;
    double cg_tol_;
    std::vector<double> aE_, aW_, aN_, vol_;
    double ac_ = 0.0;
    bool radial_ = true;
};

}  // namespace mbvp
