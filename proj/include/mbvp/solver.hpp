#pragma once

// Solutions of -Lap u + V u = 0 with boundary data, the truncation
// construction for measure data, weak-form / representation / Brezis
// checks, and the radial Volterra fixed point.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "kernels.hpp"

namespace mbvp {

// k_j = base^j, j = 0..levels-1
inline std::vector<double> geometric_schedule(int levels = 9, double base = 4.0, double k0 = 1.0) {
    std::vector<double> k(levels);
    for (int j = 0; j < levels; ++j) k[j] = k0 * std::pow(base, j);
    return k;
}

struct SolverOptions {
    std::vector<double> k_schedule = geometric_schedule();
    double atom_width_cells = 3.0;  // mollification width in boundary cells
    double mono_tol = 1e-9;         // relative to sup of the harmonic bound
    int workers = 1;
};

inline Field solve_dirichlet(const Potential& V, const BoundaryMeasure& g, SolveReport* rep = nullptr) {
    if (g.has_atoms()) throw PreconditionError("solve_dirichlet takes density data; mollify atoms first");
    auto v = sample_on_grid(V, *g.grid);
    for (double x : v)
        if (!std::isfinite(x)) throw PreconditionError("potential is not bounded on the grid");
    DiscreteSystem sys(g.grid, std::move(v));
    return sys.solve(g.density, nullptr, rep);
}

// Each atom becomes a hat density of the same mass on an arc of angular
// width `width` centred at the atom.
inline BoundaryMeasure mollify_atoms(const BoundaryMeasure& mu, double width) {
    const auto& g = *mu.grid;
    if (!(width >= g.dtheta() * (1.0 - 1e-12))) throw DomainError("mollification width below the boundary mesh spacing");
    BoundaryMeasure out(mu.grid);
    out.density = mu.density;
    const int Mt = g.num_boundary();
    for (const auto& a : mu.atoms) {
        std::vector<double> h(Mt, 0.0);
        double sum = 0.0;
        for (int j = 0; j < Mt; ++j) {
            double t = std::abs(wrap_angle(g.theta(j) - a.theta)) / (0.5 * width);
            h[j] = std::max(0.0, 1.0 - t);
            sum += h[j];
        }
        if (sum == 0.0) {
            int j = static_cast<int>(std::lround(a.theta / g.dtheta())) % Mt;
            if (j < 0) j += Mt;
            h[j] = 1.0;
            sum = 1.0;
        }
        for (int j = 0; j < Mt; ++j) out.density[j] += a.mass * h[j] / (sum * g.boundary_weight());
    }
    return out;
}

inline BoundaryMeasure mollify_default(const BoundaryMeasure& mu, double cells = 3.0) {
    if (!mu.has_atoms()) return mu;
    return mollify_atoms(mu, cells * mu.grid->dtheta());
}

struct MeasureSolution {
    std::vector<double> schedule;
    std::vector<Field> iterates;  // u_k for each level
    Field limit;                  // last iterate
    Field harmonic_bound;         // discrete harmonic extension of the data
    BoundaryMeasure data;         // the (mollified) data actually imposed
    SolveReport report;
};

// Truncation chain u_k = solution with V_k = min(V, k) and mollified data,
// certified 0 <= u_{k'} <= u_k <= K_h[mu] for k < k'.
inline MeasureSolution solve_measure(const Potential& V, const BoundaryMeasure& mu, const SolverOptions& opt = {}) {
    if (!mu.nonnegative()) throw PreconditionError("solve_measure needs a nonnegative measure");
    const auto& ks = opt.k_schedule;
    if (ks.empty()) throw ConfigError("empty truncation schedule");
    for (std::size_t j = 1; j < ks.size(); ++j)
        if (!(ks[j] > ks[j - 1])) throw ConfigError("truncation schedule must be strictly increasing");
    auto t0 = std::chrono::steady_clock::now();
    MeasureSolution out;
    out.schedule = ks;
    out.data = mollify_default(mu, opt.atom_width_cells);
    const auto& g = *mu.grid;
    out.harmonic_bound = solve_dirichlet(bounded(0.0), out.data);
    out.iterates.resize(ks.size());
    std::vector<SolveReport> reps(ks.size());
    parallel_for(ks.size(), opt.workers, [&](std::size_t j) {
        out.iterates[j] = solve_dirichlet(truncate(V, ks[j]), out.data, &reps[j]);
    });

    double scale = std::max(sup_abs(out.harmonic_bound), 1e-300);
    for (int n = 0; n < g.num_boundary(); ++n) scale = std::max(scale, std::abs(out.data.density[n]));
    const double tol = opt.mono_tol * scale;
    double worst = 0.0;
    std::string where;
    for (std::size_t j = 0; j < ks.size(); ++j) {
        const Field& u = out.iterates[j];
        const Field& upper = j == 0 ? out.harmonic_bound : out.iterates[j - 1];
        for (int n = 0; n < g.num_nodes(); ++n) {
            if (g.is_boundary(n)) continue;
            double up = u[n] - upper[n], lo = -u[n];
            double v = std::max(up, lo);
            if (v > worst) {
                worst = v;
                std::ostringstream os;
                os << "level k=" << ks[j] << " node " << n;
                where = os.str();
            }
        }
    }
    out.report.method = reps.back().method;
    for (const auto& r : reps) out.report.residual = std::max(out.report.residual, r.residual);
    out.report.monotonicity_violation = worst;
    out.report.monotone = worst <= tol;
    if (!out.report.monotone) {
        std::ostringstream os;
        os << "truncation chain not monotone: violation " << worst << " at " << where << " (tolerance " << tol << ")";
        throw InvariantBreach(os.str());
    }
    out.limit = out.iterates.back();
    if (ks.size() > 1) out.report.cauchy_gap = sup_diff(out.iterates.back(), out.iterates[ks.size() - 2]);
    out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// |sum(-u Lap zeta + V u zeta) + int d_n zeta dmu| in discrete form, zeta =
// G[source]. The discrete Laplacian is the finite-volume operator and the
// normal derivative of zeta is its flux through the outer faces.
inline double weak_form_residual(const Field& u, const Potential& V, const BoundaryMeasure& mu, const Field& source) {
    const auto& g = *u.grid;
    Field zeta = green_apply(source);
    DiscreteSystem lap(u.grid, std::vector<double>(g.num_nodes(), 0.0));
    auto Az = lap.apply(zeta.values);
    auto v = sample_on_grid(V, g);
    auto data = mollify_default(mu);
    double s = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (g.is_boundary(n)) continue;
        s += u[n] * Az[n] + v[n] * u[n] * zeta[n] * lap.volume(n);
    }
    const double aE = lap.boundary_coupling();
    for (int j = 0; j < g.num_boundary(); ++j) s -= aE * zeta[g.node(g.M() - 1, j)] * data.density[j];
    return std::abs(s);
}

// sup |u + G[V u] - K[mu]| / sup |K[mu]| over interior nodes. Atoms in mu
// are evaluated exactly; pass the mollified data when u came from it.
inline double representation_residual(const Field& u, const Potential& V, const BoundaryMeasure& mu) {
    const auto& g = *u.grid;
    auto v = sample_on_grid(V, g);
    Field f(u.grid);
    for (int n = 0; n < g.num_nodes(); ++n) f[n] = g.is_boundary(n) ? 0.0 : v[n] * u[n];
    Field gv = green_apply(f);
    Field k = poisson_extend(mu);
    double num = 0.0, den = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (g.is_boundary(n)) continue;
        num = std::max(num, std::abs(u[n] + gv[n] - k[n]));
        den = std::max(den, std::abs(k[n]));
    }
    return den > 0 ? num / den : num;
}

struct BrezisResult {
    double lhs = 0.0;  // |u|_{L1} + |V u|_{L1_phi}
    double rhs = 0.0;  // c |mu|
    double c = 0.0;
    bool holds = false;
};

// Eigenfunction on arbitrary grids (the eigenvalue itself needs no grid).
inline Eigenpair eigenpair_for(const PolarGrid& g) {
    if (g.M() >= 255) return first_eigenpair(g);
    auto fine = make_grid(g.dim(), g.R(), 256, g.dim() == 2 ? 4 : 1);
    Eigenpair e = first_eigenpair(*fine);
    e.phi.assign(g.M() + 1, 0.0);
    for (int i = 0; i < g.M(); ++i) e.phi[i] = e.value(g.r(i));
    return e;
}

// c = 1 / min over the boundary of -d_n eta, eta = G[1].
inline BrezisResult brezis_check(const Field& u, const Potential& V, const BoundaryMeasure& mu, const Eigenpair& e) {
    const auto& g = *u.grid;
    BrezisResult b;
    Field one(u.grid, 1.0);
    Field eta = green_apply(one);
    DiscreteSystem lap(u.grid, std::vector<double>(g.num_nodes(), 0.0));
    double mn = 1e300;
    for (int j = 0; j < g.num_boundary(); ++j) {
        double flux = lap.boundary_coupling() * eta[g.node(g.M() - 1, j)] / g.boundary_weight();
        mn = std::min(mn, flux);
    }
    b.c = 1.0 / mn;
    auto v = sample_on_grid(V, g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        double w = g.weight(n);
        if (w == 0.0) continue;
        b.lhs += w * (std::abs(u[n]) + v[n] * std::abs(u[n]) * e.phi[g.ring_of(n)]);
    }
    b.rhs = b.c * mu.total_variation();
    b.holds = b.lhs <= b.rhs * (1.0 + 1e-12) + 1e-300;
    return b;
}

struct RadialSolution {
    std::vector<double> r;
    std::vector<double> u;
    double fixed_point_residual = 0.0;  // max relative change under one map application
};

// u(r) = a + c int_0^r s^{1-N} int_0^s u(t) t^{N-1} / (R-t)^2 dt ds.
// The map is discretised by the trapezoid rule on a grid graded toward R
// (containing every requested node); the discrete map is lower triangular,
// so its fixed point is obtained exactly by one forward sweep.
inline RadialSolution radial_volterra(double a, double c, const BallDomain& dom, const std::vector<double>& r_nodes) {
    if (!(a > 0)) throw DomainError("Volterra data a must be positive");
    if (!(c >= 0)) throw DomainError("Volterra coefficient c must be nonnegative");
    const double R = dom.radius;
    const int N = dom.dimension;
    double dmin = R;
    for (double r : r_nodes) {
        if (!(r >= 0 && r < R)) throw DomainError("Volterra nodes must lie in [0, R)");
        dmin = std::min(dmin, R - r);
    }
    std::vector<double> t;
    const int n_uniform = 2000;
    for (int i = 0; i <= n_uniform; ++i) t.push_back(0.5 * R * i / n_uniform);
    for (double d = 0.5 * R / 1.001; d > 0.25 * dmin; d /= 1.001) t.push_back(R - d);
    t.insert(t.end(), r_nodes.begin(), r_nodes.end());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }), t.end());

    const std::size_t n = t.size();
    auto wgt = [&](std::size_t i) { return std::pow(t[i], N - 1) / sqr(R - t[i]); };
    auto inv = [&](std::size_t i) { return t[i] == 0.0 ? 0.0 : std::pow(t[i], 1 - N); };
    std::vector<double> u(n), I(n), J(n);
    u[0] = a;
    I[0] = 0.0;
    J[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double h = t[i] - t[i - 1];
        // I_i = I_{i-1} + h/2 (f_{i-1} + w_i u_i); J_i = J_{i-1} + h/2 (q_{i-1} + inv_i I_i); u_i = a + c J_i
        double Ibase = I[i - 1] + 0.5 * h * u[i - 1] * wgt(i - 1);
        double Jbase = J[i - 1] + 0.5 * h * inv(i - 1) * I[i - 1] + 0.5 * h * inv(i) * Ibase;
        double coef = 0.5 * h * inv(i) * 0.5 * h * wgt(i);
        u[i] = (a + c * Jbase) / (1.0 - c * coef);
        I[i] = Ibase + 0.5 * h * wgt(i) * u[i];
        J[i] = J[i - 1] + 0.5 * h * (inv(i - 1) * I[i - 1] + inv(i) * I[i]);
    }
    // one explicit application of the discrete map
    RadialSolution out;
    {
        double Ii = 0.0, Ji = 0.0, worst = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            double h = t[i] - t[i - 1];
            double In = Ii + 0.5 * h * (u[i - 1] * wgt(i - 1) + u[i] * wgt(i));
            Ji += 0.5 * h * (inv(i - 1) * Ii + inv(i) * In);
            Ii = In;
            worst = std::max(worst, std::abs(a + c * Ji - u[i]) / std::abs(u[i]));
        }
        out.fixed_point_residual = worst;
    }
    if (out.fixed_point_residual > 1e-10)
        throw NumericalError("Volterra sweep is not a fixed point of the discrete map");
    for (double r : r_nodes) {
        std::size_t k = std::lower_bound(t.begin(), t.end(), r - 1e-15) - t.begin();
        out.r.push_back(r);
        out.u.push_back(u[k]);
    }
    return out;
}

}  // namespace mbvp
