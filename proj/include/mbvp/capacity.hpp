#pragma once

// The adjoint operator kcheck_V[f](y) = int K(x,y) f V phi dx, the energy
// E(f, mu) = int K[mu] f V phi dx, the capacity C_V with its dual, the
// singular boundary set Z_V and the exhaustion of a measure by good ones.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ballquad.hpp"
#include "divergence.hpp"
#include "simplex.hpp"
#include "solver.hpp"

namespace mbvp {

// Set of boundary-mesh nodes (sorted, unique).
struct BoundarySet {
    GridPtr grid;
    std::vector<int> nodes;

    bool empty() const { return nodes.empty(); }
    std::size_t size() const { return nodes.size(); }
    bool contains(int j) const { return std::binary_search(nodes.begin(), nodes.end(), j); }
};

inline BoundarySet make_set(GridPtr g, std::vector<int> nodes) {
    for (int j : nodes)
        if (j < 0 || j >= g->num_boundary()) throw DomainError("boundary node index out of range");
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return {std::move(g), std::move(nodes)};
}

inline BoundarySet whole_boundary(GridPtr g) {
    std::vector<int> n(g->num_boundary());
    for (int j = 0; j < g->num_boundary(); ++j) n[j] = j;
    return {std::move(g), std::move(n)};
}

// Closed arc running counterclockwise from theta0 to theta1.
inline BoundarySet arc_set(GridPtr g, double theta0, double theta1) {
    if (g->dim() == 3) return whole_boundary(g);
    double len = theta1 - theta0;
    if (len < 0) len += 2 * pi * std::ceil(-len / (2 * pi));
    if (len >= 2 * pi - 1e-12) return whole_boundary(g);
    std::vector<int> n;
    for (int j = 0; j < g->num_boundary(); ++j) {
        double t = std::fmod(g->theta(j) - theta0, 2 * pi);
        if (t < 0) t += 2 * pi;
        if (t > 2 * pi - 1e-12) t = 0.0;
        if (t <= len + 1e-12) n.push_back(j);
    }
    return make_set(std::move(g), std::move(n));
}

inline BoundarySet set_union(const BoundarySet& a, const BoundarySet& b) {
    std::vector<int> n(a.nodes);
    n.insert(n.end(), b.nodes.begin(), b.nodes.end());
    return make_set(a.grid, std::move(n));
}

namespace detail {

// h = f V phi on interior nodes (boundary ring and zero-weight nodes skipped)
inline std::vector<double> adjoint_density(const Potential& V, const Field& f, const Eigenpair& e) {
    const auto& g = *f.grid;
    auto v = sample_on_grid(V, g);
    std::vector<double> h(g.num_nodes(), 0.0);
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (g.weight(n) == 0.0) continue;
        h[n] = f[n] * v[n] * e.value(g.r(g.ring_of(n)));
    }
    return h;
}

}  // namespace detail

// kcheck_V[f] at every boundary node. On each ring, the angular integral
// of K(., y) over a cell is exact (product integration), so kcheck_V[1]
// equals the discrete mean value of f V phi for radial data.
inline std::vector<double> kcheck(const Potential& V, const Field& f, const Eigenpair& e, int workers = 1) {
    const auto& g = *f.grid;
    auto h = detail::adjoint_density(V, f, e);
    const int M = g.M(), Mt = g.Mt();
    std::vector<double> a(Mt, 0.0);
    if (g.dim() == 3) {
        // int over |x| = r of K(x, y) dS_x = (r/R)^{N-1}
        double s = 0.0;
        for (int i = 0; i < M; ++i) s += g.radial_weight(i) * h[i];
        a[0] = s / g.domain().boundary_measure();
        return a;
    }
    std::vector<std::vector<double>> C(M);
    for (int i = 1; i < M; ++i) C[i] = detail::ring_cells(g, i);
    parallel_for(Mt, workers, [&](std::size_t jj) {
        int j = static_cast<int>(jj);
        double s = 0.0;
        for (int i = 1; i < M; ++i) {
            double ri = 0.0;
            const auto& Ci = C[i];
            for (int l = 0; l < Mt; ++l) ri += h[g.node(i, l)] * Ci[((l - j) % Mt + Mt) % Mt];
            s += g.radial_weight(i) * ri;
        }
        a[j] = s / g.R();
    });
    return a;
}

// kcheck_V[f] at an arbitrary boundary angle, same quadrature.
inline double kcheck_at(const Potential& V, const Field& f, const Eigenpair& e, double theta) {
    const auto& g = *f.grid;
    auto h = detail::adjoint_density(V, f, e);
    if (g.dim() == 3) {
        double s = 0.0;
        for (int i = 0; i < g.M(); ++i) s += g.radial_weight(i) * h[i];
        return s / g.domain().boundary_measure();
    }
    double s = 0.0;
    for (int i = 1; i < g.M(); ++i) {
        double ri = 0.0;
        for (int l = 0; l < g.Mt(); ++l)
            ri += h[g.node(i, l)] * poisson_cell(g.R(), g.r(i), g.theta(l) - theta, g.dtheta());
        s += g.radial_weight(i) * ri;
    }
    return s / g.R();
}

// Cross-check through -d_n G[f V phi], the flux of the discrete Green
// solve through the outer faces.
inline std::vector<double> kcheck_flux(const Potential& V, const Field& f, const Eigenpair& e) {
    const auto& g = *f.grid;
    auto v = sample_on_grid(V, g);
    Field h(f.grid);
    for (int n = 0; n < g.num_nodes(); ++n)
        if (!g.is_boundary(n)) h[n] = f[n] * v[n] * e.value(g.r(g.ring_of(n)));
    Field G = green_apply(h);
    DiscreteSystem lap(f.grid, std::vector<double>(g.num_nodes(), 0.0));
    std::vector<double> a(g.num_boundary());
    for (int j = 0; j < g.num_boundary(); ++j)
        a[j] = lap.boundary_coupling() * G[g.node(g.M() - 1, j)] / g.boundary_weight();
    return a;
}

// E(f, mu) = int K[mu] f V phi dx, with K[mu] from the harmonic extension
// (atoms as cell averages of K, matching the adjoint quadrature).
inline double energy(const Potential& V, const Field& f, const BoundaryMeasure& mu, const Eigenpair& e,
                     int workers = 1) {
    const auto& g = *f.grid;
    Field k = poisson_extend(mu, true, workers);
    auto h = detail::adjoint_density(V, f, e);
    double s = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n)
        if (g.weight(n) != 0.0) s += g.weight(n) * k[n] * h[n];
    return s;
}

// Same quantity through Fubini: int kcheck_V[f] dmu.
inline double energy_fubini(const Potential& V, const Field& f, const BoundaryMeasure& mu, const Eigenpair& e,
                            int workers = 1) {
    auto a = kcheck(V, f, e, workers);
    return mu.pair(a, [&](double th) { return kcheck_at(V, f, e, th); });
}

inline double mv_norm(const Potential& V, const BoundaryMeasure& mu, const Eigenpair& e, int workers = 1) {
    return energy(V, Field(mu.grid, 1.0), mu, e, workers);
}

// ---------------------------------------------------------------- Z_V

// a_y(eps) = int_{delta > eps} K(x, y) V phi dx over dyadic cutoffs.
inline DivergenceVerdict adjoint_tail(const Potential& V, const BallDomain& dom, const Eigenpair& e, double theta_y,
                                      int levels = 11) {
    const double R = dom.radius;
    const int N = dom.dimension;
    auto etas = dyadic(0.25 * R, levels);
    std::function<double(double)> F;
    if (V.is_radial()) {
        F = [&](double r) { return V.profile(R - r) * e.value(r) * std::pow(r / R, N - 1); };
    } else {
        if (N != 2) throw DomainError("non-radial potentials are supported in two dimensions only");
        Point y = polar_point(R, theta_y);
        F = [&, y](double r) {
            auto h = [&](double th) {
                Point x = polar_point(r, th);
                return poisson_kernel(dom, x, y) * V(dom, x);
            };
            return r * e.value(r) * ring_integral(V, dom, r, theta_y, h);
        };
    }
    return classify(etas, cutoff_integrals(R, etas, F));
}

struct SingularSet {
    BoundarySet singular;                   // nodes with a divergent verdict
    std::vector<int> inconclusive;          // reported separately, never classified
    std::vector<DivergenceVerdict> verdicts;  // per boundary node
};

inline SingularSet zv_detect(const Potential& V, GridPtr g, const Eigenpair& e, int workers = 1) {
    const auto& dom = g->domain();
    const int Mt = g->num_boundary();
    SingularSet z;
    z.verdicts.resize(Mt);
    if (V.is_radial()) {
        auto v = adjoint_tail(V, dom, e, 0.0);
        for (auto& x : z.verdicts) x = v;
    } else {
        parallel_for(Mt, workers, [&](std::size_t j) { z.verdicts[j] = adjoint_tail(V, dom, e, g->theta(static_cast<int>(j))); });
    }
    std::vector<int> s;
    for (int j = 0; j < Mt; ++j) {
        if (z.verdicts[j].divergent()) s.push_back(j);
        else if (!z.verdicts[j].convergent()) z.inconclusive.push_back(j);
    }
    z.singular = make_set(g, std::move(s));
    return z;
}

// ---------------------------------------------------------------- capacity

// kcheck_V[1] on the boundary mesh together with the nodes of Z_V.
struct AdjointProfile {
    GridPtr grid;
    Potential V;
    Eigenpair e;
    std::vector<double> a;
    std::vector<char> singular;
    int workers = 1;
    // kcheck_V of the angular block indicators, filled on first use
    mutable std::vector<std::vector<double>> block_columns;

    bool active(int j) const { return !singular[j] && std::isfinite(a[j]); }
};

inline AdjointProfile adjoint_profile(const Potential& V, GridPtr g, const Eigenpair& e, const SingularSet* zv = nullptr,
                                      int workers = 1) {
    AdjointProfile p{g, V, e, kcheck(V, Field(g, 1.0), e, workers), std::vector<char>(g->num_boundary(), 0), workers, {}};
    if (zv)
        for (int j : zv->singular.nodes) p.singular[j] = 1;
    return p;
}

struct CapacityResult {
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;   // dual - primal
    double simplex_value = 0.0;  // primal recomputed by the simplex method
    BoundaryMeasure optimal_measure;
    Field optimal_f;
    bool unbounded = false;  // every node of E lies in Z_V: value 0 by convention
    bool infinite = false;   // kcheck_V[1] vanishes somewhere on E
    std::string normalization = "phi(0)=1";
};

namespace detail {
inline std::vector<int> active_nodes(const AdjointProfile& P, const BoundarySet& E) {
    std::vector<int> act;
    for (int j : E.nodes)
        if (P.active(j)) act.push_back(j);
    return act;
}
}  // namespace detail

// max mu(E) subject to mu >= 0 on E and sum mu_y a_y <= 1. With one
// constraint the optimum sits at the node of smallest a_y; the simplex
// method re-solves the program as a check.
inline CapacityResult capacity_primal(const AdjointProfile& P, const BoundarySet& E) {
    CapacityResult res;
    res.optimal_measure = BoundaryMeasure(P.grid);
    res.optimal_f = Field(P.grid, 0.0);
    if (E.empty()) return res;
    auto act = detail::active_nodes(P, E);
    if (act.empty()) {
        res.unbounded = true;
        return res;
    }
    int best = act[0];
    for (int j : act)
        if (P.a[j] < P.a[best]) best = j;
    if (!(P.a[best] > 0.0)) {
        res.infinite = true;
        res.primal_value = res.simplex_value = std::numeric_limits<double>::infinity();
        return res;
    }
    res.primal_value = 1.0 / P.a[best];
    res.optimal_measure.atoms.push_back({P.grid->theta(best), res.primal_value});

    std::vector<std::vector<double>> A(1);
    for (int j : act) A[0].push_back(P.a[j]);
    auto lp = simplex_max(A, {1.0}, std::vector<double>(act.size(), 1.0));
    if (lp.status != LpStatus::optimal) throw NumericalError(std::string("capacity LP: ") + to_string(lp.status));
    res.simplex_value = lp.value;
    if (std::abs(lp.value - res.primal_value) > 1e-8 * std::max(1.0, res.primal_value))
        throw InvariantBreach("capacity: simplex and closed form disagree");
    return res;
}

// Angular block indicators used as the basis for the dual certificate.
inline Field block_indicator(GridPtr g, int b, int blocks) {
    Field f(g, 0.0);
    for (int n = 0; n < g->num_nodes(); ++n) {
        int j = g->angle_index_of(n);
        int bj = g->dim() == 3 ? 0 : std::min(blocks - 1, j * blocks / g->num_boundary());
        if (bj == b || (g->dim() == 3 && b == 0)) f[n] = 1.0;
    }
    return f;
}

// min |f|_inf subject to kcheck_V[f] >= 1 on E, f = sum c_b chi_b >= 0.
// Weak duality gives dual >= primal; the constant f = 1/min a_y shows
// equality, which the LP must reproduce.
inline CapacityResult capacity_dual(const AdjointProfile& P, const BoundarySet& E, int blocks = 16) {
    CapacityResult res = capacity_primal(P, E);
    if (E.empty() || res.unbounded) {
        res.dual_value = 0.0;
        return res;
    }
    if (res.infinite) {
        res.dual_value = std::numeric_limits<double>::infinity();
        return res;
    }
    const auto& g = *P.grid;
    if (g.dim() == 3) blocks = 1;
    std::vector<Field> chi;
    for (int b = 0; b < blocks; ++b) chi.push_back(block_indicator(P.grid, b, blocks));
    if (static_cast<int>(P.block_columns.size()) != blocks) {
        P.block_columns.clear();
        for (int b = 0; b < blocks; ++b) P.block_columns.push_back(kcheck(P.V, chi[b], P.e, P.workers));
    }
    const auto& col = P.block_columns;
    auto act = detail::active_nodes(P, E);
    // variables c_0..c_{B-1}, t; maximize -t
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (int j : act) {
        std::vector<double> row(blocks + 1, 0.0);
        for (int k = 0; k < blocks; ++k) row[k] = -col[k][j];
        A.push_back(row);
        b.push_back(-1.0);
    }
    for (int k = 0; k < blocks; ++k) {
        std::vector<double> row(blocks + 1, 0.0);
        row[k] = 1.0;
        row[blocks] = -1.0;
        A.push_back(row);
        b.push_back(0.0);
    }
    std::vector<double> c(blocks + 1, 0.0);
    c[blocks] = -1.0;
    auto lp = simplex_max(A, b, c);
    if (lp.status != LpStatus::optimal) throw NumericalError(std::string("capacity dual LP: ") + to_string(lp.status));
    double fmax = 0.0;
    for (int k = 0; k < blocks; ++k) fmax = std::max(fmax, lp.x[k]);
    res.dual_value = fmax;
    for (int k = 0; k < blocks; ++k)
        for (int n = 0; n < g.num_nodes(); ++n)
            if (chi[k][n] != 0.0) res.optimal_f[n] = lp.x[k];
    res.duality_gap = res.dual_value - res.primal_value;
    return res;
}

// C_V(E) = max over y in E of 1 / kcheck_V[1](y); singular nodes count 0.
inline double capacity_compact_formula(const AdjointProfile& P, const BoundarySet& E) {
    double v = 0.0;
    for (int j : E.nodes) {
        if (!P.active(j)) continue;
        if (!(P.a[j] > 0.0)) return std::numeric_limits<double>::infinity();
        v = std::max(v, 1.0 / P.a[j]);
    }
    return v;
}

// ---------------------------------------------------------------- good measures

struct GoodMeasureResult {
    std::vector<double> levels;             // n with K_n = {a <= n}
    std::vector<BoundaryMeasure> measures;  // mu restricted to K_n
    std::vector<Field> solutions;           // truncation limits for mu_n
    std::vector<double> z4_energy, z4_bound;
    bool z4_holds = true;
    double increase_violation = 0.0;  // max of u_{n-1} - u_n
    double representation_residual = 0.0;
    double missing_mass = 0.0;  // mu(boundary minus Z_V) - mu_last(boundary)
    Field limit;
};

inline GoodMeasureResult good_measure_limit(const Potential& V, const BoundaryMeasure& mu, const AdjointProfile& P,
                                            const SolverOptions& opt = {}) {
    if (!mu.nonnegative()) throw PreconditionError("good_measure_limit needs a nonnegative measure");
    const auto& g = *P.grid;
    const int Mt = g.num_boundary();
    auto nearest = [&](double th) {
        int j = static_cast<int>(std::lround(std::fmod(th, 2 * pi) / g.dtheta())) % Mt;
        return j < 0 ? j + Mt : j;
    };
    {
        std::ostringstream bad;
        for (const auto& at : mu.atoms)
            if (at.mass > 0 && P.singular[nearest(at.theta)]) bad << " " << nearest(at.theta);
        if (!bad.str().empty()) throw PreconditionError("measure charges singular boundary nodes:" + bad.str());
    }
    // node masses: density cell plus atoms snapped to their nearest node
    std::vector<double> node_mass(Mt, 0.0);
    for (int j = 0; j < Mt; ++j) node_mass[j] = mu.density[j] * g.boundary_weight();
    for (const auto& at : mu.atoms) node_mass[nearest(at.theta)] += at.mass;
    double amax = 0.0, target = 0.0;
    for (int j = 0; j < Mt; ++j)
        if (P.active(j) && node_mass[j] > 0) {
            amax = std::max(amax, P.a[j]);
            target += node_mass[j];
        }

    GoodMeasureResult out;
    double n = 1.0;
    for (int stage = 0; stage < 64; ++stage, n *= 2.0) {
        BoundaryMeasure mn(P.grid);
        double lhs = 0.0, mass = 0.0;
        for (int j = 0; j < Mt; ++j) {
            if (!P.active(j) || P.a[j] > n) continue;
            mn.density[j] = mu.density[j];
            lhs += P.a[j] * node_mass[j];
            mass += node_mass[j];
        }
        for (const auto& at : mu.atoms) {
            int j = nearest(at.theta);
            if (P.active(j) && P.a[j] <= n) mn.atoms.push_back(at);
        }
        if (mass > 0.0) {
            out.levels.push_back(n);
            out.z4_energy.push_back(lhs);
            out.z4_bound.push_back(n * mass);
            if (lhs > n * mass * (1.0 + 1e-12)) out.z4_holds = false;
            auto sol = solve_measure(V, mn, opt);
            if (!out.solutions.empty()) {
                const Field& prev = out.solutions.back();
                for (int k = 0; k < g.num_nodes(); ++k)
                    out.increase_violation = std::max(out.increase_violation, prev[k] - sol.limit[k]);
            }
            out.measures.push_back(mn);
            out.solutions.push_back(sol.limit);
            out.missing_mass = target - mass;
            if (n >= amax) {
                out.representation_residual = representation_residual(sol.limit, V, sol.data);
                break;
            }
        }
    }
    if (!out.solutions.empty()) out.limit = out.solutions.back();
    return out;
}

}  // namespace mbvp
