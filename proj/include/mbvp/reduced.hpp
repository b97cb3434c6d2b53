#pragma once

// The limit kernel K_V = lim K_{V_k}, reduced measures mu*, the vanishing
// set Sing_V with two detectors (kernel limit and Green-function ratio),
// and the cone / conical-Z_V / path integral criteria.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "capacity.hpp"
#include "conditions.hpp"

namespace mbvp {

namespace detail {

// Limit of a monotone sequence whose differences shrink geometrically
// (Aitken on the last three terms). Falls back to the last term when the
// differences do not contract.
inline double geometric_limit(const std::vector<double>& x, double* ratio = nullptr) {
    const std::size_t n = x.size();
    if (ratio) *ratio = 0.0;
    if (n < 3) return x.back();
    double d1 = x[n - 2] - x[n - 3], d2 = x[n - 1] - x[n - 2];
    if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0)) return x.back();
    double s = d2 / d1;
    if (ratio) *ratio = s;
    if (!(s < 1.0)) return x.back();
    return x.back() + d2 * s / (1.0 - s);
}

// Wynn's epsilon algorithm. Returns the last entry of the highest even
// column; `alt` receives the last entry of the next lower even column.
inline double wynn_limit(const std::vector<double>& x, double* alt = nullptr) {
    std::vector<double> prev(x.size() + 1, 0.0), cur = x;
    std::vector<std::vector<double>> even{x};
    for (std::size_t c = 1; cur.size() > 1; ++c) {
        std::vector<double> nxt(cur.size() - 1);
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            double d = cur[i + 1] - cur[i];
            if (d == 0.0 || !std::isfinite(d)) {
                if (alt) *alt = even.size() > 1 ? even[even.size() - 2].back() : x.back();
                return even.back().back();
            }
            nxt[i] = prev[i + 1] + 1.0 / d;
        }
        prev = std::move(cur);
        cur = std::move(nxt);
        if (c % 2 == 0) even.push_back(cur);
    }
    if (alt) *alt = even.size() > 1 ? even[even.size() - 2].back() : x.back();
    return even.back().back();
}

}  // namespace detail

// ---------------------------------------------------------------- kernel limit

struct KernelOptions {
    std::vector<double> k_schedule = geometric_schedule(9, 4.0);
    std::vector<double> widths = {24.0, 12.0, 6.0, 3.0};  // mollification widths in boundary cells
    int x0_node = 0;                                      // evaluation node (default: the centre)
    int workers = 1;
};

struct KernelEstimate {
    double theta_y = 0.0;
    Point x0;
    std::vector<double> schedule, widths;
    std::vector<std::vector<double>> trace;  // [width][k] values at x0
    std::vector<double> k_limit;             // per width
    double value = 0.0;                      // extrapolated in k, then in the width
    double width_ratio = 0.0;                // contraction of successive width differences
    double poisson = 0.0;                    // K(x0, y)
};

// K_{V_k}(x0, y) approximated by the solution with a mollified Dirac at y.
// The k-limit per width is a geometric extrapolation; widths are combined
// the same way (Richardson in w^2 when only two widths are given).
inline KernelEstimate kv_kernel(const Potential& V, GridPtr g, double theta_y, const KernelOptions& opt = {}) {
    if (opt.k_schedule.empty() || opt.widths.empty()) throw ConfigError("kv_kernel needs nonempty schedules");
    if (g->is_boundary(opt.x0_node)) throw DomainError("kv_kernel needs an interior evaluation node");
    KernelEstimate ke;
    ke.theta_y = theta_y;
    ke.x0 = g->coord(opt.x0_node);
    ke.schedule = opt.k_schedule;
    ke.widths = opt.widths;
    ke.poisson = poisson_kernel(g->domain(), ke.x0, polar_point(g->R(), theta_y));
    const std::size_t nw = opt.widths.size(), nk = opt.k_schedule.size();
    ke.trace.assign(nw, std::vector<double>(nk, 0.0));
    std::vector<BoundaryMeasure> data;
    for (double w : opt.widths) data.push_back(mollify_atoms(dirac(g, theta_y), w * g->dtheta()));
    parallel_for(nw * nk, opt.workers, [&](std::size_t t) {
        std::size_t m = t / nk, j = t % nk;
        DiscreteSystem sys(g, sample_on_grid(truncate(V, opt.k_schedule[j]), *g));
        const auto& dens = data[m].density;
        ke.trace[m][j] = opt.x0_node == 0 ? sys.center_value(dens) : sys.solve(dens, nullptr)[opt.x0_node];
    });
    const double scale = ke.poisson;
    for (std::size_t m = 0; m < nw; ++m) {
        for (std::size_t j = 1; j < nk; ++j)
            if (ke.trace[m][j] > ke.trace[m][j - 1] + 1e-9 * scale) {
                std::ostringstream os;
                os << "kernel trace increases in k at width " << opt.widths[m] << " level " << opt.k_schedule[j];
                throw InvariantBreach(os.str());
            }
        ke.k_limit.push_back(std::max(0.0, detail::geometric_limit(ke.trace[m])));
    }
    if (nw >= 3) {
        // the width error is O(w^2) for smooth V near y but only O(w) when
        // V is singular in a cone at y; Aitken estimates the order
        ke.value = std::max(0.0, detail::geometric_limit(ke.k_limit, &ke.width_ratio));
    } else if (nw == 2) {
        double a = ke.k_limit[nw - 2], b = ke.k_limit[nw - 1];
        double r = opt.widths[nw - 2] / opt.widths[nw - 1];
        ke.value = std::max(0.0, b + (b - a) / (r * r - 1.0));
    } else {
        ke.value = ke.k_limit[0];
    }
    return ke;
}

enum class Membership { regular, singular, inconclusive };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::regular: return "regular";
        case Membership::singular: return "singular";
        case Membership::inconclusive: return "inconclusive";
    }
    return "?";
}

struct SingVerdict {
    Membership membership = Membership::inconclusive;
    double value = 0.0;      // detector statistic
    double threshold = 0.0;  // singular below this
    std::string note;
    bool singular() const { return membership == Membership::singular; }
};

// y in Sing_V when the extrapolated kernel falls below tau = 1e-3 K(x0,y);
// values in [tau, 10 tau] are inconclusive.
inline SingVerdict sing_detect_kernel(const Potential& V, GridPtr g, double theta_y, const KernelOptions& opt = {},
                                      KernelEstimate* out = nullptr) {
    auto ke = kv_kernel(V, g, theta_y, opt);
    SingVerdict v;
    v.value = ke.value;
    v.threshold = 1e-3 * ke.poisson;
    if (ke.value < v.threshold)
        v.membership = Membership::singular;
    else if (ke.value < 10.0 * v.threshold) {
        v.membership = Membership::inconclusive;
        v.note = "kernel limit stalls inside the inconclusive band";
    } else
        v.membership = Membership::regular;
    if (out) *out = std::move(ke);
    return v;
}

struct GreenRatioTrend {
    std::vector<double> d;                   // distances to the boundary along the path
    std::vector<std::vector<double>> trace;  // [k][d] ratios
    std::vector<double> ratio;               // k-extrapolated ratio per distance
    double limit = 0.0;                      // extrapolated ratio at the boundary
    double contraction = 0.0;                // fitted ratio of successive differences
};

// g^V_k / g^0 with the pole at the centre, along the radius toward y at
// distances d_j = R 2^{-j-1}. The discrete pole is a unit source on the
// centre cell; g^0 = ln(R/|x|) / 2 pi is exact.
inline SingVerdict sing_detect_green_ratio(const Potential& V, GridPtr g, double theta_y,
                                           const std::vector<double>& k_schedule = geometric_schedule(9, 4.0),
                                           int levels = 6, GreenRatioTrend* out = nullptr, int workers = 1) {
    if (g->dim() != 2) throw DomainError("green-ratio detector is implemented for the disk");
    const auto& G = *g;
    const double R = G.R();
    GreenRatioTrend tr;
    for (int j = 0; j < levels; ++j) tr.d.push_back(R * std::ldexp(0.5, -j));
    int jy = static_cast<int>(std::lround(theta_y / G.dtheta())) % G.Mt();
    if (jy < 0) jy += G.Mt();
    const int nk = static_cast<int>(k_schedule.size());
    tr.trace.assign(nk, std::vector<double>(levels, 0.0));
    parallel_for(nk, workers, [&](std::size_t k) {
        DiscreteSystem sys(g, sample_on_grid(truncate(V, k_schedule[k]), G));
        std::vector<double> src(G.num_nodes(), 0.0);
        src[0] = 1.0 / sys.volume(0);
        Field u = sys.solve(std::vector<double>(G.num_boundary(), 0.0), &src);
        for (int j = 0; j < levels; ++j) {
            double r = R - tr.d[j];
            auto it = std::upper_bound(G.radii().begin(), G.radii().end(), r);
            int i = std::clamp(static_cast<int>(it - G.radii().begin()) - 1, 0, G.M() - 1);
            double t = (r - G.r(i)) / (G.r(i + 1) - G.r(i));
            double lo = i == 0 ? u[0] : u[G.node(i, jy)];
            double hi = i + 1 == G.M() ? 0.0 : u[G.node(i + 1, jy)];
            double gv = (1 - t) * lo + t * hi;
            tr.trace[k][j] = gv / (std::log(R / r) / (2 * pi));
        }
    });
    for (int j = 0; j < levels; ++j) {
        std::vector<double> col(nk);
        for (int k = 0; k < nk; ++k) col[k] = tr.trace[k][j];
        tr.ratio.push_back(std::max(0.0, detail::geometric_limit(col)));
    }
    tr.limit = std::max(0.0, detail::geometric_limit(tr.ratio, &tr.contraction));
    SingVerdict v;
    v.value = tr.ratio.front() > 0 ? tr.limit / tr.ratio.front() : 0.0;
    v.threshold = 1e-2;
    if (v.value < v.threshold)
        v.membership = Membership::singular;
    else if (v.value < 10.0 * v.threshold) {
        v.membership = Membership::inconclusive;
        v.note = "ratio limit inside the inconclusive band";
    } else
        v.membership = Membership::regular;
    if (out) *out = std::move(tr);
    return v;
}

// ---------------------------------------------------------------- cone criteria

struct ConeRegion {
    double theta_y = 0.0;
    double aperture = 0.5;  // C = {x : delta(x) >= aperture |x - y|}
};

namespace detail {

// cutoff-refined int over the cone of F(x, rho), rho = |x - y|
inline DivergenceVerdict cone_integral(const BallDomain& dom, const ConeRegion& c,
                                       const std::function<double(Point, double)>& F, int levels = 11) {
    const double R = dom.radius, e = c.aperture;
    if (!(e > 0 && e < 1)) throw DomainError("cone aperture must lie in (0,1)");
    Point y = dom.dimension == 2 ? polar_point(R, c.theta_y) : Point{0, 0, R};
    auto fr = frame_at(dom, y);
    const double rho_max = 2 * R / (1 + e);
    auto psi_max = [&](double rho) {
        double cs = e + rho * (1 - e * e) / (2 * R);
        return cs >= 1.0 ? 0.0 : std::acos(cs);
    };
    auto etas = dyadic(0.25 * rho_max, levels);
    std::vector<double> I(levels);
    double acc = local_polar(fr, etas[0], rho_max, psi_max, F);
    I[0] = acc;
    for (int j = 1; j < levels; ++j) {
        acc += local_polar(fr, etas[j], etas[j - 1], psi_max, F);
        I[j] = acc;
    }
    return classify(etas, I);
}

}  // namespace detail

// int_C V |x - y|^{2-N} dx with the inner cutoff in |x - y|.
inline DivergenceVerdict cone_criterion(const Potential& V, const BallDomain& dom, const ConeRegion& c,
                                        int levels = 11) {
    const int N = dom.dimension;
    return detail::cone_integral(
        dom, c, [&](Point x, double rho) { return V(dom, x) * std::pow(rho, 2.0 - N); }, levels);
}

// int_C K(x, y) V phi dx with the inner cutoff in |x - y|.
inline DivergenceVerdict tilde_zv(const Potential& V, const BallDomain& dom, const Eigenpair& e, const ConeRegion& c,
                                  int levels = 11) {
    Point y = dom.dimension == 2 ? polar_point(dom.radius, c.theta_y) : Point{0, 0, dom.radius};
    return detail::cone_integral(
        dom, c, [&, y](Point x, double) { return poisson_kernel(dom, x, y) * V(dom, x) * e.value(norm(x)); },
        levels);
}

// int_0^1 V(gamma(t)) t dt with the cutoff near t = 0.
inline DivergenceVerdict path_criterion(const Potential& V, const BallDomain& dom,
                                        const std::function<Point(double)>& gamma, int levels = 11) {
    auto etas = dyadic(0.25, levels);
    auto f = [&](double t) { return V(dom, gamma(t)) * t; };
    std::vector<double> I(levels);
    double acc = 0.0;
    for (double a = etas[0]; a < 1.0; a *= 2.0) acc += gauss20(f, a, std::min(1.0, 2 * a));
    I[0] = acc;
    for (int j = 1; j < levels; ++j) {
        acc += gauss20(f, etas[j], etas[j - 1]);
        I[j] = acc;
    }
    return classify(etas, I);
}

// gamma(t) = y (1 - t/2): the radius toward y, inside every cone at y.
inline std::function<Point(double)> radial_path(const BallDomain& dom, double theta_y) {
    Point y = dom.dimension == 2 ? polar_point(dom.radius, theta_y) : Point{0, 0, dom.radius};
    return [y](double t) { return (1.0 - 0.5 * t) * y; };
}

// ---------------------------------------------------------------- reduced measures

struct RecoveryOptions {
    std::vector<double> rho = {0.04, 0.02, 0.01, 0.005, 0.0025};  // boundary-strip widths (relative to R)
};

struct Recovery {
    BoundaryMeasure measure;         // recovered boundary measure (clipped to [0, data])
    std::vector<double> strip_mass;  // extrapolated-in-k loss per strip width
    double loss = 0.0;               // extrapolated loss
    double uncertainty = 0.0;        // |difference of the two highest extrapolants| + clipped mass
    double clipped = 0.0;            // mass removed by clipping
    double k_contraction = 0.0;
};

// Boundary measure of w = lim (u_k + G[V u_k]) for the truncation chain
// of `sol`. Mass of V_k u_k in a strip {delta < rho} is carried to the
// boundary with the weight ln(R/|x|) (harmonic measure seen from the
// centre); the loss is extrapolated in k per strip, then in rho -> 0 by
// the epsilon algorithm on the strip totals. The nodal profile of the
// narrowest strip is rescaled to the extrapolated total.
inline Recovery recover_boundary_measure(const MeasureSolution& sol, const Potential& V,
                                         const RecoveryOptions& opt = {}) {
    const auto& g = *sol.data.grid;
    if (g.dim() != 2) throw DomainError("boundary recovery is implemented for the disk");
    if (opt.rho.empty()) throw ConfigError("recovery needs at least one strip width");
    const int M = g.M(), Mt = g.Mt();
    const double R = g.R();
    const std::size_t nk = sol.schedule.size(), nr = opt.rho.size();
    // lam[k][r][j]
    std::vector<std::vector<std::vector<double>>> lam(nk, std::vector<std::vector<double>>(nr, std::vector<double>(Mt, 0.0)));
    for (std::size_t k = 0; k < nk; ++k) {
        DiscreteSystem sys(sol.data.grid, sample_on_grid(truncate(V, sol.schedule[k]), g));
        const auto& v = sys.potential();
        const Field& u = sol.iterates[k];
        for (int i = 1; i < M; ++i) {
            // radial extent of the ring's control volume, in delta
            double hi = R - 0.5 * (g.r(i - 1) + g.r(i)), lo = R - 0.5 * (g.r(i) + g.r(i + 1));
            double wgt = std::log(R / g.r(i)) * sys.volume(g.node(i, 0)) / g.dtheta();
            for (std::size_t r = 0; r < nr; ++r) {
                double frac = std::clamp((opt.rho[r] * R - lo) / (hi - lo), 0.0, 1.0);
                if (frac == 0.0) continue;
                for (int j = 0; j < Mt; ++j) {
                    int n = g.node(i, j);
                    lam[k][r][j] += frac * wgt * v[n] * u[n];
                }
            }
        }
    }
    Recovery rec;
    // k-extrapolation: contraction from the strip totals, applied per node
    std::vector<double> last(Mt, 0.0);
    for (std::size_t r = 0; r < nr; ++r) {
        std::vector<double> tot(nk, 0.0);
        for (std::size_t k = 0; k < nk; ++k)
            for (double x : lam[k][r]) tot[k] += x;
        double s = 0.0;
        detail::geometric_limit(tot, &s);
        if (!(s > 0 && s < 1)) s = 0.0;
        if (r == nr - 1) rec.k_contraction = s;
        double t = 0.0;
        for (int j = 0; j < Mt; ++j) {
            double a = lam[nk - 1][r][j], b = nk > 1 ? lam[nk - 2][r][j] : a;
            double l = a + (a - b) * s / (1.0 - s);
            if (r == nr - 1) last[j] = l;
            t += l;
        }
        rec.strip_mass.push_back(t * g.boundary_weight());
    }
    double alt = rec.strip_mass.back();
    double total = nr >= 3 ? detail::wynn_limit(rec.strip_mass, &alt) : rec.strip_mass.back();
    if (!std::isfinite(total)) total = alt = rec.strip_mass.back();
    total = std::max(total, 0.0);
    const double scale = rec.strip_mass.back() > 0 ? total / rec.strip_mass.back() : 0.0;
    rec.measure = BoundaryMeasure(sol.data.grid);
    for (int j = 0; j < Mt; ++j) {
        double d = sol.data.density[j] - scale * last[j];
        double c = std::clamp(d, 0.0, sol.data.density[j]);
        rec.clipped += std::abs(d - c) * g.boundary_weight();
        rec.measure.density[j] = c;
    }
    rec.loss = sol.data.mass() - rec.measure.mass();
    rec.uncertainty = std::abs(total - alt) + rec.clipped;
    return rec;
}

struct ReducedOptions {
    SolverOptions solver = {geometric_schedule(13, 4.0), 3.0, 1e-9, 1};
    RecoveryOptions recovery;
};

struct ReducedResult {
    Field limit_field;     // v = lim u_k
    Field harmonic_part;   // w = u_k + G[V_k u_k] off the narrowest strip, at the last level
    BoundaryMeasure reduced_measure;
    double mass_loss = 0.0;          // mu(boundary) - mu*(boundary)
    double centre_mass = 0.0;        // |boundary| w(0); compare with mu mass minus the narrowest raw strip
    double harmonic_residual = 0.0;  // sup |Lap_h w| / sup |w| on nodes with delta >= 0.05
    Recovery recovery;
    SolveReport report;
};

inline ReducedResult reduce(const Potential& V, const BoundaryMeasure& mu, const ReducedOptions& opt = {}) {
    auto sol = solve_measure(V, mu, opt.solver);
    const auto& g = *mu.grid;
    ReducedResult rr;
    rr.report = sol.report;
    rr.limit_field = sol.limit;
    // w = u + G[V u] at the last truncation level, with V u cut off in the
    // narrowest recovery strip (that part is what the recovery extrapolates)
    const double cut = opt.recovery.rho.empty() ? 0.0 : opt.recovery.rho.back() * g.R();
    auto v = sample_on_grid(truncate(V, sol.schedule.back()), g);
    const Field& uk = sol.iterates.back();
    Field f(mu.grid);
    for (int n = 0; n < g.num_nodes(); ++n)
        f[n] = g.is_boundary(n) || g.delta(g.ring_of(n)) < cut ? 0.0 : v[n] * uk[n];
    Field gv = green_apply(f);
    rr.harmonic_part = Field(mu.grid);
    for (int n = 0; n < g.num_nodes(); ++n) rr.harmonic_part[n] = uk[n] + gv[n];
    rr.centre_mass = g.domain().boundary_measure() * rr.harmonic_part[0];
    {
        DiscreteSystem lap(mu.grid, std::vector<double>(g.num_nodes(), 0.0));
        auto Aw = lap.apply(rr.harmonic_part.values);
        double num = 0.0;
        for (int n = 0; n < g.num_nodes(); ++n) {
            int i = g.ring_of(n);
            if (i == g.M() || g.delta(i) < 0.05 * g.R()) continue;
            num = std::max(num, std::abs(Aw[n]) / lap.volume(n));
        }
        double den = std::max(sup_abs(rr.harmonic_part), 1e-300);
        rr.harmonic_residual = num / den;
    }
    if (mu.mass() == 0.0) {
        rr.reduced_measure = BoundaryMeasure(mu.grid);
        return rr;
    }
    rr.recovery = recover_boundary_measure(sol, V, opt.recovery);
    rr.reduced_measure = rr.recovery.measure;
    rr.mass_loss = mu.mass() - rr.reduced_measure.mass();
    return rr;
}

}  // namespace mbvp
