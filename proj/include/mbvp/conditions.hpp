#pragma once

// Integral conditions on V: the t v(t) condition, the boundary-anchored
// I3 integral, its uniform tail version, and the level-set condition used
// for N >= 3. Every infinite integral is decided by cutoff refinement.

#include <cmath>
#include <functional>
#include <vector>

#include "ballquad.hpp"
#include "divergence.hpp"
#include "domain.hpp"
#include "potentials.hpp"

namespace mbvp {

namespace detail {

// Frame at a point z of the ball: `in` is the unit vector toward the
// centre, `side` spans the remaining plane direction (2D) or an axis-
// orthogonal direction (3D, axisymmetric integrands only).
struct LocalFrame {
    Point z, in, side;
    int dim;
    Point at(double rho, double psi) const {
        return z + rho * (std::cos(psi) * in + std::sin(psi) * side);
    }
};

inline LocalFrame frame_at(const BallDomain& d, Point z) {
    LocalFrame f;
    f.z = z;
    f.dim = d.dimension;
    double nz = norm(z);
    if (nz == 0.0) throw DomainError("local frame needs a point off the centre");
    f.in = (-1.0 / nz) * z;
    if (d.dimension == 2)
        f.side = {-f.in.y, f.in.x, 0.0};
    else
        f.side = std::abs(f.in.z) > 0.9 ? Point{1, 0, 0} : Point{0, 0, 1};
    return f;
}

// int_{lo}^{hi} rho^{N-1} int_0^{psi_max(rho)} F(x) m(psi) dpsi drho with
// m = 2 (2D, symmetric in psi) or 2 pi sin psi (3D, axisymmetric). Pieces
// in rho are dyadic toward lo.
inline double local_polar(const LocalFrame& fr, double lo, double hi, const std::function<double(double)>& psi_max,
                          const std::function<double(Point, double)>& F) {
    if (hi <= lo) return 0.0;
    auto radial = [&](double rho) {
        double pm = psi_max(rho);
        if (pm <= 0.0) return 0.0;
        auto ang = [&](double psi) {
            double m = fr.dim == 2 ? 2.0 : 2.0 * pi * std::sin(psi);
            return m * F(fr.at(rho, psi), rho);
        };
        double a = gauss20(ang, 0.0, 0.5 * pm) + gauss20(ang, 0.5 * pm, pm);
        return std::pow(rho, fr.dim - 1) * a;
    };
    double s = 0.0, top = hi;
    const double floor = std::max(lo, 1e-14);
    while (top > 2.0 * floor && top > lo + 1e-15) {
        double b = std::max(0.5 * top, lo);
        s += gauss20(radial, b, top);
        top = b;
        if (b == lo) return s;
    }
    return s + gauss20(radial, lo, top);
}

}  // namespace detail

// int_eps^s t v(t) dt over a dyadic cutoff schedule.
inline DivergenceVerdict check_t1(const std::function<double(double)>& v, double s, int levels = 11) {
    if (!(s > 0)) throw DomainError("upper limit must be positive");
    auto eps = dyadic(0.5 * s, levels);
    std::vector<double> I(levels);
    auto f = [&](double t) { return t * v(t); };
    double acc = gauss20(f, eps[0], s);
    I[0] = acc;
    for (int j = 1; j < levels; ++j) {
        acc += gauss20(f, eps[j], eps[j - 1]);
        I[j] = acc;
    }
    return classify(eps, I);
}

inline DivergenceVerdict check_t1(const Potential& V, double s, int levels = 11) {
    if (!V.is_radial()) throw DomainError("check_t1 needs a potential given by a distance profile");
    return check_t1([&](double t) { return V.profile(t); }, s, levels);
}

struct ConditionValue {
    DivergenceVerdict verdict;
    double value = 0.0;  // extrapolated integral when convergent, else inf
};

// int_0^D (int_{B_r(y)} V phi^2) dr / r^{N+1}
//   = int V phi^2 (|x-y|^{-N} - D^{-N}) / N dx,
// with inner cutoff delta > eta_j.
inline ConditionValue condition_I3(const Potential& V, const PolarGrid& g, const Eigenpair& e, double theta_y,
                                  int levels = 11) {
    const auto& dom = g.domain();
    const double R = dom.radius, D = dom.diameter();
    const int N = dom.dimension;
    auto etas = dyadic(0.25 * R, levels);
    std::function<double(double)> F;
    if (V.is_radial()) {
        F = [&](double r) {
            double v = V.profile(R - r), ph = e.value(r);
            if (N == 2) return v * ph * ph * r * (2 * pi / (R * R - r * r) - 2 * pi / (D * D)) / 2.0;
            return v * ph * ph * (4 * pi * r * r / (R * (R * R - r * r)) - 4 * pi * r * r / (D * D * D)) / 3.0;
        };
    } else {
        if (N != 2) throw DomainError("non-radial potentials are supported in two dimensions only");
        Point y = polar_point(R, theta_y);
        F = [&, y](double r) {
            double ph = e.value(r);
            auto h = [&](double th) {
                Point x = polar_point(r, th);
                return V(dom, x) * (1.0 / sqr(dist(x, y)) - 1.0 / (D * D)) / 2.0;
            };
            return r * ph * ph * ring_integral(V, dom, r, theta_y, h);
        };
    }
    ConditionValue out;
    out.verdict = classify(etas, cutoff_integrals(R, etas, F));
    out.value = out.verdict.convergent() ? out.verdict.value : std::numeric_limits<double>::infinity();
    return out;
}

namespace detail {

// int over {delta > eta} of B_eps(y) of V phi^2 (|x-y|^{-N} - eps^{-N})_+ / N,
// as a function of the inner cutoffs.
inline std::vector<double> marc0_inner(const Potential& V, const BallDomain& dom, const Eigenpair& e, double theta_y,
                                       double eps, const std::vector<double>& etas) {
    const double R = dom.radius;
    const int N = dom.dimension;
    std::function<double(double)> F;
    if (V.is_radial()) {
        F = [&](double r) {
            double dl = R - r;
            if (dl >= eps) return 0.0;
            double v = V.profile(dl), ph = e.value(r);
            if (N == 2) {
                double c = (R * R + r * r - eps * eps) / (2 * R * r);
                double tm = c <= -1 ? pi : std::acos(std::min(1.0, c));
                double a = 4.0 / (R * R - r * r) * std::atan((R + r) / (R - r) * std::tan(0.5 * tm));
                if (tm >= pi) a = 2 * pi / (R * R - r * r);
                return v * ph * ph * r * (a - 2 * tm / (eps * eps)) / 2.0;
            }
            double a = 2 * pi * r / R * (1.0 / (R - r) - 1.0 / eps);
            double cap = pi * r * (eps * eps - dl * dl) / R;
            return v * ph * ph * (a - cap / (eps * eps * eps)) / 3.0;
        };
    } else {
        if (N != 2) throw DomainError("non-radial potentials are supported in two dimensions only");
        Point y = polar_point(R, theta_y);
        F = [&, y](double r) {
            double dl = R - r;
            if (dl >= eps) return 0.0;
            double ph = e.value(r);
            auto h = [&](double th) {
                Point x = polar_point(r, th);
                double q = dist(x, y);
                if (q >= eps) return 0.0;
                return V(dom, x) * (1.0 / (q * q) - 1.0 / (eps * eps)) / 2.0;
            };
            return r * ph * ph * ring_integral(V, dom, r, theta_y, h);
        };
    }
    return cutoff_integrals(R, etas, F, eps);
}

// decay test on a positive sequence: ratio <= rmax over the last `levels`
inline bool decays(const std::vector<double>& s, double rmax, int levels) {
    double mx = 0.0;
    for (double v : s) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return true;
    for (std::size_t i = s.size() - levels; i < s.size(); ++i) {
        if (s[i - 1] <= 0.0) return s[i] <= 0.0;
        if (s[i] / s[i - 1] > rmax) return false;
    }
    return true;
}

}  // namespace detail

struct UniformTail {
    std::vector<double> eps;    // tail radii
    std::vector<double> tails;  // sup over base points of the tail integral
    bool uniform_vanishing = false;
    std::string note;
};

// Tails T(eps) = sup_y int_0^eps (int_{B_r(y)} V phi^2) dr / r^{N+1}; the
// flag is set when T decays (ratio <= 0.8 over the last three radii).
inline UniformTail condition_marc0(const Potential& V, const PolarGrid& g, const Eigenpair& e, int workers = 1) {
    const auto& dom = g.domain();
    UniformTail out;
    for (int t = 0; t < 6; ++t) out.eps.push_back(0.25 * dom.radius * std::ldexp(1.0, -t));
    std::vector<double> ys;
    if (V.is_radial())
        ys.push_back(0.0);
    else
        for (int j = 0; j < g.num_boundary(); ++j) ys.push_back(g.theta(j));
    std::vector<std::vector<double>> T(ys.size(), std::vector<double>(out.eps.size()));
    std::vector<int> bad(ys.size(), 0);
    parallel_for(ys.size(), workers, [&](std::size_t k) {
        for (std::size_t t = 0; t < out.eps.size(); ++t) {
            double ep = out.eps[t];
            auto etas = dyadic(0.5 * ep, 11);
            auto vd = classify(etas, detail::marc0_inner(V, dom, e, ys[k], ep, etas));
            if (vd.divergent()) bad[k] = 1;
            else if (!vd.convergent() && bad[k] == 0) bad[k] = 2;
            T[k][t] = vd.convergent() ? vd.value : std::numeric_limits<double>::infinity();
        }
    });
    for (std::size_t t = 0; t < out.eps.size(); ++t) {
        double m = 0.0;
        for (std::size_t k = 0; k < ys.size(); ++k) m = std::max(m, T[k][t]);
        out.tails.push_back(m);
    }
    for (int b : bad)
        if (b == 1) {
            out.note = "inner integral divergent";
            return out;
        }
    for (int b : bad)
        if (b == 2) {
            out.note = "inner integral inconclusive";
            return out;
        }
    out.uniform_vanishing = detail::decays(out.tails, 0.8, 3);
    if (!out.uniform_vanishing) out.note = "tails do not decay";
    return out;
}

struct LevelSetCondition {
    std::vector<double> d;         // ball radii
    std::vector<double> eps;       // level values
    std::vector<std::vector<double>> T;  // T[t][m] for d_t, eps_m
    std::vector<double> sup_over_eps;
    DivergenceVerdict eps_verdict;  // eps-sequence at the smallest radius
    bool uniform_vanishing = false;
    std::string note;
};

// T(d; eps) = int_0^d (int_{B_r(z)} V (phi - eps)_+^2) dr / r^{N+1} with z on
// the level set {phi = eps}, where the weight vanishes.
inline LevelSetCondition condition_3_1(const Potential& V, const PolarGrid& g, const Eigenpair& e,
                                       int workers = 1) {
    const auto& dom = g.domain();
    const double R = dom.radius;
    const int N = dom.dimension;
    LevelSetCondition out;
    for (int t = 0; t < 6; ++t) out.d.push_back(0.25 * std::ldexp(1.0, -t));
    out.eps = dyadic(0.25, 20);
    std::vector<double> zs;
    if (V.is_radial())
        zs.push_back(0.0);
    else if (N == 2)
        for (int j = 0; j < g.num_boundary(); ++j) zs.push_back(g.theta(j));
    else
        throw DomainError("non-radial potentials are supported in two dimensions only");

    out.T.assign(out.d.size(), std::vector<double>(out.eps.size(), 0.0));
    const std::size_t nd = out.d.size(), ne = out.eps.size();
    std::vector<double> vals(zs.size() * nd * ne, 0.0);
    parallel_for(zs.size() * ne, workers, [&](std::size_t task) {
        std::size_t iz = task / ne, m = task % ne;
        double ep = out.eps[m];
        double rz = bisect([&](double r) { return e.value(r) - ep; }, 0.0, R, 1e-15);
        Point z = N == 2 ? polar_point(rz, zs[iz]) : Point{0, 0, rz};
        auto fr = detail::frame_at(dom, z);
        auto psi_max = [&](double rho) {
            double c = rho / (2.0 * rz);
            return c >= 1.0 ? 0.0 : std::acos(c);
        };
        for (std::size_t t = 0; t < nd; ++t) {
            double d = out.d[t];
            auto F = [&](Point x, double rho) {
                double rx = norm(x);
                double w = e.value(rx) - ep;
                if (w <= 0.0) return 0.0;
                return V(dom, x) * w * w * (std::pow(rho, -N) - std::pow(d, -N)) / N;
            };
            double lo = 1e-6 * std::min(d, R - rz);
            vals[(iz * nd + t) * ne + m] = detail::local_polar(fr, lo, d, psi_max, F);
        }
    });
    for (std::size_t t = 0; t < nd; ++t)
        for (std::size_t m = 0; m < ne; ++m) {
            double mx = 0.0;
            for (std::size_t iz = 0; iz < zs.size(); ++iz) mx = std::max(mx, vals[(iz * nd + t) * ne + m]);
            out.T[t][m] = mx;
        }
    for (std::size_t t = 0; t < nd; ++t) {
        double mx = 0.0;
        for (double v : out.T[t]) mx = std::max(mx, v);
        out.sup_over_eps.push_back(mx);
    }
    out.eps_verdict = classify(out.eps, out.T.back());
    bool dec = detail::decays(out.sup_over_eps, 0.8, 3);
    out.uniform_vanishing = dec && !out.eps_verdict.divergent();
    if (!dec) out.note = "sup over levels does not decay with the radius";
    else if (out.eps_verdict.divergent()) out.note = "level sequence diverges at the smallest radius";
    return out;
}

}  // namespace mbvp
