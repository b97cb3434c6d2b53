#pragma once

// Quadrature over ball regions for integrands with a boundary singularity:
// dyadic bands in the distance to the boundary, and angular integrals
// graded toward the angle of the boundary point carrying the singularity.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "potentials.hpp"
#include "special.hpp"

namespace mbvp {

// int_a^b f, with Gauss pieces shrinking geometrically toward a; stops
// grading once the remaining piece is below `floor`.
inline double graded(const std::function<double(double)>& f, double a, double b, double floor) {
    if (b <= a) return 0.0;
    double sum = 0.0, hi = b;
    while (hi - a > floor && hi - a > 1e-15 * (b - a + 1.0)) {
        double lo = a + 0.5 * (hi - a);
        sum += gauss20(f, lo, hi);
        hi = lo;
    }
    return sum + gauss20(f, a, hi);
}

// int_lo^hi f(theta) dtheta where f may peak sharply (width ~ scale) at
// `peak` (taken modulo 2 pi).
inline double angular(const std::function<double(double)>& f, double lo, double hi, double peak, double scale) {
    if (hi <= lo) return 0.0;
    double p = peak;
    while (p < lo) p += 2 * pi;
    while (p - 2 * pi >= lo) p -= 2 * pi;
    const double fl = std::max(scale * 1e-3, 1e-14);
    if (p > lo && p < hi) {
        auto left = [&](double t) { return f(p - t); };
        return graded(left, 0.0, p - lo, fl) + graded(f, p, hi, fl);
    }
    // peak outside: grade toward the nearer end if it is close
    double dl = std::abs(wrap_angle(lo - peak)), dh = std::abs(wrap_angle(hi - peak));
    if (std::min(dl, dh) < 8 * scale) {
        if (dl <= dh) return graded(f, lo, hi, fl);
        auto rev = [&](double t) { return f(hi - t); };
        return graded(rev, 0.0, hi - lo, fl);
    }
    return adaptive(f, lo, hi, 1e-11, 15);
}

// int_a^b f with grading toward both ends.
inline double graded_both(const std::function<double(double)>& f, double a, double b, double floor) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    auto rev = [&](double t) { return f(b - t); };
    return graded(f, a, m, floor) + graded(rev, 0.0, b - m, floor);
}

// Angular integral over the circle of radius r of h(theta), restricted to
// the support of V, graded toward theta_y (and toward the vertex of a cone
// potential, where V peaks).
inline double ring_integral(const Potential& V, const BallDomain& d, double r, double theta_y,
                            const std::function<double(double)>& h) {
    const double scale = std::max(d.radius - r, 1e-12);
    double s = 0.0;
    if (V.kind == PotentialKind::ConeSingular) {
        const double fl = std::max(scale * 1e-3, 1e-14);
        for (auto iv : V.angular_support(d, r)) {
            std::vector<double> cuts{iv.lo, iv.hi};
            for (double p : {V.vertex, theta_y})
                for (int k = -1; k <= 1; ++k) {
                    double q = p + 2 * pi * k;
                    if (q > iv.lo && q < iv.hi) cuts.push_back(q);
                }
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s += graded_both(h, cuts[k], cuts[k + 1], fl);
        }
        return s;
    }
    for (auto iv : V.angular_support(d, r)) {
        if (iv.hi - iv.lo >= 2 * pi - 1e-14)
            s += angular(h, theta_y - pi, theta_y + pi, theta_y, scale);
        else
            s += angular(h, iv.lo, iv.hi, theta_y, scale);
    }
    return s;
}

// int over {a < delta < b} of F(r) dr (F already contains all Jacobians).
inline double delta_band(double R, double a, double b, const std::function<double(double)>& F) {
    b = std::min(b, R);
    if (b <= a) return 0.0;
    return gauss20(F, R - b, R - a);
}

// I(eta_j) = int_{delta > eta_j} F for the dyadic cutoffs in `etas`
// (decreasing). The region above etas[0] is split into dyadic bands.
inline std::vector<double> cutoff_integrals(double R, const std::vector<double>& etas,
                                            const std::function<double(double)>& F, double outer = -1.0) {
    if (outer <= 0) outer = R;
    std::vector<double> out(etas.size());
    double base = 0.0;
    for (double a = etas[0]; a < outer;) {
        double b = std::min(2 * a, outer);
        if (outer - b < 1e-12 * R) b = outer;
        base += delta_band(R, a, b, F);
        a = b;
    }
    out[0] = base;
    for (std::size_t j = 1; j < etas.size(); ++j) out[j] = out[j - 1] + delta_band(R, etas[j], etas[j - 1], F);
    return out;
}

}  // namespace mbvp
