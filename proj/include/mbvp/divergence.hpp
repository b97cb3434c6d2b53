#pragma once

// Refinement-based verdict on whether a cutoff integral I(eps) stays finite
// as eps -> 0. Three growth laws are fitted to the last five samples:
//   finite  A + B eps^q        (q in [0.25, 4])
//   log     A + B log(1/eps)
//   power   A + B eps^{-p}     (p in [0.25, 4])

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace mbvp {

enum class Classification { convergent, divergent_log, divergent_power, inconclusive };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::convergent: return "convergent";
        case Classification::divergent_log: return "divergent_log";
        case Classification::divergent_power: return "divergent_power";
        case Classification::inconclusive: return "inconclusive";
    }
    return "?";
}

struct DivergenceVerdict {
    Classification classification = Classification::inconclusive;
    double p = 0.0;          // exponent for divergent_power
    double q = 0.0;          // decay rate of the finite fit
    double value = 0.0;      // extrapolated limit when convergent
    double fit_error = 0.0;  // relative rms of the chosen fit
    std::vector<std::pair<double, double>> samples;  // (eps, I(eps)), eps decreasing
    std::string note;

    bool convergent() const { return classification == Classification::convergent; }
    bool divergent() const {
        return classification == Classification::divergent_log || classification == Classification::divergent_power;
    }
};

struct DivergenceOptions {
    double ratio_max = 0.75;   // increments must shrink at least this fast
    int ratio_levels = 4;      // ... over this many trailing increments
    int fit_points = 5;
    double tie_band = 0.10;    // best two fits closer than this -> inconclusive
};

namespace detail {

// least squares of y ~ A + B f over points, returns rms residual
inline double ls2(const std::vector<double>& f, const std::vector<double>& y, double& A, double& B) {
    const std::size_t n = f.size();
    double sf = 0, sy = 0, sff = 0, sfy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sf += f[i];
        sy += y[i];
        sff += f[i] * f[i];
        sfy += f[i] * y[i];
    }
    double den = n * sff - sf * sf;
    if (std::abs(den) < 1e-300) {
        A = sy / n;
        B = 0;
    } else {
        B = (n * sfy - sf * sy) / den;
        A = (sy - B * sf) / n;
    }
    double r = 0;
    for (std::size_t i = 0; i < n; ++i) r += sqr(y[i] - A - B * f[i]);
    return std::sqrt(r / n);
}

// best exponent on [lo, hi] for y ~ A + B eps^{sign*e}
inline double fit_exponent(const std::vector<double>& eps, const std::vector<double>& y, double sign, double lo,
                           double hi, double& A, double& B, double& e_best) {
    auto err = [&](double e) {
        std::vector<double> f(eps.size());
        for (std::size_t i = 0; i < eps.size(); ++i) f[i] = std::pow(eps[i], sign * e);
        double a, b;
        return ls2(f, y, a, b);
    };
    double best = lo, bestv = err(lo);
    for (double e = lo; e <= hi + 1e-12; e += 0.01) {
        double v = err(e);
        if (v < bestv) {
            bestv = v;
            best = e;
        }
    }
    double a = std::max(lo, best - 0.01), b = std::min(hi, best + 0.01);
    for (int it = 0; it < 60; ++it) {
        double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        if (err(m1) < err(m2))
            b = m2;
        else
            a = m1;
    }
    e_best = 0.5 * (a + b);
    std::vector<double> f(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) f[i] = std::pow(eps[i], sign * e_best);
    return ls2(f, y, A, B);
}

}  // namespace detail

inline DivergenceVerdict classify(const std::vector<double>& eps, const std::vector<double>& I,
                                  const DivergenceOptions& opt = {}) {
    DivergenceVerdict v;
    const std::size_t n = eps.size();
    if (n != I.size() || n < static_cast<std::size_t>(std::max(opt.fit_points, opt.ratio_levels + 1)))
        throw NumericalError("divergence protocol needs matching sample lists of sufficient length");
    for (std::size_t i = 0; i < n; ++i) v.samples.emplace_back(eps[i], I[i]);

    double scale = 0;
    for (double x : I) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) {
        v.classification = Classification::convergent;
        v.value = 0.0;
        v.note = "identically zero";
        return v;
    }
    for (double x : I)
        if (!std::isfinite(x)) {
            v.classification = Classification::divergent_power;
            v.p = std::numeric_limits<double>::infinity();
            v.note = "non-finite sample";
            return v;
        }

    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = I[i + 1] - I[i];
    const std::size_t L = opt.ratio_levels;
    double tail_max = 0;
    for (std::size_t i = d.size() - L; i < d.size(); ++i) tail_max = std::max(tail_max, std::abs(d[i]));
    if (tail_max <= 1e-13 * scale) {
        v.classification = Classification::convergent;
        v.value = I.back();
        v.note = "saturated";
        return v;
    }

    const std::size_t k = opt.fit_points;
    std::vector<double> e(eps.end() - k, eps.end()), y(I.end() - k, I.end());
    for (auto& t : y) t /= scale;

    std::array<double, 3> err{};
    double Af, Bf, qf, Al, Bl, Ap, Bp, pp;
    err[0] = detail::fit_exponent(e, y, +1.0, 0.25, 4.0, Af, Bf, qf);
    {
        std::vector<double> f(k);
        for (std::size_t i = 0; i < k; ++i) f[i] = std::log(1.0 / e[i]);
        err[1] = detail::ls2(f, y, Al, Bl);
    }
    err[2] = detail::fit_exponent(e, y, -1.0, 0.25, 4.0, Ap, Bp, pp);
    for (auto& x : err) x = std::max(x, 1e-14);

    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return err[a] < err[b]; });
    const int best = order[0];
    v.fit_error = err[best];
    v.q = qf;

    // geometric decay of trailing increments
    bool geometric = true;
    for (std::size_t i = d.size() - L + 1; i < d.size(); ++i) {
        double prev = d[i - 1], cur = d[i];
        if (std::abs(prev) <= 1e-13 * scale) {
            if (std::abs(cur) > 1e-13 * scale) geometric = false;
            continue;
        }
        double ratio = cur / prev;
        if (!(ratio >= -1e-9 && ratio <= opt.ratio_max)) geometric = false;
    }

    if (err[order[1]] - err[best] < opt.tie_band * err[order[1]]) {
        v.classification = Classification::inconclusive;
        v.note = "best two fits within tie band";
        if (best == 0 && geometric) v.value = Af * scale;
        return v;
    }

    if (best == 0) {
        if (geometric) {
            v.classification = Classification::convergent;
            v.value = Af * scale;
        } else {
            v.classification = Classification::inconclusive;
            v.note = "finite law fits but increments do not decay geometrically";
        }
    } else if (best == 1) {
        v.classification = Bl > 0 ? Classification::divergent_log : Classification::inconclusive;
        if (Bl <= 0) v.note = "log law with nonpositive slope";
    } else {
        v.classification = Bp > 0 ? Classification::divergent_power : Classification::inconclusive;
        v.p = pp;
        if (Bp <= 0) v.note = "power law with nonpositive amplitude";
    }
    if (v.classification == Classification::convergent || v.classification == Classification::inconclusive) return v;
    if (geometric) {
        v.classification = Classification::inconclusive;
        v.note = "divergent law fits but increments decay geometrically";
    }
    return v;
}

// Dyadic cutoff schedule eps_j = eps0 2^{-j}, j = 0..levels-1.
inline std::vector<double> dyadic(double eps0, int levels = 11) {
    std::vector<double> e(levels);
    for (int j = 0; j < levels; ++j) e[j] = eps0 * std::ldexp(1.0, -j);
    return e;
}

}  // namespace mbvp
