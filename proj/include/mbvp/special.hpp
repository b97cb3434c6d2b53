#pragma once

// Power series for the radial eigenfunction profiles and a few quadrature
// wrappers shared by the classifiers.

#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"

namespace mbvp {

// sum_m (sign * z)^m / (m! (nu+1)_m), z = x^2/4. sign=-1 gives
// Gamma(nu+1)(2/x)^nu J_nu(x); sign=+1 the same for I_nu.
inline double normalized_bessel_series(double x, double nu, int sign = -1) {
    const double z = 0.25 * x * x * sign;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m < 400; ++m) {
        term *= z / (m * (nu + m));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && m > 2) break;
    }
    return sum;
}

// d/dx of normalized_bessel_series.
inline double normalized_bessel_series_deriv(double x, double nu, int sign = -1) {
    const double z = 0.25 * x * x * sign;
    double term = 1.0, sum = 0.0;
    for (int m = 1; m < 400; ++m) {
        term *= z / (m * (nu + m));
        double d = term * 2.0 * m / x;
        sum += d;
        if (std::abs(d) <= 1e-17 * std::abs(sum) && m > 2) break;
    }
    return x == 0.0 ? 0.0 : sum;
}

// Second derivative in x.
inline double normalized_bessel_series_deriv2(double x, double nu, int sign = -1) {
    const double z = 0.25 * x * x * sign;
    double term = 1.0, sum = 0.0;
    if (x == 0.0) return sign * 0.5 / (nu + 1.0);
    for (int m = 1; m < 400; ++m) {
        term *= z / (m * (nu + m));
        double d = term * 2.0 * m * (2.0 * m - 1.0) / (x * x);
        sum += d;
        if (std::abs(d) <= 1e-17 * std::abs(sum) && m > 2) break;
    }
    return sum;
}

inline double bessel_i0(double x) { return normalized_bessel_series(x, 0.0, +1); }
inline double bessel_j0(double x) { return normalized_bessel_series(x, 0.0, -1); }
// J1(x) = -J0'(x)
inline double bessel_j1(double x) { return -normalized_bessel_series_deriv(x, 0.0, -1); }

// Bisection for a sign change of f on [a, b].
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-15,
                     int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa * fb > 0) throw NumericalError("bisection bracket has no sign change");
    for (int it = 0; it < max_iter && (b - a) > tol * std::max(1.0, std::abs(a)); ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Fixed 20-point Gauss-Legendre on [a, b].
inline double gauss20(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// Adaptive Gauss-Kronrod 15 on [a, b].
inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                       unsigned depth = 12) {
    if (b <= a) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, tol, &err);
}

// Integral over [a, b] with a = small: split into geometric pieces toward a,
// each handled by the fixed Gauss rule. Good for power-law integrands near a.
inline double graded_toward_left(const std::function<double(double)>& f, double a, double b, double ratio = 0.5) {
    if (b <= a) return 0.0;
    double sum = 0.0, hi = b;
    const double span = b - a;
    double lo = a + ratio * span;
    for (int piece = 0; piece < 60; ++piece) {
        sum += gauss20(f, lo, hi);
        hi = lo;
        double w = (hi - a) * ratio;
        if (hi - a <= 1e-14 * span) break;
        lo = a + w;
    }
    return sum;
}

}  // namespace mbvp
