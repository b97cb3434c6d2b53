#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "special.hpp"

namespace mbvp {

struct BallDomain {
    int dimension = 2;
    double radius = 1.0;

    BallDomain() = default;
    BallDomain(int dim, double R) : dimension(dim), radius(R) {
        if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
        if (!(R > 0)) throw DomainError("radius must be positive");
    }

    // Area of the unit (N-1)-sphere.
    double omega() const { return dimension == 2 ? 2.0 * pi : 4.0 * pi; }
    double boundary_measure() const { return omega() * std::pow(radius, dimension - 1); }
    double volume() const { return omega() * std::pow(radius, dimension) / dimension; }
    double diameter() const { return 2.0 * radius; }
};

inline double distance_to_boundary(const BallDomain& d, Point x) {
    double r = norm(x);
    if (r > d.radius * (1.0 + 1e-14)) throw DomainError("point outside the closed ball");
    return std::max(0.0, d.radius - r);
}

struct GridSpec {
    int dimension = 2;
    double radius = 1.0;
    int m_radial = 256;
    int m_angular = 256;
    double gamma = 2.0;
};

// Graded polar (N=2) or radial (N=3) grid. Ring i sits at
// r_i = R(1-(1-i/M)^gamma); ring M is the boundary. In 2D node 0 is the
// centre and ring i>=1 holds nodes 1+(i-1)Mt .. i*Mt.
class PolarGrid {
public:
    explicit PolarGrid(const GridSpec& s) : spec_(s), dom_(s.dimension, s.radius) {
        if (s.m_radial < 4) throw DomainError("need at least 4 radial intervals");
        if (s.dimension == 2 && s.m_angular < 4) throw DomainError("need at least 4 angular nodes");
        if (!(s.gamma >= 1.0)) throw DomainError("grading exponent must be >= 1");
        const int M = s.m_radial;
        mt_ = s.dimension == 2 ? s.m_angular : 1;
        r_.resize(M + 1);
        dr_ds_.resize(M + 1);
        for (int i = 0; i <= M; ++i) {
            double t = 1.0 - static_cast<double>(i) / M;
            r_[i] = s.radius * (1.0 - std::pow(t, s.gamma));
            dr_ds_[i] = s.radius * s.gamma * std::pow(t, s.gamma - 1.0);
        }
        r_[M] = s.radius;
        // radial quadrature in s (Simpson when M even, else trapezoid)
        rad_w_.assign(M + 1, 0.0);
        const double h = 1.0 / M;
        for (int i = 0; i <= M; ++i) {
            double c;
            if (M % 2 == 0)
                c = (i == 0 || i == M) ? 1.0 / 3.0 : (i % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
            else
                c = (i == 0 || i == M) ? 0.5 : 1.0;
            double jac = s.dimension == 2 ? r_[i] : 4.0 * pi * r_[i] * r_[i];
            rad_w_[i] = c * h * dr_ds_[i] * jac;
        }
        dtheta_ = 2.0 * pi / mt_;
        node_w_.assign(num_nodes(), 0.0);
        for (int i = 0; i <= M; ++i)
            for (int j = 0; j < (i == 0 ? 1 : mt_); ++j)
                node_w_[node(i, j)] = s.dimension == 2 ? rad_w_[i] * (i == 0 ? 2.0 * pi : dtheta_) : rad_w_[i];
        rhalf_.resize(M);
        for (int i = 0; i < M; ++i) rhalf_[i] = 0.5 * (r_[i] + r_[i + 1]);
    }

    const GridSpec& spec() const { return spec_; }
    const BallDomain& domain() const { return dom_; }
    int dim() const { return spec_.dimension; }
    double R() const { return spec_.radius; }
    int M() const { return spec_.m_radial; }
    int Mt() const { return mt_; }
    double dtheta() const { return dtheta_; }

    int num_nodes() const { return dim() == 2 ? 1 + M() * mt_ : M() + 1; }
    int num_boundary() const { return mt_; }
    int node(int ring, int j) const {
        if (dim() == 3 || ring == 0) return ring;
        return 1 + (ring - 1) * mt_ + ((j % mt_) + mt_) % mt_;
    }
    int ring_of(int n) const { return dim() == 3 ? n : (n == 0 ? 0 : 1 + (n - 1) / mt_); }
    int angle_index_of(int n) const { return dim() == 3 || n == 0 ? 0 : (n - 1) % mt_; }
    int boundary_node(int j) const { return node(M(), j); }

    double r(int ring) const { return r_[ring]; }
    const std::vector<double>& radii() const { return r_; }
    double rhalf(int i) const { return rhalf_[i]; }
    double delta(int ring) const { return R() - r_[ring]; }
    double theta(int j) const { return dtheta_ * j; }
    Point coord(int n) const {
        int i = ring_of(n);
        if (dim() == 3) return {0.0, 0.0, r_[i]};
        return polar_point(r_[i], theta(angle_index_of(n)));
    }
    Point boundary_point(int j) const { return dim() == 2 ? polar_point(R(), theta(j)) : Point{0, 0, R()}; }
    bool is_boundary(int n) const { return ring_of(n) == M(); }

    // Area/volume quadrature weight per node (zero on the centre and boundary).
    double weight(int n) const { return node_w_[n]; }
    const std::vector<double>& weights() const { return node_w_; }
    // Radial weight for integrals of the form int g(r) r^{N-1} dr (times
    // the solid angle for N=3).
    double radial_weight(int ring) const { return rad_w_[ring]; }
    double boundary_weight() const { return dim() == 2 ? R() * dtheta_ : 4.0 * pi * R() * R(); }
    // Closest interior layer distance the grid can resolve.
    double min_delta() const { return delta(M() - 1); }

    std::string descriptor_json() const {
        std::ostringstream os;
        os << "{\"dimension\":" << dim() << ",\"radius\":" << R() << ",\"M_radial\":" << M()
           << ",\"M_angular\":" << Mt() << ",\"gamma\":" << spec_.gamma << "}";
        return os.str();
    }

private:
    GridSpec spec_;
    BallDomain dom_;
    int mt_ = 1;
    double dtheta_ = 0.0;
    std::vector<double> r_, dr_ds_, rad_w_, node_w_, rhalf_;
};

using GridPtr = std::shared_ptr<const PolarGrid>;

inline GridPtr make_grid(int dim = 2, double R = 1.0, int M = 256, int Mt = 256, double gamma = 2.0) {
    return std::make_shared<const PolarGrid>(GridSpec{dim, R, M, Mt, gamma});
}

// Boundary layer Sigma_eps = {|x| = R - eps} sampled at the angular nodes.
struct Layer {
    double eps = 0.0;
    double r = 0.0;
    std::vector<double> theta;
    std::vector<double> weight;      // surface weight per node
    std::vector<Point> points;       // x on Sigma_eps
    std::vector<Point> projection;   // sigma(x) on the boundary
    double total_surface() const {
        double s = 0.0;
        for (double w : weight) s += w;
        return s;
    }
};

inline Layer layer(const PolarGrid& g, double eps) {
    const double eps0 = g.R() / 2.0;
    if (!(eps > 0)) throw DomainError("layer thickness must be positive");
    if (eps >= eps0) throw DomainError("layer thickness must be below R/2");
    Layer L;
    L.eps = eps;
    L.r = g.R() - eps;
    for (int j = 0; j < g.Mt(); ++j) {
        double th = g.theta(j);
        L.theta.push_back(th);
        if (g.dim() == 2) {
            L.weight.push_back(L.r * g.dtheta());
            L.points.push_back(polar_point(L.r, th));
            L.projection.push_back(polar_point(g.R(), th));
        } else {
            L.weight.push_back(4.0 * pi * L.r * L.r);
            L.points.push_back({0, 0, L.r});
            L.projection.push_back({0, 0, g.R()});
        }
    }
    return L;
}

// First Dirichlet eigenpair, phi(0) = 1.
struct Eigenpair {
    int dimension = 2;
    double radius = 1.0;
    double lambda = 0.0;
    double lambda_shooting = 0.0;
    std::vector<double> phi;  // on the radial nodes
    double residual = 0.0;    // max |phi'' + (N-1)/r phi' + lambda phi| over interior nodes
    double c1 = 0.0, c2 = 0.0;

    double nu() const { return 0.5 * dimension - 1.0; }
    double value(double r) const {
        if (r >= radius) return 0.0;
        return normalized_bessel_series(std::sqrt(lambda) * r, nu());
    }
    double derivative(double r) const {
        double k = std::sqrt(lambda);
        return k * normalized_bessel_series_deriv(k * r, nu());
    }
    double at(Point x) const { return value(norm(x)); }
};

namespace detail {

// phi(R; lambda) by RK4 on phi'' + (N-1)/r phi' + lambda phi = 0, starting
// from the series at a small radius.
inline double shoot(double lambda, int N, double R, int steps = 4000) {
    const double nu = 0.5 * N - 1.0;
    const double k = std::sqrt(lambda);
    double r = 1e-3 * R;
    double y0 = normalized_bessel_series(k * r, nu);
    double y1 = k * normalized_bessel_series_deriv(k * r, nu);
    const double h = (R - r) / steps;
    auto f = [&](double rr, double a, double b, double& da, double& db) {
        da = b;
        db = -(N - 1) / rr * b - lambda * a;
    };
    for (int s = 0; s < steps; ++s) {
        double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
        f(r, y0, y1, k1a, k1b);
        f(r + h / 2, y0 + h / 2 * k1a, y1 + h / 2 * k1b, k2a, k2b);
        f(r + h / 2, y0 + h / 2 * k2a, y1 + h / 2 * k2b, k3a, k3b);
        f(r + h, y0 + h * k3a, y1 + h * k3b, k4a, k4b);
        y0 += h / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
        y1 += h / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
        r += h;
    }
    return y0;
}

}  // namespace detail

inline Eigenpair first_eigenpair(const PolarGrid& g) {
    if (g.M() < 255) throw DomainError("eigenpair needs at least 256 radial nodes");
    const int N = g.dim();
    const double R = g.R();
    Eigenpair e;
    e.dimension = N;
    e.radius = R;
    const double nu = 0.5 * N - 1.0;
    const double lo = 1.0 / (R * R), hi = 20.0 / (R * R);

    std::ostringstream trace;
    auto shoot_f = [&](double lam) {
        double v = detail::shoot(lam, N, R);
        trace << "lambda=" << lam << " phi(R)=" << v << "\n";
        return v;
    };
    double lam_shoot;
    try {
        lam_shoot = bisect(shoot_f, lo, hi, 1e-13);
    } catch (const NumericalError&) {
        throw NumericalError("eigenvalue shooting did not bracket a root; trace:\n" + trace.str());
    }
    // the same zero located on the series itself
    double lam_series = bisect([&](double lam) { return normalized_bessel_series(std::sqrt(lam) * R, nu); }, lo,
                               hi, 1e-15);
    if (std::abs(lam_series - lam_shoot) > 1e-8 * lam_series)
        throw NumericalError("shooting and series eigenvalues disagree; trace:\n" + trace.str());
    e.lambda = lam_series;
    e.lambda_shooting = lam_shoot;

    const double k = std::sqrt(e.lambda);
    e.phi.resize(g.M() + 1);
    e.c1 = 1e300;
    e.c2 = 0.0;
    for (int i = 0; i <= g.M(); ++i) {
        double r = g.r(i);
        e.phi[i] = i == g.M() ? 0.0 : normalized_bessel_series(k * r, nu);
        if (i > 0 && i < g.M()) {
            double d1 = k * normalized_bessel_series_deriv(k * r, nu);
            double d2 = k * k * normalized_bessel_series_deriv2(k * r, nu);
            double res = std::abs(d2 + (N - 1) / r * d1 + e.lambda * e.phi[i]);
            e.residual = std::max(e.residual, res);
        }
        if (i < g.M()) {
            double q = e.phi[i] / g.delta(i);
            e.c1 = std::min(e.c1, q);
            e.c2 = std::max(e.c2, q);
        }
    }
    return e;
}

}  // namespace mbvp
