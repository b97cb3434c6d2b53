#pragma once

// Poisson kernel and Green function of the ball, the harmonic extension
// K[mu] and the Green operator G[f].

#include <cmath>
#include <numeric>
#include <functional>
#include <vector>

#include "discrete.hpp"
#include "potentials.hpp"

namespace mbvp {

// K(x,y) = (R^2 - |x|^2) / (omega R |x-y|^N)
inline double poisson_kernel(const BallDomain& d, Point x, Point y) {
    const double R = d.radius;
    double rx2 = dot(x, x);
    if (rx2 >= R * R) throw DomainError("Poisson kernel needs an interior point x");
    double dxy = dist(x, y);
    return (R * R - rx2) / (d.omega() * R * std::pow(dxy, d.dimension));
}

// Dirichlet Green function, -Lap_x G(., y) = delta_y.
inline double green_kernel(const BallDomain& d, Point x, Point y) {
    const double R = d.radius;
    double dxy = dist(x, y);
    if (dxy == 0.0) throw DomainError("Green function evaluated on its pole");
    // q = |y|^2 |x - y*|^2 with y* the reflection of y in the sphere
    double q = dot(x, x) * dot(y, y) - 2.0 * R * R * dot(x, y) + R * R * R * R;
    if (d.dimension == 2) return std::log(q / (R * R * dxy * dxy)) / (4.0 * pi);
    return (1.0 / dxy - R / std::sqrt(q)) / (4.0 * pi);
}

// Integral of the 2D Poisson kernel K(x, .) dS over the boundary arc from
// the angle of x to the angle of x plus `a` (any real a; full turns count 1).
inline double poisson_arc(double R, double r, double a) {
    double m = std::floor((a + pi) / (2.0 * pi));
    double b = a - 2.0 * pi * m;  // in [-pi, pi)
    double phi = std::atan2((R + r) * std::sin(0.5 * b), (R - r) * std::cos(0.5 * b)) / pi;
    return m + phi;
}

// Integral of K(x, .) dS over the boundary cell of width dt centred at
// angular offset `off` from x.
inline double poisson_cell(double R, double r, double off, double dt) {
    return poisson_arc(R, r, off + 0.5 * dt) - poisson_arc(R, r, off - 0.5 * dt);
}

namespace detail {
// C_i(j) for offsets j dt, j = 0..Mt-1, on ring i
inline std::vector<double> ring_cells(const PolarGrid& g, int i) {
    std::vector<double> c(g.Mt());
    for (int j = 0; j < g.Mt(); ++j) c[j] = poisson_cell(g.R(), g.r(i), g.theta(j), g.dtheta());
    return c;
}
}  // namespace detail

// K[mu] on every node. Density parts use the nodal trapezoid sum away from
// the boundary and exact cell integrals of K against cell averages near
// it; atoms use K exactly, or (cell_atoms) the cell average of K around
// the atom. Boundary ring: the density.
inline Field poisson_extend(const BoundaryMeasure& mu, bool cell_atoms = false, int workers = 1) {
    const auto& g = *mu.grid;
    const auto& dom = g.domain();
    Field out(mu.grid);
    const int M = g.M(), Mt = g.Mt();
    if (g.dim() == 3) {
        // radial grid: only the mean of mu is seen
        double mass = mu.mass();
        double c = mass / dom.boundary_measure();
        for (int i = 0; i < M; ++i) out[i] = c;
        out[M] = c;
        return out;
    }
    auto cb = mu.cell_average();
    double mean = 0.0;
    for (double v : cb) mean += v;
    mean /= Mt;
    out[0] = mean;
    for (const auto& a : mu.atoms) out[0] += a.mass / dom.boundary_measure();
    parallel_for(M - 1, workers, [&](std::size_t k) {
        int i = static_cast<int>(k) + 1;
        // The trapezoid sum on a ring of radius r errs like (r/R)^Mt; use it
        // wherever that beats the O(h^2) of the cell-average pairing.
        const double h = g.dtheta();
        const bool smooth = Mt * std::log(g.R() / g.r(i)) >= std::log(1e3 / (h * h));
        std::vector<double> C;
        if (smooth) {
            C.resize(Mt);
            for (int l = 0; l < Mt; ++l)
                C[l] = poisson_kernel(dom, polar_point(g.r(i), 0.0), polar_point(g.R(), g.theta(l))) * g.boundary_weight();
            // the kernel has unit mass; drop the (r/R)^Mt aliasing of mode 0
            const double total = std::accumulate(C.begin(), C.end(), 0.0);
            for (double& c : C) c /= total;
        } else {
            C = detail::ring_cells(g, i);
        }
        const auto& f = smooth ? mu.density : cb;
        for (int j = 0; j < Mt; ++j) {
            double s = 0.0;
            for (int l = 0; l < Mt; ++l) s += f[l] * C[((l - j) % Mt + Mt) % Mt];
            Point x = g.coord(g.node(i, j));
            for (const auto& a : mu.atoms) {
                if (cell_atoms)
                    s += a.mass * poisson_cell(g.R(), g.r(i), a.theta - g.theta(j), g.dtheta()) / g.boundary_weight();
                else
                    s += a.mass * poisson_kernel(dom, x, polar_point(g.R(), a.theta));
            }
            out[g.node(i, j)] = s;
        }
    });
    for (int j = 0; j < Mt; ++j) out[g.boundary_node(j)] = mu.density[j];
    return out;
}

// G[f] by the discrete Dirichlet solve (f on nodes, boundary values ignored).
inline Field green_apply(const Field& f, SolveReport* rep = nullptr) {
    DiscreteSystem sys(f.grid, std::vector<double>(f.grid->num_nodes(), 0.0));
    return sys.solve(std::vector<double>(f.grid->num_boundary(), 0.0), &f.values, rep);
}

// G[f] for f given as a function: discrete solves on the grid and on its
// 2x refinement (which contains every coarse node), combined by Richardson
// extrapolation of the h^2 error term.
inline Field green_apply(GridPtr g, const std::function<double(Point)>& f) {
    const auto& s = g->spec();
    auto fine = make_grid(s.dimension, s.radius, 2 * s.m_radial, s.dimension == 2 ? 2 * s.m_angular : 1, s.gamma);
    Field wc = green_apply(sample(g, f));
    Field wf = green_apply(sample(fine, f));
    Field out(g);
    for (int n = 0; n < g->num_nodes(); ++n) {
        int i = g->ring_of(n), j = g->angle_index_of(n);
        double vf = wf[fine->node(2 * i, 2 * j)];
        out[n] = (4.0 * vf - wc[n]) / 3.0;
    }
    return out;
}

// G[f] by direct quadrature against the exact Green function, with the
// pole subtracted: G[f](x) = int G(x,.)(f - f(x)) + f(x) G[1](x), where
// G[1] = (R^2 - |x|^2) / 2N. O(n^2): coarse grids only.
inline Field green_apply_quadrature(const Field& f, int workers = 1) {
    const auto& g = *f.grid;
    const auto& dom = g.domain();
    const int nn = g.num_nodes();
    const double R = dom.radius;
    Field out(f.grid);
    if (g.dim() == 3) {
        // radial kernel (1/max(r,s) - 1/R) / (4 pi), continuous
        const int M = g.M();
        for (int i = 0; i < M; ++i) {
            double s = 0.0;
            for (int l = 0; l < M; ++l) {
                double m = std::max(g.r(i), g.r(l));
                if (m == 0.0) continue;
                s += g.radial_weight(l) * f[l] * (1.0 / m - 1.0 / R) / (4.0 * pi);
            }
            out[i] = s;
        }
        return out;
    }
    parallel_for(nn, workers, [&](std::size_t nx) {
        int n = static_cast<int>(nx);
        if (g.is_boundary(n)) return;
        Point x = g.coord(n);
        double s = 0.0;
        for (int m = 0; m < nn; ++m) {
            double w = g.weight(m);
            if (w == 0.0 || m == n) continue;
            s += w * (f[m] - f[n]) * green_kernel(dom, x, g.coord(m));
        }
        out[n] = s + f[n] * (R * R - dot(x, x)) / 4.0;
    });
    return out;
}

struct KernelBound {
    double c = 0.0;       // c^{-1} <= K |x-y|^N / phi <= c
    double lower = 0.0;   // min of the ratio
    double upper = 0.0;   // max of the ratio
};

// Scan of K(x,y)|x-y|^N / phi(x) over interior nodes and boundary nodes.
inline KernelBound kernel_bound_constant(const PolarGrid& g, const Eigenpair& e) {
    KernelBound kb;
    kb.lower = 1e300;
    const auto& dom = g.domain();
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (g.is_boundary(n)) continue;
        Point x = g.coord(n);
        double ph = e.phi[g.ring_of(n)];
        for (int j = 0; j < g.num_boundary(); ++j) {
            Point y = g.boundary_point(j);
            double q = poisson_kernel(dom, x, y) * std::pow(dist(x, y), g.dim()) / ph;
            kb.lower = std::min(kb.lower, q);
            kb.upper = std::max(kb.upper, q);
        }
    }
    kb.c = std::max(kb.upper, 1.0 / kb.lower);
    return kb;
}

}  // namespace mbvp
