#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "domain.hpp"

namespace mbvp {

// Grid function on all nodes (boundary ring included).
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(GridPtr g, double fill = 0.0) : grid(std::move(g)), values(grid->num_nodes(), fill) {}
    Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid->num_nodes()) throw DomainError("field size does not match grid");
    }

    double& operator[](int n) { return values[n]; }
    double operator[](int n) const { return values[n]; }
    std::size_t size() const { return values.size(); }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
    double at(int ring, int j) const { return values[grid->node(ring, j)]; }
};

inline Field sample(GridPtr g, const std::function<double(Point)>& f) {
    Field out(g);
    for (int n = 0; n < g->num_nodes(); ++n) out[n] = f(g->coord(n));
    return out;
}

// sup over interior nodes with delta >= dmin of |a - b|
inline double sup_diff(const Field& a, const Field& b, double dmin = 0.0) {
    const auto& g = *a.grid;
    double s = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        int i = g.ring_of(n);
        if (i == g.M() || g.delta(i) < dmin) continue;
        s = std::max(s, std::abs(a[n] - b[n]));
    }
    return s;
}

inline double sup_abs(const Field& a, double dmin = 0.0) {
    const auto& g = *a.grid;
    double s = 0.0;
    for (int n = 0; n < g.num_nodes(); ++n) {
        int i = g.ring_of(n);
        if (i == g.M() || g.delta(i) < dmin) continue;
        s = std::max(s, std::abs(a[n]));
    }
    return s;
}

inline double integrate(const Field& f) {
    double s = 0.0;
    const auto& w = f.grid->weights();
    for (std::size_t n = 0; n < f.size(); ++n)
        if (w[n] != 0.0) s += w[n] * f.values[n];
    return s;
}

struct Atom {
    double theta = 0.0;
    double mass = 0.0;
};

// Boundary measure = point masses + density per unit surface on the
// boundary mesh. In 3D only the (radial) density is meaningful.
struct BoundaryMeasure {
    GridPtr grid;
    std::vector<Atom> atoms;
    std::vector<double> density;

    BoundaryMeasure() = default;
    explicit BoundaryMeasure(GridPtr g) : grid(std::move(g)), density(grid->num_boundary(), 0.0) {}

    double total_variation() const {
        double s = 0.0;
        for (const auto& a : atoms) s += std::abs(a.mass);
        for (double d : density) s += std::abs(d) * grid->boundary_weight();
        return s;
    }
    double mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.mass;
        for (double d : density) s += d * grid->boundary_weight();
        return s;
    }
    bool nonnegative() const {
        for (const auto& a : atoms)
            if (a.mass < 0) return false;
        for (double d : density)
            if (d < 0) return false;
        return true;
    }
    bool has_atoms() const { return !atoms.empty(); }

    // Cell averages of the density (second-order correction of the nodal
    // values); used wherever the density is paired with an exact
    // cell integral of a kernel.
    std::vector<double> cell_average() const {
        const int n = static_cast<int>(density.size());
        std::vector<double> c(density);
        if (n < 3) return c;
        for (int j = 0; j < n; ++j)
            c[j] = density[j] + (density[(j + 1) % n] - 2.0 * density[j] + density[(j + n - 1) % n]) / 24.0;
        return c;
    }

    // int f dmu where f is known on the mesh (density part) and pointwise
    // (atoms).
    double pair(const std::vector<double>& f_mesh, const std::function<double(double)>& f_at) const {
        double s = 0.0;
        auto cb = cell_average();
        for (std::size_t j = 0; j < cb.size(); ++j) s += cb[j] * f_mesh[j] * grid->boundary_weight();
        for (const auto& a : atoms) s += a.mass * f_at(a.theta);
        return s;
    }

    BoundaryMeasure scaled(double s) const {
        BoundaryMeasure m(*this);
        for (auto& a : m.atoms) a.mass *= s;
        for (auto& d : m.density) d *= s;
        return m;
    }
    BoundaryMeasure plus(const BoundaryMeasure& o) const {
        BoundaryMeasure m(*this);
        m.atoms.insert(m.atoms.end(), o.atoms.begin(), o.atoms.end());
        for (std::size_t j = 0; j < m.density.size(); ++j) m.density[j] += o.density[j];
        return m;
    }
};

inline BoundaryMeasure uniform_measure(GridPtr g, double c = 1.0) {
    BoundaryMeasure m(g);
    for (auto& d : m.density) d = c;
    return m;
}

inline BoundaryMeasure density_measure(GridPtr g, const std::function<double(double)>& f) {
    BoundaryMeasure m(g);
    for (int j = 0; j < g->num_boundary(); ++j) m.density[j] = f(g->theta(j));
    return m;
}

inline BoundaryMeasure dirac(GridPtr g, double theta, double mass = 1.0) {
    BoundaryMeasure m(g);
    m.atoms.push_back({theta, mass});
    return m;
}

}  // namespace mbvp
