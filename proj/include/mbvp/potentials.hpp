#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "field.hpp"

namespace mbvp {

enum class PotentialKind { Bounded, DistancePower, RadialProfile, ConeSingular, GridSampled };

inline const char* kind_name(PotentialKind k) {
    switch (k) {
        case PotentialKind::Bounded: return "bounded";
        case PotentialKind::DistancePower: return "distance_power";
        case PotentialKind::RadialProfile: return "radial_profile";
        case PotentialKind::ConeSingular: return "cone_singular";
        case PotentialKind::GridSampled: return "grid_sampled";
    }
    return "?";
}

// Angle interval [lo, hi] (radians, lo may be negative).
struct AngleInterval {
    double lo, hi;
};

// Nonnegative potential V with an optional truncation level `cap`
// (V_k = min(V, k)).
struct Potential {
    PotentialKind kind = PotentialKind::Bounded;
    double c = 0.0;
    double alpha = 0.0;
    // RadialProfile: v sampled at increasing distances
    std::vector<double> prof_delta, prof_v;
    // ConeSingular: vertex angle, aperture eps of {delta >= eps |x - y0|}
    double vertex = 0.0;
    double aperture = 0.5;
    // GridSampled
    std::shared_ptr<const Field> samples;
    double cap = std::numeric_limits<double>::infinity();
    std::string label;

    bool is_radial() const {
        return kind == PotentialKind::Bounded || kind == PotentialKind::DistancePower ||
               kind == PotentialKind::RadialProfile;
    }
    bool is_zero() const {
        return (kind == PotentialKind::Bounded || kind == PotentialKind::DistancePower ||
                kind == PotentialKind::ConeSingular) && c == 0.0;
    }
    bool truncated() const { return std::isfinite(cap); }

    // v(delta) for radial kinds, before truncation.
    double profile_raw(double delta) const {
        switch (kind) {
            case PotentialKind::Bounded: return c;
            case PotentialKind::DistancePower: return c == 0.0 ? 0.0 : c * std::pow(delta, -alpha);
            case PotentialKind::RadialProfile: return table(delta);
            default: throw DomainError("profile requested for a non-radial potential");
        }
    }
    double profile(double delta) const { return std::min(profile_raw(delta), cap); }

    // V at x (after truncation).
    double operator()(const BallDomain& d, Point x) const {
        double delta = distance_to_boundary(d, x);
        if (delta <= 0.0 && !truncated() && kind != PotentialKind::Bounded && kind != PotentialKind::GridSampled && !is_zero())
            throw DomainError("unbounded potential evaluated on the boundary");
        double v;
        switch (kind) {
            case PotentialKind::ConeSingular: {
                Point y0 = vertex_point(d);
                double rho = dist(x, y0);
                if (rho == 0.0) return truncated() ? cap : std::numeric_limits<double>::infinity();
                v = (delta >= aperture * rho) ? c * std::pow(rho, -alpha) : 0.0;
                break;
            }
            case PotentialKind::GridSampled: v = grid_value(x); break;
            default: v = delta <= 0.0 ? (kind == PotentialKind::Bounded ? c : cap) : profile_raw(delta);
        }
        return std::min(v, cap);
    }

    Point vertex_point(const BallDomain& d) const {
        return d.dimension == 2 ? polar_point(d.radius, vertex) : Point{0, 0, d.radius};
    }

    // Angular ranges at radius r where V can be nonzero (2D).
    std::vector<AngleInterval> angular_support(const BallDomain& d, double r) const {
        if (kind != PotentialKind::ConeSingular) return {{-pi, pi}};
        const double R = d.radius, delta = R - r;
        if (r <= 0.0) return delta >= aperture * R ? std::vector<AngleInterval>{{-pi, pi}} : std::vector<AngleInterval>{};
        double reach = delta / aperture;
        double c0 = (R * R + r * r - reach * reach) / (2.0 * R * r);
        if (c0 <= -1.0) return {{-pi, pi}};
        if (c0 >= 1.0) return {};
        double hw = std::acos(c0);
        return {{vertex - hw, vertex + hw}};
    }

    double table(double delta) const {
        const auto& x = prof_delta;
        const auto& y = prof_v;
        if (x.size() < 2) throw ConfigError("radial profile needs at least two samples");
        auto loglog = [&](std::size_t a, std::size_t b, double t) {
            if (y[a] > 0 && y[b] > 0) {
                double s = std::log(y[b] / y[a]) / std::log(x[b] / x[a]);
                return y[a] * std::pow(t / x[a], s);
            }
            return y[a] + (y[b] - y[a]) * (t - x[a]) / (x[b] - x[a]);
        };
        if (delta <= x.front()) return loglog(0, 1, delta);
        if (delta >= x.back()) return y.back();
        std::size_t hi = std::upper_bound(x.begin(), x.end(), delta) - x.begin();
        return loglog(hi - 1, hi, delta);
    }

    double grid_value(Point x) const {
        const auto& g = *samples->grid;
        double r = norm(x);
        if (g.dim() == 3) {
            auto it = std::upper_bound(g.radii().begin(), g.radii().end(), r);
            int i = std::clamp(static_cast<int>(it - g.radii().begin()) - 1, 0, g.M() - 1);
            double t = (r - g.r(i)) / (g.r(i + 1) - g.r(i));
            return (1 - t) * (*samples)[i] + t * (*samples)[i + 1];
        }
        auto it = std::upper_bound(g.radii().begin(), g.radii().end(), r);
        int i = std::clamp(static_cast<int>(it - g.radii().begin()) - 1, 0, g.M() - 1);
        double t = (r - g.r(i)) / (g.r(i + 1) - g.r(i));
        double th = std::atan2(x.y, x.x);
        if (th < 0) th += 2 * pi;
        double s = th / g.dtheta();
        int j = static_cast<int>(std::floor(s)) % g.Mt();
        double u = s - std::floor(s);
        auto val = [&](int ring, int jj) { return (*samples)[g.node(ring, jj)]; };
        double inner = i == 0 ? val(0, 0) : (1 - u) * val(i, j) + u * val(i, j + 1);
        double outer = (1 - u) * val(i + 1, j) + u * val(i + 1, j + 1);
        return (1 - t) * inner + t * outer;
    }
};

inline Potential bounded(double c, std::string label = "") {
    Potential p;
    p.kind = PotentialKind::Bounded;
    p.c = c;
    p.label = label.empty() ? "bounded(" + std::to_string(c) + ")" : label;
    return p;
}

inline Potential distance_power(double c, double alpha, std::string label = "") {
    Potential p;
    p.kind = PotentialKind::DistancePower;
    p.c = c;
    p.alpha = alpha;
    p.label = label.empty() ? "distance_power(" + std::to_string(c) + "," + std::to_string(alpha) + ")" : label;
    return p;
}

inline Potential radial_profile(std::vector<double> delta, std::vector<double> v, std::string label = "profile") {
    Potential p;
    p.kind = PotentialKind::RadialProfile;
    p.prof_delta = std::move(delta);
    p.prof_v = std::move(v);
    p.label = std::move(label);
    return p;
}

inline Potential cone_singular(double vertex, double aperture, double c, double alpha, std::string label = "") {
    if (!(aperture > 0 && aperture < 1)) throw ConfigError("cone aperture must lie in (0,1)");
    Potential p;
    p.kind = PotentialKind::ConeSingular;
    p.vertex = vertex;
    p.aperture = aperture;
    p.c = c;
    p.alpha = alpha;
    p.label = label.empty() ? "cone(" + std::to_string(alpha) + ")" : label;
    return p;
}

inline Potential grid_sampled(const Field& f, std::string label = "sampled") {
    for (double v : f.values)
        if (!(v >= 0)) throw ConfigError("sampled potential must be nonnegative and finite");
    Potential p;
    p.kind = PotentialKind::GridSampled;
    p.samples = std::make_shared<const Field>(f);
    p.label = std::move(label);
    return p;
}

inline double evaluate(const Potential& V, const BallDomain& d, Point x) { return V(d, x); }

inline Potential truncate(const Potential& V, double k) {
    if (!(k > 0)) throw DomainError("truncation level must be positive");
    Potential out = V;
    if (V.kind == PotentialKind::Bounded) {
        out.c = std::min(V.c, k);
        return out;
    }
    out.cap = std::min(V.cap, k);
    return out;
}

inline Potential scaled(const Potential& V, double s) {
    Potential out = V;
    if (V.kind == PotentialKind::GridSampled) {
        Field f = *V.samples;
        for (auto& v : f.values) v *= s;
        out.samples = std::make_shared<const Field>(f);
    } else if (V.kind == PotentialKind::RadialProfile) {
        for (auto& v : out.prof_v) v *= s;
    } else {
        out.c *= s;
    }
    out.cap *= s;
    return out;
}

// V at every grid node; boundary ring gets 0 (never used by the solver).
inline std::vector<double> sample_on_grid(const Potential& V, const PolarGrid& g) {
    std::vector<double> out(g.num_nodes(), 0.0);
    for (int n = 0; n < g.num_nodes(); ++n) {
        if (g.is_boundary(n)) continue;
        // radial kinds: use the exact ring distance so rings stay constant
        out[n] = V.is_radial() ? V.profile(g.delta(g.ring_of(n))) : V(g.domain(), g.coord(n));
    }
    return out;
}

inline double sup_on_grid(const Potential& V, const PolarGrid& g) {
    double s = 0.0;
    for (double v : sample_on_grid(V, g)) s = std::max(s, v);
    return s;
}

}  // namespace mbvp
