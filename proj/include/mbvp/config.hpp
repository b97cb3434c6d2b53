// Experiment configuration: JSON schema, dotted-path overrides, hashing,
// and construction of potentials and measures from their specs.
#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "potentials.hpp"
#include "solver.hpp"

namespace mbvp {

using json = nlohmann::json;

struct PotentialSpec {
    std::string label = "V";
    std::string kind = "bounded";  // bounded | distance_power | radial_profile | cone_singular
    double c = 1.0;
    double alpha = 0.0;
    double vertex = 0.0;
    double aperture = 0.5;
    std::vector<double> delta, v;  // radial_profile table
};

struct AtomSpec {
    double theta = 0.0;
    double mass = 1.0;
};

// density = uniform + sum_n cos[n-1] cos(n t) + sin[n-1] sin(n t), plus atoms
struct MeasureSpec {
    std::string label = "mu";
    double uniform = 1.0;
    std::vector<double> cos, sin;
    std::vector<AtomSpec> atoms;
};

struct ExperimentConfig {
    int dimension = 2;
    double radius = 1.0;
    int m_radial = 256;
    int m_angular = 256;
    double gamma = 2.0;
    std::vector<PotentialSpec> potentials{PotentialSpec{}};
    std::vector<MeasureSpec> measures{MeasureSpec{}};
    std::vector<double> kschedule;  // explicit levels; empty means k0 * base^j
    int schedule_levels = 13;
    double schedule_base = 4.0;
    double schedule_k0 = 1.0;
    double atom_width_cells = 3.0;
    double mono_tol = 1e-9;
    double duality_tol = 1e-8;
    std::string potential = "V";  // labels used by single-case subcommands
    std::string measure = "mu";
    std::vector<std::array<double, 2>> arcs;  // capacity sets, radians
    int random_arcs = 20;
    std::vector<double> alphas{1.0, 1.5, 2.0, 2.5};
    int node_stride = 32;  // singular-set: detectors on every stride-th node
    bool extended = false;  // trace: also compute the extended trace
    std::vector<int> criteria;  // suite: empty runs all
    int workers = 1;
    unsigned seed = 20240611;
    std::string out = "run";
};

// ---------------------------------------------------------------- JSON

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["domain"] = {{"dimension", c.dimension}, {"radius", c.radius}};
    j["grid"] = {{"M_radial", c.m_radial}, {"M_angular", c.m_angular}, {"gamma", c.gamma}};
    j["potentials"] = json::array();
    for (const auto& p : c.potentials)
        j["potentials"].push_back({{"label", p.label},
                                   {"kind", p.kind},
                                   {"c", p.c},
                                   {"alpha", p.alpha},
                                   {"vertex", p.vertex},
                                   {"aperture", p.aperture},
                                   {"delta", p.delta},
                                   {"v", p.v}});
    j["measures"] = json::array();
    for (const auto& m : c.measures) {
        json atoms = json::array();
        for (const auto& a : m.atoms) atoms.push_back({{"theta", a.theta}, {"mass", a.mass}});
        j["measures"].push_back({{"label", m.label}, {"uniform", m.uniform}, {"cos", m.cos}, {"sin", m.sin}, {"atoms", atoms}});
    }
    j["solver"] = {{"tol", c.mono_tol},
                   {"kschedule", c.kschedule},
                   {"levels", c.schedule_levels},
                   {"base", c.schedule_base},
                   {"k0", c.schedule_k0},
                   {"atom_width", c.atom_width_cells}};
    j["tolerances"] = {{"duality", c.duality_tol}};
    j["select"] = {{"potential", c.potential}, {"measure", c.measure}};
    json arcs = json::array();
    for (const auto& a : c.arcs) arcs.push_back({a[0], a[1]});
    j["capacity"] = {{"arcs", arcs}, {"random_arcs", c.random_arcs}};
    j["criteria"] = {{"alphas", c.alphas}};
    j["singular_set"] = {{"node_stride", c.node_stride}};
    j["trace"] = {{"extended", c.extended}};
    j["suite"] = {{"ids", c.criteria}};
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    j["output"] = {{"dir", c.out}};
    return j;
}

namespace detail {

// Reads j[key] into v when present; type errors carry the dotted path.
template <class T>
void read(const json& j, const std::string& path, const char* key, T& v) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        v = it->template get<T>();
    } catch (const json::exception&) {
        throw ConfigError((path.empty() ? "" : path + ".") + key + ": wrong type (" + it->dump() + ")");
    }
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known |= it.key() == k;
        if (!known) throw ConfigError((path.empty() ? "" : path + ".") + it.key() + ": unknown key");
    }
}

inline const json& sub(const json& j, const char* key) {
    static const json empty = json::object();
    auto it = j.find(key);
    return it == j.end() ? empty : *it;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c);

inline ExperimentConfig config_from_json(const json& j) {
    using detail::read;
    using detail::sub;
    ExperimentConfig c;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    detail::reject_unknown(j, "", {"domain", "grid", "potentials", "measures", "solver", "tolerances", "select", "capacity", "criteria", "singular_set", "trace",
                                   "suite", "workers", "seed", "output"});
    detail::reject_unknown(sub(j, "domain"), "domain", {"dimension", "radius"});
    detail::reject_unknown(sub(j, "grid"), "grid", {"M_radial", "M_angular", "gamma"});
    detail::reject_unknown(sub(j, "select"), "select", {"potential", "measure"});
    detail::reject_unknown(sub(j, "capacity"), "capacity", {"arcs", "random_arcs"});
    detail::reject_unknown(sub(j, "criteria"), "criteria", {"alphas"});
    detail::reject_unknown(sub(j, "singular_set"), "singular_set", {"node_stride"});
    detail::reject_unknown(sub(j, "trace"), "trace", {"extended"});
    detail::reject_unknown(sub(j, "suite"), "suite", {"ids"});
    detail::reject_unknown(sub(j, "output"), "output", {"dir"});
    read(sub(j, "domain"), "domain", "dimension", c.dimension);
    read(sub(j, "domain"), "domain", "radius", c.radius);
    read(sub(j, "grid"), "grid", "M_radial", c.m_radial);
    read(sub(j, "grid"), "grid", "M_angular", c.m_angular);
    read(sub(j, "grid"), "grid", "gamma", c.gamma);
    if (j.contains("potentials")) {
        if (!j["potentials"].is_array()) throw ConfigError("potentials: expected an array");
        c.potentials.clear();
        for (std::size_t i = 0; i < j["potentials"].size(); ++i) {
            const auto& e = j["potentials"][i];
            std::string p = "potentials[" + std::to_string(i) + "]";
            PotentialSpec s;
            detail::reject_unknown(e, p, {"label", "kind", "c", "alpha", "vertex", "aperture", "delta", "v"});
            read(e, p, "label", s.label);
            read(e, p, "kind", s.kind);
            read(e, p, "c", s.c);
            read(e, p, "alpha", s.alpha);
            read(e, p, "vertex", s.vertex);
            read(e, p, "aperture", s.aperture);
            read(e, p, "delta", s.delta);
            read(e, p, "v", s.v);
            c.potentials.push_back(s);
        }
    }
    if (j.contains("measures")) {
        if (!j["measures"].is_array()) throw ConfigError("measures: expected an array");
        c.measures.clear();
        for (std::size_t i = 0; i < j["measures"].size(); ++i) {
            const auto& e = j["measures"][i];
            std::string p = "measures[" + std::to_string(i) + "]";
            MeasureSpec s;
            detail::reject_unknown(e, p, {"label", "uniform", "cos", "sin", "atoms"});
            read(e, p, "label", s.label);
            read(e, p, "uniform", s.uniform);
            read(e, p, "cos", s.cos);
            read(e, p, "sin", s.sin);
            if (e.contains("atoms")) {
                if (!e["atoms"].is_array()) throw ConfigError(p + ".atoms: expected an array");
                for (std::size_t a = 0; a < e["atoms"].size(); ++a) {
                    std::string pa = p + ".atoms[" + std::to_string(a) + "]";
                    AtomSpec at;
                    detail::reject_unknown(e["atoms"][a], pa, {"theta", "mass"});
                    read(e["atoms"][a], pa, "theta", at.theta);
                    read(e["atoms"][a], pa, "mass", at.mass);
                    s.atoms.push_back(at);
                }
            }
            c.measures.push_back(s);
        }
    }
    detail::reject_unknown(sub(j, "solver"), "solver", {"tol", "kschedule", "levels", "base", "k0", "atom_width"});
    read(sub(j, "solver"), "solver", "tol", c.mono_tol);
    read(sub(j, "solver"), "solver", "kschedule", c.kschedule);
    read(sub(j, "solver"), "solver", "levels", c.schedule_levels);
    read(sub(j, "solver"), "solver", "base", c.schedule_base);
    read(sub(j, "solver"), "solver", "k0", c.schedule_k0);
    read(sub(j, "solver"), "solver", "atom_width", c.atom_width_cells);
    detail::reject_unknown(sub(j, "tolerances"), "tolerances", {"duality"});
    read(sub(j, "tolerances"), "tolerances", "duality", c.duality_tol);
    read(sub(j, "select"), "select", "potential", c.potential);
    read(sub(j, "select"), "select", "measure", c.measure);
    read(sub(j, "capacity"), "capacity", "arcs", c.arcs);
    read(sub(j, "capacity"), "capacity", "random_arcs", c.random_arcs);
    read(sub(j, "criteria"), "criteria", "alphas", c.alphas);
    read(sub(j, "singular_set"), "singular_set", "node_stride", c.node_stride);
    read(sub(j, "trace"), "trace", "extended", c.extended);
    read(sub(j, "suite"), "suite", "ids", c.criteria);
    read(j, "", "workers", c.workers);
    read(j, "", "seed", c.seed);
    read(sub(j, "output"), "output", "dir", c.out);
    validate(c);
    return c;
}

inline void validate(const ExperimentConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(c.dimension == 2 || c.dimension == 3, "domain.dimension: must be 2 or 3");
    need(c.radius > 0, "domain.radius: must be positive");
    need(c.m_radial >= 8, "grid.M_radial: must be at least 8");
    need(c.m_angular >= 8 || c.dimension == 3, "grid.M_angular: must be at least 8");
    need(c.gamma >= 1, "grid.gamma: must be at least 1");
    need(c.schedule_levels >= 1 && c.schedule_levels <= 30, "solver.levels: must lie in [1, 30]");
    need(c.schedule_base > 1, "solver.base: must exceed 1");
    need(c.schedule_k0 > 0, "solver.k0: must be positive");
    for (std::size_t i = 0; i < c.kschedule.size(); ++i)
        need(c.kschedule[i] > 0 && (i == 0 || c.kschedule[i] > c.kschedule[i - 1]),
             "solver.kschedule: levels must be positive and strictly increasing");
    need(c.atom_width_cells >= 1, "solver.atom_width: must be at least one cell");
    need(c.mono_tol > 0, "solver.tol: must be positive");
    need(c.duality_tol > 0, "tolerances.duality: must be positive");
    need(c.random_arcs >= 0, "capacity.random_arcs: must be nonnegative");
    need(c.node_stride >= 1, "singular_set.node_stride: must be at least 1");
    need(c.workers >= 1, "workers: must be at least 1");
    need(!c.out.empty(), "output.dir: must be non-empty");
    for (double a : c.alphas) need(a >= 0, "criteria.alphas: exponents must be nonnegative");
    for (int id : c.criteria) need(id >= 1 && id <= 13, "suite.ids: criterion ids lie in 1..13");
    for (std::size_t i = 0; i < c.potentials.size(); ++i) {
        const auto& p = c.potentials[i];
        std::string at = "potentials[" + std::to_string(i) + "]";
        need(p.kind == "bounded" || p.kind == "distance_power" || p.kind == "radial_profile" ||
                 p.kind == "cone_singular",
             at + ".kind: unknown kind '" + p.kind + "'");
        need(p.c >= 0, at + ".c: must be nonnegative");
        if (p.kind == "radial_profile") need(p.delta.size() >= 2 && p.delta.size() == p.v.size(), at + ".delta/v: need matching tables");
        if (p.kind == "cone_singular") need(p.aperture > 0 && p.aperture < 1, at + ".aperture: must lie in (0,1)");
        for (std::size_t k = 0; k < i; ++k) need(c.potentials[k].label != p.label, at + ".label: duplicate '" + p.label + "'");
    }
    for (std::size_t i = 0; i < c.measures.size(); ++i) {
        const auto& m = c.measures[i];
        std::string at = "measures[" + std::to_string(i) + "]";
        for (std::size_t a = 0; a < m.atoms.size(); ++a)
            need(m.atoms[a].mass >= 0, at + ".atoms[" + std::to_string(a) + "].mass: must be nonnegative");
        for (std::size_t k = 0; k < i; ++k) need(c.measures[k].label != m.label, at + ".label: duplicate '" + m.label + "'");
    }
    bool pv = false, pm = false;
    for (const auto& p : c.potentials) pv |= p.label == c.potential;
    for (const auto& m : c.measures) pm |= m.label == c.measure;
    need(pv, "select.potential: no potential labelled '" + c.potential + "'");
    need(pm, "select.measure: no measure labelled '" + c.measure + "'");
}

// --set a.b.c=value. The value is parsed as JSON when it parses, else kept
// as a string. Array elements are addressed by index: potentials.0.alpha.
inline void apply_override(json& j, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
    std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    std::string ptr;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ConfigError("--set " + key + ": empty path component");
        ptr += "/" + part;
    }
    try {
        j[json::json_pointer(ptr)] = value;
    } catch (const json::exception& e) {
        throw ConfigError("--set " + key + ": " + e.what());
    }
}

inline json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config: cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("--config: " + path + " is not valid JSON");
    return j;
}

// SHA-256 of the canonical (sorted-key, compact) serialization.
inline std::string config_hash(const ExperimentConfig& c) {
    std::string s = to_json(c).dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(s.data(), s.size(), md, &len, EVP_sha256(), nullptr) != 1) throw NumericalError("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

// ---------------------------------------------------------------- builders

inline GridPtr make_grid(const ExperimentConfig& c) {
    return make_grid(c.dimension, c.radius, c.m_radial, c.dimension == 2 ? c.m_angular : 1, c.gamma);
}

inline Potential build_potential(const PotentialSpec& s) {
    if (s.kind == "bounded") return bounded(s.c, s.label);
    if (s.kind == "distance_power") return distance_power(s.c, s.alpha, s.label);
    if (s.kind == "radial_profile") return radial_profile(s.delta, s.v, s.label);
    if (s.kind == "cone_singular") return cone_singular(s.vertex, s.aperture, s.c, s.alpha, s.label);
    throw ConfigError("unknown potential kind '" + s.kind + "'");
}

inline BoundaryMeasure build_measure(const MeasureSpec& s, GridPtr g) {
    auto m = density_measure(g, [&](double t) {
        double v = s.uniform;
        for (std::size_t n = 0; n < s.cos.size(); ++n) v += s.cos[n] * std::cos((n + 1.0) * t);
        for (std::size_t n = 0; n < s.sin.size(); ++n) v += s.sin[n] * std::sin((n + 1.0) * t);
        return v;
    });
    for (const auto& a : s.atoms) m.atoms.push_back({a.theta, a.mass});
    return m;
}

inline const PotentialSpec& find_potential(const ExperimentConfig& c, const std::string& label) {
    for (const auto& p : c.potentials)
        if (p.label == label) return p;
    throw ConfigError("select.potential: no potential labelled '" + label + "'");
}

inline const MeasureSpec& find_measure(const ExperimentConfig& c, const std::string& label) {
    for (const auto& m : c.measures)
        if (m.label == label) return m;
    throw ConfigError("select.measure: no measure labelled '" + label + "'");
}

inline SolverOptions solver_options(const ExperimentConfig& c) {
    auto ks = c.kschedule.empty() ? geometric_schedule(c.schedule_levels, c.schedule_base, c.schedule_k0) : c.kschedule;
    return {ks, c.atom_width_cells, c.mono_tol, c.workers};
}

}  // namespace mbvp
