// Subcommand drivers: each writes CSV/JSON outputs into one run directory
// and returns a manifest listing files, wall times and checks.
#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <openssl/opensslv.h>

#include "config.hpp"
#include "experiments.hpp"

namespace mbvp {

inline constexpr const char* version = "1.0.0";

struct OutputFile {
    std::string path;  // relative to the run directory
    std::uintmax_t bytes = 0;
};

struct ManifestCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::string started_utc;  // the only nondeterministic field besides wall times
    json versions;
    std::vector<std::pair<std::string, double>> wall_times;
    std::vector<OutputFile> files;
    std::vector<ManifestCheck> checks;
    std::vector<Series> series;                // plot data, written by emit_plotdata
    std::vector<std::string> required_series;  // names that must be present
    std::filesystem::path dir;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline std::string slug(const std::string& s) {
    std::string o;
    for (char c : s) o += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    return o;
}

// json without NaN/inf (written as strings)
inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

inline json verdict_json(const DivergenceVerdict& v) {
    json s = json::array();
    for (auto [e, i] : v.samples) s.push_back({jnum(e), jnum(i)});
    return {{"classification", to_string(v.classification)}, {"p", jnum(v.p)},         {"q", jnum(v.q)},
            {"value", jnum(v.value)},                        {"fit_error", jnum(v.fit_error)}, {"samples", s},
            {"note", v.note}};
}

class RunContext {
public:
    RunContext(const ExperimentConfig& c, std::string sub) : cfg(c) {
        m.subcommand = std::move(sub);
        m.config_hash = config_hash(c);
        m.started_utc = utc_now();
        m.dir = c.out;
        m.versions = json::object();
        m.versions["mbvp"] = version;
        m.versions["compiler"] = __VERSION__;
        m.versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
        m.versions["boost"] = BOOST_LIB_VERSION;
        m.versions["fftw"] = std::string(fftw_version);
        m.versions["openssl"] = OPENSSL_VERSION_TEXT;
        std::filesystem::create_directories(m.dir);
    }

    // CSV with the config hash in the first line.
    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
        std::ostringstream os;
        os << "# config_hash=" << m.config_hash << "\n";
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
        write(name, os.str());
    }

    void json_file(const std::string& name, json j) {
        j["config_hash"] = m.config_hash;
        write(name, j.dump(2) + "\n");
    }

    void check(const std::string& name, bool pass, const std::string& detail = "") {
        m.checks.push_back({name, pass, detail});
    }

    template <class F>
    auto timed(const std::string& what, F&& f) {
        auto t0 = std::chrono::steady_clock::now();
        auto r = f();
        m.wall_times.emplace_back(what, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return r;
    }

    void write(const std::string& name, const std::string& body) {
        auto p = m.dir / name;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw NumericalError("cannot write " + p.string());
        out << body;
        out.close();
        for (auto& f : m.files)
            if (f.path == name) return;
        m.files.push_back({name, 0});
    }

    const ExperimentConfig& cfg;
    RunManifest m;
};

inline std::vector<std::array<double, 2>> capacity_arcs(const ExperimentConfig& c) {
    auto arcs = c.arcs;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> start(0.0, 2 * pi), len(0.05, pi);
    for (int i = 0; i < c.random_arcs; ++i) {
        double a = start(rng);
        arcs.push_back({a, a + len(rng)});
    }
    return arcs;
}

}  // namespace detail

// Writes every series as <dir>/plot/<name>.csv; missing required series
// are an error that lists them.
inline void emit_plotdata(RunManifest& m) {
    std::vector<std::string> missing;
    for (const auto& want : m.required_series) {
        bool found = false;
        for (const auto& s : m.series) found |= s.name == want;
        if (!found) missing.push_back(want);
    }
    if (!missing.empty()) {
        std::string msg = "missing plot series:";
        for (const auto& s : missing) msg += " '" + s + "'";
        throw InvariantBreach(msg);
    }
    for (const auto& s : m.series) {
        std::ostringstream os;
        os << "# config_hash=" << m.config_hash << "\n# series=" << s.name << "\n" << s.xlabel << "," << s.ylabel << "\n";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
            os << detail::num(s.x[i]) << "," << detail::num(s.y[i]) << "\n";
        std::string name = "plot/" + detail::slug(s.name) + ".csv";
        std::filesystem::create_directories(m.dir / "plot");
        std::ofstream(m.dir / name, std::ios::binary) << os.str();
        bool listed = false;
        for (auto& f : m.files) listed |= f.path == name;
        if (!listed) m.files.push_back({name, 0});
    }
}

// Fills file sizes, checks every listed file is non-empty and writes
// manifest.json.
inline void finalize_manifest(RunManifest& m) {
    for (auto& f : m.files) {
        std::error_code ec;
        auto p = m.dir / f.path;
        f.bytes = std::filesystem::exists(p, ec) ? std::filesystem::file_size(p, ec) : 0;
        if (f.bytes == 0) throw InvariantBreach("output file missing or empty: " + p.string());
    }
    json j;
    j["subcommand"] = m.subcommand;
    j["config_hash"] = m.config_hash;
    j["started_utc"] = m.started_utc;
    j["versions"] = m.versions;
    j["wall_seconds"] = json::object();
    for (const auto& [k, v] : m.wall_times) j["wall_seconds"][k] = v;
    j["files"] = json::array();
    for (const auto& f : m.files) j["files"].push_back({{"path", f.path}, {"bytes", f.bytes}});
    j["checks"] = json::array();
    for (const auto& c : m.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    j["all_pass"] = m.all_pass();
    std::ofstream(m.dir / "manifest.json", std::ios::binary) << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- subcommands

inline RunManifest run_solve(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "solve");
    auto g = make_grid(c);
    auto V = build_potential(find_potential(c, c.potential));
    auto mu = build_measure(find_measure(c, c.measure), g);
    auto sol = ctx.timed("solve_measure", [&] { return solve_measure(V, mu, solver_options(c)); });
    Field k = poisson_extend(sol.data, false, c.workers);
    std::vector<std::vector<std::string>> rows, krows;
    for (int n = 0; n < g->num_nodes(); ++n) {
        int i = g->ring_of(n);
        double th = g->dim() == 2 && n > 0 ? g->theta(g->angle_index_of(n)) : 0.0;
        rows.push_back({std::to_string(n), detail::num(g->r(i)), detail::num(th), detail::num(sol.limit[n])});
        krows.push_back({std::to_string(n), detail::num(g->r(i)), detail::num(th), detail::num(k[n])});
    }
    ctx.csv("field.csv", {"node", "r", "theta", "u"}, rows);
    ctx.csv("poisson.csv", {"node", "r", "theta", "K_mu"}, krows);

    Series uk{"u_k(x0) vs k", "k", "u_k(x0)", sol.schedule, {}};
    for (const auto& u : sol.iterates) uk.y.push_back(u[0]);
    ctx.m.series.push_back(uk);
    ctx.m.required_series.push_back(uk.name);
    if (g->dim() == 2) {
        GreenRatioTrend tr;
        sing_detect_green_ratio(V, g, 0.0, geometric_schedule(9, 4.0), 6, &tr, c.workers);
        ctx.m.series.push_back({"kernel ratio vs distance", "distance", "g_V/g_0", tr.d, tr.ratio});
        ctx.m.required_series.push_back("kernel ratio vs distance");
    }
    double res = representation_residual(sol.limit, V, sol.data);
    // u_k solves the problem with V_k exactly; the untruncated V need not
    // admit the data at all (Hardy potential)
    auto br = brezis_check(sol.limit, truncate(V, sol.schedule.back()), sol.data, eigenpair_for(*g));
    ctx.json_file("solve.json", {{"potential", V.label},
                                 {"measure", c.measure},
                                 {"monotone", sol.report.monotone},
                                 {"monotonicity_violation", sol.report.monotonicity_violation},
                                 {"cauchy_gap", sol.report.cauchy_gap},
                                 {"linear_residual", sol.report.residual},
                                 {"method", sol.report.method},
                                 {"representation_residual", res},
                                 {"brezis", {{"lhs", br.lhs}, {"rhs", br.rhs}, {"c", br.c}, {"holds", br.holds}}},
                                 {"u_x0", sol.limit[0]}});
    ctx.check("truncation chain monotone", sol.report.monotone, detail::num(sol.report.monotonicity_violation));
    ctx.check("brezis estimate holds at the last truncation level", br.holds);
    return std::move(ctx.m);
}

inline RunManifest run_capacity(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "capacity");
    auto g = make_grid(c);
    if (g->dim() != 2) throw ConfigError("capacity: arcs need domain.dimension = 2");
    auto V = build_potential(find_potential(c, c.potential));
    auto e = eigenpair_for(*g);
    auto zv = ctx.timed("zv_detect", [&] { return zv_detect(V, g, e, c.workers); });
    auto P = ctx.timed("adjoint_profile", [&] { return adjoint_profile(V, g, e, &zv, c.workers); });
    std::vector<std::vector<std::string>> rows, witness;
    json per_arc = json::array();
    Series gap{"duality gap", "arc", "dual - primal", {}, {}};
    double worst_gap = 0.0, worst_formula = 0.0;
    auto arcs = detail::capacity_arcs(c);
    ctx.timed("arcs", [&] {
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            auto E = arc_set(g, arcs[i][0], arcs[i][1]);
            auto pr = capacity_primal(P, E);
            auto du = capacity_dual(P, E);
            double cf = capacity_compact_formula(P, E);
            double gp = du.dual_value - pr.primal_value;
            if (std::isfinite(gp)) worst_gap = std::max(worst_gap, std::abs(gp));
            if (std::isfinite(cf)) worst_formula = std::max(worst_formula, std::abs(cf - pr.primal_value));
            gap.x.push_back(static_cast<double>(i));
            gap.y.push_back(gp);
            rows.push_back({std::to_string(i), detail::num(arcs[i][0]), detail::num(arcs[i][1]),
                            std::to_string(E.size()), detail::num(pr.primal_value), detail::num(du.dual_value),
                            detail::num(gp), detail::num(cf), detail::num(pr.simplex_value),
                            pr.unbounded ? "1" : "0", pr.infinite ? "1" : "0"});
            per_arc.push_back({{"theta0", arcs[i][0]},
                               {"theta1", arcs[i][1]},
                               {"primal", detail::jnum(pr.primal_value)},
                               {"dual", detail::jnum(du.dual_value)},
                               {"gap", detail::jnum(gp)}});
            for (const auto& a : pr.optimal_measure.atoms)
                witness.push_back({std::to_string(i), detail::num(a.theta), detail::num(a.mass)});
        }
        return 0;
    });
    ctx.csv("capacity.csv",
            {"arc", "theta0", "theta1", "nodes", "primal", "dual", "gap", "compact_formula", "simplex", "all_in_zv",
             "infinite"},
            rows);
    // one row per atom of the optimal measure; arcs inside Z_V have none
    if (witness.empty()) witness.push_back({"-1", "0", "0"});
    ctx.csv("witness.csv", {"arc", "theta", "mass"}, witness);
    ctx.m.series.push_back(gap);
    ctx.m.required_series.push_back(gap.name);
    ctx.json_file("capacity.json", {{"potential", V.label},
                                    {"arcs", per_arc},
                                    {"witness_measure_csv", "witness.csv"},
                                    {"zv_nodes", zv.singular.size()},
                                    {"max_duality_gap", worst_gap},
                                    {"max_formula_error", worst_formula},
                                    {"normalization", "phi(0)=1"}});
    ctx.check("duality gap within tolerance", worst_gap <= c.duality_tol, detail::num(worst_gap));
    ctx.check("primal equals compact formula", worst_formula <= c.duality_tol, detail::num(worst_formula));
    return std::move(ctx.m);
}

inline RunManifest run_reduced(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "reduced");
    auto g = make_grid(c);
    auto V = build_potential(find_potential(c, c.potential));
    auto mu = build_measure(find_measure(c, c.measure), g);
    ReducedOptions opt;
    opt.solver = solver_options(c);
    auto r = ctx.timed("reduce", [&] { return reduce(V, mu, opt); });
    std::vector<std::vector<std::string>> rows;
    auto data = mollify_default(mu, c.atom_width_cells);
    for (int j = 0; j < g->num_boundary(); ++j)
        rows.push_back({std::to_string(j), detail::num(g->dim() == 2 ? g->theta(j) : 0.0), detail::num(data.density[j]),
                        detail::num(r.reduced_measure.density[j])});
    ctx.csv("mu_star.csv", {"node", "theta", "mu", "mu_star"}, rows);
    Series strips{"strip loss vs width", "rho", "loss", opt.recovery.rho, r.recovery.strip_mass};
    ctx.m.series.push_back(strips);
    double m0 = mu.mass(), ms = r.reduced_measure.mass();
    ctx.json_file("reduced.json", {{"potential", V.label},
                                   {"measure", c.measure},
                                   {"mu_mass", m0},
                                   {"mu_star_mass", ms},
                                   {"mass_loss", r.mass_loss},
                                   {"uncertainty", r.recovery.uncertainty},
                                   {"clipped", r.recovery.clipped},
                                   {"centre_mass", r.centre_mass},
                                   {"harmonic_residual", r.harmonic_residual}});
    bool below = true;
    for (int j = 0; j < g->num_boundary(); ++j)
        below &= r.reduced_measure.density[j] >= 0 && r.reduced_measure.density[j] <= data.density[j] + 1e-12;
    ctx.check("0 <= mu* <= mu nodewise", below);
    return std::move(ctx.m);
}

inline RunManifest run_singular_set(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "singular-set");
    auto g = make_grid(c);
    if (g->dim() != 2) throw ConfigError("singular-set: detectors need domain.dimension = 2");
    auto V = build_potential(find_potential(c, c.potential));
    auto e = eigenpair_for(*g);
    auto zv = ctx.timed("zv_detect", [&] { return zv_detect(V, g, e, c.workers); });
    std::vector<std::vector<std::string>> rows;
    bool contained = true, agree = true;
    ctx.timed("detectors", [&] {
        for (int j = 0; j < g->num_boundary(); j += c.node_stride) {
            KernelOptions ko;
            ko.workers = c.workers;
            auto kv = sing_detect_kernel(V, g, g->theta(j), ko);
            auto gr = sing_detect_green_ratio(V, g, g->theta(j), geometric_schedule(9, 4.0), 6, nullptr, c.workers);
            const auto& zj = zv.verdicts[j];
            if ((kv.singular() || gr.singular()) && !zj.divergent()) contained = false;
            if (kv.membership != Membership::inconclusive && gr.membership != Membership::inconclusive &&
                kv.membership != gr.membership)
                agree = false;
            rows.push_back({std::to_string(j), detail::num(g->theta(j)), to_string(zj.classification),
                            detail::num(zj.p), detail::num(kv.value), to_string(kv.membership), detail::num(gr.value),
                            to_string(gr.membership)});
        }
        return 0;
    });
    ctx.csv("singular_set.csv",
            {"node", "theta", "zv", "zv_exponent", "kernel_value", "kernel_verdict", "green_ratio", "ratio_verdict"}, rows);
    Series ay{"a_y(eps) vs eps", "eps", "a_y(eps)", {}, {}};
    for (auto [x, y] : zv.verdicts[0].samples) {
        ay.x.push_back(x);
        ay.y.push_back(y);
    }
    ctx.m.series.push_back(ay);
    ctx.m.required_series.push_back(ay.name);
    ctx.json_file("singular_set.json", {{"potential", V.label},
                                        {"zv_nodes", zv.singular.size()},
                                        {"zv_inconclusive", zv.inconclusive.size()},
                                        {"verdict_node0", detail::verdict_json(zv.verdicts[0])}});
    ctx.check("detector-singular nodes lie in Z_V", contained);
    ctx.check("kernel and green-ratio detectors agree", agree);
    return std::move(ctx.m);
}

inline RunManifest run_trace(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "trace");
    auto g = make_grid(c);
    if (g->dim() != 2) throw ConfigError("trace: needs domain.dimension = 2");
    auto V = build_potential(find_potential(c, c.potential));
    auto mu = build_measure(find_measure(c, c.measure), g);
    auto sol = ctx.timed("solve_measure", [&] { return solve_measure(V, mu, solver_options(c)); });
    auto rep = ctx.timed("regular_set", [&] { return regular_set(sol.limit, V); });
    std::vector<std::vector<std::string>> rows;
    json arcs = json::array();
    for (std::size_t a = 0; a < rep.arcs.size(); ++a) {
        const auto& t = rep.arcs[a];
        double mass = 0.0;
        for (int j : t.nodes) mass += rep.trace.density[j] * g->boundary_weight();
        double len = t.nodes.size() * g->boundary_weight();
        rows.push_back({std::to_string(a), detail::num(t.theta0), detail::num(t.theta1), to_string(t.membership),
                        detail::num(len > 0 ? mass / len : 0.0), detail::num(t.gap_ratio),
                        to_string(t.layer_verdict.classification), to_string(t.mass_verdict.classification)});
        arcs.push_back({{"arc", a},
                        {"membership", to_string(t.membership)},
                        {"gap_ratio", t.gap_ratio},
                        {"layer", detail::verdict_json(t.layer_verdict)},
                        {"mass", detail::verdict_json(t.mass_verdict)}});
    }
    ctx.csv("arcs.csv",
            {"arc", "theta0", "theta1", "classification", "trace_density", "gap_ratio", "layer_verdict", "mass_verdict"},
            rows);
    for (const auto& z : trig_dictionary(*g, 4)) {
        auto L = layer_trace(sol.limit, z.values, rep.eps);
        double ex = sol.data.pair(z.values, [](double) { return 0.0; });
        Series s{"trace error vs eps " + z.label, "eps", "relative error", rep.eps, {}};
        for (double x : L) s.y.push_back(std::abs(x - ex) / std::max(std::abs(ex), 1e-300));
        ctx.m.series.push_back(s);
    }
    ctx.m.required_series.push_back("trace error vs eps 1");
    json summary = {{"potential", V.label},
                    {"measure", c.measure},
                    {"regular_nodes", rep.regular_set.size()},
                    {"singular_nodes", rep.singular_set.size()},
                    {"inconclusive_nodes", rep.inconclusive.size()},
                    {"trace_mass", rep.trace.mass()},
                    {"data_mass", sol.data.mass()},
                    {"note", rep.note},
                    {"arcs", arcs}};
    if (c.extended) {
        auto ex = ctx.timed("extended_trace", [&] {
            return extended_trace(sol.limit, V, default_dictionary(g), nullptr, 4, {}, c.workers);
        });
        std::vector<std::vector<std::string>> cells;
        for (const auto& cell : ex.cells)
            cells.push_back({std::to_string(cell.level), std::to_string(cell.first), std::to_string(cell.last),
                             detail::num(cell.value), detail::num(cell.singular_part), detail::num(cell.regular_part),
                             cell.best});
        ctx.csv("extended_trace.csv", {"level", "first", "last", "value", "singular_part", "regular_part", "best"}, cells);
        summary["extended"] = {{"total", ex.total},
                               {"sweeps", ex.sweeps},
                               {"relaxed_sweeps", ex.relaxed_sweeps},
                               {"additivity_defect", ex.additivity_defect},
                               {"note", ex.note}};
        double worst = 0.0;
        for (double d : ex.additivity_defect) worst = std::max(worst, d);
        ctx.check("extended trace finitely additive on dyadic cells", worst <= 1e-6, detail::num(worst));
    }
    ctx.json_file("trace.json", summary);
    ctx.check("every arc classified", rep.inconclusive.size() == 0);
    return std::move(ctx.m);
}

// Condition verdicts on the family DistancePower(1, alpha).
inline RunManifest run_criteria(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "criteria");
    auto g = make_grid(c);
    auto e = eigenpair_for(*g);
    std::vector<std::vector<std::string>> rows;
    bool consistent = true;
    ctx.timed("conditions", [&] {
        for (double a : c.alphas) {
            auto V = distance_power(1.0, a);
            auto t1 = check_t1(V, 0.5);
            auto i3 = condition_I3(V, *g, e, 0.0);
            bool marc0 = condition_marc0(V, *g, e, c.workers).uniform_vanishing;
            auto cone = cone_criterion(V, g->domain(), ConeRegion{0.0, 0.5});
            auto zv = zv_detect(V, g, e, c.workers);
            bool finite = a < 2.0;
            bool ok = t1.convergent() == finite && t1.divergent() == !finite && i3.verdict.convergent() == finite &&
                      marc0 == finite && cone.convergent() == finite && cone.divergent() == !finite &&
                      zv.singular.empty() == finite;
            consistent &= ok;
            rows.push_back({detail::num(a), to_string(t1.classification), to_string(i3.verdict.classification),
                            marc0 ? "true" : "false", to_string(cone.classification), std::to_string(zv.singular.size()),
                            ok ? "1" : "0"});
        }
        return 0;
    });
    ctx.csv("verdicts.csv", {"alpha", "t1", "I3", "marc0_uniform", "cone", "zv_nodes", "consistent"}, rows);
    ctx.json_file("criteria.json", {{"alphas", c.alphas}, {"threshold", 2.0}, {"consistent", consistent}});
    ctx.check("verdicts switch exactly at alpha = 2", consistent);
    return std::move(ctx.m);
}

inline RunManifest run_suite(const ExperimentConfig& c) {
    detail::RunContext ctx(c, "suite");
    ExperimentSettings s;
    s.M = c.m_radial;
    s.Mt = c.m_angular;
    s.workers = c.workers;
    s.seed = c.seed;
    auto all = all_criteria();
    std::vector<int> ids = c.criteria;
    if (ids.empty())
        for (int i = 1; i <= static_cast<int>(all.size()); ++i) ids.push_back(i);
    std::vector<std::vector<std::string>> rows;
    json results = json::array();
    for (int id : ids) {
        auto r = all[id - 1](s);
        ctx.m.wall_times.emplace_back("criterion_" + std::to_string(id), r.seconds);
        rows.push_back({std::to_string(r.id), "\"" + r.title + "\"", r.pass ? "PASS" : "FAIL"});
        json metrics = json::object();
        for (const auto& [k, v] : r.metrics) metrics[k] = detail::jnum(v);
        results.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"metrics", metrics}, {"notes", r.notes}});
        for (auto se : r.series) {
            se.name = "criterion " + std::to_string(r.id) + " " + se.name;
            ctx.m.series.push_back(se);
        }
        std::string detail;
        for (const auto& n : r.notes) detail += (detail.empty() ? "" : "; ") + n;
        ctx.check("criterion " + std::to_string(r.id) + ": " + r.title, r.pass, detail);
    }
    ctx.csv("criteria.csv", {"id", "title", "status"}, rows);
    ctx.json_file("criteria.json", {{"results", results}});
    return std::move(ctx.m);
}

inline RunManifest run(const std::string& subcommand, const ExperimentConfig& c) {
    validate(c);
    RunManifest m;
    if (subcommand == "solve") m = run_solve(c);
    else if (subcommand == "capacity") m = run_capacity(c);
    else if (subcommand == "reduced") m = run_reduced(c);
    else if (subcommand == "singular-set") m = run_singular_set(c);
    else if (subcommand == "trace") m = run_trace(c);
    else if (subcommand == "criteria") m = run_criteria(c);
    else if (subcommand == "suite") m = run_suite(c);
    else throw ConfigError("unknown subcommand '" + subcommand + "'");
    emit_plotdata(m);
    finalize_manifest(m);
    return m;
}

}  // namespace mbvp
