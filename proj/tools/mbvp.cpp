// mbvp: experiment driver. One run directory per invocation.
#include <iostream>

#include <CLI11.hpp>

#include <mbvp/runner.hpp>

namespace {

enum Exit { ok = 0, config = 2, numerical = 3, breach = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schrodinger boundary problems with measure data on balls"};
    app.require_subcommand(1, 1);
    std::string config_path, out, grid, potential;
    int workers = 0;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out, "output directory (output.dir)");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--grid", grid, "radial x angular nodes, e.g. 256x256");
    app.add_option("--set", sets, "override a config key by dotted path: key=value; for capacity also an arc theta0:theta1")
        ->take_all();
    app.add_option("--potential", potential, "label of the potential to use (select.potential)");
    app.add_flag_callback("--print-default-config", [] {
        std::cout << mbvp::to_json(mbvp::ExperimentConfig{}).dump(2) << "\n";
        throw CLI::Success();
    }, "print the default config and exit");
    for (const char* name : {"solve", "capacity", "reduced", "singular-set", "trace", "criteria", "suite"})
        app.add_subcommand(name, std::string("run the ") + name + " experiment")->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::config;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        mbvp::json j = config_path.empty() ? mbvp::to_json(mbvp::ExperimentConfig{}) : mbvp::load_config_json(config_path);
        if (!out.empty()) mbvp::apply_override(j, "output.dir=" + mbvp::json(out).dump());
        if (!potential.empty()) mbvp::apply_override(j, "select.potential=" + mbvp::json(potential).dump());
        if (workers > 0) mbvp::apply_override(j, "workers=" + std::to_string(workers));
        if (!grid.empty()) {
            int m = 0, k = 0;
            char x = 0;
            std::istringstream gs(grid);
            if (!(gs >> m >> x >> k) || (x != 'x' && x != 'X') || !gs.eof())
                throw mbvp::ConfigError("--grid: expected MxK, got '" + grid + "'");
            mbvp::apply_override(j, "grid.M_radial=" + std::to_string(m));
            mbvp::apply_override(j, "grid.M_angular=" + std::to_string(k));
        }
        for (const auto& s : sets) {
            double a = 0, b = 0;
            char colon = 0;
            std::istringstream as(s);
            if (sub == "capacity" && s.find('=') == std::string::npos && (as >> a >> colon >> b) && colon == ':' && as.eof()) {
                j["capacity"]["arcs"].push_back({a, b});
                continue;
            }
            mbvp::apply_override(j, s);
        }
        auto cfg = mbvp::config_from_json(j);
        auto m = mbvp::run(sub, cfg);
        for (const auto& c : m.checks)
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << (c.detail.empty() ? "" : "  (" + c.detail + ")")
                      << "\n";
        std::cout << "wrote " << m.files.size() << " files to " << m.dir.string() << " (config " << m.config_hash.substr(0, 12)
                  << ")\n";
        return m.all_pass() ? Exit::ok : Exit::breach;
    } catch (const mbvp::Error& e) {
        std::cerr << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return Exit::numerical;
    }
}
