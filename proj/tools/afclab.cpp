// afclab: command-line front end for the spin-storage simulation library.
//
//   afclab <scenario> [--config run.json] [--seed N] [--n-traj N] [--out-dir D] [--strict] [--threads N]
//   afclab reproduce <fig4|fig5|fig6a|fig6b|appendixA3> ...
//
// Thread count defaults to $AFC_THREADS, then the hardware concurrency.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "afc/run_config.hpp"
#include "afc/scenarios.hpp"

namespace {

using nlohmann::json;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_traj;
    std::string out_dir;
    std::string reproduce_name;
    bool strict = false;
    unsigned threads = 0;
};

int report_error(const std::string& category, const std::string& message, int code) {
    std::cerr << json{{"error", {{"category", category}, {"message", message}}}}.dump() << '\n';
    return code;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw afc::ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw afc::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

int execute(const std::string& scenario, const Overrides& o) {
    afc::RunConfig cfg;
    try {
        json j = o.config_path.empty() ? json::object() : load_json(o.config_path);
        if (!j.is_object()) throw afc::ConfigError("config must be a JSON object");
        if (j.contains("scenario") && j["scenario"] != scenario)
            throw afc::ConfigError("config scenario '" + j["scenario"].dump() + "' does not match subcommand '" +
                                   scenario + "'");
        j["scenario"] = scenario;
        if (o.seed) j["ensemble"]["seed"] = *o.seed;
        if (o.n_traj) j["ensemble"]["n_traj"] = *o.n_traj;
        if (!o.out_dir.empty()) j["io"]["out_dir"] = o.out_dir;
        if (!o.reproduce_name.empty()) j["reproduce"]["name"] = o.reproduce_name;
        cfg = afc::parse_run_config(j);
    } catch (const afc::ConfigError& e) {
        return report_error("schema", e.what(), afc::kExitSchema);
    } catch (const std::exception& e) {
        return report_error("schema", e.what(), afc::kExitSchema);
    }

    const afc::RunOutcome r = afc::run(cfg, {o.threads, o.strict});
    for (const auto& w : r.summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    if (r.summary.contains("error")) {
        std::cerr << json{{"error", r.summary["error"]}}.dump() << '\n';
    }
    std::cout << json{{"scenario", scenario},
                      {"exit_code", r.exit_code},
                      {"out_dir", cfg.out_dir},
                      {"files", r.files},
                      {"wall_time_s", r.summary["wall_time_s"]}}
                     .dump()
              << '\n';
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-wave storage coherence simulator"};
    app.require_subcommand(1);
    Overrides o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "Run config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Master RNG seed");
        sub->add_option("--n-traj", o.n_traj, "Trajectories per point");
        sub->add_option("--out-dir", o.out_dir, "Output directory");
        sub->add_flag("--strict", o.strict, "Fail when an operating constraint is violated");
        sub->add_option("--threads", o.threads, "Worker threads (default: $AFC_THREADS or all cores)");
    };

    const std::vector<std::pair<std::string, std::string>> scenarios = {
        {"simulate", "Simulate one sequence"},
        {"sweep-fixed-n", "Decay curve at fixed pulse count over a tau grid"},
        {"sweep-fixed-tau", "Decay curve at fixed tau over a pulse-count grid"},
        {"fit", "Fit decay curves from CSV"},
        {"check-config", "Validate a config and the operating constraints"},
        {"reproduce", "Regenerate a scenario-library data bundle"},
    };
    std::string chosen;
    for (const auto& [name, help] : scenarios) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (name == "reproduce")
            sub->add_option("name", o.reproduce_name, "fig4, fig5, fig6a, fig6b or appendixA3")->required();
        sub->callback([&chosen, n = name] { chosen = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return afc::kExitSchema;
    }

    try {
        return execute(chosen, o);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), afc::kExitCrash);
    }
}
