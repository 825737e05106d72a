// Batch entry point: conslaw <command> --config FILE [--set key=value]... [--threads N]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "conslaw/config.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/experiments.hpp"
#include "conslaw/parallel.hpp"

namespace fs = std::filesystem;
using conslaw::Config;
using conslaw::ConfigError;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int threads_from_env() {
    const char* env = std::getenv("CONSLAW_THREADS");
    if (!env || !*env) return 0;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("CONSLAW_THREADS", "must be a positive integer");
    return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerics for scalar conservation laws with white-noise initial data"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    int threads = 0;
    std::string output_dir;
    bool print_default = false;
    app.add_flag("--print-default-config", print_default, "Print the shipped default configuration and exit");
    app.set_version_flag("--version", kVersion);

    for (const std::string& name : conslaw::command_names()) {
        CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
        sub->add_option("-c,--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-s,--set", overrides, "Override a config field: key=value (dotted key)");
        sub->add_option("-t,--threads", threads, "Worker threads (default: CONSLAW_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
        sub->add_option("-o,--output-dir", output_dir, "Overrides output_dir");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (print_default) {
        std::cout << conslaw::default_config().dump(2) << "\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        Config cfg = Config::load(config_path);
        for (const std::string& o : overrides) cfg.set(o);
        if (!output_dir.empty()) cfg.set("output_dir=" + nlohmann::json(output_dir).dump());
        const std::uint64_t seed = cfg.seed();
        const fs::path out_dir = cfg.text("output_dir");

        if (threads == 0) threads = threads_from_env();
        conslaw::set_thread_count(threads);

        const std::string started = utc_now();
        const auto t0 = std::chrono::steady_clock::now();
        conslaw::ExperimentResult result = conslaw::run_command(command, cfg, out_dir);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const bool passed = result.passed();
        const int exit_code = passed ? 0 : 2;
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : result.checks) checks.push_back(c.to_json());
        const nlohmann::json manifest = {{"command", command},
                                         {"version", kVersion},
                                         {"seed", seed},
                                         {"config_hash", hex64(cfg.hash())},
                                         {"config", cfg.doc()},
                                         {"threads", conslaw::thread_count()},
                                         {"started_utc", started},
                                         {"elapsed_seconds", elapsed},
                                         {"files", result.files},
                                         {"checks", checks},
                                         {"passed", passed},
                                         {"exit_code", exit_code},
                                         {"summary", result.summary}};
        std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";

        for (const auto& c : result.checks)
            std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value=" << c.value << "  threshold=" << c.threshold
                      << "\n";
        std::cout << command << ": " << (passed ? "ok" : "validation failed") << " in " << std::fixed
                  << std::setprecision(1) << elapsed << " s, outputs in " << out_dir.string() << "\n";
        return exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
