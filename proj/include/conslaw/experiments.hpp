#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conslaw/config.hpp"
#include "conslaw/hamiltonian.hpp"
#include "conslaw/parallel.hpp"

namespace conslaw {

// One pass/fail line of an experiment.
struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;

    nlohmann::json to_json() const;
};

struct ExperimentResult {
    nlohmann::json summary = nlohmann::json::object();
    std::vector<Check> checks;
    std::vector<std::string> files;  // relative to the output directory

    bool passed() const;
    void merge(const std::string& key, ExperimentResult other);
};

// Argmax of W(z) - phi(z) over the grid on [-range, range], W a two-sided
// Brownian motion from 0; path i uses its own stream.
std::vector<double> direct_argmax_samples(const ConvexFunction& phi, double range, double step, std::size_t n_paths,
                                          std::uint64_t seed, Exec exec = Exec::Parallel);

// Each experiment reads its settings from the config and writes CSV files
// into out_dir. Command names follow the CLI.
ExperimentResult run_chernoff(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_solve(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_kernel(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_simulate(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_density(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_airy_check(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_shocks(const Config& cfg, const std::filesystem::path& out_dir);
ExperimentResult run_psi(const Config& cfg, const std::filesystem::path& out_dir);

// Every acceptance experiment. With check_determinism the whole suite is also
// run twice at the reduced scale of validate.determinism_overrides and the
// CSV files of the two runs are compared byte for byte.
ExperimentResult run_validate(const Config& cfg, const std::filesystem::path& out_dir, bool check_determinism = true);

// Names of the commands accepted by run_command.
const std::vector<std::string>& command_names();
ExperimentResult run_command(const std::string& command, const Config& cfg, const std::filesystem::path& out_dir);

// True when both directories hold the same set of CSV files with equal bytes;
// differing files are appended to mismatches.
bool same_csv_files(const std::filesystem::path& a, const std::filesystem::path& b,
                    std::vector<std::string>* mismatches = nullptr);

// Settings used when a key is absent from a user config.
nlohmann::json default_config();

}  // namespace conslaw
