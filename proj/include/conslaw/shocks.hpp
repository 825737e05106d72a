#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "conslaw/hamiltonian.hpp"
#include "conslaw/parallel.hpp"
#include "conslaw/paths.hpp"

namespace conslaw {

// Half-width of the potential grid around a window: the Hopf-Lax kernel must
// beat Brownian fluctuations and the mean upward drift of the jumps.
double levy_padding(const ConvexFunction& phi, const LevySpec& levy);

struct CensusParams {
    LevySpec levy;
    double t = 1.0;
    double window_lo = 0.0;
    double window_hi = 1.0;
    int levels = 4;
    double base_step = 1.0 / 256.0;  // x and potential step at level 0
    double min_gap = 0.05;           // Lagrangian gap counted as a shock
    std::size_t replicates = 16;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct CensusLevel {
    int level;
    double grid_step;
    std::size_t count;  // summed over replicates
};

struct CensusReport {
    std::vector<CensusLevel> levels;
    double final_change = 0.0;  // |c_L - c_{L-1}| / max(c_{L-1}, 1)
    bool saturated = false;     // final_change <= 0.2

    nlohmann::json to_json() const;
    void write_csv(const std::filesystem::path& path) const;  // level,grid_step,count
};

// Shock counts on the window while the x-grid and the potential grid are
// halved together; the potential is refined with Brownian-bridge midpoints
// and the same jumps, so every level sees the same sample path.
CensusReport census_experiment(const ConvexFunction& H, const CensusParams& params);

struct TruncationParams {
    LevySpec levy;
    double t = 1.0;
    double window_lo = 0.0;
    double window_hi = 1.0;
    double step = 1.0 / 1024.0;
    double min_gap = 0.0;        // 0: one grid step (shock sets at grid resolution)
    std::vector<double> n_list;  // increasing; empty: every sampled jump size and 0
    std::size_t replicates = 20;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct TruncationRow {
    std::size_t replicate;
    std::size_t jumps;                // in the whole potential grid
    double max_jump = 0.0;            // anywhere on the potential grid
    // located in the Lagrangian hull: y(a)..y(b) over U0 and the truncations
    // down to the first one whose shock set differs
    double max_window_jump = 0.0;
    double stabilization_n = 0.0;     // smallest N from which the shock set never changes
    std::size_t shocks = 0;
};

struct TruncationReport {
    std::vector<TruncationRow> rows;
    std::size_t matches = 0;   // rows with stabilization_n == max_window_jump
    std::size_t bounded = 0;   // rows with stabilization_n <= max_window_jump

    nlohmann::json to_json() const;
    // replicate,jumps,max_jump,max_window_jump,stabilization_n,shocks
    void write_csv(const std::filesystem::path& path) const;
};

// Shock sets (cells where y jumps by more than min_gap) of U0 with jumps larger than N
// removed, compared with the untruncated set for every N of the list.
TruncationReport truncation_stability(const ConvexFunction& H, const TruncationParams& params);

}  // namespace conslaw
