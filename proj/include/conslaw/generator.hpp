#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "conslaw/excursion.hpp"
#include "conslaw/grid.hpp"
#include "conslaw/hamiltonian.hpp"
#include "conslaw/rng.hpp"
#include "conslaw/variational.hpp"

namespace conslaw {

// Slope of the smooth pieces of x -> rho(x,t): -1/(t H''(rho)).
double drift_b(const ConvexFunction& H, double rho, double t);

struct KernelTableParams {
    double rho_min = -3.5;
    double rho_max = 4.0;
    double row_step = 0.1;
    double delta = 0.02;        // smallest jump kept
    double s_max = 3.5;         // largest jump is s_max^2
    std::size_t n_offsets = 96;
    double bracket_step = 0.05; // spacing of the tabulated bracket term
};

// Jump kernel n(rho-, rho+, t) on rows rho- and a shared grid of offsets
// s = sqrt(rho+ - rho-) in [sqrt(delta), s_max]. In s the row density
// 2 s n(rho-, rho- + s^2) stays bounded near the diagonal, so rows are kept
// in that variable and sampled as piecewise-linear densities.
class KernelTable {
public:
    static KernelTable build(const ConvexFunction& H, double t, const KernelTableParams& params,
                             const ExcursionEnsemble& ens, const QuadParams& quad = {});
    // Table from given values n(row, offset), row-major; rows equally spaced.
    // Used for synthetic kernels.
    static KernelTable from_values(double t, double delta, std::vector<double> rows, std::vector<double> offsets,
                                   std::vector<double> n);

    double t() const { return t_; }
    double delta() const { return delta_; }
    const std::vector<double>& rows() const { return rows_; }
    const std::vector<double>& offsets() const { return offsets_; }
    double n_at(std::size_t row, std::size_t col) const { return n_[row * offsets_.size() + col]; }
    double se_at(std::size_t row, std::size_t col) const { return se_[row * offsets_.size() + col]; }
    double row_rate(std::size_t row) const { return lambda_[row]; }
    bool row_ill_conditioned(std::size_t row) const { return ill_[row] != 0; }

    bool covers(double rho) const { return rho >= rows_.front() && rho <= rows_.back(); }
    // Total rate of jumps larger than delta, linear between rows.
    double rate(double rho) const;
    double max_rate() const;
    // Jump size distribution from rho (mixture of the two neighbouring rows).
    double jump_size_cdf(double rho, double size) const;
    double sample_target(double rho, Rng& rng) const;

    void write_csv(const std::filesystem::path& path) const;
    nlohmann::json metadata() const;

private:
    struct Mix {
        std::size_t row;
        double w;  // weight of row + 1
    };
    Mix locate(double rho) const;
    double row_cdf(std::size_t row, double s) const;  // unnormalised, in s
    double row_inverse(std::size_t row, double mass) const;

    double t_ = 1.0;
    double delta_ = 0.0;
    std::vector<double> rows_;
    std::vector<double> offsets_;
    std::vector<double> n_;
    std::vector<double> se_;
    std::vector<double> lambda_;
    std::vector<unsigned char> ill_;
    double max_bracket_rel_se_ = 0.0;
    double min_bracket_ = 0.0;
};

struct ProfileJump {
    double x;
    double rho_before;
    double rho_after;
};

struct ProfileSample {
    GridSpec x_grid;           // recording grid
    std::vector<double> rho;   // value at each recording point (cadlag)
    std::vector<ProfileJump> jumps;

    void write_csv(const std::filesystem::path& path) const;
};

struct ProfileParams {
    double x0 = 0.0;
    double x1 = 4.0;
    double record_step = 1.0 / 1024.0;
    double ode_step = 1.0 / 64.0;  // largest RK4 substep
};

// Piecewise-deterministic simulation: RK4 for drho/dx = b(rho,t) between
// jumps, jump times by thinning against 1.1 * max table rate, targets from
// the table. TableRangeError if rho leaves the table rows.
ProfileSample simulate_profile(const ConvexFunction& H, double t, const KernelTable& table, double rho0,
                               const ProfileParams& params, Rng& rng);

// Least-squares slopes of the smooth pieces holding at least min_points recorded points.
struct PieceSlope {
    double slope;
    double expected;  // mean drift b along the piece
    std::size_t points;
};
std::vector<PieceSlope> piece_slopes(const ProfileSample& profile, const ConvexFunction& H, double t,
                                     std::size_t min_points = 3);

// Profile extracted from a direct variational solve: jumps are cells where the
// backward Lagrangian moves; rho_before continues the left state to the cell end.
ProfileSample profile_from_field(const SolutionField& field, const ConvexFunction& H);

struct CompareParams {
    std::size_t n_paths = 1000;
    double length = 4.0;          // profiles on [0, length]
    double step = 1.0 / 2048.0;   // potential and x step of the direct solve
    double sigma = 1.0;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct CompareReport {
    std::size_t n_paths = 0;
    std::size_t marginal_samples = 0;
    double ks_marginal = 0.0;
    std::size_t direct_jumps = 0;
    std::size_t generator_jumps = 0;
    double ks_jump_size = 0.0;
    double direct_rate = 0.0;        // jumps per unit length
    double direct_table_rate = 0.0;  // average of table rate along direct profiles
    double generator_rate = 0.0;
    double rate_rel_diff = 0.0;
    std::size_t pieces = 0;
    double max_slope_rel_error = 0.0;
    std::size_t out_of_table = 0;    // direct profile points outside the table rows

    nlohmann::json to_json() const;
};

struct DirectEnsemble {
    std::vector<ProfileSample> profiles;
    std::vector<double> rho_at_origin;
};

// Direct Lax-Oleinik profiles of Brownian potentials on [0, length].
DirectEnsemble direct_profiles(const ConvexFunction& H, double t, const CompareParams& params);

CompareReport compare_with_direct(const ConvexFunction& H, double t, const KernelTable& table,
                                  const CompareParams& params, std::vector<ProfileSample>* generated = nullptr,
                                  const DirectEnsemble* direct = nullptr);

}  // namespace conslaw
