#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "conslaw/grid.hpp"
#include "conslaw/hamiltonian.hpp"

namespace conslaw {

struct HopfLaxResult {
    double u;            // sup_y U0(y) - phi(y - x)
    double y;            // rightmost maximiser
    std::size_t index;   // grid index of y
};

// Full scan of the U0 grid. Ties within tie_rel * (max - min of the objective)
// resolve to the rightmost grid point.
HopfLaxResult hopf_lax(const GridPath& U0, const ConvexFunction& phi, double x, double tie_rel = 1e-12);

struct SolutionField {
    GridSpec x_grid;
    double t = 1.0;
    std::vector<double> u;
    std::vector<double> y;
    std::vector<double> rho;
    std::vector<std::size_t> y_index;

    void write_csv(const std::filesystem::path& path) const;
};

// Rightmost maximisers for every x of the grid. Uses monotonicity of the
// rightmost maximiser in x (divide and conquer over the x-grid), O(M log N).
std::vector<HopfLaxResult> rightmost_argmax_field(const GridPath& U0, const ConvexFunction& phi,
                                                  const GridSpec& x_grid, double tie_rel = 1e-12);
// Brute-force O(M N) version of the above with the same tie rule.
std::vector<HopfLaxResult> rightmost_argmax_field_reference(const GridPath& U0, const ConvexFunction& phi,
                                                            const GridSpec& x_grid, double tie_rel = 1e-12);

// Entropy solution rho = L'((y - x)/t) with phi = t L(./t).
SolutionField solve_field(const GridPath& U0, const ConvexFunction& H, double t, const GridSpec& x_grid,
                          double tie_rel = 1e-12);

struct Shock {
    double x;
    double rho_left;
    double rho_right;
    double gap;  // y(x) - y(x-)
};

struct ShockReport {
    std::vector<Shock> shocks;
    double resolution = 0.0;
    double min_gap = 0.0;

    std::size_t count_in(double a, double b) const;
    void write_csv(const std::filesystem::path& path) const;
};

// Cells where y jumps by more than min_gap (min_gap must be at least the x-step).
ShockReport shock_census(const SolutionField& field, double min_gap);

std::vector<double> psi_process(const GridPath& U0, const ConvexFunction& phi, const GridSpec& x_grid);

// Padding R with phi(+-R) >= 6 sigma sqrt(R) + 1 above phi's minimum scale.
double padding_radius(const ConvexFunction& phi, double sigma);

}  // namespace conslaw
