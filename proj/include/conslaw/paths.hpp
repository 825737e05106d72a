#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "conslaw/grid.hpp"
#include "conslaw/rng.hpp"

namespace conslaw {

// Two-sided Brownian motion sigma*B pinned to 0 at the grid point nearest the origin.
GridPath sample_two_sided_bm(const GridSpec& grid, double sigma, std::uint64_t seed, std::uint64_t stream = 0);
GridPath sample_two_sided_bm(const GridSpec& grid, double sigma, Rng& rng);

// Standard Brownian bridge 0 -> 0 on n steps of an interval of the given length.
void fill_brownian_bridge(std::span<double> out, double length, Rng& rng);

// Excursion on [y, z]: sqrt(z-y) times the norm of three standard bridges.
GridPath sample_excursion(double y, double z, std::size_t n_steps, std::uint64_t seed, std::uint64_t stream = 0);
GridPath sample_excursion(double y, double z, std::size_t n_steps, Rng& rng);

// Three-dimensional Bessel bridge from a to b on [s0, s1].
//
// The endpoint direction of the underlying 3-D Brownian motion is drawn from
// its exact conditional law (density proportional to exp(a b cos(theta)/tau)
// on the sphere) and the path is the norm of a 3-D Brownian bridge from
// (a,0,0) to that endpoint. For a b = 0 this is the usual norm of a bridge.
GridPath sample_bessel3_bridge(double a, double b, double s0, double s1, std::size_t n_steps, Rng& rng);
GridPath sample_bessel3_bridge(double a, double b, double s0, double s1, std::size_t n_steps,
                               std::uint64_t seed, std::uint64_t stream = 0);

// Free three-dimensional Bessel process started at a.
GridPath sample_bessel3_process(double a, double s0, double s1, std::size_t n_steps, Rng& rng);

enum class JumpLaw { Exponential, Pareto };

struct LevySpec {
    double brownian_sigma = 1.0;
    double drift = 0.0;
    double jump_intensity = 0.0;
    JumpLaw jump_law = JumpLaw::Exponential;
    double jump_mean = 1.0;    // exponential
    double pareto_alpha = 2.0;  // pareto
    double pareto_xmin = 1.0;

    void validate() const;
    nlohmann::json to_json() const;
    static LevySpec from_json(const nlohmann::json& j);
};

struct Jump {
    double location;
    double size;
};

struct LevyPath {
    GridPath path;             // continuous part plus jumps
    GridPath continuous_part;  // sigma B + drift x, pinned like path
    std::vector<Jump> jumps;   // sorted by location
};

// Cadlag: the value at a grid point includes every jump at or before it.
LevyPath sample_levy(const LevySpec& spec, const GridSpec& grid, std::uint64_t seed, std::uint64_t stream = 0);

// Jump part of a path pinned at the grid anchor, restricted to jumps of size >= min_size.
std::vector<double> render_jumps(const GridSpec& grid, std::span<const Jump> jumps, double min_size = 0.0);

// Removes every recorded jump of size > N, keeping the anchor at 0.
GridPath truncate_jumps(const GridPath& path, std::span<const Jump> jumps, double N);

// Same path on a grid with half the step: new midpoints are Brownian-bridge
// draws with diffusion sigma (any linear drift is interpolated exactly).
GridPath refine_brownian(const GridPath& path, double sigma, Rng& rng);

}  // namespace conslaw
