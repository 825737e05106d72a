#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "conslaw/excursion.hpp"
#include "conslaw/grid.hpp"
#include "conslaw/hamiltonian.hpp"

namespace conslaw {

// Killed heat kernel (method of images) for x, y < 0.
double images_kernel(double s, double x, double t, double y);

// f(s,x,t,y): density of S = W - phi started at x at time s, killed at 0.
// Girsanov factor times E[exp(-int phi'' B)] over Bessel-3 bridges -x -> -y.
ExcursionFunctionalEstimate f_mc(const ConvexFunction& phi, double s, double x, double t, double y,
                                 const McParams& mc);

// Hitting density of 0 at time t (Bessel-3 bridge -x -> 0).
ExcursionFunctionalEstimate hitting_density_Phi(const ConvexFunction& phi, double s, double x, double t,
                                                const McParams& mc);

struct PdeParams {
    double dy = 5e-4;
    double dt_max = 1e-3;
    double eps0 = 1e-4;     // warm start time after s
    double y_max = 0.0;     // 0: chosen from the horizon and the drift
    double growth = 1.05;   // time step growth from eps0/4 up to dt_max
    int rannacher = 4;      // implicit Euler start-up steps
};

struct DensityGrid {
    double s = 0.0;
    double x = 0.0;
    std::vector<double> t_grid;
    GridSpec y_grid;               // [-y_max, 0]
    std::vector<double> values;    // row per time
    std::vector<double> mass;      // int f dy per time

    double at(std::size_t ti, double y) const;
    void write_csv(const std::filesystem::path& path, std::size_t every = 1) const;
};

struct PdeResult {
    DensityGrid grid;
    std::vector<double> times;      // every time step
    std::vector<double> flux;       // -(1/2) d_y f(t,0) at each step (hitting density)
    std::vector<double> far_flux;   // loss rate through -y_max
    std::vector<double> far_loss;   // cumulative loss through -y_max (discrete, mass balancing)
    std::vector<double> zero_loss;  // cumulative loss through 0 after the warm start
    std::vector<double> step_mass;  // int f dy at each step
    double initial_mass = 0.0;
    double max_peclet = 0.0;
    double min_value = 0.0;         // most negative grid value seen
    bool mass_monotone = true;
    bool refined = false;           // dy halved by the Peclet guard

    // Absorbed at 0 by time t, including the part absorbed before the warm start.
    double absorbed_at_zero(double t) const;
    double flux_at(double t) const;
};

// Crank-Nicolson for d_t f = (1/2) d_yy f + phi'(t) d_y f on [-y_max, 0],
// absorbing at both ends, warm started at s + eps0 from the images kernel
// with the drift frozen at phi'(s). Central drift differences with a Peclet guard:
// dy is halved once if |phi'| dy / (1/2) exceeds 2, then StabilityError.
PdeResult f_pde(const ConvexFunction& phi, double s, double x, double t_max, std::span<const double> output_times,
                const PdeParams& params = {});

// Minimum far boundary distance for a horizon.
double default_y_max(const ConvexFunction& phi, double s, double x, double t_max);

struct SurvivalReport {
    std::vector<double> probes;
    std::vector<double> J;
    std::vector<double> t_plateau;
    double f_value = 0.0;   // f^phi(s) = -j(s)
    double f_std_error = 0.0;
};

// J(s,x) = P[S stays negative after s | S(s) = x] from the absorbed mass, with
// the horizon doubled until the hitting rate drops below 1e-6; j(s) through f^phi.
SurvivalReport survival_J_and_j(const ConvexFunction& phi, double s, std::span<const double> probes,
                                const ExcursionEnsemble& ens, const PdeParams& pde = {},
                                const QuadParams& quad = {});
double survival_J(const ConvexFunction& phi, double s, double x, const PdeParams& pde, double* t_plateau = nullptr);

// Joint density of (argmax, max) of S on [s, inf) given S(s) = x:
// f^phi(t) Phi(s, x - z, t).
double joint_max_argmax_density(double f_phi_at_t, double Phi_value);
ExcursionFunctionalEstimate joint_max_argmax_density(const ConvexFunction& phi, double s, double x, double t,
                                                     double z, const ExcursionEnsemble& ens, const McParams& mc,
                                                     const QuadParams& quad = {});

struct JointMarginals {
    std::vector<double> t;          // argmax grid
    std::vector<double> t_cdf;      // P[argmax <= t, max <= x + Z]
    std::vector<double> z;          // max grid
    std::vector<double> z_density;
    double mass = 0.0;
};

// Integrates the joint density over (s, s+T] x (x, x+Z] with Phi from one PDE
// solve per max level and f^phi tabulated on the time grid.
JointMarginals joint_marginals(const ConvexFunction& phi, double s, double x, double T, double Z, std::size_t n_z,
                               const ExcursionEnsemble& ens, const PdeParams& pde = {}, const QuadParams& quad = {});

struct MaxArgmaxSample {
    double argmax;
    double max;
};

// Direct simulation of S on [s, s+T]: cells that can hold the maximum are
// halved twelve times with exact bridge midpoints, then the bridge maximum is drawn.
std::vector<MaxArgmaxSample> simulate_max_argmax(const ConvexFunction& phi, double s, double x, double T,
                                                 double step, std::size_t n_paths, std::uint64_t seed,
                                                 Exec exec = Exec::Parallel);

}  // namespace conslaw
