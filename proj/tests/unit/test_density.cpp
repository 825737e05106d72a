#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conslaw/density.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/stats.hpp"

using namespace conslaw;

namespace {

const ConvexFunction square = ConvexFunction::quadratic(2.0);     // z^2
const ConvexFunction nearly_flat = ConvexFunction::quadratic(2e-6);  // 1e-6 z^2
// convex, not even: z^4/4 + z^3/3 + z^2/2
const ConvexFunction lopsided = ConvexFunction::polynomial({0.0, 0.0, 0.5, 1.0 / 3.0, 0.25});

McParams mc(std::size_t n, std::uint64_t seed) {
    McParams p;
    p.n_samples = n;
    p.n_steps = 256;
    p.seed = seed;
    return p;
}

const ExcursionEnsemble& ensemble() {
    static const ExcursionEnsemble ens(20000, 512, 3);
    return ens;
}

}  // namespace

TEST_CASE("Monte Carlo density in the flat limit") {
    for (double y : {-0.3, -1.0, -2.2}) {
        const auto f = f_mc(nearly_flat, 0.0, -1.0, 1.0, y, mc(2000, 1));
        const double g = images_kernel(0.0, -1.0, 1.0, y);
        CHECK(std::abs(f.mean / g - 1.0) <= 1e-3);
    }
}

TEST_CASE("short-time heat kernel limit") {
    const auto f = f_mc(square, 0.0, -1.0, 1e-4, -1.0, mc(5000, 2));
    CHECK(std::abs(f.mean * std::sqrt(2.0 * std::numbers::pi * 1e-4) - 1.0) <= 0.01);
}

TEST_CASE("Monte Carlo and PDE agree at one point") {
    const std::vector<double> out{1.0};
    const PdeResult r = f_pde(square, 0.0, -1.0, 1.0, out);
    const auto m = f_mc(square, 0.0, -1.0, 1.0, -1.0, mc(20000, 3));
    CHECK(std::abs(m.mean / r.grid.at(0, -1.0) - 1.0) <= 0.05);
}

TEST_CASE("PDE in the flat limit") {
    const std::vector<double> out{1.0};
    const PdeResult r = f_pde(nearly_flat, 0.0, -1.0, 1.0, out);
    const auto& g = r.grid.y_grid;
    double peak = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) peak = std::max(peak, images_kernel(0.0, -1.0, 1.0, g.x(i)));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double exact = images_kernel(0.0, -1.0, 1.0, g.x(i));
        if (exact < 1e-3 * peak) continue;
        worst = std::max(worst, std::abs(r.grid.values[i] / exact - 1.0));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("PDE mass, positivity and flux balance") {
    const std::vector<double> out{0.5, 1.0};
    for (const auto& phi : {square, lopsided}) {
        const PdeResult r = f_pde(phi, 0.0, -1.0, 1.0, out);
        CHECK(r.mass_monotone);
        for (std::size_t i = 1; i < r.step_mass.size(); ++i) CHECK(r.step_mass[i] <= r.step_mass[i - 1] + 1e-12);  // summation roundoff
        CHECK(r.min_value >= -1e-10);
        double through = 0.0;
        for (std::size_t i = 1; i < r.times.size(); ++i)
            through += 0.5 * (r.flux[i] + r.flux[i - 1] + r.far_flux[i] + r.far_flux[i - 1]) * (r.times[i] - r.times[i - 1]);
        CHECK(std::abs((r.initial_mass - r.step_mass.back()) - through) <= 1e-3);
        // absorbed probability is a nondecreasing sub-probability
        double prev = 0.0;
        for (double t = 0.05; t <= 1.0; t += 0.05) {
            const double a = r.absorbed_at_zero(t);
            CHECK(a >= prev - 1e-12);
            CHECK(a <= 1.0);
            prev = a;
        }
    }
}

TEST_CASE("PDE self-convergence") {
    const std::vector<double> out{1.0};
    PdeParams coarse;
    coarse.dy = 1e-3;
    coarse.dt_max = 2e-3;
    PdeParams fine;
    fine.dy = 5e-4;
    fine.dt_max = 1e-3;
    fine.y_max = coarse.y_max = default_y_max(square, 0.0, -1.0, 1.0);
    const PdeResult a = f_pde(square, 0.0, -1.0, 1.0, out, coarse), b = f_pde(square, 0.0, -1.0, 1.0, out, fine);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.grid.y_grid.size(); ++i)
        worst = std::max(worst, std::abs(a.grid.values[i] - b.grid.at(0, a.grid.y_grid.x(i))));
    CHECK(worst <= 1e-3);
}

TEST_CASE("hitting density in the flat limit") {
    for (double tau : {0.3, 1.0, 2.5}) {
        const auto h = hitting_density_Phi(nearly_flat, 0.0, -1.0, tau, mc(2000, 4));
        const double drift = nearly_flat.derivative(0.0);
        const double exact = 1.0 / std::sqrt(2.0 * std::numbers::pi * tau * tau * tau) *
                             std::exp(-std::pow(-1.0 - drift * tau, 2) / (2.0 * tau));
        CHECK(std::abs(h.mean / exact - 1.0) <= 1e-3);
    }
}

TEST_CASE("hitting density equals the boundary flux") {
    const std::vector<double> out{0.5, 1.0};
    const PdeResult r = f_pde(lopsided, 0.0, -1.0, 1.0, out);
    for (double t : out) {
        const auto h = hitting_density_Phi(lopsided, 0.0, -1.0, t, mc(20000, 5));
        CHECK(std::abs(h.mean / r.flux_at(t) - 1.0) <= 0.05);
    }
}

TEST_CASE("reflection identity") {
    // density for the reflected drift equals f with time reversed and endpoints swapped
    const ConvexFunction reflected = lopsided.reflected();
    const double s = 0.2, x = -0.8;
    for (auto [t, y] : {std::pair{1.0, -0.5}, std::pair{1.2, -1.5}, std::pair{0.7, -0.2}, std::pair{1.5, -1.0},
                        std::pair{0.9, -2.0}}) {
        const auto a = f_mc(reflected, s, x, t, y, mc(20000, 6));
        const auto b = f_mc(lopsided, -t, y, -s, x, mc(20000, 7));
        CHECK(std::abs(a.mean / b.mean - 1.0) <= 0.05);
    }
}

TEST_CASE("survival probability") {
    const std::vector<double> probes{-8.0, -2.0, -0.5, -0.02, -0.01};
    const SurvivalReport sv = survival_J_and_j(square, 0.0, probes, ensemble());
    for (double J : sv.J) {
        CHECK(J >= 0.0);
        CHECK(J <= 1.0 + 1e-12);
    }
    for (std::size_t i = 1; i < sv.J.size(); ++i) CHECK(sv.J[i] <= sv.J[i - 1]);
    CHECK(sv.J[0] >= 0.999);
    const double fd = (sv.J[4] - sv.J[3]) / 0.01;  // d_x J at the boundary
    CHECK(std::abs(fd + sv.f_value) / sv.f_value <= 0.10);
}

TEST_CASE("joint law of the maximum and its location") {
    PdeParams pde;
    pde.dy = 2e-3;
    pde.dt_max = 2e-3;
    const JointMarginals jm = joint_marginals(square, 0.0, -0.5, 6.0, 6.0, 60, ensemble(), pde);
    CHECK(std::abs(jm.mass - 1.0) <= 0.02);
    for (double d : jm.z_density) CHECK(d >= 0.0);
    for (std::size_t i = 1; i < jm.t_cdf.size(); ++i) CHECK(jm.t_cdf[i] >= jm.t_cdf[i - 1] - 1e-12);

    for (double t : {0.1, 0.5, 1.5})
        for (double z : {0.2, 1.0})
            CHECK(joint_max_argmax_density(square, 0.0, -0.5, t, z, ensemble(), mc(4000, 8)).mean > 0.0);

    const auto sims = simulate_max_argmax(square, 0.0, -0.5, 6.0, 1.0 / 1024, 100000, 9);
    std::vector<double> argmax, max;
    for (const auto& s : sims) {
        argmax.push_back(s.argmax);
        max.push_back(s.max);
    }
    std::vector<double> z_cdf(jm.z.size(), 0.0);
    for (std::size_t k = 1; k < z_cdf.size(); ++k)
        z_cdf[k] = z_cdf[k - 1] + 0.5 * (jm.z_density[k] + jm.z_density[k - 1]) * (jm.z[k] - jm.z[k - 1]);
    CHECK(ks_one_sample(argmax, TabulatedCdf{jm.t, jm.t_cdf}) <= 0.03);
    CHECK(ks_one_sample(max, TabulatedCdf{jm.z, z_cdf}) <= 0.03);
}
