#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conslaw/errors.hpp"
#include "conslaw/excursion.hpp"

using namespace conslaw;

namespace {

const ExcursionEnsemble& ensemble() {
    static const ExcursionEnsemble ens(20000, 512, 17);
    return ens;
}

// non-polynomial drifts need the stored paths
const ExcursionEnsemble& ensemble_with_paths() {
    static const ExcursionEnsemble ens(20000, 512, 18, Exec::Parallel, true);
    return ens;
}

const ConvexFunction square = ConvexFunction::quadratic(2.0);  // z^2

// frozen from tests/oracles
constexpr double airy_rhs_at_zero = 1.23153932787689;
constexpr double p_square_0_1 = 0.15330841879225;
constexpr double laplace_two = 0.298370, laplace_two_se = 0.000191;

bool within(double a, double sa, double b, double sb, double k = 3.0) { return std::abs(a - b) <= k * std::hypot(sa, sb); }

}  // namespace

TEST_CASE("zero weight") {
    const auto e = excursion_laplace(ensemble(), Polynomial({0.0}), 0.0, 1.0);
    CHECK(e.mean == 1.0);
    CHECK(e.std_error == 0.0);
}

TEST_CASE("constant weight against the random-walk oracle") {
    const auto e = excursion_laplace(ensemble(), Polynomial({2.0}), 0.0, 1.0);
    CHECK(within(e.mean, e.std_error, laplace_two, laplace_two_se));
}

TEST_CASE("Brownian scaling of the interval") {
    // int_0^2 e = 2^{3/2} int_0^1 e_std in law
    const auto wide = excursion_laplace(Polynomial({1.0}), 0.0, 2.0, 20000, 512, 101);
    const auto unit = excursion_laplace(Polynomial({std::pow(2.0, 1.5)}), 0.0, 1.0, 20000, 512, 202);
    CHECK(within(wide.mean, wide.std_error, unit.mean, unit.std_error));
}

TEST_CASE("estimates lie in (0,1] and errors shrink like n^-1/2") {
    const auto small = excursion_laplace(Polynomial({1.0, 0.5}), -0.5, 1.5, 4000, 256, 5);
    const auto large = excursion_laplace(Polynomial({1.0, 0.5}), -0.5, 1.5, 9000, 256, 6);
    for (const auto& e : {small, large}) {
        CHECK(e.mean > 0.0);
        CHECK(e.mean <= 1.0);
    }
    const double ratio = small.std_error / large.std_error;  // expected 1.5
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.8);
}

TEST_CASE("p for the square drift") {
    const auto tiny = p_phi(square, 0.3, 1e-4, ensemble());
    CHECK(std::abs(tiny.mean - 1.0) <= 1e-3);

    const auto p = p_phi(square, 0.0, 1.0, ensemble());
    CHECK(std::abs(p.mean - p_square_0_1) / p_square_0_1 <= 0.02);

    double prev = 1.0, prev_se = 0.0;
    for (double u : {0.1, 0.3, 0.6, 1.0, 1.5}) {
        const auto e = p_phi(square, -0.4, u, ensemble());
        CHECK(e.mean <= prev + 3.0 * std::hypot(e.std_error, prev_se));
        prev = e.mean;
        prev_se = e.std_error;
    }
}

TEST_CASE("f for the square drift") {
    for (double t : {-1.0, 0.0, 1.0}) CHECK(f_phi(square, t, ensemble()).value > 0.0);
    const auto f0 = f_phi(square, 0.0, ensemble());
    CHECK(std::abs(f0.value - airy_rhs_at_zero) / airy_rhs_at_zero <= 0.01);

    // even drift: the reflected function gives the same value
    for (double t : {-0.7, 0.4}) CHECK(f_phi(square.reflected(), -t, ensemble()).value == f_phi(square, -t, ensemble()).value);
}

TEST_CASE("f is insensitive to the excursion time step") {
    const ExcursionEnsemble coarse(20000, 256, 31), fine(20000, 1024, 32);
    for (double t : {-0.5, 0.5}) {
        const auto a = f_phi(square, t, coarse), b = f_phi(square, t, fine);
        CHECK(within(a.value, a.std_error, b.value, b.std_error));
    }
}

TEST_CASE("Chernoff density of the square drift") {
    std::vector<double> grid;
    for (int i = -120; i <= 120; ++i) grid.push_back(0.025 * i);
    const auto d = chernoff_density(square, grid, ensemble());
    double mass = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i].density == d[d.size() - 1 - i].density);
        if (i > 0) mass += 0.5 * (d[i].density + d[i - 1].density) * 0.025;
    }
    CHECK(std::abs(mass - 1.0) <= 0.01);

    // quartic drift: same normalisation
    std::vector<double> qgrid;
    for (int i = -60; i <= 60; ++i) qgrid.push_back(0.025 * i);
    const auto q = chernoff_density(ConvexFunction::quartic(4.0), qgrid, ensemble());
    double qmass = 0.0;
    for (std::size_t i = 1; i < q.size(); ++i) qmass += 0.5 * (q[i].density + q[i - 1].density) * 0.025;
    CHECK(std::abs(qmass - 1.0) <= 0.01);
}

TEST_CASE("kernel K near the diagonal and across seeds") {
    for (double gap : {1e-2, 1e-3}) {
        const double y = 0.3;
        const auto k = kernel_K(square, y, y + gap, ensemble());
        const double leading = square.second_derivative(y) / std::sqrt(2.0 * std::numbers::pi * gap);
        CHECK(k.mean > 0.0);
        CHECK(std::abs(k.mean / leading - 1.0) <= 0.05);
    }
    const ExcursionEnsemble a(20000, 512, 41), b(20000, 512, 42);
    const auto ka = kernel_K(square, 0.0, 1.0, a), kb = kernel_K(square, 0.0, 1.0, b);
    CHECK(ka.mean > 0.0);
    CHECK(within(ka.mean, ka.std_error, kb.mean, kb.std_error));
    CHECK_THROWS_AS(kernel_K(square, 1.0, 0.5, a), DomainError);
}

TEST_CASE("jump kernel of Burgers") {
    const auto H = ConvexFunction::quadratic(1.0);
    const ExcursionEnsemble ens(4000, 256, 51);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double rm = -2.0 + 0.2 * i, rp = rm + 0.05 + 0.2 * j;
            CHECK(jump_kernel_n(H, 1.0, rm, rp, ens).value >= 0.0);
        }
    }
}

TEST_CASE("jump kernel through the drift route") {
    const auto H = ConvexFunction::quadratic(1.0);
    for (auto [rm, rp] : {std::pair{-1.0, 0.5}, std::pair{0.0, 0.3}, std::pair{0.5, 2.0}}) {
        const auto a = jump_kernel_n(H, 1.0, rm, rp, ensemble_with_paths());
        const auto b = jump_kernel_n_phi_route(H, 1.0, rm, rp, ensemble_with_paths());
        CHECK(within(a.value, a.std_error, b.value, b.std_error));
    }
    const auto quartic = ConvexFunction::quartic(1.0);
    const auto a = jump_kernel_n(quartic, 1.0, 0.2, 0.9, ensemble_with_paths());
    const auto b = jump_kernel_n_phi_route(quartic, 1.0, 0.2, 0.9, ensemble_with_paths());
    CHECK(within(a.value, a.std_error, b.value, b.std_error));
}

TEST_CASE("ratio terms telescope") {
    // n(a,b) n(b,c) / n(a,c) = t H''(b) K(a,b) K(b,c) / K(a,c) for Burgers at t = 1 (y = rho)
    const auto H = ConvexFunction::quadratic(1.0);
    const auto phi = hopf_lax_kernel(H, 1.0);
    const double a = -0.5, b = 0.4, c = 1.3;
    const auto nab = jump_kernel_n(H, 1.0, a, b, ensemble());
    const auto nbc = jump_kernel_n(H, 1.0, b, c, ensemble());
    const auto nac = jump_kernel_n(H, 1.0, a, c, ensemble());
    const auto kab = kernel_K(phi, a, b, ensemble()), kbc = kernel_K(phi, b, c, ensemble()),
               kac = kernel_K(phi, a, c, ensemble());
    const double lhs = nab.value * nbc.value / nac.value;
    const double rhs = H.second_derivative(b) * kab.mean * kbc.mean / kac.mean;
    const double rel_se = std::sqrt(std::pow(nab.std_error / nab.value, 2) + std::pow(nbc.std_error / nbc.value, 2) +
                                    std::pow(nac.std_error / nac.value, 2) + std::pow(kab.std_error / kab.mean, 2) +
                                    std::pow(kbc.std_error / kbc.mean, 2) + std::pow(kac.std_error / kac.mean, 2));
    CHECK(std::abs(lhs / rhs - 1.0) <= 3.0 * rel_se + 1e-3);
}

TEST_CASE("bracket term equals f at the transformed argument") {
    const auto H = ConvexFunction::quartic(1.0);
    const double t = 1.0, r = 0.8;
    const auto br = kernel_bracket(H, t, r, ensemble_with_paths());
    const auto f = f_phi(hopf_lax_kernel(H, t), t * H.derivative(r), ensemble_with_paths());
    CHECK(within(br.value, br.std_error, f.value, f.std_error));
}
