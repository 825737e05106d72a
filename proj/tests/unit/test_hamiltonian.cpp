#include <doctest.h>

#include <cmath>
#include <random>

#include "conslaw/errors.hpp"
#include "conslaw/hamiltonian.hpp"

using namespace conslaw;

TEST_CASE("legendre transform of the presets") {
    CHECK(legendre_transform(ConvexFunction::quadratic(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(legendre_transform(ConvexFunction::quartic(1.0), 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(legendre_transform(ConvexFunction::cosh(1.0), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("legendre derivative inverts H'") {
    CHECK(legendre_derivative(ConvexFunction::quadratic(1.0), 3.7) == doctest::Approx(3.7).epsilon(1e-10));
    CHECK(legendre_derivative(ConvexFunction::quartic(1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(legendre_derivative(ConvexFunction::quartic(1.0), 8.0) == doctest::Approx(2.0).epsilon(1e-10));

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& h : {ConvexFunction::quadratic(1.5), ConvexFunction::quartic(1.0), ConvexFunction::cosh(1.0),
                          ConvexFunction::power(3.0, 1.0)}) {
        for (int i = 0; i < 100; ++i) {
            const double p = u(gen);
            CHECK(std::abs(legendre_derivative(h, h.derivative(p)) - p) <= 1e-8);
        }
    }
}

TEST_CASE("legendre transform is an involution") {
    for (const auto& h : {ConvexFunction::quadratic(2.0), ConvexFunction::quartic(1.0), ConvexFunction::cosh(1.0)}) {
        for (int i = 0; i < 100; ++i) {
            const double x = -3.0 + 6.0 * i / 99.0;
            // L*(x) = max_q (x q - L(q)); L evaluated through the transform itself
            const double q_star = h.derivative(x);
            double best = -1e300;
            for (double q : {q_star - 1e-4, q_star, q_star + 1e-4})
                best = std::max(best, x * q - legendre_transform(h, q));
            CHECK(best == doctest::Approx(h.value(x)).epsilon(1e-6));
        }
    }
}

TEST_CASE("legendre transform is convex in q") {
    const auto h = ConvexFunction::cosh(1.0);
    const double dq = 0.05;
    for (int i = 1; i < 99; ++i) {
        const double q = -2.5 + dq * i;
        const double d2 = legendre_transform(h, q + dq) - 2 * legendre_transform(h, q) + legendre_transform(h, q - dq);
        CHECK(d2 >= -1e-8);
    }
}

TEST_CASE("tabulated legendre rejects escaping maximisers") {
    std::vector<double> grid, values;
    for (int i = -20; i <= 20; ++i) {
        grid.push_back(0.1 * i);
        values.push_back(0.5 * 0.01 * i * i);
    }
    const auto h = ConvexFunction::tabulated(grid, values);
    CHECK(legendre_transform(h, 0.5) == doctest::Approx(0.125).epsilon(1e-3));
    CHECK_THROWS_AS(legendre_transform(h, 5.0), DomainError);
}

TEST_CASE("derivatives agree with finite differences") {
    const double step = 1e-4;
    for (const auto& f : {ConvexFunction::quadratic(1.0), ConvexFunction::quartic(2.0), ConvexFunction::cosh(0.7),
                          ConvexFunction::power(2.5, 1.0), ConvexFunction::polynomial({0.0, 0.0, 0.5, 0.0, 0.25}),
                          hopf_lax_kernel(ConvexFunction::quartic(1.0), 2.0)}) {
        for (double x : {-1.7, -0.6, 0.3, 1.1, 2.4}) {
            const double d1 = (f.value(x + step) - f.value(x - step)) / (2 * step);
            const double d2 = (f.derivative(x + step) - f.derivative(x - step)) / (2 * step);
            CHECK(d1 == doctest::Approx(f.derivative(x)).epsilon(1e-5));
            CHECK(d2 == doctest::Approx(f.second_derivative(x)).epsilon(1e-5));
        }
    }
}

TEST_CASE("convexity report") {
    const auto q = validate_convexity(ConvexFunction::quadratic(1.0), -10.0, 10.0, 100);
    CHECK(q.pass);
    CHECK(q.min_second_derivative == doctest::Approx(1.0));
    CHECK(q.superlinear);

    const auto quartic = validate_convexity(ConvexFunction::quartic(1.0), -5.0, 5.0, 100);
    CHECK(quartic.pass);
    // probes are symmetric about 0; the nearest ones sit at +-5/99
    CHECK(std::abs(quartic.argmin) == doctest::Approx(5.0 / 99.0));

    const auto absval = validate_convexity(ConvexFunction::tabulated({-2, -1, 0, 1, 2}, {2, 1, 0, 1, 2}), -2.0, 2.0, 50);
    CHECK_FALSE(absval.pass);
}

TEST_CASE("hopf-lax kernel of Burgers") {
    // t L(z/t) with L(q) = q^2/2
    const auto phi = hopf_lax_kernel(ConvexFunction::quadratic(1.0), 2.0);
    CHECK(phi.value(3.0) == doctest::Approx(2.25));
    CHECK(phi.derivative(3.0) == doctest::Approx(1.5));
}

TEST_CASE("json round trip") {
    const auto f = ConvexFunction::quartic(3.0).shifted(0.5).scaled(2.0);
    const auto g = ConvexFunction::from_json(f.to_json());
    CHECK(g.value(1.3) == doctest::Approx(f.value(1.3)));
    CHECK_THROWS_AS(ConvexFunction::from_json({{"family", "sine"}}), ConfigError);
}
