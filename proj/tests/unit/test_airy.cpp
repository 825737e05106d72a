#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conslaw/airy.hpp"
#include "conslaw/errors.hpp"

using namespace conslaw;

namespace {

// frozen from tests/oracles/airy_oracle.py (mpmath, 30 digits)
struct AiryRef {
    Complex z, ai, bi;
};
const AiryRef refs[] = {
    {{1, 1}, {0.060458308371838149, -0.1518895658771814}, {0.71665807338276843, 0.61988929040084476}},
    {{-3, 2}, {-4.4196895542641673, 5.4546225177826674}, {-5.4656670776237691, -4.4151556707835897}},
    {{0, 4}, {-4.6362304618889686, 7.411093864660436}, {-7.4199585975483962, -4.6382948850324979}},
    {{7, -2}, {6.6676874575221928e-7, -8.5135061506880034e-7}, {27345.012985271596, 47215.235855618384}},
    {{-8, 0.5}, {-0.10887597956894037, 0.64163344087705908}, {-0.72249908490004477, -0.099112885578597407}},
    {{2, 9}, {-122.2233388563723, 603.20782672185992}, {-603.20789212664056, -122.22339338649372}},
};
const std::pair<double, double> rhs_refs[] = {
    {-1.0, 0.0559610062251702}, {-0.5, 0.375833217818762}, {0.0, 1.23153932787689},
    {0.5, 2.61396533127194},    {1.0, 4.32015683399171},
};

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

const ExcursionEnsemble& ensemble() {
    static const ExcursionEnsemble ens(20000, 512, 13);
    return ens;
}

}  // namespace

TEST_CASE("values at the origin") {
    const AiryValues v = airy({0.0, 0.0});
    CHECK(v.ai.real() == doctest::Approx(0.355028053887817239).epsilon(1e-15));
    CHECK(v.ai_prime.real() == doctest::Approx(-0.258819403792806798).epsilon(1e-15));
    CHECK(v.bi.real() == doctest::Approx(std::sqrt(3.0) * 0.355028053887817239).epsilon(1e-15));
}

TEST_CASE("complex values against the high-precision oracle") {
    for (const AiryRef& r : refs) {
        CHECK(rel(airy_ai(r.z), r.ai) <= 1e-11);
        CHECK(rel(airy_bi(r.z), r.bi) <= 1e-11);
    }
}

TEST_CASE("Wronskian") {
    for (int k = 0; k < 25; ++k) {
        for (Complex z : {Complex(-5.0 + 10.0 * k / 24.0, 0.0), Complex(0.0, 5.0 * k / 24.0)}) {
            const AiryValues v = airy(z);
            CHECK(std::abs(v.ai * v.bi_prime - v.ai_prime * v.bi - 1.0 / std::numbers::pi) <= 1e-8);
        }
    }
}

TEST_CASE("Bi grows on the positive axis") {
    double prev = airy_bi({0.0, 0.0}).real();
    for (int k = 1; k <= 50; ++k) {
        const double b = airy_bi({0.1 * k, 0.0}).real();
        CHECK(b > prev);
        prev = b;
    }
}

TEST_CASE("Airy equation residual") {
    const double h = 1e-2;
    for (int k = 0; k < 30; ++k) {
        const Complex z = std::polar(0.5 + 0.3 * (k % 15), 0.37 * k);
        auto ai = [](Complex w) { return airy_ai(w); };
        const Complex d2 = (-ai(z + 2.0 * h) + 16.0 * ai(z + h) - 30.0 * ai(z) + 16.0 * ai(z - h) - ai(z - 2.0 * h)) /
                           (12.0 * h * h);
        const Complex residual = d2 - z * ai(z);
        CHECK(std::abs(residual) <= 1e-7 * (1.0 + std::abs(z * ai(z))));
    }
}

TEST_CASE("series and asymptotics agree across the crossover annulus") {
    double worst = 0.0;
    for (double r : {5.5, 5.75, 6.0, 6.25, 6.5})
        for (int k = 0; k < 72; ++k) worst = std::max(worst, airy_crossover_gap(std::polar(r, -std::numbers::pi + k * std::numbers::pi / 36)));
    CHECK(worst <= 1e-8);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(airy({2000.0, 0.0}), DomainError);
    CHECK_THROWS_AS(airy({std::nan(""), 0.0}), DomainError);
    CHECK_THROWS_AS(chernoff_airy_rhs(3.0), DomainError);
}

TEST_CASE("Fourier side against the oracle") {
    for (auto [t, value] : rhs_refs) CHECK(chernoff_airy_rhs(t) == doctest::Approx(value).epsilon(1e-8));
}

TEST_CASE("Fourier side integrates to a density") {
    // (1/2) f(t) f(-t), Simpson on [-2, 2]
    const int n = 16;
    const double h = 4.0 / n;
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) f[i] = chernoff_airy_rhs(-2.0 + h * i);
    double mass = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mass += w * 0.5 * f[i] * f[n - i];
    }
    mass *= h / 3.0;
    CHECK(std::abs(mass - 1.0) <= 0.01);
}

TEST_CASE("identity between the excursion and Airy sides") {
    const IdentityReport zero = chernoff_identity_check(0.0, ensemble());
    CHECK(zero.rel_diff <= 0.01);
    CHECK(zero.lhs > 0.0);
    for (double t : {-0.5, 0.5}) {
        const IdentityReport r = chernoff_identity_check(t, ensemble());
        CHECK(r.rel_diff <= 0.02);
        CHECK(r.lhs > 0.0);
    }
    CHECK_THROWS_AS(chernoff_identity_check(2.0, ensemble()), DomainError);
}
