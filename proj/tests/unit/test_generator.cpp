#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conslaw/errors.hpp"
#include "conslaw/generator.hpp"
#include "conslaw/stats.hpp"

using namespace conslaw;

namespace {

const ConvexFunction burgers = ConvexFunction::quadratic(1.0);

// n constant in the offset variable: jump sizes s^2 uniform on [s0^2, s1^2], rate c (s1^2 - s0^2).
KernelTable constant_table(double rate) {
    std::vector<double> rows, offsets, n;
    for (int k = -200; k <= 200; ++k) rows.push_back(10.0 * k);
    const double s0 = 0.1, s1 = 2.0;
    for (int j = 0; j < 20; ++j) offsets.push_back(s0 + (s1 - s0) * j / 19.0);
    const double c = rate / (s1 * s1 - s0 * s0);
    n.assign(rows.size() * offsets.size(), c);
    return KernelTable::from_values(1.0, s0 * s0, rows, offsets, n);
}

const KernelTable& burgers_table() {
    static const KernelTable table = [] {
        const ExcursionEnsemble ens(5000, 256, 61);
        return KernelTable::build(burgers, 1.0, KernelTableParams{}, ens);
    }();
    return table;
}

}  // namespace

TEST_CASE("drift of the smooth pieces") {
    CHECK(drift_b(burgers, 0.7, 1.0) == doctest::Approx(-1.0));
    CHECK(drift_b(ConvexFunction::quadratic(2.0), 0.3, 2.0) == doctest::Approx(-0.25));
    CHECK(drift_b(ConvexFunction::quartic(1.0), 1.0, 1.0) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("thinning with a constant kernel gives exponential gaps") {
    const double rate = 0.5;
    const KernelTable table = constant_table(rate);
    CHECK(table.max_rate() == doctest::Approx(rate).epsilon(1e-12));
    ProfileParams p;
    p.x1 = 2000.0;
    p.record_step = 1.0;
    std::vector<double> gaps;
    std::size_t downward = 0;
    for (std::uint64_t k = 0; gaps.size() < 100000; ++k) {
        Rng rng(71, k);
        const ProfileSample prof = simulate_profile(burgers, 1.0, table, 0.0, p, rng);
        for (std::size_t i = 1; i < prof.jumps.size(); ++i) gaps.push_back(prof.jumps[i].x - prof.jumps[i - 1].x);
        for (const ProfileJump& j : prof.jumps) downward += !(j.rho_after > j.rho_before);
    }
    CHECK(downward == 0);
    CHECK(ks_one_sample(gaps, [&](double d) { return d <= 0 ? 0.0 : -std::expm1(-rate * d); }) <= 0.02);
}

TEST_CASE("smooth pieces are exactly linear for Burgers") {
    const KernelTable table = constant_table(0.5);
    ProfileParams p;
    p.x1 = 50.0;
    p.record_step = 1.0 / 64;
    Rng rng(72, 0);
    const ProfileSample prof = simulate_profile(burgers, 1.0, table, 0.0, p, rng);
    REQUIRE(!prof.jumps.empty());
    // between jumps rho(x) - rho(x0) = -(x - x0)
    std::size_t next = 0;
    for (std::size_t i = 1; i < prof.rho.size(); ++i) {
        const double x = prof.x_grid.x(i);
        bool jumped = false;
        while (next < prof.jumps.size() && prof.jumps[next].x <= x) jumped = true, ++next;
        if (!jumped) CHECK(std::abs(prof.rho[i] - prof.rho[i - 1] + p.record_step) <= 1e-10);
    }
}

TEST_CASE("kernel table of Burgers") {
    const KernelTable& table = burgers_table();
    CHECK(table.covers(0.0));
    for (double rho : {-3.0, -1.0, 0.0, 1.5, 3.9}) {
        CHECK(table.rate(rho) > 0.0);
        double prev = 0.0;
        for (double size = 0.0; size <= 13.0; size += 0.25) {
            const double c = table.jump_size_cdf(rho, size);
            CHECK(c >= prev - 1e-12);
            CHECK(c <= 1.0 + 1e-12);
            prev = c;
        }
        Rng rng(73, 0);
        for (int i = 0; i < 100; ++i) CHECK(table.sample_target(rho, rng) > rho);
    }
    for (std::size_t r = 0; r < table.rows().size(); ++r) CHECK_FALSE(table.row_ill_conditioned(r));
    CHECK_THROWS_AS(table.rate(10.0), TableRangeError);
}

TEST_CASE("generated profiles: slopes and stationarity") {
    const KernelTable& table = burgers_table();
    CompareParams cp;
    cp.n_paths = 1000;
    cp.length = 1.0;
    cp.seed = 74;
    const DirectEnsemble direct = direct_profiles(burgers, 1.0, cp);
    ProfileParams p;
    p.x1 = 1.0;
    std::vector<double> at[3];
    double worst_slope = 0.0;
    for (std::uint64_t k = 0; k < 12000; ++k) {
        Rng rng(75, k);
        const double rho0 = direct.rho_at_origin[k % direct.rho_at_origin.size()];
        const ProfileSample prof = simulate_profile(burgers, 1.0, table, rho0, p, rng);
        // one sample per profile keeps the three sets independent of each other
        const double x = 0.25 * (k % 3 + 1);
        at[k % 3].push_back(prof.rho[prof.x_grid.nearest(x)]);
        for (const PieceSlope& s : piece_slopes(prof, burgers, 1.0))
            worst_slope = std::max(worst_slope, std::abs(s.slope / -1.0 - 1.0));
        for (const ProfileJump& j : prof.jumps) CHECK(j.rho_after > j.rho_before);
    }
    CHECK(worst_slope <= 0.02);
    CHECK(ks_two_sample(at[0], at[1]) <= 0.05);
    CHECK(ks_two_sample(at[1], at[2]) <= 0.05);
    CHECK(ks_two_sample(at[0], at[2]) <= 0.05);
}

TEST_CASE("direct jump rate matches the table rate") {
    CompareParams cp;
    cp.n_paths = 400;
    cp.seed = 76;
    const CompareReport rep = compare_with_direct(burgers, 1.0, burgers_table(), cp);
    CHECK(rep.out_of_table == 0);
    CHECK(std::abs(rep.direct_rate / rep.direct_table_rate - 1.0) <= 0.10);
    CHECK(rep.max_slope_rel_error <= 0.02);
}

TEST_CASE("leaving the table") {
    const KernelTable table = constant_table(0.5);
    ProfileParams p;
    Rng rng(77, 0);
    CHECK_THROWS_AS(simulate_profile(burgers, 1.0, table, 5000.0, p, rng), TableRangeError);
}
