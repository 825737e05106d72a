#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "conslaw/errors.hpp"
#include "conslaw/shocks.hpp"
#include "conslaw/variational.hpp"

using namespace conslaw;

namespace {

const ConvexFunction burgers = ConvexFunction::quadratic(1.0);

LevySpec brownian_only() { return LevySpec{}; }

LevySpec with_jumps(double intensity) {
    LevySpec s;
    s.jump_intensity = intensity;
    s.jump_mean = 0.5;
    return s;
}

std::vector<double> shock_positions(const GridPath& U0, double step) {
    const SolutionField f = solve_field(U0, burgers, 1.0, GridSpec::with_step(0, 1, step));
    std::vector<double> xs;
    for (const Shock& s : shock_census(f, step).shocks) xs.push_back(s.x);
    return xs;
}

}  // namespace

TEST_CASE("padding grows with the jump part") {
    const auto phi = hopf_lax_kernel(burgers, 1.0);
    const double plain = levy_padding(phi, brownian_only());
    const double jumpy = levy_padding(phi, with_jumps(2.0));
    CHECK(plain > 0.0);
    CHECK(jumpy > plain);
    LevySpec drifting = brownian_only();
    drifting.drift = 1.5;
    CHECK(levy_padding(phi, drifting) > plain);
    LevySpec bad = brownian_only();
    bad.brownian_sigma = -1.0;
    CHECK_THROWS_AS(levy_padding(phi, bad), ConfigError);
}

TEST_CASE("census without noise has no shocks") {
    CensusParams p;
    p.levy.brownian_sigma = 0.0;
    p.replicates = 4;
    const CensusReport rep = census_experiment(burgers, p);
    REQUIRE(rep.levels.size() == 4);
    for (const CensusLevel& l : rep.levels) CHECK(l.count == 0);
    CHECK(rep.final_change == 0.0);
    CHECK(rep.saturated);
}

TEST_CASE("census saturates under refinement") {
    for (const LevySpec& levy : {brownian_only(), with_jumps(1.0)}) {
        CensusParams p;
        p.levy = levy;
        p.replicates = 32;
        p.seed = 11;
        const CensusReport rep = census_experiment(burgers, p);
        REQUIRE(rep.levels.size() == 4);
        for (std::size_t k = 1; k < rep.levels.size(); ++k)
            CHECK(rep.levels[k].grid_step == doctest::Approx(rep.levels[k - 1].grid_step / 2));
        CHECK(rep.levels.back().count > 0);
        CHECK(rep.final_change <= 0.2);
        CHECK(rep.saturated);
    }
}

TEST_CASE("census argument checks") {
    CensusParams p;
    p.levels = 1;
    CHECK_THROWS_AS(census_experiment(burgers, p), DomainError);
    p.levels = 3;
    p.min_gap = p.base_step / 2;
    CHECK_THROWS_AS(census_experiment(burgers, p), DomainError);
}

TEST_CASE("truncating above every jump or below every jump") {
    const auto phi = hopf_lax_kernel(burgers, 1.0);
    const LevySpec levy = with_jumps(1.0);
    const double step = 1.0 / 512;
    const double pad = std::ceil(levy_padding(phi, levy));
    std::size_t with_any_jump = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const LevyPath lp = sample_levy(levy, GridSpec::with_step(-pad, 1 + pad, step), 31, k);
        if (lp.jumps.empty()) continue;
        ++with_any_jump;
        double largest = 0.0, smallest = std::numeric_limits<double>::infinity();
        for (const Jump& j : lp.jumps) largest = std::max(largest, j.size), smallest = std::min(smallest, j.size);

        const auto full = shock_positions(lp.path, step);
        CHECK(shock_positions(truncate_jumps(lp.path, lp.jumps, largest), step) == full);
        CHECK(shock_positions(truncate_jumps(lp.path, lp.jumps, 1e6), step) == full);
        // below the smallest jump only the continuous part is left
        CHECK(shock_positions(truncate_jumps(lp.path, lp.jumps, 0.5 * smallest), step) ==
              shock_positions(lp.continuous_part, step));
    }
    CHECK(with_any_jump > 10);
}

TEST_CASE("stabilisation level of the shock set") {
    TruncationParams p;
    p.levy = with_jumps(1.0);
    p.step = 1.0 / 512;
    p.replicates = 20;
    p.seed = 41;
    const TruncationReport rep = truncation_stability(burgers, p);
    REQUIRE(rep.rows.size() == 20);
    std::size_t matches = 0, bounded = 0;
    for (const TruncationRow& r : rep.rows) {
        CHECK(r.max_window_jump <= r.max_jump);
        CHECK(r.stabilization_n >= 0.0);
        // the shock set never changes above the largest jump anywhere
        CHECK(r.stabilization_n <= r.max_jump);
        matches += r.stabilization_n == r.max_window_jump;
        bounded += r.stabilization_n <= r.max_window_jump;
    }
    CHECK(rep.matches == matches);
    CHECK(rep.bounded == bounded);
    CHECK(rep.bounded == rep.rows.size());

    const auto j = rep.to_json();
    CHECK(j.at("replicates") == 20);
    CHECK(j.at("rows").size() == 20);

    TruncationParams unsorted = p;
    unsorted.n_list = {1.0, 0.5};
    CHECK_THROWS_AS(truncation_stability(burgers, unsorted), DomainError);
}
