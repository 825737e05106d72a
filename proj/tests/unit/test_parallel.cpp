#include <doctest.h>

#include "conslaw/density.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/excursion.hpp"
#include "conslaw/experiments.hpp"
#include "conslaw/generator.hpp"
#include "conslaw/parallel.hpp"
#include "conslaw/shocks.hpp"

using namespace conslaw;

// Parallel kernels must reproduce the serial reference bit for bit.

namespace {

const ConvexFunction square = ConvexFunction::quadratic(2.0);
const ConvexFunction burgers = ConvexFunction::quadratic(1.0);

struct Pool {
    int saved = thread_count();
    explicit Pool(int n) { set_thread_count(n); }
    ~Pool() { set_thread_count(saved); }
};

}  // namespace

TEST_CASE("excursion ensemble and the functionals built on it") {
    Pool pool(3);
    const ExcursionEnsemble serial(3000, 128, 5, Exec::Serial), parallel(3000, 128, 5, Exec::Parallel);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        const auto a = serial.moments(i), b = parallel.moments(i);
        for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(a[k] == b[k]);
    }
    const std::vector<double> grid{-1.0, -0.25, 0.0, 0.5, 1.5};
    const auto da = chernoff_density(square, grid, serial), db = chernoff_density(square, grid, parallel);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(da[i].density == db[i].density);
        CHECK(da[i].std_error == db[i].std_error);
    }
    const auto ka = jump_kernel_n(burgers, 1.0, -0.5, 0.7, serial), kb = jump_kernel_n(burgers, 1.0, -0.5, 0.7, parallel);
    CHECK(ka.value == kb.value);
}

TEST_CASE("Monte Carlo density and the direct maximum") {
    Pool pool(3);
    McParams s;
    s.n_samples = 3000;
    s.n_steps = 128;
    s.seed = 9;
    s.exec = Exec::Serial;
    McParams p = s;
    p.exec = Exec::Parallel;
    const auto fa = f_mc(square, 0.0, -1.0, 1.0, -0.7, s), fb = f_mc(square, 0.0, -1.0, 1.0, -0.7, p);
    CHECK(fa.mean == fb.mean);
    CHECK(fa.std_error == fb.std_error);

    const auto ma = simulate_max_argmax(square, 0.0, -0.5, 3.0, 1.0 / 128, 500, 4, Exec::Serial);
    const auto mb = simulate_max_argmax(square, 0.0, -0.5, 3.0, 1.0 / 128, 500, 4, Exec::Parallel);
    REQUIRE(ma.size() == mb.size());
    for (std::size_t i = 0; i < ma.size(); ++i) {
        CHECK(ma[i].argmax == mb[i].argmax);
        CHECK(ma[i].max == mb[i].max);
    }

    CHECK(direct_argmax_samples(square, 4.0, 1.0 / 256, 400, 3, Exec::Serial) ==
          direct_argmax_samples(square, 4.0, 1.0 / 256, 400, 3, Exec::Parallel));
}

TEST_CASE("direct profiles") {
    Pool pool(3);
    CompareParams cp;
    cp.n_paths = 40;
    cp.length = 1.0;
    cp.step = 1.0 / 512;
    cp.exec = Exec::Serial;
    const DirectEnsemble a = direct_profiles(burgers, 1.0, cp);
    cp.exec = Exec::Parallel;
    const DirectEnsemble b = direct_profiles(burgers, 1.0, cp);
    CHECK(a.rho_at_origin == b.rho_at_origin);
    REQUIRE(a.profiles.size() == b.profiles.size());
    for (std::size_t i = 0; i < a.profiles.size(); ++i) CHECK(a.profiles[i].rho == b.profiles[i].rho);
}

TEST_CASE("shock census and truncation") {
    Pool pool(3);
    CensusParams c;
    c.levy.jump_intensity = 1.0;
    c.levels = 3;
    c.replicates = 6;
    c.exec = Exec::Serial;
    const CensusReport ca = census_experiment(burgers, c);
    c.exec = Exec::Parallel;
    const CensusReport cb = census_experiment(burgers, c);
    CHECK(ca.to_json() == cb.to_json());

    TruncationParams t;
    t.levy.jump_intensity = 1.0;
    t.step = 1.0 / 256;
    t.replicates = 6;
    t.exec = Exec::Serial;
    const TruncationReport ta = truncation_stability(burgers, t);
    t.exec = Exec::Parallel;
    const TruncationReport tb = truncation_stability(burgers, t);
    CHECK(ta.to_json() == tb.to_json());
}

TEST_CASE("errors raised inside a parallel loop reach the caller") {
    Pool pool(3);
    CHECK_THROWS_AS(for_each_index(100, Exec::Parallel,
                                   [](std::size_t i) {
                                       if (i == 37) throw DomainError("boom");
                                   }),
                    DomainError);
}
