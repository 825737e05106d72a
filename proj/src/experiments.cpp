#include "conslaw/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

#include "conslaw/airy.hpp"
#include "conslaw/csv.hpp"
#include "conslaw/density.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/excursion.hpp"
#include "conslaw/generator.hpp"
#include "conslaw/paths.hpp"
#include "conslaw/shocks.hpp"
#include "conslaw/stats.hpp"
#include "conslaw/variational.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace conslaw {

json Check::to_json() const {
    return {{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}, {"detail", detail}};
}

bool ExperimentResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void ExperimentResult::merge(const std::string& key, ExperimentResult other) {
    summary[key] = std::move(other.summary);
    std::move(other.checks.begin(), other.checks.end(), std::back_inserter(checks));
    std::move(other.files.begin(), other.files.end(), std::back_inserter(files));
}

namespace {

Check at_most(std::string name, double value, double threshold, std::string detail = {}) {
    return {std::move(name), value <= threshold, value, threshold, std::move(detail)};
}

Exec exec_of(const Config& cfg) { return cfg.has("parallel") && !cfg.flag("parallel") ? Exec::Serial : Exec::Parallel; }

std::vector<double> number_list(const Config& cfg, const std::string& key) {
    const json& v = cfg.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(key, "must be a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) throw ConfigError(key, "must be a non-empty array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::pair<double, double> window_of(const Config& cfg, const std::string& key) {
    const auto w = number_list(cfg, key);
    if (w.size() != 2 || !(w[0] < w[1])) throw ConfigError(key, "must be [lo, hi] with lo < hi");
    return {w[0], w[1]};
}

ExcursionEnsemble ensemble_of(const Config& cfg) {
    return ExcursionEnsemble(cfg.count("mc.excursions"), cfg.count("mc.excursion_steps"), cfg.seed(), exec_of(cfg));
}

PdeParams pde_of(const Config& cfg) {
    PdeParams p;
    p.dy = cfg.positive("pde.dy");
    p.dt_max = cfg.positive("pde.dt_max");
    p.eps0 = cfg.positive("pde.eps0");
    return p;
}

std::size_t steps_of(double length, double step, const std::string& key) {
    const double n = length / step;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) throw ConfigError(key, "must divide the interval");
    return static_cast<std::size_t>(std::llround(n));
}

// Interval [lo - pad, hi + pad] widened to whole steps around the origin.
GridSpec padded_grid(double lo, double hi, double pad, double step) {
    const double left = std::floor(std::min(lo - pad, 0.0) / step) * step;
    const double right = std::ceil(std::max(hi + pad, 0.0) / step) * step;
    return GridSpec::with_step(left, right, step);
}

// Chernoff density against direct maximisations, on a shared t-grid.
ExperimentResult chernoff_case(const ConvexFunction& phi, const Config& cfg, const ExcursionEnsemble& ens,
                               const fs::path& out_dir, const std::string& prefix, const std::string& check_prefix,
                               double ks_threshold) {
    ExperimentResult res;
    const double t_max = cfg.positive("grids.density_t_max"), t_step = cfg.positive("grids.density_t_step");
    const std::size_t n_t = 2 * steps_of(t_max, t_step, "grids.density_t_step");
    std::vector<double> t_grid(n_t + 1);
    for (std::size_t i = 0; i <= n_t; ++i) t_grid[i] = -t_max + t_step * static_cast<double>(i);

    const auto dens = chernoff_density(phi, t_grid, ens, cfg.quad());
    write_density_csv(out_dir / (prefix + "_density.csv"), dens);

    TabulatedCdf cdf{t_grid, std::vector<double>(t_grid.size(), 0.0)};
    double max_se = 0.0;
    for (std::size_t i = 1; i < dens.size(); ++i)
        cdf.cdf[i] = cdf.cdf[i - 1] + 0.5 * (dens[i].density + dens[i - 1].density) * t_step;
    for (const auto& p : dens) max_se = std::max(max_se, p.std_error);
    const double mass = cdf.cdf.back();

    const double range = cfg.positive("grids.chernoff_range"), step = cfg.positive("grids.chernoff_step");
    const std::size_t n_paths = cfg.count("mc.chernoff_paths");
    std::vector<double> argmax = direct_argmax_samples(phi, range, step, n_paths, cfg.seed(), exec_of(cfg));

    // histogram bins centred on the density grid
    std::vector<double> counts(t_grid.size(), 0.0);
    std::size_t outside = 0;
    for (double z : argmax) {
        const double k = std::round((z + t_max) / t_step);
        if (k < 0.0 || k > static_cast<double>(n_t)) {
            ++outside;
            continue;
        }
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    {
        CsvWriter csv(out_dir / (prefix + "_mc_hist.csv"), {"t", "density", "std_error", "count"});
        const double norm = static_cast<double>(n_paths) * t_step;
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            csv.row({t_grid[i], counts[i] / norm, std::sqrt(counts[i]) / norm, counts[i]});
    }
    const double ks = ks_one_sample(argmax, cdf);

    res.files = {prefix + "_density.csv", prefix + "_mc_hist.csv"};
    res.summary = {{"phi", phi.to_json()},
                   {"paths", n_paths},
                   {"grid_step", step},
                   {"range", range},
                   {"mass", mass},
                   {"ks", ks},
                   {"max_density_std_error", max_se},
                   {"outside_histogram", outside}};
    res.checks.push_back(at_most(check_prefix + ".ks", ks, ks_threshold, "argmax histogram vs density"));
    res.checks.push_back(at_most(check_prefix + ".mass", std::abs(mass - 1.0), 0.01, "|density mass - 1|"));
    return res;
}

ExperimentResult airy_identity(const Config& cfg, const ExcursionEnsemble& ens, const fs::path& out_dir) {
    ExperimentResult res;
    std::vector<IdentityReport> rows;
    double worst = 0.0;
    for (double t : number_list(cfg, "airy.t")) {
        rows.push_back(chernoff_identity_check(t, ens, cfg.quad()));
        worst = std::max(worst, rows.back().rel_diff);
    }
    write_identity_csv(out_dir / "airy_identity.csv", rows);

    // Wronskian Ai Bi' - Ai' Bi = 1/pi on a real and an imaginary segment.
    const std::size_t probes = cfg.count("airy.wronskian_probes");
    const std::size_t on_real = probes / 2, on_imag = probes - on_real;
    double worst_w = 0.0;
    CsvWriter csv(out_dir / "airy_wronskian.csv", {"re", "im", "wronskian_re", "wronskian_im", "abs_error"});
    auto probe = [&](Complex z) {
        const AiryValues v = airy(z);
        const Complex w = v.ai * v.bi_prime - v.ai_prime * v.bi;
        const double err = std::abs(w - 1.0 / std::numbers::pi);
        worst_w = std::max(worst_w, err);
        csv.row({z.real(), z.imag(), w.real(), w.imag(), err});
    };
    for (std::size_t k = 0; k < on_real; ++k)
        probe({-5.0 + 10.0 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(on_real - 1, 1)), 0.0});
    for (std::size_t k = 0; k < on_imag; ++k)
        probe({0.0, 5.0 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(on_imag - 1, 1))});

    res.files = {"airy_identity.csv", "airy_wronskian.csv"};
    json ids = json::array();
    for (const auto& r : rows)
        ids.push_back({{"t", r.t}, {"lhs", r.lhs}, {"lhs_std_error", r.lhs_std_error}, {"rhs", r.rhs}, {"rel_diff", r.rel_diff}});
    res.summary = {{"identity", ids}, {"max_rel_diff", worst}, {"wronskian_probes", probes}, {"max_wronskian_error", worst_w}};
    res.checks.push_back(at_most("airy_identity.rel_diff", worst, 0.02, "max over t of |lhs - rhs| / |rhs|"));
    res.checks.push_back(at_most("airy_identity.wronskian", worst_w, 1e-8, "max |W - 1/pi| over the probes"));
    return res;
}

ExperimentResult cross_method(const Config& cfg, const fs::path& out_dir) {
    ExperimentResult res;
    const json& drifts = cfg.at("density.drifts");
    if (!drifts.is_array() || drifts.empty()) throw ConfigError("density.drifts", "must be a non-empty array");
    const double s = cfg.number("density.s"), x = cfg.number("density.x");
    if (!(x < 0.0)) throw ConfigError("density.x", "must be negative");
    auto horizons = number_list(cfg, "density.horizons");
    std::sort(horizons.begin(), horizons.end());
    const auto ys = number_list(cfg, "density.y");
    McParams mc;
    mc.n_samples = cfg.count("mc.bridge_samples");
    mc.n_steps = cfg.count("mc.bridge_steps");
    mc.seed = cfg.seed();
    mc.exec = exec_of(cfg);
    const PdeParams pde = pde_of(cfg);

    CsvWriter dens_csv(out_dir / "density_cross.csv", {"drift", "t", "y", "f_pde", "f_mc", "f_mc_std_error", "rel_diff"});
    CsvWriter flux_csv(out_dir / "density_flux.csv", {"drift", "t", "phi_pde", "phi_mc", "phi_mc_std_error", "rel_diff"});
    double worst = 0.0, worst_flux = 0.0;
    std::size_t compared = 0;
    json per_drift = json::array();
    for (std::size_t d = 0; d < drifts.size(); ++d) {
        const std::string key = "density.drifts." + std::to_string(d);
        ConvexFunction phi = [&] {
            try {
                return ConvexFunction::from_json(drifts[d]);
            } catch (const std::exception& e) {
                throw ConfigError(key, e.what());
            }
        }();
        for (double t : horizons)
            if (!(t > s)) throw ConfigError("density.horizons", "must lie after density.s");
        const PdeResult r = f_pde(phi, s, x, horizons.back(), horizons, pde);
        r.grid.write_csv(out_dir / ("density_pde_" + std::to_string(d) + ".csv"), 4);
        res.files.push_back("density_pde_" + std::to_string(d) + ".csv");
        const std::size_t ny = r.grid.y_grid.size();
        for (std::size_t k = 0; k < horizons.size(); ++k) {
            const double t = horizons[k];
            const double peak = *std::max_element(r.grid.values.begin() + k * ny, r.grid.values.begin() + (k + 1) * ny);
            for (double y : ys) {
                if (!(y < 0.0) || !r.grid.y_grid.contains(y)) continue;
                const double fp = r.grid.at(k, y);
                if (fp < 1e-4 * peak) continue;
                const auto m = f_mc(phi, s, x, t, y, mc);
                const double rel = std::abs(m.mean - fp) / fp;
                worst = std::max(worst, rel);
                ++compared;
                dens_csv.row({static_cast<double>(d), t, y, fp, m.mean, m.std_error, rel});
            }
            const double flux = r.flux_at(t);
            const auto hit = hitting_density_Phi(phi, s, x, t, mc);
            const double rel = std::abs(hit.mean - flux) / flux;
            worst_flux = std::max(worst_flux, rel);
            flux_csv.row({static_cast<double>(d), t, flux, hit.mean, hit.std_error, rel});
        }
        per_drift.push_back({{"phi", phi.to_json()},
                             {"final_mass", r.step_mass.back()},
                             {"mass_monotone", r.mass_monotone},
                             {"max_peclet", r.max_peclet},
                             {"refined", r.refined}});
    }
    res.files.insert(res.files.begin(), {"density_cross.csv", "density_flux.csv"});
    res.summary = {{"drifts", per_drift}, {"points", compared}, {"max_rel_diff", worst}, {"max_flux_rel_diff", worst_flux}};
    res.checks.push_back(at_most("cross_method_density.f", worst, 0.05, "f_mc vs f_pde where f >= 1e-4 peak"));
    res.checks.push_back(at_most("cross_method_density.flux", worst_flux, 0.05, "hitting density vs -(1/2) d_y f(t,0)"));
    if (compared == 0) res.checks.back() = {"cross_method_density.f", false, 0.0, 0.05, "no comparison points"};
    return res;
}

ExperimentResult j_consistency(const Config& cfg, const ExcursionEnsemble& ens, const fs::path& out_dir) {
    ExperimentResult res;
    const ConvexFunction phi = ConvexFunction::quadratic(2.0);
    const double h = cfg.positive("density.j_step");
    const std::vector<double> probes{-h, -2.0 * h};
    const SurvivalReport sv = survival_J_and_j(phi, 0.0, probes, ens, pde_of(cfg), cfg.quad());
    const double dJ = (sv.J[0] - sv.J[1]) / h;
    const double j = -sv.f_value;
    const double rel = std::abs(dJ - j) / std::abs(j);
    {
        CsvWriter csv(out_dir / "survival_J.csv", {"x", "J", "t_plateau"});
        for (std::size_t i = 0; i < probes.size(); ++i) csv.row({probes[i], sv.J[i], sv.t_plateau[i]});
    }
    res.files = {"survival_J.csv"};
    res.summary = {{"J", sv.J}, {"probes", probes}, {"dJ_dx", dJ}, {"j", j}, {"f_std_error", sv.f_std_error}, {"rel_diff", rel}};
    res.checks.push_back(at_most("j_consistency.rel_diff", rel, 0.10, "finite-difference d_x J(0) vs j(0)"));
    return res;
}

ExperimentResult psi_case(const Config& cfg, const fs::path& out_dir) {
    ExperimentResult res;
    const ConvexFunction H = cfg.function("hamiltonian");
    const double t = cfg.positive("t");
    const ConvexFunction phi = hopf_lax_kernel(H, t);
    const double step = cfg.positive("grids.psi_step"), length = cfg.positive("grids.psi_length");
    const double shift = cfg.positive("grids.stationarity_shift");
    steps_of(length, step, "grids.psi_step");
    steps_of(shift, step, "grids.stationarity_shift");
    const double pad = padding_radius(phi, 1.0);
    const Exec exec = exec_of(cfg);
    const std::uint64_t seed = cfg.seed();

    const std::size_t n_mono = cfg.count("mc.psi_paths");
    const GridSpec x_grid = GridSpec::with_step(0.0, length, step);
    const GridSpec u_grid = padded_grid(0.0, length, pad, step);
    std::vector<unsigned char> monotone(n_mono, 0);
    std::vector<double> first_y;
    for_each_index(n_mono, exec, [&](std::size_t i) {
        const GridPath U0 = sample_two_sided_bm(u_grid, 1.0, seed, make_stream(StreamFamily::TwoSidedBm, i));
        const auto y = psi_process(U0, phi, x_grid);
        monotone[i] = std::is_sorted(y.begin(), y.end()) ? 1 : 0;
    });
    {
        const GridPath U0 = sample_two_sided_bm(u_grid, 1.0, seed, make_stream(StreamFamily::TwoSidedBm, 0));
        const auto y = psi_process(U0, phi, x_grid);
        CsvWriter csv(out_dir / "psi_path.csv", {"x", "y"});
        for (std::size_t i = 0; i < y.size(); ++i) csv.row({x_grid.x(i), y[i]});
    }
    const std::size_t n_mono_ok = static_cast<std::size_t>(std::count(monotone.begin(), monotone.end(), 1));

    // y(0) and y(shift) - shift from independent paths
    const std::size_t n_stat = cfg.count("mc.stationarity_paths");
    const GridSpec pair_grid = GridSpec::with_step(0.0, shift, shift);
    const GridSpec pair_u = padded_grid(0.0, shift, pad, step);
    std::vector<double> at_zero(n_stat), at_shift(n_stat);
    const std::uint64_t offset = std::uint64_t{1} << 40;
    for_each_index(2 * n_stat, exec, [&](std::size_t i) {
        const GridPath U0 = sample_two_sided_bm(pair_u, 1.0, seed, make_stream(StreamFamily::TwoSidedBm, offset + i));
        const auto y = psi_process(U0, phi, pair_grid);
        if (i < n_stat) at_zero[i] = y.front();
        else at_shift[i - n_stat] = y.back() - shift;
    });
    {
        CsvWriter csv(out_dir / "psi_stationarity.csv", {"y_at_zero", "y_at_shift_minus_shift"});
        for (std::size_t i = 0; i < n_stat; ++i) csv.row({at_zero[i], at_shift[i]});
    }
    const double ks = ks_two_sample(at_zero, at_shift);

    res.files = {"psi_path.csv", "psi_stationarity.csv"};
    res.summary = {{"monotone_paths", n_mono_ok}, {"paths", n_mono}, {"stationarity_paths", n_stat},
                   {"ks", ks}, {"padding", pad}};
    res.checks.push_back({"psi_monotone_stationary.monotone", n_mono_ok == n_mono,
                          static_cast<double>(n_mono - n_mono_ok), 0.0, "paths with a decreasing step"});
    res.checks.push_back(at_most("psi_monotone_stationary.ks", ks, 0.02, "y(0) vs y(shift) - shift"));
    return res;
}

KernelTableParams kernel_params_of(const Config& cfg) {
    KernelTableParams p;
    p.rho_min = cfg.number("kernel.rho_min");
    p.rho_max = cfg.number("kernel.rho_max");
    p.row_step = cfg.positive("kernel.row_step");
    p.delta = cfg.positive("kernel.delta");
    p.s_max = cfg.positive("kernel.s_max");
    p.n_offsets = cfg.count("kernel.n_offsets");
    p.bracket_step = cfg.positive("kernel.bracket_step");
    if (!(p.rho_min < p.rho_max)) throw ConfigError("kernel.rho_max", "must exceed kernel.rho_min");
    return p;
}

KernelTable build_table(const Config& cfg, const ExcursionEnsemble& ens, const fs::path& out_dir,
                        ExperimentResult& res) {
    const KernelTable table =
        KernelTable::build(cfg.function("hamiltonian"), cfg.positive("t"), kernel_params_of(cfg), ens, cfg.quad());
    table.write_csv(out_dir / "kernel_table.csv");
    res.files.push_back("kernel_table.csv");
    res.summary["table"] = table.metadata();
    return table;
}

void write_profiles(const fs::path& path, const fs::path& jump_path, const std::vector<ProfileSample>& profiles,
                    std::size_t keep) {
    CsvWriter csv(path, {"profile", "x", "rho"});
    CsvWriter jumps(jump_path, {"profile", "x", "rho_before", "rho_after"});
    for (std::size_t k = 0; k < std::min(keep, profiles.size()); ++k) {
        const ProfileSample& p = profiles[k];
        for (std::size_t i = 0; i < p.rho.size(); ++i) csv.row({static_cast<double>(k), p.x_grid.x(i), p.rho[i]});
        for (const ProfileJump& j : p.jumps) jumps.row({static_cast<double>(k), j.x, j.rho_before, j.rho_after});
    }
}

ExperimentResult simulate_case(const Config& cfg, const ExcursionEnsemble& ens, const fs::path& out_dir) {
    ExperimentResult res;
    const KernelTable table = build_table(cfg, ens, out_dir, res);
    const ConvexFunction H = cfg.function("hamiltonian");
    const double t = cfg.positive("t");
    CompareParams cp;
    cp.n_paths = cfg.count("mc.profile_paths");
    cp.length = cfg.positive("grids.profile_length");
    cp.step = cfg.positive("grids.profile_step");
    steps_of(cp.length, cp.step, "grids.profile_step");
    cp.sigma = 1.0;
    cp.seed = cfg.seed();
    cp.exec = exec_of(cfg);
    const DirectEnsemble direct = direct_profiles(H, t, cp);
    std::vector<ProfileSample> generated;
    const CompareReport rep = compare_with_direct(H, t, table, cp, &generated, &direct);
    const std::size_t keep = 8;
    write_profiles(out_dir / "generator_profiles.csv", out_dir / "generator_jumps.csv", generated, keep);
    write_profiles(out_dir / "direct_profiles.csv", out_dir / "direct_jumps.csv", direct.profiles, keep);
    res.files.insert(res.files.end(),
                     {"generator_profiles.csv", "generator_jumps.csv", "direct_profiles.csv", "direct_jumps.csv"});
    res.summary["compare"] = rep.to_json();
    res.checks.push_back(at_most("generator_end_to_end.ks_marginal", rep.ks_marginal, 0.05, "rho marginal"));
    res.checks.push_back(at_most("generator_end_to_end.ks_jump_size", rep.ks_jump_size, 0.07, "jump sizes"));
    res.checks.push_back(at_most("generator_end_to_end.slope", rep.max_slope_rel_error, 0.02,
                                 "max relative error of smooth-piece slopes vs -1/(t H'')"));
    return res;
}

CensusParams census_params_of(const Config& cfg, const LevySpec& levy) {
    CensusParams p;
    p.levy = levy;
    p.t = cfg.positive("t");
    std::tie(p.window_lo, p.window_hi) = window_of(cfg, "shocks.window");
    p.levels = static_cast<int>(cfg.count("shocks.levels"));
    if (p.levels < 2) throw ConfigError("shocks.levels", "needs at least two levels");
    p.base_step = cfg.positive("shocks.base_step");
    p.min_gap = cfg.positive("shocks.min_gap");
    p.replicates = cfg.count("shocks.replicates");
    p.seed = cfg.seed();
    p.exec = exec_of(cfg);
    return p;
}

ExperimentResult shocks_case(const Config& cfg, const fs::path& out_dir) {
    ExperimentResult res;
    const ConvexFunction H = cfg.function("hamiltonian");
    LevySpec brownian = cfg.levy("levy");
    brownian.jump_intensity = 0.0;
    LevySpec jumpy = cfg.levy("levy");
    jumpy.jump_intensity = cfg.positive("shocks.jump_intensity");

    const CensusReport pure = census_experiment(H, census_params_of(cfg, brownian));
    const CensusReport mixed = census_experiment(H, census_params_of(cfg, jumpy));
    pure.write_csv(out_dir / "shock_census_brownian.csv");
    mixed.write_csv(out_dir / "shock_census_levy.csv");

    TruncationParams tp;
    tp.levy = jumpy;
    tp.t = cfg.positive("t");
    std::tie(tp.window_lo, tp.window_hi) = window_of(cfg, "shocks.window");
    tp.step = cfg.positive("shocks.truncation_step");
    tp.replicates = cfg.count("shocks.truncation_replicates");
    tp.seed = cfg.seed();
    tp.exec = exec_of(cfg);
    const TruncationReport trunc = truncation_stability(H, tp);
    trunc.write_csv(out_dir / "shock_truncation.csv");

    res.files = {"shock_census_brownian.csv", "shock_census_levy.csv", "shock_truncation.csv"};
    res.summary = {{"brownian", pure.to_json()}, {"levy", mixed.to_json()}, {"truncation", trunc.to_json()}};
    res.checks.push_back(at_most("shock_discreteness.census_brownian", pure.final_change, 0.2,
                                 "relative count change between the two finest levels"));
    res.checks.push_back(at_most("shock_discreteness.census_levy", mixed.final_change, 0.2,
                                 "relative count change between the two finest levels"));
    const double n = static_cast<double>(trunc.rows.size());
    res.checks.push_back({"shock_discreteness.truncation_equal", trunc.matches == trunc.rows.size(),
                          static_cast<double>(trunc.matches) / n, 1.0,
                          "fraction of replicates whose stabilisation N equals the largest in-window jump"});
    res.checks.push_back({"shock_discreteness.truncation_bound", trunc.bounded == trunc.rows.size(),
                          static_cast<double>(trunc.bounded) / n, 1.0,
                          "fraction with stabilisation N at most the largest in-window jump"});
    return res;
}

void check_output_dir(const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir.string());
}

}  // namespace

std::vector<double> direct_argmax_samples(const ConvexFunction& phi, double range, double step, std::size_t n_paths,
                                          std::uint64_t seed, Exec exec) {
    if (!(range > 0.0 && step > 0.0 && step < range)) throw DomainError("direct argmax needs 0 < step < range");
    const auto n_side = static_cast<std::size_t>(std::floor(range / step + 1e-9));
    std::vector<double> right(n_side + 1), left(n_side + 1);
    for (std::size_t k = 0; k <= n_side; ++k) {
        right[k] = phi.value(step * static_cast<double>(k));
        left[k] = phi.value(-step * static_cast<double>(k));
    }
    const double sd = std::sqrt(step);
    std::vector<double> out(n_paths);
    for_each_index(n_paths, exec, [&](std::size_t i) {
        Rng rng(seed, make_stream(StreamFamily::DirectArgmax, i));
        double best = -right[0];
        double arg = 0.0;
        for (const auto* side : {&right, &left}) {
            const double sign = side == &right ? 1.0 : -1.0;
            double w = 0.0;
            for (std::size_t k = 1; k <= n_side; ++k) {
                w += sd * rng.normal();
                const double v = w - (*side)[k];
                if (v > best) {
                    best = v;
                    arg = sign * step * static_cast<double>(k);
                }
            }
        }
        out[i] = arg;
    });
    return out;
}

ExperimentResult run_chernoff(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    const ExcursionEnsemble ens = ensemble_of(cfg);
    return chernoff_case(cfg.function("phi"), cfg, ens, out_dir, "chernoff", "chernoff", 0.02);
}

ExperimentResult run_solve(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    ExperimentResult res;
    const ConvexFunction H = cfg.function("hamiltonian");
    const double t = cfg.positive("t");
    const LevySpec levy = cfg.levy("levy");
    const double length = cfg.positive("grids.psi_length"), step = cfg.positive("grids.psi_step");
    steps_of(length, step, "grids.psi_step");
    const ConvexFunction phi = hopf_lax_kernel(H, t);
    const GridSpec u_grid = padded_grid(0.0, length, levy_padding(phi, levy), step);
    const GridSpec x_grid = GridSpec::with_step(0.0, length, step);
    const std::size_t n = cfg.count("mc.solve_paths");
    const double min_gap = cfg.positive("shocks.min_gap");
    std::vector<SolutionField> fields(n);
    for_each_index(n, exec_of(cfg), [&](std::size_t i) {
        const LevyPath U0 = sample_levy(levy, u_grid, cfg.seed(), make_stream(StreamFamily::LevyJumps, i));
        fields[i] = solve_field(U0.path, H, t, x_grid);
    });
    CsvWriter csv(out_dir / "solve_fields.csv", {"path", "x", "u", "y", "rho"});
    CsvWriter shocks(out_dir / "solve_shocks.csv", {"path", "x", "rho_left", "rho_right", "gap"});
    json counts = json::array();
    for (std::size_t k = 0; k < n; ++k) {
        const SolutionField& f = fields[k];
        for (std::size_t i = 0; i < f.u.size(); ++i)
            csv.row({static_cast<double>(k), f.x_grid.x(i), f.u[i], f.y[i], f.rho[i]});
        const ShockReport rep = shock_census(f, std::max(min_gap, step));
        for (const Shock& s : rep.shocks) shocks.row({static_cast<double>(k), s.x, s.rho_left, s.rho_right, s.gap});
        counts.push_back(rep.shocks.size());
    }
    res.files = {"solve_fields.csv", "solve_shocks.csv"};
    res.summary = {{"paths", n}, {"t", t}, {"shock_counts", counts}, {"levy", levy.to_json()}};
    return res;
}

ExperimentResult run_kernel(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    ExperimentResult res;
    const ExcursionEnsemble ens = ensemble_of(cfg);
    build_table(cfg, ens, out_dir, res);
    return res;
}

ExperimentResult run_simulate(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    const ExcursionEnsemble ens = ensemble_of(cfg);
    return simulate_case(cfg, ens, out_dir);
}

ExperimentResult run_density(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    ExperimentResult res = cross_method(cfg, out_dir);
    const ExcursionEnsemble ens = ensemble_of(cfg);
    res.merge("j_consistency", j_consistency(cfg, ens, out_dir));
    return res;
}

ExperimentResult run_airy_check(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    const ExcursionEnsemble ens = ensemble_of(cfg);
    return airy_identity(cfg, ens, out_dir);
}

ExperimentResult run_shocks(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    return shocks_case(cfg, out_dir);
}

ExperimentResult run_psi(const Config& cfg, const fs::path& out_dir) {
    check_output_dir(out_dir);
    return psi_case(cfg, out_dir);
}

bool same_csv_files(const fs::path& a, const fs::path& b, std::vector<std::string>* mismatches) {
    auto list = [](const fs::path& dir) {
        std::set<std::string> names;
        if (fs::is_directory(dir))
            for (const auto& e : fs::directory_iterator(dir))
                if (e.is_regular_file() && e.path().extension() == ".csv") names.insert(e.path().filename().string());
        return names;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    const auto na = list(a), nb = list(b);
    bool same = true;
    std::set<std::string> all = na;
    all.insert(nb.begin(), nb.end());
    for (const std::string& name : all) {
        if (!na.count(name) || !nb.count(name) || slurp(a / name) != slurp(b / name)) {
            same = false;
            if (mismatches) mismatches->push_back(name);
        }
    }
    return same && !na.empty();
}

ExperimentResult run_validate(const Config& cfg, const fs::path& out_dir, bool check_determinism) {
    check_output_dir(out_dir);
    ExperimentResult res;
    const ExcursionEnsemble ens = ensemble_of(cfg);

    res.merge("chernoff_quadratic",
              chernoff_case(cfg.function("validate.quadratic_phi"), cfg, ens, out_dir, "chernoff", "chernoff_quadratic", 0.02));
    res.merge("chernoff_quartic", chernoff_case(cfg.function("validate.quartic_phi"), cfg, ens, out_dir,
                                                "chernoff_quartic", "chernoff_quartic", 0.03));
    res.merge("airy_identity", airy_identity(cfg, ens, out_dir));
    res.merge("cross_method_density", cross_method(cfg, out_dir));
    res.merge("j_consistency", j_consistency(cfg, ens, out_dir));
    res.merge("generator_end_to_end", simulate_case(cfg, ens, out_dir));
    res.merge("psi_monotone_stationary", psi_case(cfg, out_dir));
    res.merge("shock_discreteness", shocks_case(cfg, out_dir));

    if (check_determinism) {
        Config quick = cfg;
        const json& overrides = cfg.at("validate.determinism_overrides");
        if (!overrides.is_object()) throw ConfigError("validate.determinism_overrides", "must be an object");
        for (const auto& [key, value] : overrides.items()) quick.set(key + "=" + value.dump());
        const fs::path run_a = out_dir / "determinism" / "run_a", run_b = out_dir / "determinism" / "run_b";
        run_validate(quick, run_a, false);
        // second run on a different pool size: results must not depend on scheduling
        const int threads = thread_count();
        set_thread_count(threads + 1);
        try {
            run_validate(quick, run_b, false);
        } catch (...) {
            set_thread_count(threads);
            throw;
        }
        set_thread_count(threads);
        std::vector<std::string> mismatches;
        const bool same = same_csv_files(run_a, run_b, &mismatches);
        res.summary["determinism"] = {{"mismatches", mismatches}, {"threads", {threads, threads + 1}}};
        res.checks.push_back({"determinism.identical_csv", same, static_cast<double>(mismatches.size()), 0.0,
                              "CSV files differing between two reduced-scale runs"});
    }
    return res;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"chernoff", "solve",  "kernel", "simulate", "density",
                                                "airy-check", "shocks", "psi",    "validate"};
    return names;
}

ExperimentResult run_command(const std::string& command, const Config& cfg, const fs::path& out_dir) {
    if (command == "chernoff") return run_chernoff(cfg, out_dir);
    if (command == "solve") return run_solve(cfg, out_dir);
    if (command == "kernel") return run_kernel(cfg, out_dir);
    if (command == "simulate") return run_simulate(cfg, out_dir);
    if (command == "density") return run_density(cfg, out_dir);
    if (command == "airy-check") return run_airy_check(cfg, out_dir);
    if (command == "shocks") return run_shocks(cfg, out_dir);
    if (command == "psi") return run_psi(cfg, out_dir);
    if (command == "validate") return run_validate(cfg, out_dir);
    throw DomainError("unknown command '" + command + "'");
}

json default_config() {
    const json quadratic = {{"family", "quadratic"}, {"params", {{"a", 2.0}}}};
    return {
        {"seed", 20240611},
        {"output_dir", "results"},
        {"parallel", true},
        {"t", 1.0},
        {"hamiltonian", {{"family", "quadratic"}, {"params", {{"a", 1.0}}}}},
        {"phi", quadratic},
        {"grids",
         {{"chernoff_range", 6.0},
          {"chernoff_step", 1.0 / 1024.0},
          {"density_t_max", 3.0},
          {"density_t_step", 0.025},
          {"profile_length", 4.0},
          {"profile_step", 1.0 / 2048.0},
          {"psi_length", 4.0},
          {"psi_step", 1.0 / 1024.0},
          {"stationarity_shift", 2.0}}},
        {"mc",
         {{"excursions", 20000},
          {"excursion_steps", 512},
          {"chernoff_paths", 100000},
          {"bridge_samples", 20000},
          {"bridge_steps", 256},
          {"profile_paths", 1000},
          {"psi_paths", 1000},
          {"stationarity_paths", 20000},
          {"solve_paths", 4}}},
        {"quad", {{"panels", 16}, {"order", 8}, {"log_cut", 30.0}, {"rel_tol", 1e-6}, {"control_variates", true}}},
        {"kernel",
         {{"rho_min", -3.5},
          {"rho_max", 4.0},
          {"row_step", 0.1},
          {"delta", 0.02},
          {"s_max", 3.5},
          {"n_offsets", 96},
          {"bracket_step", 0.05}}},
        {"pde", {{"dy", 5e-4}, {"dt_max", 1e-3}, {"eps0", 1e-4}}},
        {"density",
         {{"s", 0.0},
          {"x", -1.0},
          {"horizons", {0.5, 1.0}},
          {"y", {-0.05, -0.2, -0.5, -1.0, -1.5, -2.0, -3.0, -4.0}},
          {"drifts", {quadratic, {{"family", "polynomial"}, {"params", {{"coeffs", {0.0, 0.0, 0.5, 0.0, 0.25}}}}}}},
          {"j_step", 0.01}}},
        {"airy", {{"t", {-1.0, -0.5, 0.0, 0.5, 1.0}}, {"wronskian_probes", 50}}},
        {"levy",
         {{"brownian_sigma", 1.0},
          {"drift", 0.0},
          {"jump_intensity", 0.0},
          {"jump_law", {{"type", "exponential"}, {"mean", 1.0}}}}},
        {"shocks",
         {{"window", {0.0, 1.0}},
          {"levels", 4},
          {"base_step", 1.0 / 256.0},
          {"min_gap", 0.05},
          {"replicates", 64},
          {"jump_intensity", 1.0},
          {"truncation_step", 1.0 / 1024.0},
          {"truncation_replicates", 100}}},
        {"validate",
         {{"quadratic_phi", quadratic},
          {"quartic_phi", {{"family", "quartic"}, {"params", {{"a", 4.0}}}}},
          {"determinism_overrides",
           {{"mc.excursions", 2000},
            {"mc.excursion_steps", 128},
            {"mc.chernoff_paths", 2000},
            {"mc.bridge_samples", 1000},
            {"mc.profile_paths", 20},
            {"mc.psi_paths", 20},
            {"mc.stationarity_paths", 500},
            {"grids.density_t_step", 0.1},
            {"grids.chernoff_step", 1.0 / 256.0},
            {"pde.dy", 2e-3},
            {"pde.dt_max", 4e-3},
            {"kernel.row_step", 0.5},
            {"kernel.n_offsets", 32},
            {"airy.t", {0.0}},
            {"airy.wronskian_probes", 10},
            {"shocks.replicates", 4},
            {"shocks.levels", 3},
            {"shocks.truncation_replicates", 4}}}}},
    };
}

}  // namespace conslaw
