#include "conslaw/shocks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/variational.hpp"

namespace conslaw {

namespace {

// First and second moments of one jump.
std::pair<double, double> jump_moments(const LevySpec& l) {
    if (l.jump_law == JumpLaw::Exponential) return {l.jump_mean, 2.0 * l.jump_mean * l.jump_mean};
    const double a = l.pareto_alpha, m = l.pareto_xmin;
    const double second = a > 2.0 ? a * m * m / (a - 2.0) : std::numeric_limits<double>::infinity();
    return {a * m / (a - 1.0), second};
}

GridSpec potential_grid(double lo, double hi, double pad, double step) {
    const double left = std::floor(std::min(lo - pad, 0.0) / step) * step;
    const double right = std::ceil(std::max(hi + pad, 0.0) / step) * step;
    return GridSpec::with_step(left, right, step);
}

GridPath with_jumps(const GridPath& continuous, std::span<const Jump> jumps) {
    GridPath out = continuous;
    const auto jp = render_jumps(out.grid, jumps);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += jp[i];
    return out;
}

std::vector<std::size_t> shock_cells(const SolutionField& f, double min_gap) {
    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i + 1 < f.y.size(); ++i)
        if (f.y[i + 1] - f.y[i] > min_gap) cells.push_back(i);
    return cells;
}

}  // namespace

double levy_padding(const ConvexFunction& phi, const LevySpec& levy) {
    levy.validate();
    const auto [mean, second] = jump_moments(levy);
    const double lam = levy.jump_intensity;
    const double base = std::max(0.0, phi.value(0.0));
    auto need = [&](double r) {
        double n = 6.0 * levy.brownian_sigma * std::sqrt(r) + std::abs(levy.drift) * r + 1.0;
        if (lam > 0.0) n += lam * mean * r + (std::isfinite(second) ? 6.0 * std::sqrt(lam * second * r) : 3.0 * lam * mean * r);
        return n;
    };
    auto ok = [&](double r) { return std::min(phi.value(r), phi.value(-r)) - base >= need(r); };
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw DomainError("no finite padding radius for this kernel and noise");
    }
    double lo = hi == 1.0 ? 0.0 : hi / 2.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

nlohmann::json CensusReport::to_json() const {
    nlohmann::json lv = nlohmann::json::array();
    for (const auto& l : levels) lv.push_back({{"level", l.level}, {"grid_step", l.grid_step}, {"count", l.count}});
    return {{"levels", lv}, {"final_change", final_change}, {"saturated", saturated}};
}

void CensusReport::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"level", "grid_step", "count"});
    for (const auto& l : levels) csv.row({static_cast<double>(l.level), l.grid_step, static_cast<double>(l.count)});
}

CensusReport census_experiment(const ConvexFunction& H, const CensusParams& p) {
    p.levy.validate();
    if (p.levels < 2) throw DomainError("census needs at least two refinement levels");
    if (!(p.window_hi > p.window_lo)) throw DomainError("empty census window");
    if (p.min_gap < p.base_step) throw DomainError("min_gap must be at least the coarsest grid step");
    const ConvexFunction phi = hopf_lax_kernel(H, p.t);
    const double pad = levy_padding(phi, p.levy);
    const GridSpec base = potential_grid(p.window_lo, p.window_hi, pad, p.base_step);
    const auto L = static_cast<std::size_t>(p.levels);

    std::vector<std::size_t> counts(p.replicates * L);
    for_each_index(p.replicates, p.exec, [&](std::size_t r) {
        const LevyPath lp = sample_levy(p.levy, base, p.seed, make_stream(StreamFamily::Census, r));
        Rng refine(p.seed, make_stream(StreamFamily::Refinement, r));
        GridPath cont = lp.continuous_part;
        double step = p.base_step;
        for (std::size_t level = 0; level < L; ++level) {
            if (level > 0) {
                cont = refine_brownian(cont, p.levy.brownian_sigma, refine);
                step *= 0.5;
            }
            const GridSpec xg = GridSpec::with_step(p.window_lo, p.window_hi, step);
            const SolutionField field = solve_field(with_jumps(cont, lp.jumps), H, p.t, xg);
            counts[r * L + level] = shock_census(field, p.min_gap).count_in(p.window_lo, p.window_hi);
        }
    });

    CensusReport rep;
    double step = p.base_step;
    for (std::size_t level = 0; level < L; ++level) {
        std::size_t total = 0;
        for (std::size_t r = 0; r < p.replicates; ++r) total += counts[r * L + level];
        rep.levels.push_back({static_cast<int>(level), step, total});
        step *= 0.5;
    }
    const double last = static_cast<double>(rep.levels[L - 1].count);
    const double prev = static_cast<double>(rep.levels[L - 2].count);
    rep.final_change = std::abs(last - prev) / std::max(prev, 1.0);
    rep.saturated = rep.final_change <= 0.2;
    return rep;
}

nlohmann::json TruncationReport::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows)
        rs.push_back({{"replicate", r.replicate},
                      {"jumps", r.jumps},
                      {"max_jump", r.max_jump},
                      {"max_window_jump", r.max_window_jump},
                      {"stabilization_n", r.stabilization_n},
                      {"shocks", r.shocks}});
    return {{"rows", rs}, {"matches", matches}, {"bounded", bounded}, {"replicates", rows.size()}};
}

void TruncationReport::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"replicate", "jumps", "max_jump", "max_window_jump", "stabilization_n", "shocks"});
    for (const auto& r : rows)
        csv.row({static_cast<double>(r.replicate), static_cast<double>(r.jumps), r.max_jump, r.max_window_jump,
                 r.stabilization_n, static_cast<double>(r.shocks)});
}

TruncationReport truncation_stability(const ConvexFunction& H, const TruncationParams& p) {
    p.levy.validate();
    if (!std::is_sorted(p.n_list.begin(), p.n_list.end())) throw DomainError("N list must be increasing");
    const double min_gap = p.min_gap > 0.0 ? p.min_gap : p.step;
    if (min_gap < p.step) throw DomainError("min_gap must be at least the grid step");
    const ConvexFunction phi = hopf_lax_kernel(H, p.t);
    const double pad = levy_padding(phi, p.levy);
    const GridSpec ug = potential_grid(p.window_lo, p.window_hi, pad, p.step);
    const GridSpec xg = GridSpec::with_step(p.window_lo, p.window_hi, p.step);

    TruncationReport rep;
    rep.rows.resize(p.replicates);
    // Separate index block from the census so the two experiments use unrelated paths.
    constexpr std::uint64_t offset = std::uint64_t{1} << 32;
    for_each_index(p.replicates, p.exec, [&](std::size_t r) {
        const LevyPath lp = sample_levy(p.levy, ug, p.seed, make_stream(StreamFamily::Census, offset + r));
        const SolutionField full = solve_field(lp.path, H, p.t, xg);
        const auto full_set = shock_cells(full, min_gap);

        TruncationRow row{};
        row.replicate = r;
        row.jumps = lp.jumps.size();
        row.shocks = full_set.size();
        std::vector<double> ns = p.n_list;
        if (ns.empty()) {
            ns.push_back(0.0);
            for (const Jump& j : lp.jumps) ns.push_back(j.size);
            std::sort(ns.begin(), ns.end());
        }
        // Walk down from the largest N while the shock set still equals the
        // untruncated one. The hull of Lagrangian windows covers U0 and every
        // truncation down to the first one that changes the set.
        double y_lo = full.y.front(), y_hi = full.y.back();
        row.stabilization_n = std::numeric_limits<double>::infinity();
        for (std::size_t k = ns.size(); k-- > 0;) {
            const SolutionField f = solve_field(truncate_jumps(lp.path, lp.jumps, ns[k]), H, p.t, xg);
            y_lo = std::min(y_lo, f.y.front());
            y_hi = std::max(y_hi, f.y.back());
            if (shock_cells(f, min_gap) != full_set) break;
            row.stabilization_n = ns[k];
        }
        for (const Jump& j : lp.jumps) {
            row.max_jump = std::max(row.max_jump, j.size);
            if (j.location > y_lo && j.location <= y_hi) row.max_window_jump = std::max(row.max_window_jump, j.size);
        }
        rep.rows[r] = row;
    });
    for (const auto& r : rep.rows) {
        if (r.stabilization_n == r.max_window_jump) ++rep.matches;
        if (r.stabilization_n <= r.max_window_jump) ++rep.bounded;
    }
    return rep;
}

}  // namespace conslaw
