#include "conslaw/generator.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/paths.hpp"
#include "conslaw/stats.hpp"
#include "conslaw/variational.hpp"

namespace conslaw {

double drift_b(const ConvexFunction& H, double rho, double t) {
    const double h2 = H.second_derivative(rho);
    if (!(h2 > 0.0)) throw DomainError("H'' must be positive for the profile drift");
    if (!(t > 0.0)) throw DomainError("drift needs t > 0");
    return -1.0 / (t * h2);
}

KernelTable KernelTable::build(const ConvexFunction& H, double t, const KernelTableParams& p,
                               const ExcursionEnsemble& ens, const QuadParams& quad) {
    if (!(p.rho_min < p.rho_max) || !(p.row_step > 0.0) || !(p.delta > 0.0) || p.n_offsets < 2 ||
        !(p.s_max * p.s_max > p.delta))
        throw DomainError("invalid kernel table parameters");
    KernelTable tab;
    tab.t_ = t;
    tab.delta_ = p.delta;
    const auto n_rows = static_cast<std::size_t>(std::llround((p.rho_max - p.rho_min) / p.row_step)) + 1;
    for (std::size_t k = 0; k < n_rows; ++k) tab.rows_.push_back(p.rho_min + p.row_step * static_cast<double>(k));
    const double s0 = std::sqrt(p.delta);
    for (std::size_t j = 0; j < p.n_offsets; ++j)
        tab.offsets_.push_back(s0 + (p.s_max - s0) * static_cast<double>(j) / static_cast<double>(p.n_offsets - 1));

    // Bracket term on a uniform grid covering every rho+ the table can reach.
    const double r_hi = tab.rows_.back() + p.s_max * p.s_max;
    const auto n_br = static_cast<std::size_t>(std::ceil((r_hi - p.rho_min) / p.bracket_step)) + 1;
    std::vector<double> br(n_br), br_se(n_br);
    for (std::size_t i = 0; i < n_br; ++i) {
        const auto f = kernel_bracket(H, t, p.rho_min + p.bracket_step * static_cast<double>(i), ens, quad);
        br[i] = f.value;
        br_se[i] = f.std_error;
        tab.max_bracket_rel_se_ = std::max(tab.max_bracket_rel_se_, f.std_error / std::abs(f.value));
    }
    tab.min_bracket_ = *std::min_element(br.begin(), br.end());
    if (!(tab.min_bracket_ > 0.0)) throw ConvergenceError("bracket term not positive on the table range");
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(br.begin(), br.end(), p.rho_min,
                                                                       p.bracket_step);
    auto se_at = [&](double r) {
        const double pos = std::clamp((r - p.rho_min) / p.bracket_step, 0.0, static_cast<double>(n_br - 1));
        const auto i = std::min(static_cast<std::size_t>(pos), n_br - 2);
        const double w = pos - static_cast<double>(i);
        return (1.0 - w) * br_se[i] + w * br_se[i + 1];
    };

    const std::size_t nc = p.n_offsets;
    tab.n_.assign(n_rows * nc, 0.0);
    tab.se_.assign(n_rows * nc, 0.0);
    tab.lambda_.assign(n_rows, 0.0);
    tab.ill_.assign(n_rows, 0);
    for (std::size_t k = 0; k < n_rows; ++k) {
        const double rm = tab.rows_[k];
        const double bottom = spline(rm), bottom_se = se_at(rm);
        tab.ill_[k] = std::abs(bottom) < 1e-6;
        for (std::size_t j = 0; j < nc; ++j) {
            const double rp = rm + tab.offsets_[j] * tab.offsets_[j];
            const auto fac = kernel_excursion_factor(H, t, rm, rp, ens);
            const double top = spline(rp), top_se = se_at(rp);
            const double v = fac.mean * top / bottom;
            tab.n_[k * nc + j] = std::max(v, 0.0);
            tab.se_[k * nc + j] = std::abs(v) * std::sqrt(std::pow(fac.std_error / fac.mean, 2) +
                                                          std::pow(top_se / top, 2) +
                                                          std::pow(bottom_se / bottom, 2));
        }
    }
    tab.lambda_.assign(n_rows, 0.0);
    for (std::size_t k = 0; k < n_rows; ++k) tab.lambda_[k] = tab.row_cdf(k, tab.offsets_.back());
    return tab;
}

KernelTable KernelTable::from_values(double t, double delta, std::vector<double> rows, std::vector<double> offsets,
                                     std::vector<double> n) {
    if (rows.size() < 2 || offsets.size() < 2 || n.size() != rows.size() * offsets.size() || !(delta > 0.0))
        throw DomainError("kernel table values do not match the grid");
    if (!std::is_sorted(rows.begin(), rows.end()) || !std::is_sorted(offsets.begin(), offsets.end()))
        throw DomainError("kernel table grid must increase");
    if (std::any_of(n.begin(), n.end(), [](double v) { return !(v >= 0.0); }))
        throw DomainError("kernel values must be nonnegative");
    KernelTable tab;
    tab.t_ = t;
    tab.delta_ = delta;
    tab.rows_ = std::move(rows);
    tab.offsets_ = std::move(offsets);
    tab.n_ = std::move(n);
    tab.se_.assign(tab.n_.size(), 0.0);
    tab.ill_.assign(tab.rows_.size(), 0);
    tab.lambda_.assign(tab.rows_.size(), 0.0);
    for (std::size_t k = 0; k < tab.rows_.size(); ++k) tab.lambda_[k] = tab.row_cdf(k, tab.offsets_.back());
    return tab;
}

KernelTable::Mix KernelTable::locate(double rho) const {
    if (!covers(rho)) throw TableRangeError("rho = " + format_number(rho) + " outside the kernel table rows");
    const double step = rows_[1] - rows_[0];
    const double pos = (rho - rows_.front()) / step;
    const auto k = std::min(static_cast<std::size_t>(pos), rows_.size() - 2);
    return {k, std::clamp(pos - static_cast<double>(k), 0.0, 1.0)};
}

double KernelTable::row_cdf(std::size_t row, double s) const {
    const std::size_t nc = offsets_.size();
    auto g = [&](std::size_t j) { return 2.0 * offsets_[j] * n_[row * nc + j]; };
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < nc; ++j) {
        const double a = offsets_[j], b = offsets_[j + 1];
        if (s <= a) break;
        if (s >= b) {
            acc += 0.5 * (g(j) + g(j + 1)) * (b - a);
        } else {
            const double d = s - a;
            const double slope = (g(j + 1) - g(j)) / (b - a);
            acc += g(j) * d + 0.5 * slope * d * d;
            break;
        }
    }
    return acc;
}

double KernelTable::row_inverse(std::size_t row, double mass) const {
    const std::size_t nc = offsets_.size();
    auto g = [&](std::size_t j) { return 2.0 * offsets_[j] * n_[row * nc + j]; };
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < nc; ++j) {
        const double a = offsets_[j], b = offsets_[j + 1];
        const double seg = 0.5 * (g(j) + g(j + 1)) * (b - a);
        if (acc + seg >= mass || j + 2 == nc) {
            const double rem = std::clamp(mass - acc, 0.0, seg);
            const double slope = (g(j + 1) - g(j)) / (b - a);
            const double disc = std::max(g(j) * g(j) + 2.0 * slope * rem, 0.0);
            const double denom = g(j) + std::sqrt(disc);
            const double d = denom > 0.0 ? 2.0 * rem / denom : 0.0;
            return std::min(a + d, b);
        }
        acc += seg;
    }
    return offsets_.back();
}

double KernelTable::rate(double rho) const {
    const Mix m = locate(rho);
    return (1.0 - m.w) * lambda_[m.row] + m.w * lambda_[m.row + 1];
}

double KernelTable::max_rate() const { return *std::max_element(lambda_.begin(), lambda_.end()); }

double KernelTable::jump_size_cdf(double rho, double size) const {
    if (size <= delta_) return 0.0;
    const Mix m = locate(rho);
    const double s = std::min(std::sqrt(size), offsets_.back());
    const double num = (1.0 - m.w) * row_cdf(m.row, s) + m.w * row_cdf(m.row + 1, s);
    return num / rate(rho);
}

double KernelTable::sample_target(double rho, Rng& rng) const {
    const Mix m = locate(rho);
    const double left = (1.0 - m.w) * lambda_[m.row];
    const double total = left + m.w * lambda_[m.row + 1];
    const double u = rng.uniform() * total;
    const double s = u <= left ? row_inverse(m.row, u / (1.0 - m.w))
                               : row_inverse(m.row + 1, (u - left) / m.w);
    return rho + s * s;
}

void KernelTable::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"rho_minus", "rho_plus", "n", "std_error"});
    for (std::size_t k = 0; k < rows_.size(); ++k)
        for (std::size_t j = 0; j < offsets_.size(); ++j)
            csv.row({rows_[k], rows_[k] + offsets_[j] * offsets_[j], n_at(k, j), se_at(k, j)});
}

nlohmann::json KernelTable::metadata() const {
    std::size_t ill = 0;
    for (auto f : ill_) ill += f;
    return {{"t", t_},
            {"delta", delta_},
            {"rho_min", rows_.front()},
            {"rho_max", rows_.back()},
            {"rows", rows_.size()},
            {"offsets", offsets_.size()},
            {"largest_jump", offsets_.back() * offsets_.back()},
            {"max_rate", max_rate()},
            {"min_bracket", min_bracket_},
            {"max_bracket_rel_se", max_bracket_rel_se_},
            {"ill_conditioned_rows", ill}};
}

void ProfileSample::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"x", "rho"});
    for (std::size_t i = 0; i < rho.size(); ++i) csv.row({x_grid.x(i), rho[i]});
}

namespace {

double rk4(const ConvexFunction& H, double t, double rho, double dx, double max_step) {
    if (dx <= 0.0) return rho;
    const auto n = static_cast<std::size_t>(std::ceil(dx / max_step));
    const double h = dx / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k1 = drift_b(H, rho, t);
        const double k2 = drift_b(H, rho + 0.5 * h * k1, t);
        const double k3 = drift_b(H, rho + 0.5 * h * k2, t);
        const double k4 = drift_b(H, rho + h * k3, t);
        rho += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return rho;
}

void require_cover(const KernelTable& table, double rho, double x) {
    if (!table.covers(rho))
        throw TableRangeError("profile left the kernel table: rho = " + format_number(rho) + " at x = " +
                              format_number(x));
}

}  // namespace

ProfileSample simulate_profile(const ConvexFunction& H, double t, const KernelTable& table, double rho0,
                               const ProfileParams& p, Rng& rng) {
    ProfileSample out;
    out.x_grid = GridSpec::with_step(p.x0, p.x1, p.record_step);
    const std::size_t n_rec = out.x_grid.size();
    out.rho.resize(n_rec);
    const double envelope = 1.1 * table.max_rate();
    double x = p.x0, rho = rho0;
    require_cover(table, rho, x);
    out.rho[0] = rho;
    std::size_t k = 1;
    while (true) {
        const double x_event = x + rng.exponential(envelope);
        while (k < n_rec && out.x_grid.x(k) < x_event) {
            const double xk = out.x_grid.x(k);
            rho = rk4(H, t, rho, xk - x, p.ode_step);
            x = xk;
            require_cover(table, rho, x);
            out.rho[k++] = rho;
        }
        if (k >= n_rec) break;
        rho = rk4(H, t, rho, x_event - x, p.ode_step);
        x = x_event;
        require_cover(table, rho, x);
        if (rng.uniform() * envelope <= table.rate(rho)) {
            const double after = table.sample_target(rho, rng);
            if (!(after > rho)) throw Error("non-upward jump sampled");
            out.jumps.push_back({x, rho, after});
            rho = after;
            require_cover(table, rho, x);
        }
    }
    return out;
}

std::vector<PieceSlope> piece_slopes(const ProfileSample& profile, const ConvexFunction& H, double t,
                                     std::size_t min_points) {
    std::vector<PieceSlope> out;
    const std::size_t n = profile.rho.size();
    std::size_t start = 0, next_jump = 0;
    auto flush = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
        if (hi - lo < min_points) return;
        double sx = 0, sy = 0, sxx = 0, sxy = 0, sb = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double x = profile.x_grid.x(i) - profile.x_grid.x(lo), r = profile.rho[i];
            sx += x;
            sy += r;
            sxx += x * x;
            sxy += x * r;
            sb += drift_b(H, r, t);
        }
        const double m = static_cast<double>(hi - lo);
        const double slope = (sxy - sx * sy / m) / (sxx - sx * sx / m);
        out.push_back({slope, sb / m, hi - lo});
    };
    for (std::size_t i = 1; i < n; ++i) {
        const double xi = profile.x_grid.x(i);
        bool jumped = false;
        while (next_jump < profile.jumps.size() && profile.jumps[next_jump].x <= xi) {
            jumped = true;
            ++next_jump;
        }
        if (jumped) {
            flush(start, i);
            start = i;
        }
    }
    flush(start, n);
    return out;
}

ProfileSample profile_from_field(const SolutionField& field, const ConvexFunction& H) {
    ProfileSample out;
    out.x_grid = field.x_grid;
    out.rho = field.rho;
    for (std::size_t i = 0; i + 1 < field.rho.size(); ++i) {
        if (field.y_index[i + 1] == field.y_index[i]) continue;
        const double x = field.x_grid.x(i + 1);
        const double before = H.conjugate_derivative((field.y[i] - x) / field.t);
        out.jumps.push_back({x, before, field.rho[i + 1]});
    }
    return out;
}

nlohmann::json CompareReport::to_json() const {
    return {{"n_paths", n_paths},
            {"marginal_samples", marginal_samples},
            {"ks_marginal", ks_marginal},
            {"direct_jumps", direct_jumps},
            {"generator_jumps", generator_jumps},
            {"ks_jump_size", ks_jump_size},
            {"direct_rate", direct_rate},
            {"direct_table_rate", direct_table_rate},
            {"generator_rate", generator_rate},
            {"rate_rel_diff", rate_rel_diff},
            {"pieces", pieces},
            {"max_slope_rel_error", max_slope_rel_error},
            {"out_of_table", out_of_table}};
}

DirectEnsemble direct_profiles(const ConvexFunction& H, double t, const CompareParams& p) {
    const ConvexFunction phi = hopf_lax_kernel(H, t);
    const double pad = std::ceil(padding_radius(phi, p.sigma) / p.step) * p.step;
    const GridSpec u_grid = GridSpec::with_step(-pad, p.length + pad, p.step);
    const GridSpec x_grid = GridSpec::with_step(0.0, p.length, p.step);
    DirectEnsemble out;
    out.profiles.resize(p.n_paths);
    out.rho_at_origin.resize(p.n_paths);
    for_each_index(p.n_paths, p.exec, [&](std::size_t i) {
        const GridPath U0 = sample_two_sided_bm(u_grid, p.sigma, p.seed, make_stream(StreamFamily::TwoSidedBm, i));
        const SolutionField field = solve_field(U0, H, t, x_grid);
        out.profiles[i] = profile_from_field(field, H);
        out.rho_at_origin[i] = field.rho[0];
    });
    return out;
}

CompareReport compare_with_direct(const ConvexFunction& H, double t, const KernelTable& table,
                                  const CompareParams& p, std::vector<ProfileSample>* generated,
                                  const DirectEnsemble* direct_in) {
    DirectEnsemble own;
    if (!direct_in) own = direct_profiles(H, t, p);
    const DirectEnsemble& direct = direct_in ? *direct_in : own;
    const std::size_t n = direct.profiles.size();

    ProfileParams pp;
    pp.x0 = 0.0;
    pp.x1 = p.length;
    pp.record_step = p.step;
    std::vector<ProfileSample> gen(n);
    for_each_index(n, p.exec, [&](std::size_t i) {
        Rng pick(p.seed, make_stream(StreamFamily::Bootstrap, i));
        const auto idx = std::min(static_cast<std::size_t>(pick.uniform() * static_cast<double>(n)), n - 1);
        Rng rng(p.seed, make_stream(StreamFamily::Generator, i));
        gen[i] = simulate_profile(H, t, table, direct.rho_at_origin[idx], pp, rng);
    });

    CompareReport r;
    r.n_paths = n;
    const auto n_marks = static_cast<std::size_t>(std::floor(p.length + 1e-9));
    std::vector<double> m_direct, m_gen, s_direct, s_gen;
    double table_rate = 0.0;
    std::size_t rate_points = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = direct.profiles[i];
        const auto& g = gen[i];
        for (std::size_t m = 1; m <= n_marks; ++m) {
            m_direct.push_back(d.rho[d.x_grid.nearest(static_cast<double>(m))]);
            m_gen.push_back(g.rho[g.x_grid.nearest(static_cast<double>(m))]);
        }
        for (const auto& j : d.jumps)
            if (j.rho_after - j.rho_before > table.delta()) s_direct.push_back(j.rho_after - j.rho_before);
        for (const auto& j : g.jumps) s_gen.push_back(j.rho_after - j.rho_before);
        for (std::size_t k = 0; k + 1 < d.rho.size(); ++k) {
            const double rho = d.rho[k];
            if (!table.covers(rho)) {
                ++r.out_of_table;
                continue;
            }
            table_rate += table.rate(rho);
            ++rate_points;
        }
        for (const auto* prof : {&d, &g})
            for (const auto& piece : piece_slopes(*prof, H, t)) {
                r.max_slope_rel_error = std::max(r.max_slope_rel_error, std::abs(piece.slope / piece.expected - 1.0));
                ++r.pieces;
            }
    }
    r.marginal_samples = m_direct.size();
    r.ks_marginal = ks_two_sample(m_direct, m_gen);
    r.direct_jumps = s_direct.size();
    r.generator_jumps = s_gen.size();
    r.ks_jump_size = ks_two_sample(s_direct, s_gen);
    const double total_length = static_cast<double>(n) * p.length;
    r.direct_rate = static_cast<double>(s_direct.size()) / total_length;
    r.generator_rate = static_cast<double>(s_gen.size()) / total_length;
    r.direct_table_rate = rate_points ? table_rate / static_cast<double>(rate_points) : 0.0;
    r.rate_rel_diff = std::abs(r.direct_rate / r.direct_table_rate - 1.0);
    if (generated) *generated = std::move(gen);
    return r;
}

}  // namespace conslaw
