#include "conslaw/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"

namespace conslaw {

namespace {

void check_truncation(const GridPath& U0, std::size_t index, double x) {
    const double margin = 0.01 * static_cast<double>(U0.grid.n_steps);
    const double pos = static_cast<double>(index);
    if (pos < margin || pos > static_cast<double>(U0.grid.n_steps) - margin)
        throw TruncationError(x, "maximiser in the outer 1% of the potential grid at x = " + format_number(x));
}

struct Scan {
    double best;
    std::size_t index;
};

// Rightmost index whose objective is within tol of the max over [lo, hi].
Scan scan_range(const GridPath& U0, const ConvexFunction& phi, double x, std::size_t lo, std::size_t hi, double tol) {
    const double y0 = U0.grid.left, h = U0.grid.step();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = lo; j <= hi; ++j) {
        const double v = U0.values[j] - phi.value(y0 + h * static_cast<double>(j) - x);
        if (v > best) best = v;
    }
    std::size_t idx = lo;
    for (std::size_t j = hi + 1; j-- > lo;) {
        const double v = U0.values[j] - phi.value(y0 + h * static_cast<double>(j) - x);
        if (v >= best - tol) {
            idx = j;
            break;
        }
    }
    return {best, idx};
}

// Objective-range bound used as the tie scale by the field solvers.
double tie_scale(double u_range, const GridSpec& g, const ConvexFunction& phi, double x) {
    const double ends = std::max(phi.value(g.left - x), phi.value(g.right - x));
    return u_range + ends - std::min(phi.value(0.0), ends);
}

double value_range(const GridPath& U0) {
    const auto [mn, mx] = std::minmax_element(U0.values.begin(), U0.values.end());
    return *mx - *mn;
}

void solve_range(const GridPath& U0, const ConvexFunction& phi, const GridSpec& xg, double tie_rel, double u_range,
                 std::size_t xlo,
                 std::size_t xhi, std::size_t ylo, std::size_t yhi, std::vector<HopfLaxResult>& out) {
    while (xlo <= xhi) {
        const std::size_t mid = xlo + (xhi - xlo) / 2;
        const double x = xg.x(mid);
        const Scan s = scan_range(U0, phi, x, ylo, yhi, tie_rel * tie_scale(u_range, U0.grid, phi, x));
        out[mid] = {s.best, U0.grid.x(s.index), s.index};
        if (mid > xlo) solve_range(U0, phi, xg, tie_rel, u_range, xlo, mid - 1, ylo, s.index, out);
        xlo = mid + 1;
        ylo = s.index;
    }
}

}  // namespace

HopfLaxResult hopf_lax(const GridPath& U0, const ConvexFunction& phi, double x, double tie_rel) {
    const std::size_t n = U0.grid.n_steps;
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= n; ++j) {
        const double v = U0.values[j] - phi.value(U0.grid.x(j) - x);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    const Scan s = scan_range(U0, phi, x, 0, n, tie_rel * (mx - mn));
    check_truncation(U0, s.index, x);
    return {s.best, U0.grid.x(s.index), s.index};
}

std::vector<HopfLaxResult> rightmost_argmax_field(const GridPath& U0, const ConvexFunction& phi,
                                                  const GridSpec& x_grid, double tie_rel) {
    std::vector<HopfLaxResult> out(x_grid.size());
    solve_range(U0, phi, x_grid, tie_rel, value_range(U0), 0, x_grid.n_steps, 0, U0.grid.n_steps, out);
    for (std::size_t i = 0; i < out.size(); ++i) check_truncation(U0, out[i].index, x_grid.x(i));
    return out;
}

std::vector<HopfLaxResult> rightmost_argmax_field_reference(const GridPath& U0, const ConvexFunction& phi,
                                                            const GridSpec& x_grid, double tie_rel) {
    std::vector<HopfLaxResult> out(x_grid.size());
    const double u_range = value_range(U0);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid.x(i);
        const Scan s = scan_range(U0, phi, x, 0, U0.grid.n_steps, tie_rel * tie_scale(u_range, U0.grid, phi, x));
        check_truncation(U0, s.index, x);
        out[i] = {s.best, U0.grid.x(s.index), s.index};
    }
    return out;
}

SolutionField solve_field(const GridPath& U0, const ConvexFunction& H, double t, const GridSpec& x_grid,
                          double tie_rel) {
    if (!(t > 0.0)) throw DomainError("solve_field needs t > 0");
    const ConvexFunction phi = hopf_lax_kernel(H, t);
    const auto res = rightmost_argmax_field(U0, phi, x_grid, tie_rel);
    SolutionField f;
    f.x_grid = x_grid;
    f.t = t;
    f.u.resize(res.size());
    f.y.resize(res.size());
    f.rho.resize(res.size());
    f.y_index.resize(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) {
        f.u[i] = res[i].u;
        f.y[i] = res[i].y;
        f.y_index[i] = res[i].index;
        f.rho[i] = H.conjugate_derivative((res[i].y - x_grid.x(i)) / t);
        if (i > 0 && f.y_index[i] < f.y_index[i - 1])
            throw Error("backward Lagrangian lost monotonicity at x = " + format_number(x_grid.x(i)));
    }
    return f;
}

void SolutionField::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"x", "u", "y", "rho"});
    for (std::size_t i = 0; i < u.size(); ++i) csv.row({x_grid.x(i), u[i], y[i], rho[i]});
}

std::size_t ShockReport::count_in(double a, double b) const {
    return static_cast<std::size_t>(
        std::count_if(shocks.begin(), shocks.end(), [=](const Shock& s) { return s.x >= a && s.x <= b; }));
}

void ShockReport::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"x", "rho_left", "rho_right", "gap"});
    for (const Shock& s : shocks) csv.row({s.x, s.rho_left, s.rho_right, s.gap});
}

ShockReport shock_census(const SolutionField& field, double min_gap) {
    const double h = field.x_grid.step();
    if (min_gap < h * (1.0 - 1e-12)) throw DomainError("min_gap must be at least the x-grid step");
    ShockReport r;
    r.resolution = h;
    r.min_gap = min_gap;
    for (std::size_t i = 0; i + 1 < field.y.size(); ++i) {
        const double gap = field.y[i + 1] - field.y[i];
        if (gap > min_gap) r.shocks.push_back({field.x_grid.x(i + 1), field.rho[i], field.rho[i + 1], gap});
    }
    return r;
}

std::vector<double> psi_process(const GridPath& U0, const ConvexFunction& phi, const GridSpec& x_grid) {
    const auto res = rightmost_argmax_field(U0, phi, x_grid);
    std::vector<double> y(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) y[i] = res[i].y;
    return y;
}

double padding_radius(const ConvexFunction& phi, double sigma) {
    const double base = std::max(0.0, phi.value(0.0));
    auto ok = [&](double r) {
        return std::min(phi.value(r), phi.value(-r)) - base >= 6.0 * sigma * std::sqrt(r) + 1.0;
    };
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw DomainError("no finite padding radius for this phi");
    }
    double lo = hi / 2.0;
    if (hi == 1.0) lo = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace conslaw
