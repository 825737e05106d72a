#include "conslaw/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/paths.hpp"
#include "conslaw/quadrature.hpp"
#include "conslaw/stats.hpp"

namespace conslaw {

double images_kernel(double s, double x, double t, double y) {
    const double tau = t - s;
    const double d = x - y;
    // exp(-(x+y)^2/2tau) = exp(-(x-y)^2/2tau) exp(-2xy/tau); expm1 keeps the difference accurate near 0.
    return std::exp(-d * d / (2.0 * tau)) * -std::expm1(-2.0 * x * y / tau) / std::sqrt(2.0 * std::numbers::pi * tau);
}

namespace {

void require_killed_args(double s, double x, double t) {
    if (!(t > s)) throw DomainError("need t > s");
    if (!(x < 0.0)) throw DomainError("starting point must be negative");
}

// E[exp(-int_s^t phi''(u) B(u) du)] over Bessel-3 bridges a -> b (trapezoid on the bridge grid).
ExcursionFunctionalEstimate bridge_laplace(const ConvexFunction& phi, double s, double t, double a, double b,
                                           const McParams& mc) {
    const std::size_t m = mc.n_steps;
    const double h = (t - s) / static_cast<double>(m);
    std::vector<double> w(m + 1);
    for (std::size_t j = 0; j <= m; ++j)
        w[j] = (j == 0 || j == m ? 0.5 * h : h) * phi.second_derivative(s + h * static_cast<double>(j));
    std::vector<double> vals(mc.n_samples);
    for_each_index(mc.n_samples, mc.exec, [&](std::size_t i) {
        Rng rng(mc.seed, make_stream(StreamFamily::BesselBridge, i));
        const GridPath br = sample_bessel3_bridge(a, b, s, t, m, rng);
        double acc = 0.0;
        for (std::size_t j = 0; j <= m; ++j) acc += w[j] * br.values[j];
        vals[i] = std::exp(-acc);
    });
    const MeanEstimate e = mean_and_error(vals);
    return {e.mean, e.std_error, e.n};
}

}  // namespace

ExcursionFunctionalEstimate f_mc(const ConvexFunction& phi, double s, double x, double t, double y,
                                 const McParams& mc) {
    require_killed_args(s, x, t);
    if (!(y < 0.0)) throw DomainError("f_mc needs y < 0");
    const double pre = images_kernel(s, x, t, y) *
                       std::exp(-phi.derivative(t) * y + phi.derivative(s) * x - girsanov_exponent(phi, s, t));
    const auto e = bridge_laplace(phi, s, t, -x, -y, mc);
    return {pre * e.mean, pre * e.std_error, e.n_samples};
}

ExcursionFunctionalEstimate hitting_density_Phi(const ConvexFunction& phi, double s, double x, double t,
                                                const McParams& mc) {
    require_killed_args(s, x, t);
    const double tau = t - s;
    const double pre = -x / std::sqrt(2.0 * std::numbers::pi * tau * tau * tau) * std::exp(-x * x / (2.0 * tau)) *
                       std::exp(phi.derivative(s) * x - girsanov_exponent(phi, s, t));
    const auto e = bridge_laplace(phi, s, t, -x, 0.0, mc);
    return {pre * e.mean, pre * e.std_error, e.n_samples};
}

double DensityGrid::at(std::size_t ti, double y) const {
    if (y >= 0.0 || y <= y_grid.left) return 0.0;
    const double pos = (y - y_grid.left) / y_grid.step();
    const auto i = std::min(static_cast<std::size_t>(pos), y_grid.n_steps - 1);
    const double w = pos - static_cast<double>(i);
    const double* row = values.data() + ti * y_grid.size();
    return (1.0 - w) * row[i] + w * row[i + 1];
}

void DensityGrid::write_csv(const std::filesystem::path& path, std::size_t every) const {
    CsvWriter csv(path, {"t", "y", "f"});
    every = std::max<std::size_t>(every, 1);
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        for (std::size_t i = 0; i < y_grid.size(); i += every)
            csv.row({t_grid[k], y_grid.x(i), values[k * y_grid.size() + i]});
}

double PdeResult::flux_at(double t) const {
    if (times.empty() || t < times.front()) return 0.0;
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end()) return flux.back();
    const auto i = static_cast<std::size_t>(it - times.begin());
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * flux[i - 1] + w * flux[i];
}

double PdeResult::absorbed_at_zero(double t) const {
    // Mass lost through 0 by time t: what is neither left on the grid nor gone through the far end.
    auto lost = [&](std::size_t i) { return 1.0 - initial_mass + zero_loss[i]; };
    if (t <= times.front()) return lost(0);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] >= t) {
            const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            return (1.0 - w) * lost(i - 1) + w * lost(i);
        }
    return lost(times.size() - 1);
}

double default_y_max(const ConvexFunction& phi, double s, double x, double t_max) {
    // Room for diffusion plus any upward transport (phi' < 0) before the process turns down.
    const double up = integrate_adaptive([&phi](double u) { return std::max(-phi.derivative(u), 0.0); }, s, t_max,
                                         1e-8);
    return 6.0 * std::sqrt(t_max - s) + std::abs(x) + up;
}

PdeResult f_pde(const ConvexFunction& phi, double s, double x, double t_max, std::span<const double> output_times,
                const PdeParams& p) {
    require_killed_args(s, x, s + p.eps0);
    if (!(t_max > s + p.eps0)) throw DomainError("PDE horizon must exceed the warm start");
    const double y_min_req = 6.0 * std::sqrt(t_max - s) + std::abs(x);
    const double Y = p.y_max > 0.0 ? p.y_max : default_y_max(phi, s, x, t_max);
    if (Y < y_min_req) throw DomainError("PDE domain narrower than 6 sqrt(t - s) + |x|");

    PdeResult res;
    double max_drift = 0.0;
    for (int k = 0; k <= 2000; ++k)
        max_drift = std::max(max_drift, std::abs(phi.derivative(s + (t_max - s) * k / 2000.0)));
    double dy = p.dy;
    res.max_peclet = max_drift * dy / 0.5;
    if (res.max_peclet > 2.0) {
        dy *= 0.5;
        res.refined = true;
        res.max_peclet = max_drift * dy / 0.5;
        if (res.max_peclet > 2.0) throw StabilityError("drift cell Peclet number above 2 after refinement");
    }
    const auto N = static_cast<std::size_t>(std::ceil(Y / dy));
    const GridSpec yg(-static_cast<double>(N) * dy, 0.0, N);
    res.grid.s = s;
    res.grid.x = x;
    res.grid.y_grid = yg;

    std::vector<double> f(N + 1, 0.0);
    double t = s + p.eps0;
    // Drift frozen at its value at s; the mismatch is O(eps0^{3/2}).
    const double drift0 = phi.derivative(s);
    for (std::size_t i = 1; i < N; ++i) {
        const double y = yg.x(i);
        f[i] = images_kernel(s, x, t, y) * std::exp(-drift0 * (y - x) - 0.5 * drift0 * drift0 * p.eps0);
    }
    auto mass = [&] {
        double m = 0.0;
        for (std::size_t i = 1; i < N; ++i) m += f[i];
        return m * dy;
    };
    auto zero_flux = [&] { return (4.0 * f[N - 1] - f[N - 2]) / (4.0 * dy); };
    auto far_flux = [&] { return (4.0 * f[1] - f[2]) / (4.0 * dy); };

    res.initial_mass = mass();
    res.times.push_back(t);
    res.flux.push_back(zero_flux());
    res.far_flux.push_back(far_flux());
    res.step_mass.push_back(res.initial_mass);
    res.far_loss.push_back(0.0);
    res.zero_loss.push_back(0.0);

    std::vector<double> outs(output_times.begin(), output_times.end());
    std::sort(outs.begin(), outs.end());
    std::size_t next_out = 0;
    auto record = [&] {
        res.grid.t_grid.push_back(t);
        res.grid.values.insert(res.grid.values.end(), f.begin(), f.end());
        res.grid.mass.push_back(mass());
    };
    while (next_out < outs.size() && outs[next_out] <= t) {
        record();
        ++next_out;
    }

    const std::size_t n_int = N - 1;
    std::vector<double> lo(n_int), di(n_int), up(n_int), rhs(n_int), cp(n_int), dp(n_int);
    const double D = 0.5 / (dy * dy);
    double dt = p.eps0 / 4.0;
    int step = 0;
    while (t < t_max - 1e-14) {
        double target = std::min(t + dt, t_max);
        if (next_out < outs.size() && outs[next_out] < target) target = outs[next_out];
        const double h = target - t;
        const double theta = step < p.rannacher ? 1.0 : 0.5;
        const double b0 = phi.derivative(t) / (2.0 * dy), b1 = phi.derivative(target) / (2.0 * dy);
        for (std::size_t k = 0; k < n_int; ++k) {
            const std::size_t i = k + 1;
            const double a_lo = D - b0, a_di = -2.0 * D, a_up = D + b0;
            rhs[k] = f[i] + (1.0 - theta) * h * (a_lo * f[i - 1] + a_di * f[i] + a_up * f[i + 1]);
            lo[k] = -theta * h * (D - b1);
            di[k] = 1.0 - theta * h * (-2.0 * D);
            up[k] = -theta * h * (D + b1);
        }
        // Summing the stencil over the interior telescopes to the two boundary
        // terms, so these losses balance the grid mass exactly.
        const double top_old = f[N - 1], bottom_old = f[1];
        // Thomas sweep
        cp[0] = up[0] / di[0];
        dp[0] = rhs[0] / di[0];
        for (std::size_t k = 1; k < n_int; ++k) {
            const double m = di[k] - lo[k] * cp[k - 1];
            cp[k] = up[k] / m;
            dp[k] = (rhs[k] - lo[k] * dp[k - 1]) / m;
        }
        f[n_int] = dp[n_int - 1];
        for (std::size_t k = n_int - 1; k-- > 0;) f[k + 1] = dp[k] - cp[k] * f[k + 2];
        t = target;
        ++step;
        dt = std::min(dt * p.growth, p.dt_max);

        const double m = mass();
        if (m > res.step_mass.back() + 1e-13) res.mass_monotone = false;
        for (std::size_t i = 1; i < N; ++i) res.min_value = std::min(res.min_value, f[i]);
        res.times.push_back(t);
        res.flux.push_back(zero_flux());
        res.far_flux.push_back(far_flux());
        res.zero_loss.push_back(res.zero_loss.back() + h * dy *
                                                           (theta * (D - b1) * f[N - 1] + (1.0 - theta) * (D - b0) * top_old));
        res.far_loss.push_back(res.far_loss.back() + h * dy *
                                                         (theta * (D + b1) * f[1] + (1.0 - theta) * (D + b0) * bottom_old));
        res.step_mass.push_back(m);
        while (next_out < outs.size() && outs[next_out] <= t + 1e-14) {
            record();
            ++next_out;
        }
    }
    return res;
}

double survival_J(const ConvexFunction& phi, double s, double x, const PdeParams& pde, double* t_plateau) {
    double T = 1.0;
    while (T <= 64.0) {
        const PdeResult r = f_pde(phi, s, x, s + T, {}, pde);
        if (r.flux.back() < 1e-6) {
            if (t_plateau) *t_plateau = s + T;
            return 1.0 - r.absorbed_at_zero(s + T);
        }
        T *= 2.0;
    }
    throw ConvergenceError("survival probability has not reached a plateau by s + 64");
}

SurvivalReport survival_J_and_j(const ConvexFunction& phi, double s, std::span<const double> probes,
                                const ExcursionEnsemble& ens, const PdeParams& pde, const QuadParams& quad) {
    SurvivalReport out;
    for (double x : probes) {
        double tp = 0.0;
        out.probes.push_back(x);
        out.J.push_back(survival_J(phi, s, x, pde, &tp));
        out.t_plateau.push_back(tp);
    }
    const FPhiEstimate f = f_phi(phi, s, ens, quad);
    out.f_value = f.value;
    out.f_std_error = f.std_error;
    return out;
}

double joint_max_argmax_density(double f_phi_at_t, double Phi_value) {
    const double v = f_phi_at_t * Phi_value;
    if (v < 0.0) throw Error("negative joint max/argmax density");
    return v;
}

ExcursionFunctionalEstimate joint_max_argmax_density(const ConvexFunction& phi, double s, double x, double t,
                                                     double z, const ExcursionEnsemble& ens, const McParams& mc,
                                                     const QuadParams& quad) {
    if (!(z > x)) throw DomainError("joint density needs z > x");
    const FPhiEstimate f = f_phi(phi, t, ens, quad);
    const auto hit = hitting_density_Phi(phi, s, x - z, t, mc);
    const double v = joint_max_argmax_density(f.value, hit.mean);
    return {v, std::hypot(f.value * hit.std_error, hit.mean * f.std_error), hit.n_samples};
}

JointMarginals joint_marginals(const ConvexFunction& phi, double s, double x, double T, double Z, std::size_t n_z,
                               const ExcursionEnsemble& ens, const PdeParams& pde, const QuadParams& quad) {
    if (n_z < 2) throw DomainError("joint marginals need at least two max levels");
    // f^phi on a uniform time grid, cubic in between.
    const double f_step = 0.025;
    const auto n_f = static_cast<std::size_t>(std::ceil(T / f_step)) + 1;
    std::vector<double> fv(n_f);
    for (std::size_t i = 0; i < n_f; ++i) fv[i] = f_phi(phi, s + f_step * static_cast<double>(i), ens, quad).value;
    boost::math::interpolators::cardinal_cubic_b_spline<double> f_of(fv.begin(), fv.end(), s, f_step);

    JointMarginals out;
    const std::size_t n_t = 1200;
    for (std::size_t j = 0; j <= n_t; ++j) out.t.push_back(s + T * static_cast<double>(j) / n_t);
    // Levels z = x + u^2 with u uniform: the hitting time of a level u^2 away
    // scales like u^4, so the point mass at s for z = x carries no weight.
    const double hu = std::sqrt(Z) / static_cast<double>(n_z);
    std::vector<double> wz(n_z + 1);
    for (std::size_t k = 0; k <= n_z; ++k) {
        const double u = hu * static_cast<double>(k);
        out.z.push_back(x + u * u);
        wz[k] = (k == n_z ? 0.5 : 1.0) * hu * 2.0 * u;
    }
    out.z_density.assign(n_z + 1, 0.0);
    out.t_cdf.assign(n_t + 1, 0.0);

    for (std::size_t k = 0; k <= n_z; ++k) {
        if (k == 0) {  // started at the level itself: the maximum is at s
            out.z_density[k] = f_of(s);
            continue;
        }
        const PdeResult r = f_pde(phi, s, x - out.z[k], s + T, {}, pde);
        // cumulative int_s^t f^phi Phi at the PDE times; mass hit before the warm start sits at s
        std::vector<double> cum(r.times.size());
        auto lost = [&r](std::size_t i) { return 1.0 - r.initial_mass + r.zero_loss[i]; };
        cum[0] = f_of(s) * lost(0);
        for (std::size_t i = 1; i < r.times.size(); ++i) {
            const double dA = lost(i) - lost(i - 1);
            cum[i] = cum[i - 1] + 0.5 * (f_of(r.times[i - 1]) + f_of(r.times[i])) * dA;
        }
        std::size_t i = 0;
        for (std::size_t j = 0; j <= n_t; ++j) {
            const double tj = out.t[j];
            double c;
            if (tj <= r.times.front()) {
                c = cum.front();
            } else {
                while (i + 1 < r.times.size() && r.times[i + 1] < tj) ++i;
                if (i + 1 >= r.times.size()) {
                    c = cum.back();
                } else {
                    const double w = (tj - r.times[i]) / (r.times[i + 1] - r.times[i]);
                    c = (1.0 - w) * cum[i] + w * cum[i + 1];
                }
            }
            out.t_cdf[j] += wz[k] * c;
        }
        out.z_density[k] = cum.back();
    }
    for (std::size_t k = 0; k <= n_z; ++k) out.mass += wz[k] * out.z_density[k];
    return out;
}

std::vector<MaxArgmaxSample> simulate_max_argmax(const ConvexFunction& phi, double s, double x, double T,
                                                 double step, std::size_t n_paths, std::uint64_t seed, Exec exec) {
    const auto n = static_cast<std::size_t>(std::llround(T / step));
    const double h = T / static_cast<double>(n), sh = std::sqrt(h);
    constexpr int refine_levels = 12;
    std::vector<double> drift(n);
    for (std::size_t k = 0; k < n; ++k)
        drift[k] = phi.value(s + h * static_cast<double>(k + 1)) - phi.value(s + h * static_cast<double>(k));
    std::vector<MaxArgmaxSample> out(n_paths);
    for_each_index(n_paths, exec, [&](std::size_t i) {
        Rng rng(seed, make_stream(StreamFamily::DirectArgmax, i));
        Rng extra(seed, make_stream(StreamFamily::Refinement, i));
        std::vector<double> path(n + 1);
        path[0] = x;
        double grid_max = x;
        for (std::size_t k = 0; k < n; ++k) {
            path[k + 1] = path[k] + sh * rng.normal() - drift[k];
            grid_max = std::max(grid_max, path[k + 1]);
        }
        // Cells whose endpoints come within 6 sqrt(width) of the running maximum
        // are halved with exact bridge midpoints until they are tiny; the
        // maximum inside the survivors is then drawn from the bridge law.
        struct Cell {
            double t0, a, t1, b;
        };
        std::vector<Cell> live, next;
        double best = grid_max;
        for (std::size_t k = 0; k < n; ++k)
            if (std::max(path[k], path[k + 1]) >= grid_max - 6.0 * sh)
                live.push_back({s + h * static_cast<double>(k), path[k], s + h * static_cast<double>(k + 1), path[k + 1]});
        double width = h;
        for (int level = 0; level < refine_levels; ++level) {
            width *= 0.5;
            const double cut = 6.0 * std::sqrt(width);
            next.clear();
            for (const Cell& c : live) {
                const double tm = 0.5 * (c.t0 + c.t1);
                const double bend = 0.5 * (phi.value(c.t0) + phi.value(c.t1)) - phi.value(tm);
                const double mid = 0.5 * (c.a + c.b) + bend + std::sqrt(0.5 * width) * extra.normal();
                best = std::max(best, mid);
                next.push_back({c.t0, c.a, tm, mid});
                next.push_back({tm, mid, c.t1, c.b});
            }
            live.clear();
            for (const Cell& c : next)
                if (std::max(c.a, c.b) >= best - cut) live.push_back(c);
        }
        double where = s;
        best = -std::numeric_limits<double>::infinity();
        for (const Cell& c : live) {
            const double m = 0.5 * (c.a + c.b + std::sqrt((c.a - c.b) * (c.a - c.b) - 2.0 * width * std::log(extra.uniform())));
            if (m >= best) {
                best = m;
                where = 0.5 * (c.t0 + c.t1);
            }
        }
        out[i] = {where, best};
    });
    return out;
}

}  // namespace conslaw
