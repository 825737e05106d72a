#include "conslaw/excursion.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"
#include "conslaw/paths.hpp"
#include "conslaw/quadrature.hpp"
#include "conslaw/stats.hpp"

namespace conslaw {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// Node data prepared once per call of one_minus_p_sums.
struct PreparedNode {
    double log_girsanov;
    double weight;
    std::vector<double> coeffs;  // polynomial route: scaled moment coefficients
    std::vector<double> nodal;   // path route: trapezoid weight * w * (b-a)^{3/2} per grid node
};

bool polynomial_route(const ExcursionWeight& w) {
    const auto* p = std::get_if<Polynomial>(&w);
    return p && p->degree() <= ExcursionEnsemble::kMomentDegree;
}

double weight_at(const ExcursionWeight& w, double u) {
    if (const auto* p = std::get_if<Polynomial>(&w)) return (*p)(u);
    return std::get<std::function<double(double)>>(w)(u);
}

PreparedNode prepare(const ExcursionEnsemble& ens, const ExcursionWeight& w, const LaplaceNode& n) {
    PreparedNode out{n.log_girsanov, n.weight, {}, {}};
    const double len = n.b - n.a;
    const double scale = len * std::sqrt(len);
    if (polynomial_route(w)) {
        out.coeffs = std::get<Polynomial>(w).rescaled(n.a, len).coeffs;
        for (double& c : out.coeffs) c *= scale;
    } else {
        if (!ens.has_paths()) throw DomainError("non-polynomial excursion weight needs an ensemble with stored paths");
        const std::size_t m = ens.n_steps();
        out.nodal.resize(m + 1);
        const double h = 1.0 / static_cast<double>(m);
        for (std::size_t j = 0; j <= m; ++j) {
            const double s = static_cast<double>(j) * h;
            const double tw = (j == 0 || j == m) ? 0.5 * h : h;
            out.nodal[j] = tw * scale * weight_at(w, n.a + len * s);
        }
    }
    return out;
}

double node_functional(const ExcursionEnsemble& ens, const PreparedNode& node, std::size_t i) {
    double acc = 0.0;
    if (!node.coeffs.empty()) {
        const auto m = ens.moments(i);
        for (std::size_t k = 0; k < node.coeffs.size(); ++k) acc += node.coeffs[k] * m[k];
    } else {
        const auto p = ens.path(i);
        for (std::size_t j = 0; j < p.size(); ++j) acc += node.nodal[j] * static_cast<double>(p[j]);
    }
    return acc;
}

// Smallest u with girsanov_exponent(t, t+u) >= cut.
double girsanov_cutoff(const std::function<double(double)>& exponent, double cut) {
    double hi = 1.0;
    while (exponent(hi) < cut) {
        hi *= 2.0;
        if (hi > 1e8) throw ConvergenceError("Girsanov factor does not decay; phi' too flat");
    }
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (exponent(mid) < cut ? lo : hi) = mid;
    }
    return hi;
}

// Integral of the deterministic part 2(1-G)/(sqrt(2 pi) v^2) on [0,V]; used as a quadrature error proxy.
double deterministic_part(const std::function<double(double)>& log_g_of_v, double V, int panels, int order) {
    double acc = 0.0;
    for (const auto& q : composite_gauss(0.0, V, panels, order))
        acc += q.w * 2.0 * kInvSqrt2Pi * -std::expm1(-log_g_of_v(q.x)) / (q.x * q.x);
    return acc;
}

FPhiEstimate finish(const ExcursionEnsemble& ens, std::vector<double>& per_sample, double offset,
                    const QuadParams& quad, double quad_error, double u_max, double scale) {
    for (double& v : per_sample) v += offset;
    const auto m = ensemble_mean(ens, per_sample, quad.control_variates);
    FPhiEstimate out{m.mean, m.std_error, quad_error, u_max};
    if (quad_error > quad.rel_tol * (scale + std::abs(m.mean)))
        throw ConvergenceError("quadrature error estimate exceeds tolerance");
    if (m.std_error > quad.max_rel_se * std::abs(m.mean))
        throw ConvergenceError("Monte Carlo error exceeds tolerance");
    return out;
}

// Solves the small symmetric positive system a x = b in place (Cholesky); false if singular.
bool solve_spd(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 1e-14 * std::abs(a[j * n + j]) && d > 0.0)) return false;
        a[j * n + j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / a[j * n + j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
        b[i] /= a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k * n + i] * b[k];
        b[i] /= a[i * n + i];
    }
    return true;
}

}  // namespace

ExcursionEnsemble::ExcursionEnsemble(std::size_t n_samples, std::size_t n_steps, std::uint64_t seed, Exec exec,
                                     bool keep_paths)
    : n_samples_(n_samples), n_steps_(n_steps), exec_(exec), moments_(n_samples * (kMomentDegree + 1), 0.0) {
    if (n_samples == 0 || n_steps < 2) throw DomainError("excursion ensemble needs samples and >= 2 steps");
    if (keep_paths) paths_.resize(n_samples * (n_steps + 1));
    const double h = 1.0 / static_cast<double>(n_steps);
    for_each_index(n_samples, exec, [&](std::size_t i) {
        Rng rng(seed, make_stream(StreamFamily::Excursion, i));
        const GridPath e = sample_excursion(0.0, 1.0, n_steps, rng);
        double* m = moments_.data() + i * (kMomentDegree + 1);
        for (std::size_t j = 1; j < n_steps; ++j) {
            const double s = static_cast<double>(j) * h;
            double term = h * e.values[j];
            for (std::size_t k = 0; k <= kMomentDegree; ++k) {
                m[k] += term;
                term *= s;
            }
        }
        if (keep_paths)
            for (std::size_t j = 0; j <= n_steps; ++j) paths_[i * (n_steps + 1) + j] = static_cast<float>(e.values[j]);
    });
}

double ExcursionEnsemble::moment_mean(std::size_t k) {
    // E e(s) = 2 sqrt(2 s (1-s) / pi).
    return 2.0 * std::sqrt(2.0 / std::numbers::pi) * std::beta(static_cast<double>(k) + 1.5, 1.5);
}

ExcursionFunctionalEstimate ensemble_mean(const ExcursionEnsemble& ens, std::span<const double> values,
                                          bool control_variates) {
    const MeanEstimate plain = mean_and_error(values);
    if (!control_variates || values.size() < 50) return {plain.mean, plain.std_error, plain.n};
    // Controls: first three moments and the squared area (E A^2 = 5/12).
    constexpr std::size_t q = 4;
    const std::size_t n = values.size();
    auto control = [&](std::size_t i, std::size_t c) {
        const auto m = ens.moments(i);
        return c < 3 ? m[c] - ExcursionEnsemble::moment_mean(c) : m[0] * m[0] - 5.0 / 12.0;
    };
    double xbar[q] = {};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < q; ++c) xbar[c] += control(i, c);
    for (double& v : xbar) v /= static_cast<double>(n);
    std::vector<double> sxx(q * q, 0.0), sxy(q, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double x[q];
        for (std::size_t c = 0; c < q; ++c) x[c] = control(i, c) - xbar[c];
        const double dy = values[i] - plain.mean;
        for (std::size_t a = 0; a < q; ++a) {
            sxy[a] += x[a] * dy;
            for (std::size_t b = 0; b < q; ++b) sxx[a * q + b] += x[a] * x[b];
        }
    }
    std::vector<double> beta = sxy;
    if (!solve_spd(sxx, beta, q)) return {plain.mean, plain.std_error, plain.n};
    double mean = plain.mean;
    for (std::size_t c = 0; c < q; ++c) mean -= beta[c] * xbar[c];
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = values[i] - plain.mean;
        for (std::size_t c = 0; c < q; ++c) r -= beta[c] * (control(i, c) - xbar[c]);
        ss += r * r;
    }
    const double dn = static_cast<double>(n);
    return {mean, std::sqrt(ss / (dn - 1.0 - q) / dn), n};
}

void ExcursionEnsemble::functionals(double a, double b, const ExcursionWeight& w, std::span<double> out) const {
    const PreparedNode node = prepare(*this, w, {0.0, a, b, 1.0});
    for_each_index(n_samples_, exec_, [&](std::size_t i) { out[i] = node_functional(*this, node, i); });
}

std::vector<double> one_minus_p_sums(const ExcursionEnsemble& ens, const ExcursionWeight& w,
                                     std::span<const LaplaceNode> nodes) {
    std::vector<PreparedNode> prepared;
    prepared.reserve(nodes.size());
    for (const auto& n : nodes) prepared.push_back(prepare(ens, w, n));
    std::vector<double> sums(ens.size(), 0.0);
    for_each_index(ens.size(), ens.exec(), [&](std::size_t i) {
        double acc = 0.0;
        for (const auto& node : prepared)
            acc += node.weight * -std::expm1(-node.log_girsanov - node_functional(ens, node, i));
        sums[i] = acc;
    });
    return sums;
}

ExcursionFunctionalEstimate excursion_laplace(const ExcursionEnsemble& ens, const ExcursionWeight& w, double y,
                                              double z) {
    if (!(y < z)) throw DomainError("excursion interval needs y < z");
    std::vector<double> vals(ens.size());
    ens.functionals(y, z, w, vals);
    for (double& v : vals) v = std::exp(-v);
    const MeanEstimate m = mean_and_error(vals);
    return {m.mean, m.std_error, m.n};
}

ExcursionFunctionalEstimate excursion_laplace(const ExcursionWeight& w, double y, double z, std::size_t n_samples,
                                              std::size_t n_steps, std::uint64_t seed) {
    const ExcursionEnsemble ens(n_samples, n_steps, seed, Exec::Parallel, !polynomial_route(w));
    return excursion_laplace(ens, w, y, z);
}

ExcursionWeight curvature_weight(const ConvexFunction& phi) {
    if (auto p = phi.second_derivative_polynomial()) return *p;
    return std::function<double(double)>([phi](double u) { return phi.second_derivative(u); });
}

double girsanov_exponent(const ConvexFunction& phi, double a, double b) {
    if (auto d = phi.derivative_polynomial()) {
        const Polynomial anti = ((*d) * (*d)).antiderivative();
        return 0.5 * (anti(b) - anti(a));
    }
    return 0.5 * integrate_adaptive([&phi](double z) {
        const double d = phi.derivative(z);
        return d * d;
    }, a, b, 1e-11);
}

ExcursionFunctionalEstimate p_phi(const ConvexFunction& phi, double t, double u, const ExcursionEnsemble& ens) {
    if (!(u > 0.0)) throw DomainError("p_phi needs u > 0");
    const double g = std::exp(-girsanov_exponent(phi, t, t + u));
    const auto e = excursion_laplace(ens, curvature_weight(phi), t, t + u);
    return {g * e.mean, g * e.std_error, e.n_samples};
}

FPhiEstimate f_phi(const ConvexFunction& phi, double t, const ExcursionEnsemble& ens, const QuadParams& quad) {
    auto exponent = [&](double u) { return girsanov_exponent(phi, t, t + u); };
    const double u_max = girsanov_cutoff(exponent, quad.log_cut);
    const double V = std::sqrt(u_max);
    const auto q = composite_gauss(0.0, V, quad.panels, quad.order);
    std::vector<LaplaceNode> nodes;
    nodes.reserve(q.size());
    double log_g = 0.0, prev = t;
    for (const auto& node : q) {
        const double b = t + node.x * node.x;
        log_g += girsanov_exponent(phi, prev, b);
        prev = b;
        nodes.push_back({log_g, t, b, node.w * 2.0 * kInvSqrt2Pi / (node.x * node.x)});
    }
    std::vector<double> per_sample = one_minus_p_sums(ens, curvature_weight(phi), nodes);

    auto log_g_of_v = [&](double v) { return exponent(v * v); };
    const double quad_error = std::abs(deterministic_part(log_g_of_v, V, quad.panels, quad.order) -
                                       deterministic_part(log_g_of_v, V, 2 * quad.panels, quad.order));
    const double offset = phi.derivative(t) + 2.0 * kInvSqrt2Pi / std::sqrt(u_max);
    return finish(ens, per_sample, offset, quad, quad_error, u_max, std::abs(phi.derivative(t)));
}

std::vector<DensityPoint> chernoff_density(const ConvexFunction& phi, std::span<const double> t_grid,
                                           const ExcursionEnsemble& ens, const QuadParams& quad) {
    const ConvexFunction reflected = phi.reflected();
    const bool even = phi.is_even();
    std::map<double, FPhiEstimate> cache;
    auto f_at = [&](double t) {
        auto it = cache.find(t);
        if (it != cache.end()) return it->second;
        return cache.emplace(t, f_phi(phi, t, ens, quad)).first->second;
    };
    std::vector<DensityPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        const FPhiEstimate f = f_at(t);
        const FPhiEstimate r = even ? f_at(-t) : f_phi(reflected, -t, ens, quad);
        const double d = 0.5 * f.value * r.value;
        const double se = 0.5 * std::hypot(f.value * r.std_error, r.value * f.std_error);
        out.push_back({t, d, se});
    }
    return out;
}

void write_density_csv(const std::filesystem::path& path, std::span<const DensityPoint> pts) {
    CsvWriter csv(path, {"t", "density", "std_error"});
    for (const auto& p : pts) csv.row({p.t, p.density, p.std_error});
}

ExcursionFunctionalEstimate kernel_K(const ConvexFunction& phi, double y, double z, const ExcursionEnsemble& ens) {
    if (!(y < z)) throw DomainError("kernel_K needs y < z");
    const double len = z - y;
    const double pre = (phi.derivative(z) - phi.derivative(y)) * kInvSqrt2Pi / (len * std::sqrt(len));
    const double g = std::exp(-girsanov_exponent(phi, y, z));
    const auto e = excursion_laplace(ens, curvature_weight(phi), y, z);
    return {pre * g * e.mean, pre * g * e.std_error, e.n_samples};
}

namespace {

// Excursion weight of the rho-variable functional int e(tH'(r)) dr, written in the excursion's own variable w.
ExcursionWeight rho_route_weight(const ConvexFunction& H, double t) {
    if (H.family() == Family::Quadratic) return Polynomial{{1.0 / (t * H.second_derivative(0.0))}};
    return std::function<double(double)>(
        [H, t](double w) { return 1.0 / (t * H.second_derivative(H.conjugate_derivative(w / t))); });
}

// (t/2) int_{r0}^{r1} r^2 H''(r) dr; exact when H'' is a polynomial.
double rho_girsanov(const ConvexFunction& H, double t, double r0, double r1) {
    if (auto h2 = H.second_derivative_polynomial()) {
        const Polynomial anti = (Polynomial{{0.0, 0.0, 1.0}} * (*h2)).antiderivative();
        return 0.5 * t * (anti(r1) - anti(r0));
    }
    return 0.5 * t * integrate_adaptive([&H](double r) { return r * r * H.second_derivative(r); }, r0, r1, 1e-11);
}

void require_curvature(const ConvexFunction& H, double r) {
    if (!(H.second_derivative(r) > 0.0)) throw DomainError("H'' vanishes on the kernel integration range");
}

}  // namespace

FPhiEstimate kernel_bracket(const ConvexFunction& H, double t, double r, const ExcursionEnsemble& ens,
                            const QuadParams& quad) {
    require_curvature(H, r);
    const double h1 = H.derivative(r);
    const double a = t * h1;
    auto rho_of_v = [&](double v) { return H.conjugate_derivative(h1 + v * v / t); };
    auto exponent = [&](double u) { return rho_girsanov(H, t, r, H.conjugate_derivative(h1 + u / t)); };
    const double u_max = girsanov_cutoff(exponent, quad.log_cut);
    const double V = std::sqrt(u_max);
    const auto q = composite_gauss(0.0, V, quad.panels, quad.order);
    std::vector<LaplaceNode> nodes;
    nodes.reserve(q.size());
    double log_g = 0.0, prev = r;
    for (const auto& node : q) {
        const double rho = rho_of_v(node.x);
        require_curvature(H, rho);
        log_g += rho_girsanov(H, t, prev, rho);
        prev = rho;
        nodes.push_back({log_g, a, a + node.x * node.x, node.w * 2.0 * kInvSqrt2Pi / (node.x * node.x)});
    }
    std::vector<double> per_sample = one_minus_p_sums(ens, rho_route_weight(H, t), nodes);
    auto log_g_of_v = [&](double v) { return rho_girsanov(H, t, r, rho_of_v(v)); };
    const double quad_error = std::abs(deterministic_part(log_g_of_v, V, quad.panels, quad.order) -
                                       deterministic_part(log_g_of_v, V, 2 * quad.panels, quad.order));
    const double offset = r + 2.0 * kInvSqrt2Pi / std::sqrt(u_max);
    return finish(ens, per_sample, offset, quad, quad_error, u_max, std::abs(r));
}

ExcursionFunctionalEstimate kernel_excursion_factor(const ConvexFunction& H, double t, double rho_minus,
                                                    double rho_plus, const ExcursionEnsemble& ens) {
    if (!(rho_minus < rho_plus)) throw DomainError("jump kernel needs rho- < rho+");
    if (!(t > 0.0)) throw DomainError("jump kernel needs t > 0");
    require_curvature(H, rho_minus);
    require_curvature(H, rho_plus);
    const double y = t * H.derivative(rho_minus), z = t * H.derivative(rho_plus);
    const auto e = excursion_laplace(ens, rho_route_weight(H, t), y, z);
    const double dh = H.derivative(rho_plus) - H.derivative(rho_minus);
    const double pre = (rho_plus - rho_minus) * H.second_derivative(rho_plus) *
                       std::exp(-rho_girsanov(H, t, rho_minus, rho_plus)) /
                       std::sqrt(2.0 * std::numbers::pi * t * dh * dh * dh);
    return {pre * e.mean, pre * e.std_error, e.n_samples};
}

KernelValue jump_kernel_n(const ConvexFunction& H, double t, double rho_minus, double rho_plus,
                          const ExcursionEnsemble& ens, const QuadParams& quad) {
    const auto k = kernel_excursion_factor(H, t, rho_minus, rho_plus, ens);
    const FPhiEstimate top = kernel_bracket(H, t, rho_plus, ens, quad);
    const FPhiEstimate bottom = kernel_bracket(H, t, rho_minus, ens, quad);
    KernelValue out;
    out.value = k.mean * top.value / bottom.value;
    out.std_error = std::abs(out.value) * std::sqrt(std::pow(k.std_error / k.mean, 2) +
                                                    std::pow(top.std_error / top.value, 2) +
                                                    std::pow(bottom.std_error / bottom.value, 2));
    out.ill_conditioned = std::abs(bottom.value) < 1e-6;
    return out;
}

KernelValue jump_kernel_n_phi_route(const ConvexFunction& H, double t, double rho_minus, double rho_plus,
                                    const ExcursionEnsemble& ens, const QuadParams& quad) {
    if (!(rho_minus < rho_plus)) throw DomainError("jump kernel needs rho- < rho+");
    const ConvexFunction phi = hopf_lax_kernel(H, t);
    const double y = t * H.derivative(rho_minus), z = t * H.derivative(rho_plus);
    const auto k = kernel_K(phi, y, z, ens);
    const FPhiEstimate fz = f_phi(phi, z, ens, quad);
    const FPhiEstimate fy = f_phi(phi, y, ens, quad);
    KernelValue out;
    out.value = t * H.second_derivative(rho_plus) * fz.value / fy.value * k.mean;
    out.std_error = std::abs(out.value) * std::sqrt(std::pow(k.std_error / k.mean, 2) +
                                                    std::pow(fz.std_error / fz.value, 2) +
                                                    std::pow(fy.std_error / fy.value, 2));
    out.ill_conditioned = std::abs(fy.value) < 1e-6;
    return out;
}

}  // namespace conslaw
