#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "conslaw/hamiltonian.hpp"
#include "conslaw/parallel.hpp"
#include "conslaw/polynomial.hpp"
#include "conslaw/rng.hpp"

namespace conslaw {

struct McParams {
    std::size_t n_samples = 20000;
    std::size_t n_steps = 512;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct QuadParams {
    int panels = 16;
    int order = 8;
    double log_cut = 30.0;      // truncate where the Girsanov factor drops below e^{-log_cut}
    double rel_tol = 1e-6;      // quadrature tolerance relative to |phi'(t)| + |value|
    double max_rel_se = std::numeric_limits<double>::infinity();
    // Regress per-sample values on excursion moments with known means.
    bool control_variates = true;
};

struct ExcursionFunctionalEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

// Weight function of the excursion functional, in absolute coordinates.
using ExcursionWeight = std::variant<Polynomial, std::function<double(double)>>;

// A fixed set of standard excursions on [0,1], reused (by Brownian scaling)
// on every interval: int_a^b w(u) e(u) du = (b-a)^{3/2} int_0^1 w(a+(b-a)s) e_std(s) ds.
class ExcursionEnsemble {
public:
    static constexpr std::size_t kMomentDegree = 8;

    ExcursionEnsemble(std::size_t n_samples, std::size_t n_steps, std::uint64_t seed, Exec exec = Exec::Parallel,
                      bool keep_paths = false);
    explicit ExcursionEnsemble(const McParams& mc, bool keep_paths = false)
        : ExcursionEnsemble(mc.n_samples, mc.n_steps, mc.seed, mc.exec, keep_paths) {}

    std::size_t size() const { return n_samples_; }
    std::size_t n_steps() const { return n_steps_; }
    bool has_paths() const { return !paths_.empty(); }
    Exec exec() const { return exec_; }

    // Trapezoid moments int_0^1 s^k e_i(s) ds.
    std::span<const double> moments(std::size_t i) const {
        return {moments_.data() + i * (kMomentDegree + 1), kMomentDegree + 1};
    }
    std::span<const float> path(std::size_t i) const {
        return {paths_.data() + i * (n_steps_ + 1), n_steps_ + 1};
    }

    // Exact mean of int_0^1 s^k e(s) ds for the continuum excursion.
    static double moment_mean(std::size_t k);

    // Per-sample functional int_a^b w(u) e(u) du for the excursion placed on [a,b].
    void functionals(double a, double b, const ExcursionWeight& w, std::span<double> out) const;

private:
    std::size_t n_samples_;
    std::size_t n_steps_;
    Exec exec_;
    std::vector<double> moments_;
    std::vector<float> paths_;
};

// One term c * (1 - exp(-log_girsanov - int_a^b w e)) of an excursion integral.
struct LaplaceNode {
    double log_girsanov;
    double a;
    double b;
    double weight;
};

// Per-sample sums over nodes of node.weight * (1 - G_k exp(-I_ik)); computed
// with expm1 so small 1-p values keep full relative precision.
std::vector<double> one_minus_p_sums(const ExcursionEnsemble& ens, const ExcursionWeight& w,
                                     std::span<const LaplaceNode> nodes);

ExcursionFunctionalEstimate excursion_laplace(const ExcursionWeight& w, double y, double z, std::size_t n_samples,
                                              std::size_t n_steps, std::uint64_t seed);
ExcursionFunctionalEstimate excursion_laplace(const ExcursionEnsemble& ens, const ExcursionWeight& w, double y,
                                              double z);

// phi'' as an excursion weight: polynomial when possible.
ExcursionWeight curvature_weight(const ConvexFunction& phi);

// (1/2) int_a^b phi'(z)^2 dz; exact for polynomial phi', adaptive quadrature otherwise.
double girsanov_exponent(const ConvexFunction& phi, double a, double b);

// p(t,u) = exp(-(1/2) int_t^{t+u} phi'^2) E[exp(-int phi'' e)].
ExcursionFunctionalEstimate p_phi(const ConvexFunction& phi, double t, double u, const ExcursionEnsemble& ens);

// Mean of per-sample values, optionally with excursion-moment control variates.
ExcursionFunctionalEstimate ensemble_mean(const ExcursionEnsemble& ens, std::span<const double> values,
                                          bool control_variates);

struct FPhiEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double quad_error = 0.0;
    double u_max = 0.0;
};

// f(t) = phi'(t) + int_0^inf (1 - p(t,u)) / sqrt(2 pi u^3) du  (equals -j(t)).
FPhiEstimate f_phi(const ConvexFunction& phi, double t, const ExcursionEnsemble& ens, const QuadParams& quad = {});

struct DensityPoint {
    double t;
    double density;
    double std_error;
};

// (1/2) f^phi(t) f^{phi(-.)}(-t).
std::vector<DensityPoint> chernoff_density(const ConvexFunction& phi, std::span<const double> t_grid,
                                           const ExcursionEnsemble& ens, const QuadParams& quad = {});
void write_density_csv(const std::filesystem::path& path, std::span<const DensityPoint> pts);

ExcursionFunctionalEstimate kernel_K(const ConvexFunction& phi, double y, double z, const ExcursionEnsemble& ens);

struct KernelValue {
    double value = 0.0;
    double std_error = 0.0;
    bool ill_conditioned = false;  // denominator below 1e-6
};

// Every factor of the jump kernel except the ratio of bracket terms:
// (rho+ - rho-) H''(rho+) exp(-(t/2) int r^2 H'') E[exp(-int e(tH'(r)) dr)] / sqrt(2 pi t (H'(rho+) - H'(rho-))^3).
ExcursionFunctionalEstimate kernel_excursion_factor(const ConvexFunction& H, double t, double rho_minus,
                                                    double rho_plus, const ExcursionEnsemble& ens);

// Jump kernel n(rho-, rho+, t) evaluated in rho variables.
KernelValue jump_kernel_n(const ConvexFunction& H, double t, double rho_minus, double rho_plus,
                          const ExcursionEnsemble& ens, const QuadParams& quad = {});

// The same kernel through phi = t L(./t): t H''(rho+) f(z)/f(y) K(y,z), y = tH'(rho-), z = tH'(rho+).
KernelValue jump_kernel_n_phi_route(const ConvexFunction& H, double t, double rho_minus, double rho_plus,
                                    const ExcursionEnsemble& ens, const QuadParams& quad = {});

// The bracketed term of the kernel formula in rho variables; equals f^phi(tH'(r)).
FPhiEstimate kernel_bracket(const ConvexFunction& H, double t, double r, const ExcursionEnsemble& ens,
                            const QuadParams& quad = {});

}  // namespace conslaw
