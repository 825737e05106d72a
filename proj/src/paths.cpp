#include "conslaw/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "conslaw/errors.hpp"

namespace conslaw {

GridPath sample_two_sided_bm(const GridSpec& grid, double sigma, Rng& rng) {
    if (!grid.contains(0.0)) throw DomainError("two-sided path needs a grid containing 0");
    GridPath p{grid, std::vector<double>(grid.size(), 0.0)};
    if (sigma == 0.0) return p;
    const double sd = sigma * std::sqrt(grid.step());
    const std::size_t anchor = grid.nearest(0.0);
    for (std::size_t i = anchor + 1; i < grid.size(); ++i) p.values[i] = p.values[i - 1] + sd * rng.normal();
    for (std::size_t i = anchor; i-- > 0;) p.values[i] = p.values[i + 1] - sd * rng.normal();
    return p;
}

GridPath sample_two_sided_bm(const GridSpec& grid, double sigma, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return sample_two_sided_bm(grid, sigma, rng);
}

void fill_brownian_bridge(std::span<double> out, double length, Rng& rng) {
    const std::size_t n = out.size() - 1;
    const double sd = std::sqrt(length / static_cast<double>(n));
    out[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) out[k] = out[k - 1] + sd * rng.normal();
    const double end = out[n];
    for (std::size_t k = 1; k < n; ++k) out[k] -= end * static_cast<double>(k) / static_cast<double>(n);
    out[n] = 0.0;
}

GridPath sample_excursion(double y, double z, std::size_t n_steps, Rng& rng) {
    if (!(y < z)) throw DomainError("excursion needs y < z");
    GridPath p{GridSpec(y, z, n_steps), std::vector<double>(n_steps + 1, 0.0)};
    std::vector<double> b(n_steps + 1);
    for (int c = 0; c < 3; ++c) {
        fill_brownian_bridge(b, 1.0, rng);
        for (std::size_t k = 0; k <= n_steps; ++k) p.values[k] += b[k] * b[k];
    }
    const double scale = std::sqrt(z - y);
    for (double& v : p.values) v = scale * std::sqrt(v);
    p.values.front() = 0.0;
    p.values.back() = 0.0;
    return p;
}

GridPath sample_excursion(double y, double z, std::size_t n_steps, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return sample_excursion(y, z, n_steps, rng);
}

GridPath sample_bessel3_bridge(double a, double b, double s0, double s1, std::size_t n_steps, Rng& rng) {
    if (a < 0.0 || b < 0.0) throw DomainError("Bessel bridge endpoints must be non-negative");
    const double tau = s1 - s0;
    const double kappa = a * b / tau;
    const double u = rng.uniform();
    double c;  // cosine between start and end directions
    if (kappa < 1e-12) {
        c = 2.0 * u - 1.0;
    } else {
        c = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
        c = std::clamp(c, -1.0, 1.0);
    }
    const double psi = 2.0 * std::numbers::pi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double end[3] = {b * c, b * r * std::cos(psi), b * r * std::sin(psi)};
    const double start[3] = {a, 0.0, 0.0};

    GridPath p{GridSpec(s0, s1, n_steps), std::vector<double>(n_steps + 1, 0.0)};
    std::vector<double> br(n_steps + 1);
    const double n = static_cast<double>(n_steps);
    for (int comp = 0; comp < 3; ++comp) {
        fill_brownian_bridge(br, tau, rng);
        for (std::size_t k = 0; k <= n_steps; ++k) {
            const double w = static_cast<double>(k) / n;
            const double v = (1.0 - w) * start[comp] + w * end[comp] + br[k];
            p.values[k] += v * v;
        }
    }
    for (double& v : p.values) v = std::sqrt(v);
    p.values.front() = a;
    p.values.back() = b;
    return p;
}

GridPath sample_bessel3_bridge(double a, double b, double s0, double s1, std::size_t n_steps, std::uint64_t seed,
                               std::uint64_t stream) {
    Rng rng(seed, stream);
    return sample_bessel3_bridge(a, b, s0, s1, n_steps, rng);
}

GridPath sample_bessel3_process(double a, double s0, double s1, std::size_t n_steps, Rng& rng) {
    GridPath p{GridSpec(s0, s1, n_steps), std::vector<double>(n_steps + 1, 0.0)};
    const double sd = std::sqrt((s1 - s0) / static_cast<double>(n_steps));
    for (int comp = 0; comp < 3; ++comp) {
        double v = comp == 0 ? a : 0.0;
        p.values[0] += v * v;
        for (std::size_t k = 1; k <= n_steps; ++k) {
            v += sd * rng.normal();
            p.values[k] += v * v;
        }
    }
    for (double& v : p.values) v = std::sqrt(v);
    return p;
}

void LevySpec::validate() const {
    if (!(brownian_sigma >= 0.0)) throw ConfigError("brownian_sigma", "must be >= 0");
    if (!(jump_intensity >= 0.0)) throw ConfigError("jump_intensity", "must be >= 0");
    if (!std::isfinite(drift)) throw ConfigError("drift", "must be finite");
    if (jump_law == JumpLaw::Exponential && !(jump_mean > 0.0))
        throw ConfigError("jump_law.mean", "must be positive");
    if (jump_law == JumpLaw::Pareto) {
        if (!(pareto_alpha > 1.0)) throw ConfigError("jump_law.alpha", "must exceed 1");
        if (!(pareto_xmin > 0.0)) throw ConfigError("jump_law.xmin", "must be positive");
    }
}

nlohmann::json LevySpec::to_json() const {
    nlohmann::json law = jump_law == JumpLaw::Exponential
                             ? nlohmann::json{{"type", "exponential"}, {"mean", jump_mean}}
                             : nlohmann::json{{"type", "pareto"}, {"alpha", pareto_alpha}, {"xmin", pareto_xmin}};
    return {{"brownian_sigma", brownian_sigma}, {"drift", drift}, {"jump_intensity", jump_intensity}, {"jump_law", law}};
}

LevySpec LevySpec::from_json(const nlohmann::json& j) {
    LevySpec s;
    s.brownian_sigma = j.value("brownian_sigma", 1.0);
    s.drift = j.value("drift", 0.0);
    s.jump_intensity = j.value("jump_intensity", 0.0);
    if (j.contains("jump_law")) {
        const auto& law = j["jump_law"];
        const std::string type = law.value("type", "exponential");
        if (type == "exponential") {
            s.jump_law = JumpLaw::Exponential;
            s.jump_mean = law.value("mean", 1.0);
        } else if (type == "pareto") {
            s.jump_law = JumpLaw::Pareto;
            s.pareto_alpha = law.value("alpha", 2.0);
            s.pareto_xmin = law.value("xmin", 1.0);
        } else {
            throw ConfigError("jump_law.type", "unknown jump law '" + type + "'");
        }
    }
    s.validate();
    return s;
}

std::vector<double> render_jumps(const GridSpec& grid, std::span<const Jump> jumps, double min_size) {
    std::vector<double> out(grid.size(), 0.0);
    const std::size_t anchor = grid.nearest(0.0);
    const double x0 = grid.x(anchor);
    const double h = grid.step();
    for (const Jump& j : jumps) {
        if (j.size < min_size) continue;
        // First grid index at or after the jump.
        const double pos = std::ceil((j.location - grid.left) / h);
        std::size_t first = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(grid.size())));
        while (first > 0 && grid.x(first - 1) >= j.location) --first;
        while (first < grid.size() && grid.x(first) < j.location) ++first;
        if (j.location > x0) {
            for (std::size_t i = first; i < grid.size(); ++i) out[i] += j.size;
        } else {
            for (std::size_t i = 0; i < std::min(first, grid.size()); ++i) out[i] -= j.size;
        }
    }
    return out;
}

LevyPath sample_levy(const LevySpec& spec, const GridSpec& grid, std::uint64_t seed, std::uint64_t stream) {
    spec.validate();
    if (!grid.contains(0.0)) throw DomainError("Levy path needs a grid containing 0");
    Rng rng(seed, stream);
    LevyPath out;
    out.continuous_part = sample_two_sided_bm(grid, spec.brownian_sigma, rng);
    const double x0 = grid.x(grid.nearest(0.0));
    for (std::size_t i = 0; i < grid.size(); ++i) out.continuous_part.values[i] += spec.drift * (grid.x(i) - x0);

    if (spec.jump_intensity > 0.0) {
        const std::uint64_t count = rng.poisson(spec.jump_intensity * (grid.right - grid.left));
        out.jumps.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            const double loc = grid.left + (grid.right - grid.left) * (1.0 - rng.uniform());
            const double size = spec.jump_law == JumpLaw::Exponential
                                    ? spec.jump_mean * -std::log(rng.uniform())
                                    : spec.pareto_xmin * std::pow(rng.uniform(), -1.0 / spec.pareto_alpha);
            out.jumps.push_back({loc, size});
        }
        std::sort(out.jumps.begin(), out.jumps.end(),
                  [](const Jump& a, const Jump& b) { return a.location < b.location; });
    }
    out.path = out.continuous_part;
    const auto jp = render_jumps(grid, out.jumps);
    for (std::size_t i = 0; i < grid.size(); ++i) out.path.values[i] += jp[i];
    return out;
}

GridPath truncate_jumps(const GridPath& path, std::span<const Jump> jumps, double N) {
    GridPath out = path;
    if (std::isinf(N) && N > 0) return out;
    std::vector<Jump> removed;
    for (const Jump& j : jumps)
        if (j.size > N) removed.push_back(j);
    const auto jp = render_jumps(path.grid, removed);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= jp[i];
    return out;
}

GridPath refine_brownian(const GridPath& path, double sigma, Rng& rng) {
    const GridSpec& g = path.grid;
    GridPath out{GridSpec(g.left, g.right, 2 * g.n_steps), std::vector<double>(2 * g.n_steps + 1)};
    const double sd = sigma * std::sqrt(g.step() / 4.0);
    for (std::size_t i = 0; i < g.size(); ++i) out.values[2 * i] = path.values[i];
    for (std::size_t i = 0; i < g.n_steps; ++i)
        out.values[2 * i + 1] = 0.5 * (path.values[i] + path.values[i + 1]) + sd * rng.normal();
    return out;
}

}  // namespace conslaw
