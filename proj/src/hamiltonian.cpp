#include "conslaw/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conslaw/errors.hpp"

namespace conslaw {

struct ConvexFunction::Table {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> slope;  // nodal estimates of F'
    std::vector<double> level;  // F at nodes, integrated from slope

    std::size_t cell(double x) const {
        if (x < grid.front() || x > grid.back())
            throw DomainError("tabulated function evaluated outside its grid");
        auto it = std::upper_bound(grid.begin(), grid.end(), x);
        std::size_t k = static_cast<std::size_t>(it - grid.begin());
        return std::min(k, grid.size() - 1) - 1;
    }
    double value(double x) const {
        const std::size_t i = cell(x);
        const double h = grid[i + 1] - grid[i], dx = x - grid[i];
        return level[i] + slope[i] * dx + 0.5 * (slope[i + 1] - slope[i]) * dx * dx / h;
    }
    double d1(double x) const {
        const std::size_t i = cell(x);
        const double w = (x - grid[i]) / (grid[i + 1] - grid[i]);
        return (1.0 - w) * slope[i] + w * slope[i + 1];
    }
    double d2(double x) const {
        const std::size_t i = cell(x);
        return (slope[i + 1] - slope[i]) / (grid[i + 1] - grid[i]);
    }
};

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("parameter ") + name + " must be positive");
}

}  // namespace

ConvexFunction ConvexFunction::quadratic(double a) {
    require_positive(a, "a");
    return ConvexFunction(Quadratic{a});
}

ConvexFunction ConvexFunction::quartic(double a) {
    require_positive(a, "a");
    return ConvexFunction(Quartic{a});
}

ConvexFunction ConvexFunction::power(double p, double a) {
    require_positive(a, "a");
    if (!(p > 1.0)) throw DomainError("power family needs p > 1");
    return ConvexFunction(Power{p, a});
}

ConvexFunction ConvexFunction::cosh(double a) {
    require_positive(a, "a");
    return ConvexFunction(Cosh{a});
}

ConvexFunction ConvexFunction::polynomial(std::vector<double> coeffs) {
    while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
    const std::size_t deg = coeffs.empty() ? 0 : coeffs.size() - 1;
    if (deg < 2 || deg % 2 != 0 || !(coeffs.back() > 0.0))
        throw DomainError("polynomial must have even degree >= 2 and positive leading coefficient");
    return ConvexFunction(Poly{Polynomial{std::move(coeffs)}});
}

ConvexFunction ConvexFunction::tabulated(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() < 3 || grid.size() != values.size())
        throw DomainError("tabulated function needs matching grid/values of length >= 3");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("tabulated grid must be strictly increasing");
    auto t = std::make_shared<Table>();
    const std::size_t n = grid.size();
    t->slope.resize(n);
    // derivative at node c of the parabola through nodes a, b, c
    auto three_point = [&](std::size_t a, std::size_t b, std::size_t c) {
        const double xa = grid[a], xb = grid[b], xc = grid[c];
        return values[a] * (xc - xb) / ((xa - xb) * (xa - xc)) + values[b] * (xc - xa) / ((xb - xa) * (xb - xc)) +
               values[c] * (2.0 * xc - xa - xb) / ((xc - xa) * (xc - xb));
    };
    t->slope[0] = three_point(2, 1, 0);
    t->slope[n - 1] = three_point(n - 3, n - 2, n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i)
        t->slope[i] = (values[i + 1] - values[i - 1]) / (grid[i + 1] - grid[i - 1]);
    t->level.resize(n);
    t->level[0] = values[0];
    for (std::size_t i = 1; i < n; ++i)
        t->level[i] = t->level[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (t->slope[i] + t->slope[i - 1]);
    // integrating the slopes drifts; re-centre on the data
    double offset = 0.0;
    for (std::size_t i = 0; i < n; ++i) offset += values[i] - t->level[i];
    offset /= static_cast<double>(n);
    for (double& l : t->level) l += offset;
    t->grid = std::move(grid);
    t->values = std::move(values);
    return ConvexFunction(std::shared_ptr<const Table>(std::move(t)));
}

ConvexFunction ConvexFunction::shifted(double shift) const {
    ConvexFunction f = *this;
    f.shift_ = shift;
    return f;
}

ConvexFunction ConvexFunction::scaled(double scale) const {
    require_positive(scale, "scale");
    ConvexFunction f = *this;
    f.scale_ = scale;
    return f;
}

Family ConvexFunction::family() const {
    static constexpr Family map[] = {Family::Quadratic, Family::Quartic,   Family::Power,  Family::Cosh,
                                     Family::Polynomial, Family::Tabulated, Family::HopfLax};
    return map[base_.index()];
}

double ConvexFunction::base_value(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return 0.5 * b.a * x * x;
            else if constexpr (std::is_same_v<T, Quartic>) return 0.25 * b.a * x * x * x * x;
            else if constexpr (std::is_same_v<T, Power>) return b.a * std::pow(std::abs(x), b.p) / b.p;
            else if constexpr (std::is_same_v<T, Cosh>) return std::cosh(b.a * x) - 1.0;
            else if constexpr (std::is_same_v<T, Poly>) return b.p(x);
            else if constexpr (std::is_same_v<T, HopfLax>) return b.t * b.h->conjugate(x / b.t);
            else return b->value(x);
        },
        base_);
}

double ConvexFunction::base_d1(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return b.a * x;
            else if constexpr (std::is_same_v<T, Quartic>) return b.a * x * x * x;
            else if constexpr (std::is_same_v<T, Power>) return b.a * sgn(x) * std::pow(std::abs(x), b.p - 1.0);
            else if constexpr (std::is_same_v<T, Cosh>) return b.a * std::sinh(b.a * x);
            else if constexpr (std::is_same_v<T, Poly>) return b.p.derivative()(x);
            else if constexpr (std::is_same_v<T, HopfLax>) return b.h->conjugate_derivative(x / b.t);
            else return b->d1(x);
        },
        base_);
}

double ConvexFunction::base_d2(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return b.a;
            else if constexpr (std::is_same_v<T, Quartic>) return 3.0 * b.a * x * x;
            else if constexpr (std::is_same_v<T, Power>) return b.a * (b.p - 1.0) * std::pow(std::abs(x), b.p - 2.0);
            else if constexpr (std::is_same_v<T, Cosh>) return b.a * b.a * std::cosh(b.a * x);
            else if constexpr (std::is_same_v<T, Poly>) return b.p.derivative().derivative()(x);
            else if constexpr (std::is_same_v<T, HopfLax>)
                return 1.0 / (b.t * b.h->second_derivative(b.h->conjugate_derivative(x / b.t)));
            else return b->d2(x);
        },
        base_);
}

double ConvexFunction::value(double x) const { return scale_ * base_value(x - shift_); }
double ConvexFunction::derivative(double x) const { return scale_ * base_d1(x - shift_); }
double ConvexFunction::second_derivative(double x) const { return scale_ * base_d2(x - shift_); }

std::optional<Polynomial> ConvexFunction::derivative_polynomial() const {
    std::optional<Polynomial> base = std::visit(
        [](const auto& b) -> std::optional<Polynomial> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return Polynomial{{0.0, b.a}};
            else if constexpr (std::is_same_v<T, Quartic>) return Polynomial{{0.0, 0.0, 0.0, b.a}};
            else if constexpr (std::is_same_v<T, Power>) {
                const double k = b.p - 1.0;
                if (std::floor(k) == k && static_cast<long>(k) % 2 == 1) {
                    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
                    c.back() = b.a;
                    return Polynomial{c};
                }
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Poly>) return b.p.derivative();
            else if constexpr (std::is_same_v<T, HopfLax>) {
                // Quadratic H(p) = s a (p-c)^2/2 has L'(q) = c + q/(s a).
                if (b.h->family() == Family::Quadratic) {
                    const double sa = b.h->scale() * std::get<Quadratic>(b.h->base_).a;
                    return Polynomial{{b.h->shift(), 1.0 / (b.t * sa)}};
                }
                return std::nullopt;
            } else return std::nullopt;
        },
        base_);
    if (!base) return std::nullopt;
    Polynomial p = base->rescaled(-shift_, 1.0);
    for (double& c : p.coeffs) c *= scale_;
    return p;
}

std::optional<Polynomial> ConvexFunction::second_derivative_polynomial() const {
    if (auto d = derivative_polynomial()) return d->derivative();
    return std::nullopt;
}

ConvexFunction ConvexFunction::reflected() const {
    ConvexFunction out = *this;
    out.shift_ = -shift_;
    std::visit(
        [&out](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Poly>) {
                out.base_ = Poly{b.p.reflected()};
            } else if constexpr (std::is_same_v<T, HopfLax>) {
                out.base_ = HopfLax{std::make_shared<const ConvexFunction>(b.h->reflected()), b.t};
            } else if constexpr (std::is_same_v<T, std::shared_ptr<const Table>>) {
                std::vector<double> g(b->grid.rbegin(), b->grid.rend());
                std::vector<double> v(b->values.rbegin(), b->values.rend());
                for (double& x : g) x = -x;
                out.base_ = tabulated(std::move(g), std::move(v)).base_;
            }
        },
        base_);
    return out;
}

bool ConvexFunction::is_even() const {
    if (shift_ != 0.0) return false;
    return std::visit(
        [](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Poly>) {
                for (std::size_t k = 1; k < b.p.coeffs.size(); k += 2)
                    if (b.p.coeffs[k] != 0.0) return false;
                return true;
            } else if constexpr (std::is_same_v<T, HopfLax>) return b.h->is_even();
            else if constexpr (std::is_same_v<T, std::shared_ptr<const Table>>) return false;
            else return true;
        },
        base_);
}

std::optional<double> ConvexFunction::base_conjugate(double q) const {
    return std::visit(
        [q](const auto& b) -> std::optional<double> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return q * q / (2.0 * b.a);
            else if constexpr (std::is_same_v<T, Quartic>)
                return 0.75 * std::pow(std::abs(q), 4.0 / 3.0) / std::cbrt(b.a);
            else if constexpr (std::is_same_v<T, Power>) {
                const double pc = b.p / (b.p - 1.0);
                return std::pow(std::abs(q), pc) / (pc * std::pow(b.a, pc - 1.0));
            } else if constexpr (std::is_same_v<T, Cosh>) {
                const double r = q / b.a;
                return q * std::asinh(r) / b.a - std::sqrt(1.0 + r * r) + 1.0;
            } else if constexpr (std::is_same_v<T, HopfLax>) return b.t * b.h->value(q);
            else return std::nullopt;
        },
        base_);
}

std::optional<double> ConvexFunction::base_conjugate_derivative(double q) const {
    return std::visit(
        [q](const auto& b) -> std::optional<double> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic>) return q / b.a;
            else if constexpr (std::is_same_v<T, Quartic>) return std::cbrt(q / b.a);
            else if constexpr (std::is_same_v<T, Power>) return sgn(q) * std::pow(std::abs(q) / b.a, 1.0 / (b.p - 1.0));
            else if constexpr (std::is_same_v<T, Cosh>) return std::asinh(q / b.a) / b.a;
            else if constexpr (std::is_same_v<T, HopfLax>) return b.h->derivative(q);
            else return std::nullopt;
        },
        base_);
}

bool ConvexFunction::has_closed_form_conjugate() const {
    return family() != Family::Polynomial && family() != Family::Tabulated;
}

double ConvexFunction::conjugate_derivative(double q) const {
    if (auto r = base_conjugate_derivative(q / scale_)) return shift_ + *r;
    return numeric_conjugate_derivative(q);
}

double ConvexFunction::conjugate(double q) const {
    if (auto r = base_conjugate(q / scale_)) return q * shift_ + scale_ * *r;
    if (family() == Family::Tabulated) return legendre_transform(*this, q);
    const double p = numeric_conjugate_derivative(q);
    return q * p - value(p);
}

std::pair<double, double> ConvexFunction::domain() const {
    if (const auto* t = std::get_if<std::shared_ptr<const Table>>(&base_))
        return {(*t)->grid.front() + shift_, (*t)->grid.back() + shift_};
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
}

double ConvexFunction::numeric_conjugate_derivative(double q) const {
    auto [lo, hi] = domain();
    if (std::isinf(lo)) {
        double w = 1.0;
        lo = shift_ - w;
        hi = shift_ + w;
        while (!(derivative(lo) <= q && q <= derivative(hi))) {
            w *= 2.0;
            if (w > 1e12) throw RangeError("value outside the range of the derivative");
            lo = shift_ - w;
            hi = shift_ + w;
        }
    } else if (q < derivative(lo) || q > derivative(hi)) {
        throw RangeError("value outside the range of the derivative on the table");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (derivative(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConvexFunction hopf_lax_kernel(const ConvexFunction& h, double t) {
    if (!(t > 0.0)) throw DomainError("Hopf-Lax kernel needs t > 0");
    return ConvexFunction(ConvexFunction::HopfLax{std::make_shared<const ConvexFunction>(h), t});
}

double legendre_transform(const ConvexFunction& h, double q) {
    if (h.family() != Family::Tabulated) return h.conjugate(q);
    auto [lo, hi] = h.domain();
    if (q < h.derivative(lo) || q > h.derivative(hi))
        throw DomainError("Legendre maximiser lies outside the tabulated grid");
    auto objective = [&](double p) { return q * p - h.value(p); };
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (objective(m1) < objective(m2))
            lo = m1;
        else
            hi = m2;
    }
    return objective(0.5 * (lo + hi));
}

double legendre_derivative(const ConvexFunction& h, double q) {
    auto [lo, hi] = h.domain();
    if (std::isinf(lo)) {
        double w = 1.0;
        while (!(h.derivative(h.shift() - w) <= q && q <= h.derivative(h.shift() + w))) {
            w *= 2.0;
            if (w > 1e12) throw RangeError("q outside the range of H' on the search interval");
        }
        lo = h.shift() - w;
        hi = h.shift() + w;
    } else if (q < h.derivative(lo) || q > h.derivative(hi)) {
        throw RangeError("q outside the range of H' on the table");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (h.derivative(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConvexityReport validate_convexity(const ConvexFunction& f, double lo, double hi, std::size_t n_probes) {
    if (n_probes < 2) throw DomainError("validate_convexity needs at least two probes");
    ConvexityReport r;
    r.min_second_derivative = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_probes; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_probes - 1);
        const double d2 = f.second_derivative(x);
        if (d2 < r.min_second_derivative) {
            r.min_second_derivative = d2;
            r.argmin = x;
        }
    }
    if (lo != 0.0) r.ratio_left = f.value(lo) / std::abs(lo);
    if (hi != 0.0) r.ratio_right = f.value(hi) / std::abs(hi);
    auto [dlo, dhi] = f.domain();
    double prev = -std::numeric_limits<double>::infinity();
    r.superlinear = true;
    for (double x : {10.0, 100.0, 1000.0}) {
        if (-x < dlo || x > dhi) {
            r.superlinear = false;
            break;
        }
        const double ratio = std::min(f.value(x), f.value(-x)) / x;
        if (!(ratio > prev)) r.superlinear = false;
        prev = ratio;
    }
    r.pass = r.min_second_derivative > 0.0;
    return r;
}

namespace {

const char* family_name(Family f) {
    switch (f) {
        case Family::Quadratic: return "quadratic";
        case Family::Quartic: return "quartic";
        case Family::Power: return "power";
        case Family::Cosh: return "cosh";
        case Family::Polynomial: return "polynomial";
        case Family::Tabulated: return "tabulated";
        case Family::HopfLax: return "hopf_lax";
    }
    return "?";
}

double param(const nlohmann::json& params, const char* key) {
    if (!params.contains(key) || !params[key].is_number())
        throw ConfigError(std::string("params.") + key, "missing or not a number");
    return params[key].get<double>();
}

}  // namespace

nlohmann::json ConvexFunction::to_json() const {
    nlohmann::json params = nlohmann::json::object();
    std::visit(
        [&params](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Quadratic> || std::is_same_v<T, Quartic> || std::is_same_v<T, Cosh>) {
                params["a"] = b.a;
            } else if constexpr (std::is_same_v<T, Power>) {
                params["p"] = b.p;
                params["a"] = b.a;
            } else if constexpr (std::is_same_v<T, Poly>) {
                params["coeffs"] = b.p.coeffs;
            } else if constexpr (std::is_same_v<T, HopfLax>) {
                params["hamiltonian"] = b.h->to_json();
                params["t"] = b.t;
            } else {
                params["grid"] = b->grid;
                params["values"] = b->values;
            }
        },
        base_);
    return {{"family", family_name(family())}, {"params", params}, {"shift", shift_}, {"scale", scale_}};
}

ConvexFunction ConvexFunction::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("family", "convex function must be a JSON object");
    if (!j.contains("family") || !j["family"].is_string()) throw ConfigError("family", "missing");
    const std::string fam = j["family"];
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    auto make = [&]() -> ConvexFunction {
        if (fam == "quadratic") return quadratic(param(params, "a"));
        if (fam == "quartic") return quartic(param(params, "a"));
        if (fam == "power") return power(param(params, "p"), param(params, "a"));
        if (fam == "cosh") return cosh(param(params, "a"));
        if (fam == "polynomial") return polynomial(params.at("coeffs").get<std::vector<double>>());
        if (fam == "tabulated")
            return tabulated(params.at("grid").get<std::vector<double>>(),
                             params.at("values").get<std::vector<double>>());
        if (fam == "hopf_lax") return hopf_lax_kernel(from_json(params.at("hamiltonian")), param(params, "t"));
        throw ConfigError("family", "unknown family '" + fam + "'");
    };
    ConvexFunction f = make();
    f = f.shifted(j.value("shift", 0.0));
    return f.scaled(j.value("scale", 1.0));
}

}  // namespace conslaw
