#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "conslaw/polynomial.hpp"

namespace conslaw {

enum class Family { Quadratic, Quartic, Power, Cosh, Polynomial, Tabulated, HopfLax };

// Strictly convex function F(x) = scale * base(x - shift). Plays the roles of
// the Hamiltonian H, the drift phi and the Legendre transform L.
//
// Bases:  quadratic a x^2/2,  quartic a x^4/4,  power a|x|^p/p,  cosh(a x)-1,
//         polynomial (explicit coefficients),  tabulated (H' linear between nodes),
//         and the Hopf-Lax kernel z -> t L_H(z/t) built from another function.
class ConvexFunction {
public:
    static ConvexFunction quadratic(double a);
    static ConvexFunction quartic(double a);
    static ConvexFunction power(double p, double a);
    static ConvexFunction cosh(double a);
    static ConvexFunction polynomial(std::vector<double> coeffs);
    static ConvexFunction tabulated(std::vector<double> grid, std::vector<double> values);

    ConvexFunction shifted(double shift) const;
    ConvexFunction scaled(double scale) const;

    Family family() const;
    double shift() const { return shift_; }
    double scale() const { return scale_; }

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    // Present when F' (resp. F'') is a polynomial in x; enables exact integrals.
    std::optional<Polynomial> derivative_polynomial() const;
    std::optional<Polynomial> second_derivative_polynomial() const;

    // x -> F(-x).
    ConvexFunction reflected() const;
    bool is_even() const;

    bool has_closed_form_conjugate() const;
    // Convex conjugate and its derivative (F')^{-1}; closed form when available.
    double conjugate(double q) const;
    double conjugate_derivative(double q) const;

    // Interval on which F is defined (the table range for tabulated data).
    std::pair<double, double> domain() const;

    nlohmann::json to_json() const;
    static ConvexFunction from_json(const nlohmann::json& j);

private:
    struct Quadratic { double a; };
    struct Quartic { double a; };
    struct Power { double p; double a; };
    struct Cosh { double a; };
    struct Poly { Polynomial p; };
    struct Table;
    struct HopfLax {
        std::shared_ptr<const ConvexFunction> h;
        double t;
    };
    using Base = std::variant<Quadratic, Quartic, Power, Cosh, Poly, std::shared_ptr<const Table>, HopfLax>;

    explicit ConvexFunction(Base base) : base_(std::move(base)) {}

    double base_value(double x) const;
    double base_d1(double x) const;
    double base_d2(double x) const;
    std::optional<double> base_conjugate(double q) const;
    std::optional<double> base_conjugate_derivative(double q) const;
    double numeric_conjugate_derivative(double q) const;

    friend ConvexFunction hopf_lax_kernel(const ConvexFunction& h, double t);

    Base base_;
    double shift_ = 0.0;
    double scale_ = 1.0;
};

// phi(z) = t L(z/t), the kernel of the Hopf-Lax formula at time t.
ConvexFunction hopf_lax_kernel(const ConvexFunction& h, double t);

// max_p (q p - H(p)). Tabulated: ternary search; DomainError if the maximiser
// leaves the table.
double legendre_transform(const ConvexFunction& h, double q);

// (H')^{-1}(q) by bisection to 1e-10 absolute.
double legendre_derivative(const ConvexFunction& h, double q);

struct ConvexityReport {
    bool pass = false;
    double min_second_derivative = 0.0;
    double argmin = 0.0;
    double ratio_left = 0.0;   // F(lo)/|lo|
    double ratio_right = 0.0;  // F(hi)/|hi|
    bool superlinear = false;  // F(x)/|x| increasing along |x| = 10, 100, 1000
};

ConvexityReport validate_convexity(const ConvexFunction& f, double lo, double hi, std::size_t n_probes);

}  // namespace conslaw
