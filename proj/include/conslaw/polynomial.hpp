#pragma once

#include <cstddef>
#include <vector>

namespace conslaw {

// Dense polynomial, coefficients in ascending powers.
struct Polynomial {
    std::vector<double> coeffs;

    double operator()(double x) const;
    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
    Polynomial derivative() const;
    Polynomial antiderivative() const;
    Polynomial operator*(const Polynomial& other) const;
    // Coefficients of s -> p(a + len*s).
    Polynomial rescaled(double a, double len) const;
    Polynomial reflected() const;  // x -> p(-x)
};

}  // namespace conslaw
