#include "conslaw/polynomial.hpp"

namespace conslaw {

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs.size() <= 1) return {{0.0}};
    std::vector<double> c(coeffs.size() - 1);
    for (std::size_t k = 1; k < coeffs.size(); ++k) c[k - 1] = static_cast<double>(k) * coeffs[k];
    return {c};
}

Polynomial Polynomial::antiderivative() const {
    std::vector<double> c(coeffs.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) c[k + 1] = coeffs[k] / static_cast<double>(k + 1);
    return {c};
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (coeffs.empty() || other.coeffs.empty()) return {{0.0}};
    std::vector<double> c(coeffs.size() + other.coeffs.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        for (std::size_t j = 0; j < other.coeffs.size(); ++j) c[i + j] += coeffs[i] * other.coeffs[j];
    return {c};
}

Polynomial Polynomial::rescaled(double a, double len) const {
    // Taylor shift by a (synthetic division), then scale.
    std::vector<double> c = coeffs;
    const std::size_t n = c.size();
    for (std::size_t k = 0; k + 1 < n; ++k)
        for (std::size_t j = n - 1; j > k; --j) c[j - 1] += a * c[j];
    double scale = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        c[k] *= scale;
        scale *= len;
    }
    return {c};
}

Polynomial Polynomial::reflected() const {
    std::vector<double> c = coeffs;
    for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
    return {c};
}

}  // namespace conslaw
