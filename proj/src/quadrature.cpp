#include "conslaw/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conslaw/errors.hpp"

namespace conslaw {

namespace {

template <unsigned N>
std::vector<QuadNode> reference_rule() {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    std::vector<QuadNode> out;
    // Boost stores the non-negative half; for odd N x[0] == 0.
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        out.push_back({-x[i], w[i]});
    }
    for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], w[i]});
    return out;
}

const std::vector<QuadNode>& rule_for(int order) {
    static const auto r4 = reference_rule<4>();
    static const auto r8 = reference_rule<8>();
    static const auto r16 = reference_rule<16>();
    switch (order) {
        case 4: return r4;
        case 8: return r8;
        case 16: return r16;
        default: throw DomainError("Gauss-Legendre order must be 4, 8 or 16");
    }
}

}  // namespace

std::vector<QuadNode> composite_gauss(double a, double b, int panels, int order) {
    const auto& ref = rule_for(order);
    std::vector<QuadNode> nodes;
    nodes.reserve(static_cast<std::size_t>(panels) * ref.size());
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width;
        for (const auto& r : ref) nodes.push_back({lo + half * (1.0 + r.x), half * r.w});
    }
    return nodes;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel_tol, &err);
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double step) {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t i = 1; i < values.size(); ++i)
        out[i] = out[i - 1] + 0.5 * step * (values[i - 1] + values[i]);
    return out;
}

}  // namespace conslaw
