#pragma once

#include <functional>
#include <vector>

namespace conslaw {

struct QuadNode {
    double x;
    double w;
};

// Composite Gauss-Legendre nodes on [a,b]: `panels` equal panels, `order` in {4,8,16}.
std::vector<QuadNode> composite_gauss(double a, double b, int panels, int order);

// Adaptive Gauss-Kronrod on a finite interval.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10);

// Cumulative trapezoid of samples on a uniform grid; out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& values, double step);

}  // namespace conslaw
