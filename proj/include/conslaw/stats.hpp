#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace conslaw {

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Two-pass mean and standard error; serial so the result is reproducible.
MeanEstimate mean_and_error(std::span<const double> samples);

double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Tabulated CDF on an increasing grid, linear in between, clamped to [0,1] outside.
struct TabulatedCdf {
    std::vector<double> x;
    std::vector<double> cdf;
    double operator()(double v) const;
};

}  // namespace conslaw
