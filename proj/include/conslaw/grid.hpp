#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace conslaw {

struct GridSpec {
    double left = 0.0;
    double right = 1.0;
    std::size_t n_steps = 1;

    GridSpec() = default;
    GridSpec(double l, double r, std::size_t n);

    double step() const { return (right - left) / static_cast<double>(n_steps); }
    std::size_t size() const { return n_steps + 1; }
    double x(std::size_t i) const { return left + step() * static_cast<double>(i); }
    bool contains(double v) const { return v >= left && v <= right; }
    std::size_t nearest(double v) const;
    // Uniform grid on [l, r] with the given step, requiring (r-l)/step integral.
    static GridSpec with_step(double l, double r, double step);
};

struct GridPath {
    GridSpec grid;
    std::vector<double> values;

    // Piecewise-linear interpolation.
    double at(double x) const;
    void write_csv(const std::filesystem::path& path) const;
};

}  // namespace conslaw
