#include "conslaw/grid.hpp"

#include <algorithm>
#include <cmath>

#include "conslaw/csv.hpp"
#include "conslaw/errors.hpp"

namespace conslaw {

GridSpec::GridSpec(double l, double r, std::size_t n) : left(l), right(r), n_steps(n) {
    if (!(l < r)) throw DomainError("grid needs left < right");
    if (n < 1) throw DomainError("grid needs at least one step");
}

std::size_t GridSpec::nearest(double v) const {
    const double k = std::round((v - left) / step());
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n_steps)));
}

GridSpec GridSpec::with_step(double l, double r, double step) {
    const double n = std::round((r - l) / step);
    if (n < 1.0 || std::abs(n * step - (r - l)) > 1e-9 * std::max(1.0, std::abs(r - l)))
        throw DomainError("interval length is not a multiple of the step");
    return GridSpec(l, l + n * step, static_cast<std::size_t>(n));
}

double GridPath::at(double x) const {
    const double pos = (x - grid.left) / grid.step();
    if (pos <= 0.0) return values.front();
    if (pos >= static_cast<double>(grid.n_steps)) return values.back();
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * values[i] + w * values[i + 1];
}

void GridPath::write_csv(const std::filesystem::path& path) const {
    CsvWriter csv(path, {"x", "value"});
    for (std::size_t i = 0; i < values.size(); ++i) csv.row({grid.x(i), values[i]});
}

}  // namespace conslaw
