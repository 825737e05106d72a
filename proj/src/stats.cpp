#include "conslaw/stats.hpp"

#include <algorithm>
#include <cmath>

namespace conslaw {

MeanEstimate mean_and_error(std::span<const double> samples) {
    MeanEstimate out;
    out.n = samples.size();
    if (samples.empty()) return out;
    double sum = 0.0;
    for (double v : samples) sum += v;
    out.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - out.mean) * (v - out.mean);
        const double n = static_cast<double>(samples.size());
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

double ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double TabulatedCdf::operator()(double v) const {
    if (x.empty() || v <= x.front()) return x.empty() ? 0.0 : std::clamp(cdf.front(), 0.0, 1.0);
    if (v >= x.back()) return std::clamp(cdf.back(), 0.0, 1.0);
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double w = (v - x[k - 1]) / (x[k] - x[k - 1]);
    return std::clamp((1.0 - w) * cdf[k - 1] + w * cdf[k], 0.0, 1.0);
}

}  // namespace conslaw
