#include "ksinsense/field.hpp"

#include <algorithm>
#include <cmath>

namespace ksi {

double inner_h(std::span<const double> a, std::span<const double> b, double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return h * acc;
}

double norm_h(std::span<const double> a, double h) {
    return std::sqrt(inner_h(a, a, h));
}

double inner_h_masked(std::span<const double> a, std::span<const double> b,
                      std::span<const double> mask, double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += mask[i] * a[i] * b[i];
    return h * acc;
}

double c0_l2_norm(const SpaceTimeField& f, double h) {
    double best = 0.0;
    for (int n = 0; n < f.n_levels(); ++n) {
        best = std::max(best, norm_h(f.level(n), h));
    }
    return best;
}

double l2_qt_norm(const SpaceTimeField& f, double h, double dt) {
    double acc = 0.0;
    const int m = f.n_levels() - 1;
    for (int n = 0; n <= m; ++n) {
        const double w = (n == 0 || n == m) ? 0.5 : 1.0;
        acc += w * inner_h(f.level(n), f.level(n), h);
    }
    return std::sqrt(dt * acc);
}

} // namespace ksi
