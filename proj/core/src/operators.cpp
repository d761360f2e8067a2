#include "ksinsense/operators.hpp"

namespace ksi {

BandedMatrix assemble_d1(const Grid& grid, BoundaryCondition /*bc*/) {
    // Boundary values vanish for every state, so the clamped/dirichlet
    // distinction does not reach the first-derivative stencil.
    const int n = grid.n_interior();
    const double c = 1.0 / (2.0 * grid.h());
    BandedMatrix m(n, 1, 1);
    for (int i = 0; i < n; ++i) {
        if (i > 0) m.set(i, i - 1, -c);
        if (i + 1 < n) m.set(i, i + 1, c);
    }
    return m;
}

BandedMatrix assemble_d2(const Grid& grid) {
    const int n = grid.n_interior();
    const double c = 1.0 / (grid.h() * grid.h());
    BandedMatrix m(n, 1, 1);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, -2.0 * c);
        if (i > 0) m.set(i, i - 1, c);
        if (i + 1 < n) m.set(i, i + 1, c);
    }
    return m;
}

BandedMatrix assemble_d4(const Grid& grid) {
    const int n = grid.n_interior();
    const double h = grid.h();
    const double c = 1.0 / (h * h * h * h);
    BandedMatrix m(n, 2, 2);
    for (int i = 0; i < n; ++i) {
        m.set(i, i, 6.0 * c);
        if (i > 0) m.set(i, i - 1, -4.0 * c);
        if (i + 1 < n) m.set(i, i + 1, -4.0 * c);
        if (i > 1) m.set(i, i - 2, c);
        if (i + 2 < n) m.set(i, i + 2, c);
    }
    // Ghost reflection u_{-1} = u_1 folds the out-of-range stencil value
    // back onto the first interior node; same at the other wall.
    m.set(0, 0, 7.0 * c);
    m.set(n - 1, n - 1, 7.0 * c);
    return m;
}

IndicatorMask build_mask(const Grid& grid, double a, double b,
                         IndicatorMask::Smoothing smoothing) {
    return IndicatorMask::build(grid, a, b, smoothing);
}

} // namespace ksi
