#include "ksinsense/stepper.hpp"

namespace ksi {

namespace {

/// Assemble I + c*L on the interleaved pair layout.
BandedMatrix assemble_identity_plus(const Grid& grid, const PhysicsParams& p,
                                    double c) {
    const int n = grid.n_interior();
    const BandedMatrix d1 = assemble_d1(grid);
    const BandedMatrix d2 = assemble_d2(grid);
    const BandedMatrix d4 = assemble_d4(grid);

    BandedMatrix m(2 * n, 4, 4);
    for (int i = 0; i < n; ++i) {
        m.set(idx_a(i), idx_a(i), 1.0);
        m.set(idx_b(i), idx_b(i), 1.0);
        const int j0 = std::max(0, i - 2);
        const int j1 = std::min(n - 1, i + 2);
        for (int j = j0; j <= j1; ++j) {
            const double laa = d4.get(i, j) + p.gamma * d2.get(i, j);
            const double lab = -d1.get(i, j);
            const double lba = -d1.get(i, j);
            const double lbb = -d2.get(i, j) + p.beta * d1.get(i, j);
            if (laa != 0.0) m.add(idx_a(i), idx_a(j), c * laa);
            if (lab != 0.0) m.add(idx_a(i), idx_b(j), c * lab);
            if (lba != 0.0) m.add(idx_b(i), idx_a(j), c * lba);
            if (lbb != 0.0) m.add(idx_b(i), idx_b(j), c * lbb);
        }
    }
    return m;
}

} // namespace

BandedMatrix step_operator(const Grid& grid, const TimeGrid& tg,
                           const PhysicsParams& params, StepDirection direction) {
    params.validate();
    BandedMatrix a = assemble_identity_plus(grid, params, tg.dt());
    switch (direction) {
        case StepDirection::Forward:
        case StepDirection::ForwardAdjoint:
            return a;
        case StepDirection::BackwardCascade:
        case StepDirection::BackwardAdjoint:
            return a.transpose();
    }
    throw Error("step_operator: bad direction");
}

CrankNicolsonPair crank_nicolson_operators(const Grid& grid, const TimeGrid& tg,
                                           const PhysicsParams& params) {
    params.validate();
    return CrankNicolsonPair{
        assemble_identity_plus(grid, params, 0.5 * tg.dt()),
        assemble_identity_plus(grid, params, -0.5 * tg.dt()),
    };
}

} // namespace ksi
