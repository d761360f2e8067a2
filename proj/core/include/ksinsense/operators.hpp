#pragma once

#include "ksinsense/banded.hpp"
#include "ksinsense/grid.hpp"

namespace ksi {

/// Boundary treatment for the discrete operators. Both conditions give zero
/// boundary values; Clamped additionally imposes zero first derivative via
/// ghost reflection, which only changes the fourth-derivative stencil.
enum class BoundaryCondition { Clamped, Dirichlet };

/// Central first derivative on interior nodes, boundary values taken as 0.
/// Antisymmetric.
BandedMatrix assemble_d1(const Grid& grid,
                         BoundaryCondition bc = BoundaryCondition::Dirichlet);

/// Second derivative, 3-point stencil (1,-2,1)/h^2, zero Dirichlet. Symmetric.
BandedMatrix assemble_d2(const Grid& grid);

/// Fourth derivative, 5-point stencil (1,-4,6,-4,1)/h^4 with clamped walls
/// (u = u_x = 0) realized by ghost reflection u_{-1} = u_1, u_{N+1} = u_{N-1};
/// the rows next to each wall get diagonal value 7/h^4. Symmetric positive
/// definite.
BandedMatrix assemble_d4(const Grid& grid);

/// Convenience alias for IndicatorMask::build.
IndicatorMask build_mask(const Grid& grid, double a, double b,
                         IndicatorMask::Smoothing smoothing = IndicatorMask::Smoothing::Sharp);

} // namespace ksi
