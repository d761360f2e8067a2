#pragma once

// Test-only dense oracles, implemented independently of the banded paths
// they check: dense Gaussian elimination, stencil-by-definition operator
// assembly, a cyclic Jacobi eigensolver, and monolithic space-time solves of
// the cascade and adjoint systems as one linear system.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "ksinsense/solvers.hpp"

namespace oracle {

class DenseMatrix {
public:
    explicit DenseMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n_; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

private:
    int n_;
    std::vector<double> a_;
};

/// Plain Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(DenseMatrix a, std::vector<double> b) {
    const int n = a.dim();
    std::vector<int> perm(n);
    for (int j = 0; j < n; ++j) {
        int piv = j;
        for (int i = j + 1; i < n; ++i) {
            if (std::abs(a(i, j)) > std::abs(a(piv, j))) piv = i;
        }
        if (a(piv, j) == 0.0) throw std::runtime_error("dense_solve: singular");
        if (piv != j) {
            for (int c = 0; c < n; ++c) std::swap(a(j, c), a(piv, c));
            std::swap(b[j], b[piv]);
        }
        for (int i = j + 1; i < n; ++i) {
            const double l = a(i, j) / a(j, j);
            if (l == 0.0) continue;
            for (int c = j; c < n; ++c) a(i, c) -= l * a(j, c);
            b[i] -= l * b[j];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double acc = b[i];
        for (int c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    return x;
}

inline DenseMatrix dense_from_banded(const ksi::BandedMatrix& m) {
    DenseMatrix d(m.dim());
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) d(i, j) = m.get(i, j);
    }
    return d;
}

/// Stencil-by-definition assemblies on interior nodes (row loops written
/// directly from the difference formulas).
inline DenseMatrix dense_d1(int n_cells) {
    const int n = n_cells - 1;
    const double h = 1.0 / n_cells;
    DenseMatrix d(n);
    for (int i = 0; i < n; ++i) {
        if (i - 1 >= 0) d(i, i - 1) = -1.0 / (2.0 * h);
        if (i + 1 < n) d(i, i + 1) = 1.0 / (2.0 * h);
    }
    return d;
}

inline DenseMatrix dense_d2(int n_cells) {
    const int n = n_cells - 1;
    const double h = 1.0 / n_cells;
    DenseMatrix d(n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = -2.0 / (h * h);
        if (i - 1 >= 0) d(i, i - 1) = 1.0 / (h * h);
        if (i + 1 < n) d(i, i + 1) = 1.0 / (h * h);
    }
    return d;
}

inline DenseMatrix dense_d4(int n_cells) {
    const int n = n_cells - 1;
    const double h = 1.0 / n_cells;
    const double c = 1.0 / (h * h * h * h);
    DenseMatrix d(n);
    for (int i = 0; i < n; ++i) {
        d(i, i) = 6.0 * c;
        if (i - 1 >= 0) d(i, i - 1) = -4.0 * c;
        if (i + 1 < n) d(i, i + 1) = -4.0 * c;
        if (i - 2 >= 0) d(i, i - 2) = c;
        if (i + 2 < n) d(i, i + 2) = c;
    }
    d(0, 0) += c;          // ghost reflection at the left wall
    d(n - 1, n - 1) += c;  // and at the right wall
    return d;
}

/// Dense interleaved one-step matrix I + dt L from the stencil assemblies.
inline DenseMatrix dense_step_matrix(int n_cells, double dt,
                                     const ksi::PhysicsParams& p) {
    const int n = n_cells - 1;
    DenseMatrix d1 = dense_d1(n_cells);
    DenseMatrix d2 = dense_d2(n_cells);
    DenseMatrix d4 = dense_d4(n_cells);
    DenseMatrix a(2 * n);
    for (int i = 0; i < n; ++i) {
        a(2 * i, 2 * i) = 1.0;
        a(2 * i + 1, 2 * i + 1) = 1.0;
        for (int j = 0; j < n; ++j) {
            a(2 * i, 2 * j) += dt * (d4(i, j) + p.gamma * d2(i, j));
            a(2 * i, 2 * j + 1) += dt * (-d1(i, j));
            a(2 * i + 1, 2 * j) += dt * (-d1(i, j));
            a(2 * i + 1, 2 * j + 1) += dt * (-d2(i, j) + p.beta * d1(i, j));
        }
    }
    return a;
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a, int max_sweeps = 100) {
    const int n = a.dim();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        }
        double diag = 0.0;
        for (int i = 0; i < n; ++i) diag += a(i, i) * a(i, i);
        if (off <= 1e-26 * std::max(diag, 1.0)) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    return ev;
}

struct MonolithicCascade {
    ksi::SpaceTimeField y, z, p, q;
};

/// Assemble and solve the full discrete cascade as one linear system over
/// the stacked unknowns [X^1..X^M, R^{M-1}..R^0], with the same source
/// conventions as the steppers but a completely independent solve path.
inline MonolithicCascade monolithic_cascade(
    const ksi::Grid& grid, const ksi::TimeGrid& tg,
    const ksi::PhysicsParams& params, const std::vector<double>& y0,
    const std::vector<double>& z0, const ksi::SpaceTimeField* h1,
    const ksi::SpaceTimeField* h2, const ksi::SpaceTimeField* xi1,
    const ksi::SpaceTimeField* xi2, const ksi::IndicatorMask* omega,
    const ksi::IndicatorMask& obs) {
    const int n = grid.n_interior();
    const int m = tg.n_steps();
    const double dt = tg.dt();
    const int blk = 2 * n;
    const int dim = 2 * m * blk;
    DenseMatrix a_step = dense_step_matrix(grid.n_cells(), dt, params);

    DenseMatrix big(dim);
    std::vector<double> rhs(dim, 0.0);
    auto xoff = [&](int level) { return (level - 1) * blk; };          // X^1..X^M
    auto roff = [&](int level) { return (2 * m - 1 - level) * blk; };  // R^{M-1}..R^0

    auto source_at = [&](int level, int i, bool first) {
        double v = 0.0;
        if (first) {
            if (xi1) v += xi1->at(level, i);
            if (h1) v += (omega ? omega->weight(i) : 1.0) * h1->at(level, i);
        } else {
            if (xi2) v += xi2->at(level, i);
            if (h2) v += (omega ? omega->weight(i) : 1.0) * h2->at(level, i);
        }
        return v;
    };

    // Forward rows: A X^{l+1} - X^l = dt F^{l+1}.
    for (int l = 0; l < m; ++l) {
        const int row0 = xoff(l + 1);
        for (int r = 0; r < blk; ++r) {
            for (int c = 0; c < blk; ++c) {
                big(row0 + r, xoff(l + 1) + c) += a_step(r, c);
            }
            if (l >= 1) big(row0 + r, xoff(l) + r) -= 1.0;
        }
        for (int i = 0; i < n; ++i) {
            rhs[row0 + 2 * i] = dt * source_at(l + 1, i, true);
            rhs[row0 + 2 * i + 1] = dt * source_at(l + 1, i, false);
            if (l == 0) {
                rhs[row0 + 2 * i] += y0.empty() ? 0.0 : y0[i];
                rhs[row0 + 2 * i + 1] += z0.empty() ? 0.0 : z0[i];
            }
        }
    }
    // Backward rows: A^T R^j - R^{j+1} - dt w(j+1) S X^{j+1} = 0, R^M = 0.
    for (int j = m - 1; j >= 0; --j) {
        const int row0 = roff(j);
        for (int r = 0; r < blk; ++r) {
            for (int c = 0; c < blk; ++c) {
                big(row0 + r, roff(j) + c) += a_step(c, r);
            }
            if (j + 1 <= m - 1) big(row0 + r, roff(j + 1) + r) -= 1.0;
        }
        const double w = dt * ksi::obs_time_weight(j + 1, m);
        for (int i = 0; i < n; ++i) {
            big(row0 + 2 * i, xoff(j + 1) + 2 * i) -=
                w * params.alpha * obs.weight(i);
            big(row0 + 2 * i + 1, xoff(j + 1) + 2 * i + 1) -=
                w * (1.0 - params.alpha) * obs.weight(i);
        }
    }

    std::vector<double> sol = dense_solve(big, rhs);

    MonolithicCascade out{ksi::SpaceTimeField::zeros(grid, tg),
                          ksi::SpaceTimeField::zeros(grid, tg),
                          ksi::SpaceTimeField::zeros(grid, tg),
                          ksi::SpaceTimeField::zeros(grid, tg)};
    for (int i = 0; i < n; ++i) {
        out.y.at(0, i) = y0.empty() ? 0.0 : y0[i];
        out.z.at(0, i) = z0.empty() ? 0.0 : z0[i];
    }
    for (int l = 1; l <= m; ++l) {
        for (int i = 0; i < n; ++i) {
            out.y.at(l, i) = sol[xoff(l) + 2 * i];
            out.z.at(l, i) = sol[xoff(l) + 2 * i + 1];
        }
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < n; ++i) {
            out.p.at(j, i) = sol[roff(j) + 2 * i];
            out.q.at(j, i) = sol[roff(j) + 2 * i + 1];
        }
    }
    return out;
}

struct MonolithicAdjoint {
    ksi::SpaceTimeField u, w, zeta, theta;
};

/// Same monolithic construction for the adjoint system: homogeneous forward
/// pair (zeta, theta) coupled to the backward observed pair (u, w).
inline MonolithicAdjoint monolithic_adjoint(const ksi::Grid& grid,
                                            const ksi::TimeGrid& tg,
                                            const ksi::PhysicsParams& params,
                                            const std::vector<double>& zeta0,
                                            const std::vector<double>& theta0,
                                            const ksi::IndicatorMask& obs) {
    MonolithicCascade cas = monolithic_cascade(
        grid, tg, params, zeta0, theta0, nullptr, nullptr, nullptr, nullptr,
        nullptr, obs);
    return MonolithicAdjoint{std::move(cas.p), std::move(cas.q),
                             std::move(cas.y), std::move(cas.z)};
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

/// Sup-norm relative difference of two fields.
inline double field_rel_diff(const ksi::SpaceTimeField& a,
                             const ksi::SpaceTimeField& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        num = std::max(num, std::abs(a.data()[i] - b.data()[i]));
        den = std::max(den, std::abs(b.data()[i]));
    }
    return num / std::max(den, 1e-300);
}

inline std::vector<double> random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

inline ksi::SpaceTimeField random_field(const ksi::Grid& grid,
                                        const ksi::TimeGrid& tg,
                                        std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ksi::SpaceTimeField f = ksi::SpaceTimeField::zeros(grid, tg);
    for (double& v : f.data()) v = normal(rng);
    return f;
}

} // namespace oracle
