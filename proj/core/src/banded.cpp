#include "ksinsense/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ksi {

BandedMatrix::BandedMatrix(int dim, int lower_bw, int upper_bw)
    : dim_(dim), kl_(lower_bw), ku_(upper_bw), ldab_(2 * lower_bw + upper_bw + 1) {
    if (dim_ < 1 || kl_ < 0 || ku_ < 0) {
        throw Error("BandedMatrix: bad shape");
    }
    entries_.assign(static_cast<std::size_t>(dim_) * (kl_ + ku_ + 1), 0.0);
}

double BandedMatrix::get(int i, int j) const {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_) {
        throw Error("BandedMatrix::get: index out of range");
    }
    if (!in_band(i, j)) return 0.0;
    return entries_[static_cast<std::size_t>(j) * (kl_ + ku_ + 1) + (ku_ + i - j)];
}

void BandedMatrix::set(int i, int j, double v) {
    if (i < 0 || j < 0 || i >= dim_ || j >= dim_ || !in_band(i, j)) {
        throw Error("BandedMatrix::set: entry (" + std::to_string(i) + "," +
                    std::to_string(j) + ") outside the band");
    }
    entries_[static_cast<std::size_t>(j) * (kl_ + ku_ + 1) + (ku_ + i - j)] = v;
    factorized_ = false;
}

void BandedMatrix::add(int i, int j, double v) {
    set(i, j, get(i, j) + v);
}

std::vector<double> BandedMatrix::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        throw Error("BandedMatrix::apply: size mismatch");
    }
    std::vector<double> y(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(dim_ - 1, i + ku_);
        double acc = 0.0;
        for (int j = j0; j <= j1; ++j) {
            acc += get(i, j) * x[j];
        }
        y[i] = acc;
    }
    return y;
}

double BandedMatrix::norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < dim_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(dim_ - 1, i + ku_);
        double row = 0.0;
        for (int j = j0; j <= j1; ++j) {
            row += std::abs(get(i, j));
        }
        best = std::max(best, row);
    }
    return best;
}

void BandedMatrix::factorize() {
    if (factorized_) return;
    factor_.assign(static_cast<std::size_t>(dim_) * ldab_, 0.0);
    ipiv_.assign(dim_, 0);
    for (int j = 0; j < dim_; ++j) {
        const int i0 = std::max(0, j - ku_);
        const int i1 = std::min(dim_ - 1, j + kl_);
        for (int i = i0; i <= i1; ++i) {
            factor_[fidx(i, j)] = get(i, j);
        }
    }

    const double tol = 1e-14 * norm_inf();
    const int fill_ku = ku_ + kl_;
    for (int j = 0; j < dim_; ++j) {
        const int imax = std::min(j + kl_, dim_ - 1);
        int piv = j;
        double pmag = std::abs(factor_[fidx(j, j)]);
        for (int i = j + 1; i <= imax; ++i) {
            const double m = std::abs(factor_[fidx(i, j)]);
            if (m > pmag) {
                pmag = m;
                piv = i;
            }
        }
        if (!(pmag > tol)) {
            throw SingularMatrix("banded LU: pivot " + std::to_string(pmag) +
                                 " below threshold at column " + std::to_string(j));
        }
        ipiv_[j] = piv;
        const int cmax = std::min(j + fill_ku, dim_ - 1);
        if (piv != j) {
            for (int c = j; c <= cmax; ++c) {
                std::swap(factor_[fidx(j, c)], factor_[fidx(piv, c)]);
            }
        }
        const double d = factor_[fidx(j, j)];
        for (int i = j + 1; i <= imax; ++i) {
            const double l = factor_[fidx(i, j)] / d;
            factor_[fidx(i, j)] = l;
            if (l != 0.0) {
                for (int c = j + 1; c <= cmax; ++c) {
                    factor_[fidx(i, c)] -= l * factor_[fidx(j, c)];
                }
            }
        }
    }
    factorized_ = true;
}

std::vector<double> BandedMatrix::solve(std::span<const double> b) const {
    if (!factorized_) {
        throw Error("BandedMatrix::solve: call factorize() first");
    }
    if (static_cast<int>(b.size()) != dim_) {
        throw Error("BandedMatrix::solve: size mismatch");
    }
    std::vector<double> x(b.begin(), b.end());
    // x := L^{-1} P x
    for (int j = 0; j < dim_; ++j) {
        if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
        const int imax = std::min(j + kl_, dim_ - 1);
        for (int i = j + 1; i <= imax; ++i) {
            x[i] -= factor_[fidx(i, j)] * x[j];
        }
    }
    // x := U^{-1} x
    const int fill_ku = ku_ + kl_;
    for (int i = dim_ - 1; i >= 0; --i) {
        const int cmax = std::min(i + fill_ku, dim_ - 1);
        double acc = x[i];
        for (int c = i + 1; c <= cmax; ++c) {
            acc -= factor_[fidx(i, c)] * x[c];
        }
        x[i] = acc / factor_[fidx(i, i)];
    }
    return x;
}

std::vector<double> BandedMatrix::solve_transpose(std::span<const double> b) const {
    if (!factorized_) {
        throw Error("BandedMatrix::solve_transpose: call factorize() first");
    }
    if (static_cast<int>(b.size()) != dim_) {
        throw Error("BandedMatrix::solve_transpose: size mismatch");
    }
    // The factorization realizes A = P_0^T L_0 P_1^T L_1 ... U with the row
    // swaps interleaved between the elimination stages, so the transpose
    // solve must interleave them in reverse: U^T y = b first, then for each
    // column j from the last to the first apply L_j^{-T} and the swap P_j.
    std::vector<double> x(b.begin(), b.end());
    const int fill_ku = ku_ + kl_;
    for (int i = 0; i < dim_; ++i) {
        const int c0 = std::max(0, i - fill_ku);
        double acc = x[i];
        for (int c = c0; c < i; ++c) {
            acc -= factor_[fidx(c, i)] * x[c];
        }
        x[i] = acc / factor_[fidx(i, i)];
    }
    for (int j = dim_ - 1; j >= 0; --j) {
        const int rmax = std::min(j + kl_, dim_ - 1);
        double acc = x[j];
        for (int r = j + 1; r <= rmax; ++r) {
            acc -= factor_[fidx(r, j)] * x[r];
        }
        x[j] = acc;
        if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
    }
    return x;
}

BandedMatrix BandedMatrix::transpose() const {
    BandedMatrix t(dim_, ku_, kl_);
    for (int i = 0; i < dim_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(dim_ - 1, i + ku_);
        for (int j = j0; j <= j1; ++j) {
            t.set(j, i, get(i, j));
        }
    }
    return t;
}

BandedMatrix BandedMatrix::identity(int dim) {
    BandedMatrix m(dim, 0, 0);
    for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
    return m;
}

std::vector<double> banded_lu_solve(BandedMatrix& a, std::span<const double> b) {
    a.factorize();
    return a.solve(b);
}

} // namespace ksi
