#pragma once

#include <span>
#include <vector>

#include "ksinsense/errors.hpp"

namespace ksi {

/// Square banded matrix with LU factorization (partial pivoting).
///
/// Storage follows the LAPACK band convention: entry (i,j) lives at
/// band row kl + ku + i - j of column j, with kl extra super-diagonal
/// rows reserved for pivoting fill. After factorize() the storage holds
/// the LU factors; the logical pre-factor entries are kept separately so
/// get()/apply() keep working.
class BandedMatrix {
public:
    BandedMatrix(int dim, int lower_bw, int upper_bw);

    int dim() const { return dim_; }
    int lower_bw() const { return kl_; }
    int upper_bw() const { return ku_; }

    double get(int i, int j) const;
    void set(int i, int j, double v);
    void add(int i, int j, double v);

    /// y = A x (pre-factor entries).
    std::vector<double> apply(std::span<const double> x) const;

    /// Max absolute row sum of the pre-factor matrix.
    double norm_inf() const;

    /// LU with partial pivoting; throws SingularMatrix when a pivot falls
    /// below 1e-14 * norm_inf(). Idempotent.
    void factorize();
    bool factorized() const { return factorized_; }

    /// Solve A x = b using the cached factorization (factorizes on first use
    /// via banded_lu_solve; call factorize() beforehand for const access).
    std::vector<double> solve(std::span<const double> b) const;

    /// Solve A^T x = b using the same factorization.
    std::vector<double> solve_transpose(std::span<const double> b) const;

    /// Entry-wise transpose (pre-factor entries).
    BandedMatrix transpose() const;

    static BandedMatrix identity(int dim);

private:
    bool in_band(int i, int j) const {
        return i - j <= kl_ && j - i <= ku_;
    }
    // Index into the factor storage; valid for j - i <= ku_ + kl_ (fill).
    std::size_t fidx(int i, int j) const {
        return static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j);
    }

    int dim_;
    int kl_;
    int ku_;
    int ldab_;                   // 2*kl + ku + 1
    std::vector<double> entries_; // pre-factor values, band layout without fill
    std::vector<double> factor_;  // LU payload with fill rows
    std::vector<int> ipiv_;
    bool factorized_ = false;
};

/// Solve a x = b, factorizing a if needed (cached for repeated solves).
std::vector<double> banded_lu_solve(BandedMatrix& a, std::span<const double> b);

} // namespace ksi
