#pragma once

#include <vector>

#include "cwgan/matrix.hpp"

namespace cwgan {

// Relative cutoff under which an eigenvalue of a Gram/covariance matrix is
// treated as zero when deciding numerical rank.
inline constexpr double kRankCutoff = 1e-12;

struct SvdResult {
    DataMatrix U;                         // n×r, orthonormal columns
    std::vector<double> singular_values;  // length r, nonincreasing, ≥ 0
    DataMatrix V;                         // d×r, orthonormal columns
};

struct EigResult {
    std::vector<double> eigenvalues;  // nonincreasing
    DataMatrix eigenvectors;          // orthonormal columns, same order
};

// Full SVD A = U·diag(σ)·V^T with r = min(rows, cols) singular values
// (trailing zeros allowed). One-sided Jacobi; deterministic for fixed input.
SvdResult svd(const DataMatrix& a);

// Largest singular value within relative error tol. Power iteration on the
// smaller Gram matrix, all-ones start, then deflation rounds so a start vector
// that happens to be orthogonal to the dominant eigenvector cannot hide it.
double spectral_norm(const DataMatrix& a, double tol = 1e-10);

// Symmetric eigendecomposition (input symmetrized internally; rejects inputs
// asymmetric beyond 1e-10 relative). Cyclic Jacobi; deterministic.
EigResult sym_eig(const DataMatrix& s);

// Q_{[:k]} Λ_{[:k]}^{-1/2} Q_{[:k]}^T for symmetric PSD S. Throws RankDeficient
// if k exceeds the numerical rank (eigenvalue < kRankCutoff·λ_max).
DataMatrix pinv_sqrt(const DataMatrix& s, std::size_t k);

// Numerical rank of A: number of singular values with σ² ≥ kRankCutoff·σ_max².
std::size_t matrix_rank(const DataMatrix& a);

}  // namespace cwgan
