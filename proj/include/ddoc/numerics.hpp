#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace ddoc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative singular value cutoff: singular values below
// relative_cutoff * sigma_max are treated as zero.
struct RankTolerance {
    double relative_cutoff;

    // Standard SVD-based convention: max(rows, cols) * machine epsilon.
    static RankTolerance standard(Eigen::Index rows, Eigen::Index cols);
};

// Moore-Penrose pseudoinverse via SVD with relative rank cutoff.
Matrix pseudoinverse(const Matrix& m, const RankTolerance& tol);

// Number of singular values above relative_cutoff * sigma_max.
int numerical_rank(const Matrix& m, const RankTolerance& tol);

// Solves min ||Q*beta|| s.t. H*beta = g for a consistent system, via
//   beta = (I - (Q(I - H^+ H))^+ Q) H^+ g.
// Ties are broken by the minimum-norm property of the pseudoinverse.
// Throws InfeasibleError when ||H*beta - g|| > feasibility_rel * (1 + ||g||).
Vector weighted_min_norm_solve(const Matrix& h, const Vector& g, const Matrix& q,
                               const RankTolerance& tol, double feasibility_rel = 1e-6);

// The linear map g -> beta realizing weighted_min_norm_solve; computed once
// so repeated solves against the same (H, Q) are matrix-vector products.
Matrix weighted_min_norm_map(const Matrix& h, const Matrix& q, const RankTolerance& tol);

// Process-wide count of dense factorizations performed by this module.
// Lets tests assert that a hot path does no fresh factorization work.
std::int64_t factorization_count();

}  // namespace ddoc
