#include "ddoc/numerics.hpp"

#include <Eigen/SVD>
#include <atomic>
#include <limits>

#include "ddoc/errors.hpp"

namespace ddoc {

namespace {

std::atomic<std::int64_t> g_factorizations{0};

void require_finite(const Matrix& m, const char* name) {
    if (m.size() == 0) throw InvalidInputError(std::string(name) + " is empty");
    if (!m.allFinite()) throw InvalidInputError(std::string(name) + " has non-finite entries");
}

Eigen::BDCSVD<Matrix> svd_of(const Matrix& m, unsigned options) {
    ++g_factorizations;
    return Eigen::BDCSVD<Matrix>(m, options);
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double relative_cutoff) {
    if (sv.size() == 0) return 0;
    const double threshold = relative_cutoff * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > threshold) ++rank;
    return rank;
}

}  // namespace

RankTolerance RankTolerance::standard(Eigen::Index rows, Eigen::Index cols) {
    const double dim = static_cast<double>(std::max(rows, cols));
    return RankTolerance{dim * std::numeric_limits<double>::epsilon()};
}

Matrix pseudoinverse(const Matrix& m, const RankTolerance& tol) {
    require_finite(m, "matrix");
    if (tol.relative_cutoff <= 0.0) throw InvalidInputError("rank cutoff must be positive");
    const auto svd = svd_of(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int rank = rank_from_singular_values(sv, tol.relative_cutoff);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

int numerical_rank(const Matrix& m, const RankTolerance& tol) {
    require_finite(m, "matrix");
    if (tol.relative_cutoff <= 0.0) throw InvalidInputError("rank cutoff must be positive");
    const auto svd = svd_of(m, 0);
    return rank_from_singular_values(svd.singularValues(), tol.relative_cutoff);
}

Matrix weighted_min_norm_map(const Matrix& h, const Matrix& q, const RankTolerance& tol) {
    require_finite(h, "H");
    require_finite(q, "Q");
    if (q.cols() != h.cols())
        throw InvalidInputError("Q must have as many columns as H");
    if (tol.relative_cutoff <= 0.0) throw InvalidInputError("rank cutoff must be positive");
    // (I - (Q(I - H^+H))^+ Q) H^+, with the nullspace projector I - H^+H
    // expressed through an orthonormal basis N: (Q N N^T)^+ = N (Q N)^+, so
    // the map becomes (I - N (Q N)^+ Q) H^+. Working with N avoids keeping
    // roundoff-level singular values of the projector product alive.
    ++g_factorizations;
    Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int rank = rank_from_singular_values(sv, tol.relative_cutoff);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (int i = 0; i < rank; ++i) inv(i) = 1.0 / sv(i);
    const Matrix h_pinv = svd.matrixV().leftCols(sv.size()) * inv.asDiagonal() *
                          svd.matrixU().transpose();
    if (rank == h.cols()) return h_pinv;  // trivial nullspace
    const Matrix null_basis = svd.matrixV().rightCols(h.cols() - rank);
    const Matrix k_pinv = pseudoinverse(q * null_basis, tol);
    return h_pinv - null_basis * (k_pinv * (q * h_pinv));
}

Vector weighted_min_norm_solve(const Matrix& h, const Vector& g, const Matrix& q,
                               const RankTolerance& tol, double feasibility_rel) {
    if (g.size() != h.rows()) throw InvalidInputError("g length must match rows of H");
    if (!g.allFinite()) throw InvalidInputError("g has non-finite entries");
    const Vector beta = weighted_min_norm_map(h, q, tol) * g;
    const double residual = (h * beta - g).norm();
    if (residual > feasibility_rel * (1.0 + g.norm()))
        throw InfeasibleError("H*beta = g is inconsistent, residual " + std::to_string(residual),
                              residual);
    return beta;
}

std::int64_t factorization_count() { return g_factorizations.load(); }

}  // namespace ddoc
