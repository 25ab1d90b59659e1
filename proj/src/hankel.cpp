#include "ddoc/hankel.hpp"

#include <Eigen/QR>

#include "ddoc/errors.hpp"

namespace ddoc {

Trajectory::Trajectory(Matrix u, Matrix y) : inputs(std::move(u)), outputs(std::move(y)) {
    if (inputs.cols() != outputs.cols())
        throw InvalidInputError("inputs and outputs must have equal length");
    if (inputs.rows() < 1 || outputs.rows() < 1)
        throw InvalidInputError("input and output dimensions must be at least 1");
    if (!inputs.allFinite() || !outputs.allFinite())
        throw InvalidInputError("trajectory has non-finite entries");
}

Vector Trajectory::stacked(int first, int last) const {
    if (first < 0 || last >= length() || first > last)
        throw InvalidIndexError("trajectory range out of bounds");
    const int m = input_dim(), p = output_dim(), len = last - first + 1;
    Vector v(m * len + p * len);
    for (int k = 0; k < len; ++k) v.segment(k * m, m) = inputs.col(first + k);
    for (int k = 0; k < len; ++k) v.segment(m * len + k * p, p) = outputs.col(first + k);
    return v;
}

Trajectory Trajectory::segment(int first, int len) const {
    if (first < 0 || len < 1 || first + len > length())
        throw InvalidIndexError("trajectory segment out of bounds");
    return Trajectory(inputs.middleCols(first, len), outputs.middleCols(first, len));
}

Matrix HankelBlock::block_rows(int a, int b) const {
    if (a < 1 || b > depth || a > b)
        throw InvalidIndexError("block row range [" + std::to_string(a) + "," +
                                std::to_string(b) + "] out of [1," + std::to_string(depth) + "]");
    return matrix.middleRows((a - 1) * block_size, (b - a + 1) * block_size);
}

HankelBlock build_hankel(const Matrix& signal, int depth) {
    const int n = static_cast<int>(signal.cols());
    const int dim = static_cast<int>(signal.rows());
    if (depth < 1) throw InvalidDepthError("Hankel depth must be at least 1");
    if (depth > n)
        throw InvalidDepthError("Hankel depth " + std::to_string(depth) +
                                " exceeds signal length " + std::to_string(n));
    if (!signal.allFinite()) throw InvalidInputError("signal has non-finite entries");
    HankelBlock h;
    h.depth = depth;
    h.block_size = dim;
    h.matrix.resize(depth * dim, n - depth + 1);
    for (int i = 0; i < depth; ++i)
        for (int j = 0; j <= n - depth; ++j) h.matrix.block(i * dim, j, dim, 1) = signal.col(i + j);
    return h;
}

bool is_persistently_exciting(const Matrix& u, int order, const RankTolerance& tol) {
    const int m = static_cast<int>(u.rows());
    const int n = static_cast<int>(u.cols());
    if (order > n) throw InvalidDepthError("excitation order exceeds signal length");
    // Necessary column-count bound: rank cannot reach m*L with fewer columns.
    if (static_cast<long>(m) * order > n - order + 1) return false;
    const HankelBlock h = build_hankel(u, order);
    return numerical_rank(h.matrix, tol) == m * order;
}

namespace {

Matrix stacked_data(const HankelBlock& u_data, const HankelBlock& y_data) {
    if (u_data.depth != y_data.depth)
        throw InvalidInputError("input and output Hankel blocks must share depth");
    if (u_data.cols() != y_data.cols())
        throw InvalidInputError("input and output Hankel blocks must share column count");
    Matrix stacked(u_data.matrix.rows() + y_data.matrix.rows(), u_data.cols());
    stacked << u_data.matrix, y_data.matrix;
    return stacked;
}

}  // namespace

double trajectory_residual(const Trajectory& candidate, const HankelBlock& u_data,
                           const HankelBlock& y_data) {
    const int depth = u_data.depth;
    if (candidate.length() != depth)
        throw InvalidInputError("candidate length must equal Hankel depth");
    if (candidate.input_dim() != u_data.block_size || candidate.output_dim() != y_data.block_size)
        throw InvalidInputError("candidate dimensions do not match data");
    const Matrix stacked = stacked_data(u_data, y_data);
    const Vector rhs = candidate.stacked(0, depth - 1);
    const Vector alpha = stacked.completeOrthogonalDecomposition().solve(rhs);
    return (stacked * alpha - rhs).norm();
}

Trajectory expand(const Vector& alpha, const HankelBlock& u_data, const HankelBlock& y_data) {
    if (alpha.size() != u_data.cols())
        throw InvalidInputError("coefficient length must equal Hankel column count");
    const Matrix stacked = stacked_data(u_data, y_data);
    const Vector z = stacked * alpha;
    const int depth = u_data.depth;
    const int m = u_data.block_size, p = y_data.block_size;
    Matrix u(m, depth), y(p, depth);
    for (int k = 0; k < depth; ++k) {
        u.col(k) = z.segment(k * m, m);
        y.col(k) = z.segment(depth * m + k * p, p);
    }
    return Trajectory(std::move(u), std::move(y));
}

}  // namespace ddoc
