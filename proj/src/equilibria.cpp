#include "ddoc/equilibria.hpp"

#include <Eigen/SVD>

#include "ddoc/errors.hpp"

namespace ddoc {

namespace {

Matrix ones_kron_identity(int copies, int dim) {
    Matrix m = Matrix::Zero(copies * dim, dim);
    for (int i = 0; i < copies; ++i) m.middleRows(i * dim, dim) = Matrix::Identity(dim, dim);
    return m;
}

}  // namespace

SteadyMaps compute_steady_maps(const Trajectory& data, int n_bar, const RankTolerance& tol) {
    if (n_bar < 1) throw InvalidInputError("order bound must be at least 1");
    const int required_order = 2 * n_bar + 1;
    if (data.length() < required_order ||
        !is_persistently_exciting(data.inputs, required_order, tol))
        throw InsufficientExcitationError(
            "data input is not persistently exciting of order " + std::to_string(required_order),
            required_order);

    const int m = data.input_dim(), p = data.output_dim();
    const HankelBlock hu = build_hankel(data.inputs, n_bar + 1);
    const HankelBlock hy = build_hankel(data.outputs, n_bar + 1);
    Matrix h(hu.matrix.rows() + hy.matrix.rows(), hu.cols());
    h << hu.matrix, hy.matrix;

    // H H^+ - I is minus the projector onto the orthogonal complement of
    // range(H). Factoring everything through an orthonormal basis of that
    // complement keeps the maps and their pseudoinverses exact rank-limited
    // quantities, independent of the conditioning of H.
    Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeFullU);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol.relative_cutoff * sv(0)) ++rank;
    const Matrix complement = svd.matrixU().rightCols(h.rows() - rank);

    Matrix in_selector = Matrix::Zero(h.rows(), m);
    in_selector.topRows(hu.matrix.rows()) = ones_kron_identity(n_bar + 1, m);
    Matrix out_selector = Matrix::Zero(h.rows(), p);
    out_selector.bottomRows(hy.matrix.rows()) = ones_kron_identity(n_bar + 1, p);
    const Matrix in_directions = complement.transpose() * in_selector;
    const Matrix out_directions = complement.transpose() * out_selector;

    SteadyMaps maps;
    maps.n_bar = n_bar;
    maps.s_u = -complement * in_directions;
    maps.s_y = -complement * out_directions;
    if (complement.cols() == 0) {  // data numerically spans everything
        maps.s_u_pinv = Matrix::Zero(m, h.rows());
        maps.p0 = Matrix::Identity(m, m);
        maps.su_pinv_sy = Matrix::Zero(m, p);
        return maps;
    }
    const Matrix in_pinv = pseudoinverse(
        in_directions, RankTolerance::standard(in_directions.rows(), in_directions.cols()));
    maps.s_u_pinv = -in_pinv * complement.transpose();
    maps.p0 = Matrix::Identity(m, m) - in_pinv * in_directions;
    maps.su_pinv_sy = in_pinv * out_directions;
    return maps;
}

double equilibrium_residual(const SteadyMaps& maps, const Vector& u, const Vector& y) {
    if (u.size() != maps.s_u.cols() || y.size() != maps.s_y.cols())
        throw InvalidInputError("dimension mismatch against steady maps");
    return (maps.s_u * u + maps.s_y * y).norm();
}

double equilibrium_residual_by_definition(const HankelBlock& u_data, const HankelBlock& y_data,
                                          const Vector& u, const Vector& y) {
    const int depth = u_data.depth;
    Matrix cu(u.size(), depth), cy(y.size(), depth);
    for (int k = 0; k < depth; ++k) {
        cu.col(k) = u;
        cy.col(k) = y;
    }
    return trajectory_residual(Trajectory(std::move(cu), std::move(cy)), u_data, y_data);
}

Vector nearest_steady_input(const SteadyMaps& maps, const Vector& v, const Vector& y,
                            double feasibility_rel) {
    if (v.size() != maps.s_u.cols() || y.size() != maps.s_y.cols())
        throw InvalidInputError("dimension mismatch against steady maps");
    const Vector u = maps.p0 * v - maps.su_pinv_sy * y;
    const double residual = equilibrium_residual(maps, u, y);
    if (residual > feasibility_rel * (1.0 + u.norm() + y.norm()))
        throw InfeasibleOutputError(
            "requested output is not a steady-state output (residual " +
                std::to_string(residual) + ")",
            residual);
    return u;
}

}  // namespace ddoc
