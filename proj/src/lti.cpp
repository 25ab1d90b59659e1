#include "ddoc/lti.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <limits>

#include "ddoc/errors.hpp"

namespace ddoc {

namespace {

Matrix kalman_controllability(const Matrix& a, const Matrix& b, int blocks) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(b.cols());
    Matrix k(n, m * blocks);
    Matrix power = b;
    for (int i = 0; i < blocks; ++i) {
        k.middleCols(i * m, m) = power;
        power = a * power;
    }
    return k;
}

bool full_rank(const Matrix& m, int expected) {
    return numerical_rank(m, RankTolerance::standard(m.rows(), m.cols())) == expected;
}

Matrix steady_state_matrix(const LtiSystem& sys) {
    const int n = sys.order(), m = sys.input_dim(), p = sys.output_dim();
    Matrix mat(n + p, n + m);
    mat.topLeftCorner(n, n) = Matrix::Identity(n, n) - sys.a();
    mat.topRightCorner(n, m) = -sys.b();
    mat.bottomLeftCorner(p, n) = sys.c();
    mat.bottomRightCorner(p, m) = sys.d();
    return mat;
}

}  // namespace

LtiSystem::LtiSystem(Matrix a, Matrix b, Matrix c, Matrix d, Vector x0)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), x_(std::move(x0)) {
    const int n = static_cast<int>(a_.rows());
    const int m = static_cast<int>(b_.cols());
    const int p = static_cast<int>(c_.rows());
    if (n < 1 || m < 1 || p < 1) throw InvalidSystemError("dimensions must be at least 1");
    if (a_.cols() != n || b_.rows() != n || c_.cols() != n || d_.rows() != p || d_.cols() != m ||
        x_.size() != n)
        throw InvalidSystemError("inconsistent system dimensions");
    if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite() || !d_.allFinite() ||
        !x_.allFinite())
        throw InvalidSystemError("system matrices must be finite");
    if (!full_rank(kalman_controllability(a_, b_, n), n))
        throw InvalidSystemError("(A, B) is not controllable");
    if (!full_rank(kalman_controllability(a_.transpose(), c_.transpose(), n), n))
        throw InvalidSystemError("(A, C) is not observable");
}

void LtiSystem::set_state(const Vector& x) {
    if (x.size() != order()) throw InvalidInputError("state dimension mismatch");
    x_ = x;
}

Vector LtiSystem::step(const Vector& u) {
    if (u.size() != input_dim()) throw InvalidInputError("input dimension mismatch");
    const Vector y = c_ * x_ + d_ * u;
    x_ = a_ * x_ + b_ * u;
    return y;
}

Trajectory LtiSystem::simulate(const Matrix& u) {
    if (u.rows() != input_dim()) throw InvalidInputError("input dimension mismatch");
    const int steps = static_cast<int>(u.cols());
    Matrix y(output_dim(), steps);
    for (int t = 0; t < steps; ++t) y.col(t) = step(u.col(t));
    return Trajectory(u, std::move(y));
}

int controllability_index(const LtiSystem& sys) {
    const int n = sys.order();
    for (int k = 1; k <= n; ++k) {
        const Matrix kk = kalman_controllability(sys.a(), sys.b(), k);
        if (numerical_rank(kk, RankTolerance::standard(kk.rows(), kk.cols())) == n) return k;
    }
    throw InvalidSystemError("(A, B) is not controllable");
}

SteadyStatePair model_steady_state(const LtiSystem& sys, const Vector& y_target, const Vector& v) {
    const int n = sys.order(), m = sys.input_dim(), p = sys.output_dim();
    if (y_target.size() != p || v.size() != m)
        throw InvalidInputError("steady-state target dimension mismatch");
    const Matrix mat = steady_state_matrix(sys);
    if (!full_rank(mat, n + p))
        throw NoSteadyStateError("[I-A, -B; C, D] does not have full row rank");

    Vector rhs = Vector::Zero(n + p);
    rhs.tail(p) = y_target;

    // min ||u - v|| over solutions z = (x, u) of mat*z = rhs: move along an
    // orthonormal nullspace basis toward v in the input coordinates.
    Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) inv(i) = 1.0 / sv(i);
    Vector z = svd.matrixV().leftCols(sv.size()) * (inv.asDiagonal() *
                                                    (svd.matrixU().transpose() * rhs));
    if (m > p) {
        const Matrix null_basis = svd.matrixV().rightCols(m - p);
        const Matrix input_directions = null_basis.bottomRows(m);
        // entries are bounded by 1, so an absolute cutoff is meaningful
        Eigen::BDCSVD<Matrix> dir_svd(input_directions,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& dsv = dir_svd.singularValues();
        const double floor = 64.0 * std::numeric_limits<double>::epsilon();
        Eigen::VectorXd dinv = Eigen::VectorXd::Zero(dsv.size());
        for (Eigen::Index i = 0; i < dsv.size(); ++i)
            if (dsv(i) > floor) dinv(i) = 1.0 / dsv(i);
        const Vector w = dir_svd.matrixV() * (dinv.asDiagonal() * (dir_svd.matrixU().transpose() *
                                                                   (v - z.tail(m))));
        z += null_basis * w;
    }

    const double residual = (mat * z - rhs).norm();
    if (residual > 1e-8 * (1.0 + rhs.norm()))
        throw NoSteadyStateError("steady-state equations unsolvable, residual " +
                                 std::to_string(residual));
    return SteadyStatePair{z.tail(m), z.head(n)};
}

Vector steady_output_for_input(const LtiSystem& sys, const Vector& u) {
    if (u.size() != sys.input_dim()) throw InvalidInputError("input dimension mismatch");
    const int n = sys.order();
    const Matrix lhs = Matrix::Identity(n, n) - sys.a();
    const Vector rhs = sys.b() * u;
    const Vector x = lhs.completeOrthogonalDecomposition().solve(rhs);
    if ((lhs * x - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
        throw NoSteadyStateError("no steady state exists for the given input");
    return sys.c() * x + sys.d() * u;
}

LtiSystem random_system(const SystemSpec& spec, Rng& rng) {
    if (spec.n < 1 || spec.m < 1 || spec.p < 1)
        throw InvalidInputError("system dimensions must be at least 1");
    const double bound = spec.entry_bound;
    const Matrix b = rng.uniform_matrix(spec.n, spec.m, -bound, bound);
    const Matrix c = rng.uniform_matrix(spec.p, spec.n, -bound, bound);
    const Matrix d = rng.uniform_matrix(spec.p, spec.m, -bound, bound);
    constexpr int kMaxTries = 1000;
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        const Matrix a = rng.uniform_matrix(spec.n, spec.n, -bound, bound);
        if (!full_rank(kalman_controllability(a, b, spec.n), spec.n)) continue;
        if (!full_rank(kalman_controllability(a.transpose(), c.transpose(), spec.n), spec.n))
            continue;
        LtiSystem sys(a, b, c, d, Vector::Zero(spec.n));
        if (spec.p <= spec.m && !full_rank(steady_state_matrix(sys), spec.n + spec.p)) continue;
        return sys;
    }
    throw GenerationFailureError("no admissible random system after " +
                                 std::to_string(kMaxTries) + " attempts");
}

LtiSystem make_system(const SystemSpec& spec) {
    if (spec.mode == SystemSpec::Mode::explicit_matrices)
        return LtiSystem(spec.a, spec.b, spec.c, spec.d, Vector::Zero(spec.a.rows()));
    Rng rng = Rng::stream(spec.seed, /*stream_id=*/5);
    return random_system(spec, rng);
}

std::pair<Trajectory, double> solve_hindsight(const LtiSystem& sys, const CostSchedule& schedule,
                                              const Vector& xbar) {
    const int n = sys.order(), m = sys.input_dim(), p = sys.output_dim();
    if (xbar.size() != n) throw InvalidInputError("initial state dimension mismatch");
    for (const auto& [time, pair] : schedule.entries())
        if (!pair.quadratic_tracking_family)
            throw InvalidInputError("hindsight solver supports the quadratic tracking family");

    const int horizon = schedule.horizon();
    const int steps = horizon + 1;
    const int vars = (m + n) * steps;        // (u_t, x_t) interleaved per step
    const int constraints = n * steps;        // x_0 pin + dynamics
    const int dim = vars + constraints;

    const Matrix uu = Matrix::Identity(m, m) + sys.d().transpose() * sys.d();
    const Matrix ux = sys.d().transpose() * sys.c();
    const Matrix xx = sys.c().transpose() * sys.c();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(steps) * (m + n) * (m + n) * 2);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);

    auto u_off = [&](int t) { return t * (m + n); };
    auto x_off = [&](int t) { return t * (m + n) + m; };
    auto push_block = [&](int row, int col, const Matrix& block) {
        for (int j = 0; j < block.cols(); ++j)
            for (int i = 0; i < block.rows(); ++i)
                if (block(i, j) != 0.0) trip.emplace_back(row + i, col + j, block(i, j));
    };

    for (int t = 0; t < steps; ++t) {
        const CostPair& cost = schedule.cost_at(t);
        push_block(u_off(t), u_off(t), uu);
        push_block(u_off(t), x_off(t), ux);
        push_block(x_off(t), u_off(t), ux.transpose());
        push_block(x_off(t), x_off(t), xx);
        rhs.segment(u_off(t), m) = cost.eta + sys.d().transpose() * cost.theta;
        rhs.segment(x_off(t), n) = sys.c().transpose() * cost.theta;
    }

    const Matrix eye_n = Matrix::Identity(n, n);
    auto lam_off = [&](int t) { return vars + t * n; };
    // x_0 = xbar
    push_block(lam_off(0), x_off(0), eye_n);
    push_block(x_off(0), lam_off(0), eye_n);
    rhs.segment(lam_off(0), n) = xbar;
    // x_{t+1} - A x_t - B u_t = 0
    for (int t = 0; t < horizon; ++t) {
        push_block(lam_off(t + 1), x_off(t + 1), eye_n);
        push_block(lam_off(t + 1), x_off(t), -sys.a());
        push_block(lam_off(t + 1), u_off(t), -sys.b());
        push_block(x_off(t + 1), lam_off(t + 1), eye_n);
        push_block(x_off(t), lam_off(t + 1), -sys.a().transpose());
        push_block(u_off(t), lam_off(t + 1), -sys.b().transpose());
    }

    Eigen::SparseMatrix<double> kkt(dim, dim);
    kkt.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(kkt);
    if (solver.info() != Eigen::Success)
        throw NumericalFailureError("hindsight KKT factorization failed");
    const Eigen::VectorXd sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
        throw NumericalFailureError("hindsight KKT solve failed");

    Matrix u_opt(m, steps), y_opt(p, steps);
    double total = 0.0;
    for (int t = 0; t < steps; ++t) {
        const Vector ut = sol.segment(u_off(t), m);
        const Vector xt = sol.segment(x_off(t), n);
        u_opt.col(t) = ut;
        y_opt.col(t) = sys.c() * xt + sys.d() * ut;
        total += schedule.cost_at(t).value(ut, y_opt.col(t));
    }
    return {Trajectory(std::move(u_opt), std::move(y_opt)), total};
}

}  // namespace ddoc
