#include "ddoc/controller.hpp"

#include "ddoc/costs.hpp"
#include "ddoc/errors.hpp"

namespace ddoc {

namespace {

Vector repeat_block(const Vector& block, int copies) {
    Vector out(block.size() * copies);
    for (int i = 0; i < copies; ++i) out.segment(i * block.size(), block.size()) = block;
    return out;
}

Vector stack_window(const std::deque<Vector>& window, int dim) {
    Vector out(static_cast<Eigen::Index>(window.size()) * dim);
    Eigen::Index at = 0;
    for (const Vector& v : window) {
        out.segment(at, dim) = v;
        at += dim;
    }
    return out;
}

}  // namespace

RankTolerance ControllerConfig::rank_tolerance(Eigen::Index rows, Eigen::Index cols) const {
    if (rank_cutoff > 0.0) return RankTolerance{rank_cutoff};
    return RankTolerance::standard(rows, cols);
}

RankTolerance ControllerConfig::steady_rank_tolerance(Eigen::Index rows,
                                                      Eigen::Index cols) const {
    if (steady_rank_cutoff > 0.0) return RankTolerance{steady_rank_cutoff};
    return rank_tolerance(rows, cols);
}

void ControllerConfig::validate() const {
    if (gamma_u <= 0.0 || gamma_y <= 0.0) throw InvalidInputError("step sizes must be positive");
    if (n_bar < 1) throw InvalidInputError("order bound n_bar must be at least 1");
    if (mu < 0) throw InvalidInputError("prediction horizon must be nonnegative");
    if (feasibility_rel <= 0.0) throw InvalidInputError("feasibility tolerance must be positive");
    if (weight.transient_weight < 0.0) throw InvalidInputError("transient weight must be >= 0");
}

Vector DataMatrices::omega_rhs(const Vector& v) const {
    Vector rhs = Vector::Zero(h_alpha.rows());
    rhs.segment(m * config.n_bar, m * mu_tilde) = repeat_block(v, mu_tilde);
    return rhs;
}

DataMatrices precompute(const Trajectory& data, const ControllerConfig& config) {
    config.validate();
    DataMatrices dm;
    dm.config = config;
    dm.config.mu = config.resolved_mu();
    const int n = config.n_bar;
    const int mu = dm.config.mu;
    dm.mu_tilde = n + mu + 1;
    dm.m = data.input_dim();
    dm.p = data.output_dim();

    const int pe_order = 3 * n + mu + 1;
    const int min_length = (dm.m + 1) * pe_order - 1;
    if (data.length() < min_length)
        throw DataTooShortError("need at least " + std::to_string(min_length) +
                                " samples for excitation order " + std::to_string(pe_order) +
                                ", got " + std::to_string(data.length()));
    const RankTolerance pe_tol =
        dm.config.rank_tolerance(static_cast<Eigen::Index>(dm.m) * pe_order,
                                 data.length() - pe_order + 1);
    if (!is_persistently_exciting(data.inputs, pe_order, pe_tol))
        throw InsufficientExcitationError(
            "data input is not persistently exciting of order " + std::to_string(pe_order),
            pe_order);

    const int depth = 2 * n + mu + 1;
    dm.u_data = build_hankel(data.inputs, depth);
    dm.y_data = build_hankel(data.outputs, depth);
    dm.cols = dm.u_data.cols();

    const int mt = dm.mu_tilde;
    dm.h_alpha.resize(dm.m * depth + dm.p * n, dm.cols);
    dm.h_alpha << dm.u_data.matrix, dm.y_data.block_rows(1, n);

    dm.h_beta.resize(dm.m * (2 * n + 1) + dm.p * 2 * n, dm.cols);
    dm.h_beta << dm.u_data.block_rows(1, n), dm.u_data.block_rows(mt, mt + n),
        dm.y_data.block_rows(1, n), dm.y_data.block_rows(mt, mt + n - 1);

    const RankTolerance tol = dm.config.rank_tolerance(dm.h_alpha.rows(), dm.h_alpha.cols());
    dm.h_alpha_pinv = pseudoinverse(dm.h_alpha, tol);

    Matrix selector = Matrix::Zero(dm.h_alpha.rows(), dm.m);
    for (int i = 0; i < mt; ++i)
        selector.middleRows(dm.m * n + i * dm.m, dm.m) = Matrix::Identity(dm.m, dm.m);
    dm.omega_map = dm.h_alpha_pinv * selector;

    if (config.weight.custom.has_value()) {
        dm.weight = *config.weight.custom;
        if (dm.weight.cols() != dm.cols)
            throw InvalidInputError("custom weight must have one column per Hankel column");
    } else {
        const Matrix transient_u = dm.u_data.block_rows(n + 1, n + mu);
        const Matrix transient_y = dm.y_data.block_rows(n + 1, n + mu);
        const int id_rows = config.weight.identity_regularization ? dm.cols : 0;
        dm.weight.resize(transient_u.rows() + transient_y.rows() + id_rows, dm.cols);
        dm.weight.topRows(transient_u.rows()) = config.weight.transient_weight * transient_u;
        dm.weight.middleRows(transient_u.rows(), transient_y.rows()) =
            config.weight.transient_weight * transient_y;
        if (id_rows > 0) dm.weight.bottomRows(id_rows) = Matrix::Identity(dm.cols, dm.cols);
    }
    dm.correction_map = weighted_min_norm_map(
        dm.h_beta, dm.weight, dm.config.rank_tolerance(dm.h_beta.rows(), dm.h_beta.cols()));

    dm.y_prediction = dm.y_data.block_row(mt);
    dm.u_terminal = dm.u_data.block_rows(mt, mt + n);
    dm.y_terminal = dm.y_data.block_rows(mt, mt + n - 1);
    dm.u_future = dm.u_data.block_rows(n + 1, mt);

    dm.steady = compute_steady_maps(
        data, n,
        dm.config.steady_rank_tolerance(static_cast<Eigen::Index>(dm.m + dm.p) * (n + 1),
                                        data.length() - n));
    return dm;
}

Vector compute_omega(const DataMatrices& dm, const Vector& v) {
    if (v.size() != dm.m) throw InvalidInputError("v dimension mismatch");
    return dm.omega_map * v;
}

Vector compute_alpha(const DataMatrices& dm, const ControllerState& state) {
    const int n = dm.config.n_bar, m = dm.m, p = dm.p, mu = dm.config.mu;
    if (static_cast<int>(state.u_window.size()) != n ||
        static_cast<int>(state.y_window.size()) != n)
        throw InvalidInputError("state windows must hold exactly n_bar entries");
    Vector rhs(dm.h_alpha.rows());
    rhs.segment(0, m * n) = stack_window(state.u_window, m);
    rhs.segment(m * n, m * mu) = state.u_hat_prev.tail(m * mu);
    rhs.segment(m * (n + mu), m * (n + 1)) =
        repeat_block(state.us_prev - state.v_prev, n + 1);
    rhs.segment(m * (2 * n + mu + 1), p * n) = stack_window(state.y_window, p);

    const Vector alpha = dm.h_alpha_pinv * rhs;
    const double residual = (dm.h_alpha * alpha - rhs).norm();
    if (residual > dm.config.feasibility_rel * (1.0 + rhs.norm()))
        throw InconsistentWindowError(
            "window not consistent with the data (residual " + std::to_string(residual) + ")",
            residual);
    return alpha;
}

Vector predict_output(const DataMatrices& dm, const Vector& alpha, const Vector& omega) {
    return dm.y_prediction * (alpha + omega);
}

Vector descend_output(const Vector& y_hat, const Vector& grad_value, double gamma_y) {
    return ogd_step(y_hat, grad_value, gamma_y);
}

Vector steady_input(const DataMatrices& dm, const Vector& v, const Vector& y_s) {
    return nearest_steady_input(dm.steady, v, y_s, dm.config.feasibility_rel);
}

std::pair<Vector, Vector> compute_beta(const DataMatrices& dm, const Vector& alpha,
                                       const Vector& omega, const Vector& u_s,
                                       const Vector& y_s) {
    const int n = dm.config.n_bar, m = dm.m, p = dm.p;
    const Vector c = alpha + omega;
    Vector g = Vector::Zero(dm.h_beta.rows());
    g.segment(m * n, m * (n + 1)) = repeat_block(u_s, n + 1) - dm.u_terminal * c;
    g.segment(m * (2 * n + 1) + p * n, p * n) = repeat_block(y_s, n) - dm.y_terminal * c;

    const Vector beta = dm.correction_map * g;
    const double residual = (dm.h_beta * beta - g).norm();
    if (residual > dm.config.feasibility_rel * (1.0 + g.norm()))
        throw InfeasibleError("correction constraint unsolvable (residual " +
                                  std::to_string(residual) +
                                  "); prediction horizon below the controllability index "
                                  "or broken data",
                              residual);
    return {beta, g};
}

std::pair<ControllerState, Vector> make_initial_state(const DataMatrices& dm,
                                                      const Trajectory& warmup,
                                                      const Vector& v0) {
    const int n = dm.config.n_bar;
    if (warmup.length() != n)
        throw InvalidInputError("warm-up trajectory must have exactly n_bar steps");
    if (warmup.input_dim() != dm.m || warmup.output_dim() != dm.p)
        throw InvalidInputError("warm-up dimensions do not match the data");
    ControllerState state;
    state.v_cur = v0.size() == 0 ? Vector::Zero(dm.m) : v0;
    if (state.v_cur.size() != dm.m) throw InvalidInputError("v0 dimension mismatch");
    state.v_prev = state.v_cur;
    state.us_prev = state.v_cur;  // makes the held-input shift vanish at t = 0
    state.u_hat_prev = Vector::Zero(dm.m * (dm.config.mu + 1));
    for (int k = 0; k < n; ++k) state.u_window.push_back(warmup.inputs.col(k));
    for (int k = 0; k + 1 < n; ++k) state.y_window.push_back(warmup.outputs.col(k));
    state.t = 0;
    return {std::move(state), warmup.outputs.col(n - 1)};
}

std::pair<Vector, StepDiagnostics> advance(ControllerState& state, const DataMatrices& dm,
                                           const GradientFn& grad_u_prev,
                                           const GradientFn& grad_y_prev,
                                           const Vector& y_measured) {
    try {
        if (y_measured.size() != dm.p) throw InvalidInputError("measurement dimension mismatch");
        const int n = dm.config.n_bar, m = dm.m, mu = dm.config.mu;
        if (static_cast<int>(state.y_window.size()) >= n) state.y_window.pop_front();
        state.y_window.push_back(y_measured);

        const Vector v_t = ogd_step(state.v_cur, grad_u_prev(state.v_cur), dm.config.gamma_u);
        state.v_prev = state.v_cur;
        state.v_cur = v_t;

        StepDiagnostics diag;
        diag.omega = dm.omega_map * v_t;
        diag.alpha = compute_alpha(dm, state);
        diag.y_hat_mu = predict_output(dm, diag.alpha, diag.omega);
        diag.y_s = descend_output(diag.y_hat_mu, grad_y_prev(diag.y_hat_mu), dm.config.gamma_y);
        diag.u_s = steady_input(dm, v_t, diag.y_s);
        std::tie(diag.beta, diag.g) = compute_beta(dm, diag.alpha, diag.omega, diag.u_s, diag.y_s);

        Vector u_hat(m * (mu + 1));
        u_hat.head(m * mu) = state.u_hat_prev.tail(m * mu);
        u_hat.tail(m) = state.us_prev - state.v_prev;
        u_hat += dm.u_future * diag.beta;

        const Vector u_t = u_hat.head(m) + v_t;

        state.u_hat_prev = std::move(u_hat);
        state.us_prev = diag.u_s;
        if (static_cast<int>(state.u_window.size()) >= n) state.u_window.pop_front();
        state.u_window.push_back(u_t);
        state.t += 1;
        return {u_t, std::move(diag)};
    } catch (const StepFailureError&) {
        throw;
    } catch (const Error& e) {
        throw StepFailureError(state.t, e);
    }
}

}  // namespace ddoc
