#pragma once

#include <deque>
#include <functional>
#include <optional>

#include "ddoc/equilibria.hpp"
#include "ddoc/hankel.hpp"

namespace ddoc {

// Weight-matrix recipe for the trajectory-correction step: penalize the
// transient input/output blocks and optionally regularize with an identity
// block. A custom matrix (with one column per Hankel column) overrides both.
struct CorrectionWeight {
    double transient_weight = 100.0;
    bool identity_regularization = true;
    std::optional<Matrix> custom;
};

struct ControllerConfig {
    double gamma_u = 0.75;
    double gamma_y = 0.75;
    int n_bar = 0;            // system-order upper bound (required, >= 1)
    int mu = 0;               // prediction horizon; 0 means default to n_bar
    double rank_cutoff = 0.0;        // relative SVD cutoff; <= 0 means standard
    // Cutoff for the steady-state maps, whose rank structure (unlike the
    // full-row-rank selector matrices) is what output noise corrupts.
    // <= 0 falls back to rank_cutoff.
    double steady_rank_cutoff = 0.0;
    double feasibility_rel = 1e-6;   // relative residual tolerance for solves
    CorrectionWeight weight;

    int resolved_mu() const { return mu > 0 ? mu : n_bar; }
    RankTolerance rank_tolerance(Eigen::Index rows, Eigen::Index cols) const;
    RankTolerance steady_rank_tolerance(Eigen::Index rows, Eigen::Index cols) const;
    void validate() const;
};

// Everything the online loop needs, computed offline from the data
// trajectory: Hankel blocks, stacked selector matrices, cached
// pseudoinverse-based maps, and the steady-state maps. With these in hand
// each online step is two gradient evaluations plus matrix-vector products.
struct DataMatrices {
    ControllerConfig config;  // with mu resolved
    int m = 0, p = 0, cols = 0;
    int mu_tilde = 0;  // n_bar + mu + 1

    HankelBlock u_data, y_data;  // depth 2*n_bar + mu + 1
    Matrix h_alpha;              // [U; Y^{1:n}]
    Matrix h_beta;               // [U^{1:n}; U^{mt:mt+n}; Y^{1:n}; Y^{mt:mt+n-1}]
    Matrix h_alpha_pinv;
    Matrix omega_map;      // v -> omega, = H_alpha^+ [0; 1 (x) I_m; 0]
    Matrix correction_map; // g -> beta, weighted minimum-norm map
    Matrix weight;         // assembled Q
    Matrix y_prediction;   // Y^{n+mu+1} block row
    Matrix u_terminal;     // U^{mt : mt+n}
    Matrix y_terminal;     // Y^{mt : mt+n-1}
    Matrix u_future;       // U^{n+1 : n+mu+1}
    SteadyMaps steady;

    Vector omega_rhs(const Vector& v) const;   // [0; 1 (x) v; 0]
    Vector combined(const Vector& alpha, const Vector& omega) const { return alpha + omega; }
};

// Evolving quantities of the online loop. The windows hold the last n_bar
// applied inputs and measured outputs; the pending output measurement for
// step t is pushed by advance() itself.
struct ControllerState {
    Vector v_prev, v_cur;   // v_{t-1}, v_t after a step
    Vector u_hat_prev;      // m*(mu+1) planned input differences
    Vector us_prev;         // previous steady-state input target
    std::deque<Vector> u_window, y_window;
    long t = 0;
};

struct StepDiagnostics {
    Vector y_hat_mu;  // mu-step-ahead output prediction
    Vector y_s;       // steady-state output target
    Vector u_s;       // steady-state input target
    Vector omega, alpha, beta, g;
};

using GradientFn = std::function<Vector(const Vector&)>;

// Offline stage: builds every data-dependent matrix. Requires
// N >= (m+1)(3 n_bar + mu + 1) - 1 and input excitation of order
// 3 n_bar + mu + 1.
DataMatrices precompute(const Trajectory& data, const ControllerConfig& config);

// omega solves H_alpha omega = [0; 1 (x) v; 0] (precomputed map).
Vector compute_omega(const DataMatrices& dm, const Vector& v);

// alpha solves H_alpha alpha = [u window; shifted plan; held input shift;
// y window]; throws InconsistentWindowError when the residual exceeds the
// feasibility tolerance.
Vector compute_alpha(const DataMatrices& dm, const ControllerState& state);

// Output prediction mu steps ahead.
Vector predict_output(const DataMatrices& dm, const Vector& alpha, const Vector& omega);

// Gradient step on the predicted output.
Vector descend_output(const Vector& y_hat, const Vector& grad_value, double gamma_y);

// Steady-state input for the descended output (nearest to v).
Vector steady_input(const DataMatrices& dm, const Vector& v, const Vector& y_s);

// Correction coefficients: returns (beta, g) with H_beta beta = g and
// ||Q beta|| minimal among solutions.
std::pair<Vector, Vector> compute_beta(const DataMatrices& dm, const Vector& alpha,
                                       const Vector& omega, const Vector& u_s, const Vector& y_s);

// Initial state from an n_bar-step warm-up trajectory. Returns the state and
// the pending measurement (the newest warm-up output), which must be passed
// as y_measured to the first advance() call.
std::pair<ControllerState, Vector> make_initial_state(const DataMatrices& dm,
                                                      const Trajectory& warmup,
                                                      const Vector& v0 = Vector());

// One full online step: exactly two gradient evaluations (of the previous
// stage cost) plus matrix-vector products. y_measured is the output from the
// previous step. Returns the input to apply and the step diagnostics.
std::pair<Vector, StepDiagnostics> advance(ControllerState& state, const DataMatrices& dm,
                                           const GradientFn& grad_u_prev,
                                           const GradientFn& grad_y_prev,
                                           const Vector& y_measured);

}  // namespace ddoc
