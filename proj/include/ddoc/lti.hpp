#pragma once

#include <cstdint>
#include <utility>

#include "ddoc/costs.hpp"
#include "ddoc/hankel.hpp"
#include "ddoc/rng.hpp"

namespace ddoc {

// Model-based ground truth for data generation and testing. The controller
// never reads the system matrices.
class LtiSystem {
public:
    // Requires (A, B) controllable and (A, C) observable.
    LtiSystem(Matrix a, Matrix b, Matrix c, Matrix d, Vector x0);

    int order() const { return static_cast<int>(a_.rows()); }
    int input_dim() const { return static_cast<int>(b_.cols()); }
    int output_dim() const { return static_cast<int>(c_.rows()); }

    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }
    const Matrix& c() const { return c_; }
    const Matrix& d() const { return d_; }
    const Vector& state() const { return x_; }
    void set_state(const Vector& x);

    // Advance one step with input u; returns the output at the current step.
    Vector step(const Vector& u);

    // Run the stored state forward under the given input columns; the final
    // state is retained for continuation.
    Trajectory simulate(const Matrix& u);

private:
    Matrix a_, b_, c_, d_;
    Vector x_;
};

// Smallest k with rank [B, AB, ..., A^{k-1}B] = n.
int controllability_index(const LtiSystem& sys);

struct SteadyStatePair {
    Vector input;
    Vector state;
};

// The steady state (u, x) with output y_target whose input is closest to v.
// Requires the full-row-rank condition on [I-A, -B; C, D].
SteadyStatePair model_steady_state(const LtiSystem& sys, const Vector& y_target, const Vector& v);

// Steady-state output for a held input u (errors when no steady state exists).
Vector steady_output_for_input(const LtiSystem& sys, const Vector& u);

struct SystemSpec {
    enum class Mode { explicit_matrices, random };
    Mode mode = Mode::random;
    int n = 5, m = 2, p = 1;
    double entry_bound = 1.0;  // uniform [-bound, bound] entries
    std::uint64_t seed = 0;
    // explicit_matrices mode only:
    Matrix a, b, c, d;
};

// Draws (B, C, D) once, then redraws A until the system is controllable,
// observable and (when p <= m) satisfies the steady-state rank condition.
LtiSystem random_system(const SystemSpec& spec, Rng& rng);
LtiSystem make_system(const SystemSpec& spec);  // dispatches on mode, seeds its own rng

// Exact solution of  min sum_t L_t(u_t, y_t)  over the schedule horizon,
// subject to the system dynamics from initial state xbar, as one sparse
// equality-constrained QP (KKT system over stacked inputs and states).
// Only the quadratic tracking cost family is supported.
std::pair<Trajectory, double> solve_hindsight(const LtiSystem& sys, const CostSchedule& schedule,
                                              const Vector& xbar);

}  // namespace ddoc
