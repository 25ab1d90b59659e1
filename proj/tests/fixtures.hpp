// Shared closed-loop test setup helpers.
#pragma once

#include <functional>
#include <vector>

#include "ddoc/controller.hpp"
#include "ddoc/harness.hpp"
#include "ddoc/lti.hpp"

namespace fixtures {

using namespace ddoc;

struct LoopFixture {
    LtiSystem system;      // plant at state zero
    Trajectory data;
    DataMatrices dm;
};

// Benchmark configuration: n = 5, m = 2, p = 1, fifth-order random system,
// N = 100 data samples, horizon mu = 5, step sizes 0.75.
inline LoopFixture make_benchmark(std::uint64_t seed, ControllerConfig cfg = {}) {
    if (cfg.n_bar == 0) cfg.n_bar = 5;
    if (cfg.mu == 0) cfg.mu = 5;
    SystemSpec spec;
    DataSpec data_spec;
    const int pe_order = 3 * cfg.n_bar + cfg.mu + 1;
    GeneratedData gen = generate_data(spec, data_spec, pe_order, seed);
    DataMatrices dm = precompute(gen.trajectory, cfg);
    return LoopFixture{std::move(gen.system), std::move(gen.trajectory), std::move(dm)};
}

// Smaller third-order plant for tightly-toleranced unit tests.
inline LoopFixture make_small(std::uint64_t seed, ControllerConfig cfg = {}) {
    if (cfg.n_bar == 0) cfg.n_bar = 3;
    if (cfg.mu == 0) cfg.mu = 3;
    SystemSpec spec;
    spec.n = 3;
    spec.m = 2;
    spec.p = 1;
    DataSpec data_spec;
    data_spec.length = 80;
    data_spec.max_output_norm = 100.0;
    const int pe_order = 3 * cfg.n_bar + cfg.mu + 1;
    GeneratedData gen = generate_data(spec, data_spec, pe_order, seed);
    DataMatrices dm = precompute(gen.trajectory, cfg);
    return LoopFixture{std::move(gen.system), std::move(gen.trajectory), std::move(dm)};
}

struct LoopStep {
    int t = 0;
    Vector u;
    Vector y_prev;       // measurement consumed this step
    Vector plant_state;  // x_t before applying u
    StepDiagnostics diag;
};

// Drives the closed loop for `steps` steps. cost_for(t) supplies the cost
// revealed after step t (used as the gradient source at step t+1); a null
// return uses zero gradients.
inline std::vector<LoopStep> run_loop(
    LtiSystem& plant, const DataMatrices& dm, int steps,
    const std::function<const CostPair*(int)>& cost_for) {
    const int m = plant.input_dim();
    const Trajectory warmup = plant.simulate(Matrix::Zero(m, dm.config.n_bar));
    auto [state, pending] = make_initial_state(dm, warmup);
    const GradientFn zero_u = [m](const Vector&) { return Vector::Zero(m); };
    const int p = plant.output_dim();
    const GradientFn zero_y = [p](const Vector&) { return Vector::Zero(p); };

    std::vector<LoopStep> log;
    log.reserve(steps);
    Vector y_prev = pending;
    for (int t = 0; t < steps; ++t) {
        const CostPair* prev_cost = t > 0 ? cost_for(t - 1) : nullptr;
        const GradientFn gu = prev_cost ? GradientFn(prev_cost->grad_u) : zero_u;
        const GradientFn gy = prev_cost ? GradientFn(prev_cost->grad_y) : zero_y;
        LoopStep entry;
        entry.t = t;
        entry.y_prev = y_prev;
        entry.plant_state = plant.state();
        auto [u, diag] = advance(state, dm, gu, gy, y_prev);
        entry.u = u;
        entry.diag = std::move(diag);
        y_prev = plant.step(u);
        log.push_back(std::move(entry));
    }
    return log;
}

inline Vector repeat(const Vector& block, int copies) {
    Vector out(block.size() * copies);
    for (int i = 0; i < copies; ++i) out.segment(i * block.size(), block.size()) = block;
    return out;
}

}  // namespace fixtures
