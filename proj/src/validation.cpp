#include "ddoc/validation.hpp"

namespace ddoc {

namespace {

struct StepCapture {
    StepDiagnostics diag;
    Vector plant_state;
    Vector u_applied;
};

Vector repeat(const Vector& block, int copies) {
    Vector out(block.size() * copies);
    for (int i = 0; i < copies; ++i) out.segment(i * block.size(), block.size()) = block;
    return out;
}

}  // namespace

InvariantSuiteResult run_invariant_suite(const ExperimentConfig& config) {
    std::vector<StepCapture> steps;
    steps.reserve(config.horizon + 1);
    RunResult run = run_experiment(config, [&](const StepContext& ctx) {
        steps.push_back(StepCapture{*ctx.diag, ctx.plant_state, ctx.u_applied});
    });

    const DataMatrices& dm = *run.matrices;
    const LtiSystem& sys = *run.system;
    const int n = dm.config.n_bar, mu = dm.config.mu, mt = dm.mu_tilde, m = dm.m;
    const bool noiseless = config.noise.case_id == 1;

    InvariantSuiteResult result;
    auto add = [&](const std::string& name, double value, double threshold,
                   bool informational = false) {
        result.checks.push_back(
            InvariantCheck{name, value, threshold, value <= threshold, informational});
    };

    {
        const Matrix& p0 = dm.steady.p0;
        const double projector = (p0 * p0 - p0).norm() +
                                 (p0 - p0.transpose()).norm();
        add("steady-map projector", projector, 1e-10);
    }
    add("schedule equilibrium residual",
        run.schedule->max_equilibrium_residual(dm.steady),
        noiseless ? 1e-6 : 1e3 * config.noise.data_bound);

    const Matrix y_shifted = dm.y_data.block_rows(mt + 1, mt + n);
    double recursive = 0.0, terminal = 0.0, input_consistency = 0.0, prediction = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const StepDiagnostics& d = steps[k].diag;
        const Vector full = d.alpha + d.beta + d.omega;
        if (k > 0) {
            const StepDiagnostics& prev = steps[k - 1].diag;
            const Vector lhs = dm.y_terminal * (d.alpha + prev.omega);
            const Vector rhs = y_shifted * (prev.alpha + prev.beta + prev.omega);
            recursive = std::max(recursive, (lhs - rhs).norm());
        }
        terminal = std::max(
            terminal,
            (dm.y_data.block_rows(mt, mt + n) * full - repeat(d.y_s, n + 1)).norm());
        input_consistency = std::max(
            input_consistency,
            (steps[k].u_applied - dm.u_future.topRows(m) * full).norm());

        LtiSystem clone = sys;
        clone.set_state(steps[k].plant_state);
        const Vector plan = dm.u_future * (d.alpha + d.omega);
        Vector y_sim;
        for (int j = 0; j <= mu; ++j) y_sim = clone.step(plan.segment(j * m, m));
        prediction = std::max(prediction, (y_sim - d.y_hat_mu).norm());
    }
    add("recursive prediction identity", recursive, 1e-6, !noiseless);
    add("terminal equilibrium identity", terminal, 1e-6, !noiseless);
    add("input consistency", input_consistency, 1e-8, !noiseless);
    add("prediction matches simulation", prediction, 1e-6, !noiseless);

    double total_cost = 0.0;
    for (double v : run.regret.realized) total_cost += v;
    add("regret nonnegative", -run.regret.total_regret, 1e-6 * (1.0 + std::abs(total_cost)),
        !noiseless);

    double max_theta = 0.0;
    for (int t = 0; t < run.record.steps(); ++t)
        max_theta = std::max(max_theta, run.record.theta.col(t).norm());
    add("outputs bounded", max_output_norm(run.record), 10.0 * std::max(max_theta, 1e-12));

    result.run = std::move(run);
    return result;
}

}  // namespace ddoc
