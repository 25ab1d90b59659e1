// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are fixed here, not tuned at runtime.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "ddoc/harness.hpp"
#include "ddoc/validation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ddoc;
using fixtures::repeat;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void fail(Outcome& out, const std::string& message) {
    out.pass = false;
    if (!out.detail.empty()) out.detail += "; ";
    out.detail += message;
}

// ---------------------------------------------------------------------------
// 1. Trajectory-membership equivalence: simulated trajectories always lie in
//    the span of the data Hankel matrices, and every span element validates
//    against state reconstruction. 500 random systems, <= 60 s.
Outcome criterion_membership() {
    Outcome out;
    const double started = now_seconds();
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        Rng rng(10'000 + trial);
        SystemSpec spec;
        spec.n = rng.uniform_int(1, 5);
        spec.m = rng.uniform_int(1, 3);
        spec.p = rng.uniform_int(1, 3);
        const int depth = spec.n + 1 + rng.uniform_int(1, 3);
        const int pe_order = depth + spec.n;
        DataSpec data_spec;
        data_spec.length = (spec.m + 1) * pe_order + 12;
        data_spec.max_output_norm = 1e3;
        std::optional<GeneratedData> gen;
        try {
            gen.emplace(generate_data(spec, data_spec, pe_order, 40'000 + trial));
        } catch (const Error& e) {
            fail(out, "trial " + std::to_string(trial) + " generation: " + e.what());
            continue;
        }
        const HankelBlock u_data = build_hankel(gen->trajectory.inputs, depth);
        const HankelBlock y_data = build_hankel(gen->trajectory.outputs, depth);

        LtiSystem fresh = gen->system;
        fresh.set_state(rng.uniform_vector(spec.n, -0.5, 0.5));
        const Trajectory simulated =
            fresh.simulate(rng.uniform_matrix(spec.m, depth, -1.0, 1.0));
        const double membership = trajectory_residual(simulated, u_data, y_data);
        if (membership > 1e-8)
            fail(out, "trial " + std::to_string(trial) + " membership residual " +
                          std::to_string(membership));

        const Vector alpha = rng.uniform_vector(u_data.cols(), -0.2, 0.2);
        const double reconstruction = oracles::state_reconstruction_error(
            gen->system, expand(alpha, u_data, y_data));
        if (reconstruction > 1e-8)
            fail(out, "trial " + std::to_string(trial) + " reconstruction error " +
                          std::to_string(reconstruction));
        ++checked;
    }
    const double elapsed = now_seconds() - started;
    if (checked != 500) fail(out, "only " + std::to_string(checked) + " systems checked");
    if (elapsed > 60.0) fail(out, "runtime " + std::to_string(elapsed) + " s exceeds 60 s");
    return out;
}

// ---------------------------------------------------------------------------
// 2. Steady-state characterization: the data-driven kernel test agrees with
//    the model equations and the constant-window Hankel test on 1000 cases;
//    the explicit nearest-input formula matches a KKT oracle. <= 30 s.
Outcome criterion_steady_state() {
    Outcome out;
    const double started = now_seconds();
    int cases = 0;
    for (int sys_trial = 0; sys_trial < 200; ++sys_trial) {
        Rng rng(20'000 + sys_trial);
        SystemSpec spec;
        spec.n = rng.uniform_int(1, 5);
        spec.m = rng.uniform_int(1, 3);
        spec.p = rng.uniform_int(1, spec.m);  // solvable steady-state problems
        const int pe_order = 2 * spec.n + 1;
        DataSpec data_spec;
        data_spec.length = (spec.m + 1) * pe_order + 15;
        data_spec.max_output_norm = 1e3;
        std::optional<GeneratedData> gen_opt;
        try {
            gen_opt.emplace(generate_data(spec, data_spec, pe_order, 50'000 + sys_trial));
        } catch (const Error& e) {
            fail(out, "system " + std::to_string(sys_trial) + " generation: " + e.what());
            continue;
        }
        const GeneratedData& gen = *gen_opt;
        const RankTolerance tol = RankTolerance::standard(
            (spec.m + spec.p) * (spec.n + 1), data_spec.length - spec.n);
        const SteadyMaps maps = compute_steady_maps(gen.trajectory, spec.n, tol);
        const HankelBlock u_data = build_hankel(gen.trajectory.inputs, spec.n + 1);
        const HankelBlock y_data = build_hankel(gen.trajectory.outputs, spec.n + 1);

        auto model_residual = [&](const Vector& u, const Vector& y) {
            const int n = spec.n;
            Matrix lhs(n + spec.p, n);
            lhs.topRows(n) = Matrix::Identity(n, n) - gen.system.a();
            lhs.bottomRows(spec.p) = gen.system.c();
            Vector rhs(n + spec.p);
            rhs.head(n) = gen.system.b() * u;
            rhs.tail(spec.p) = y - gen.system.d() * u;
            const Vector x = lhs.completeOrthogonalDecomposition().solve(rhs);
            return (lhs * x - rhs).norm();
        };

        for (int k = 0; k < 5; ++k) {
            const Vector u = rng.uniform_vector(spec.m, -1.0, 1.0);
            Vector y;
            bool expect_equilibrium;
            if (k < 3) {
                y = steady_output_for_input(gen.system, u);
                expect_equilibrium = true;
            } else {
                y = steady_output_for_input(gen.system, u);
                y(rng.uniform_int(0, spec.p - 1)) += 0.5 + rng.uniform01();
                if (model_residual(u, y) < 1e-3) continue;  // boundary, skip
                expect_equilibrium = false;
            }
            const double scale = 1.0 + u.norm() + y.norm();
            const bool kernel_says = equilibrium_residual(maps, u, y) <= 1e-6 * scale;
            const bool definition_says =
                equilibrium_residual_by_definition(u_data, y_data, u, y) <= 1e-6 * scale;
            const bool model_says = model_residual(u, y) <= 1e-6 * scale;
            if (kernel_says != expect_equilibrium || definition_says != expect_equilibrium ||
                model_says != expect_equilibrium) {
                fail(out, "case disagreement at system " + std::to_string(sys_trial));
                continue;
            }
            ++cases;
        }

        // nearest steady input vs the model-based KKT oracle
        const Vector v = rng.uniform_vector(spec.m, -1.0, 1.0);
        const Vector y_ref =
            steady_output_for_input(gen.system, rng.uniform_vector(spec.m, -1.0, 1.0));
        const Vector u_data_driven = nearest_steady_input(maps, v, y_ref);
        const int n = spec.n;
        Matrix constraint(n + spec.p, n + spec.m);
        constraint << Matrix::Identity(n, n) - gen.system.a(), -gen.system.b(), gen.system.c(),
            gen.system.d();
        Vector rhs = Vector::Zero(n + spec.p);
        rhs.tail(spec.p) = y_ref;
        Matrix quad = Matrix::Zero(n + spec.m, n + spec.m);
        quad.bottomRightCorner(spec.m, spec.m) = Matrix::Identity(spec.m, spec.m);
        Vector lin = Vector::Zero(n + spec.m);
        lin.tail(spec.m) = -v;
        const Vector z = oracles::kkt_equality_qp(quad, lin, constraint, rhs);
        if ((u_data_driven - z.tail(spec.m)).norm() > 1e-8 * (1.0 + v.norm()))
            fail(out, "nearest-input mismatch at system " + std::to_string(sys_trial));
    }
    const double elapsed = now_seconds() - started;
    if (cases < 900)
        fail(out, "only " + std::to_string(cases) + " well-posed cases out of 1000");
    if (elapsed > 30.0) fail(out, "runtime " + std::to_string(elapsed) + " s exceeds 30 s");
    return out;
}

// ---------------------------------------------------------------------------
// 3. Weighted minimum-norm solve matches the KKT oracle on 200 consistent
//    triples within relative error 1e-6.
Outcome criterion_weighted_solve() {
    Outcome out;
    Rng rng(30'000);
    for (int trial = 0; trial < 200; ++trial) {
        const int cols = rng.uniform_int(6, 20);
        const int rows = rng.uniform_int(1, cols - 1);
        const int q_rows = rng.uniform_int(cols, cols + 5);
        const Matrix h = rng.uniform_matrix(rows, cols, -1.0, 1.0);
        const Matrix q = rng.uniform_matrix(q_rows, cols, -1.0, 1.0);
        const Vector g = h * rng.uniform_vector(cols, -1.0, 1.0);
        const Vector beta =
            weighted_min_norm_solve(h, g, q, RankTolerance::standard(rows, cols));
        const Vector beta_kkt = oracles::min_weighted_norm_kkt(h, g, q);
        const double err = (beta - beta_kkt).norm() / (1.0 + beta_kkt.norm());
        if (err > 1e-6)
            fail(out, "trial " + std::to_string(trial) + " relative error " +
                          std::to_string(err));
    }
    return out;
}

ExperimentConfig benchmark_config(std::uint64_t seed, int horizon,
                                  std::vector<int> switch_times) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.horizon = horizon;
    cfg.schedule.switch_times = std::move(switch_times);
    return cfg;  // defaults: n=5, m=2, p=1, N=100, mu=5, gamma=0.75
}

// ---------------------------------------------------------------------------
// 4. Closed-loop trajectory identities at benchmark parameters over T = 500.
Outcome criterion_loop_identities() {
    Outcome out;
    const ExperimentConfig cfg = benchmark_config(4, 500, {0, 100, 200, 300, 400});
    const InvariantSuiteResult suite = run_invariant_suite(cfg);
    for (const auto& check : suite.checks) {
        if (check.name == "recursive prediction identity" ||
            check.name == "terminal equilibrium identity" ||
            check.name == "prediction matches simulation") {
            if (!(check.value <= 1e-6))
                fail(out, check.name + " = " + std::to_string(check.value));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 5. Convergence after the final cost switch: 1e-3 within 30 steps and 1e-6
//    within 100 steps, across 20 seeds.
Outcome criterion_convergence() {
    Outcome out;
    const int switch_time = 220, horizon = 320;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const ExperimentConfig cfg =
            benchmark_config(seed, horizon, {0, 60, 120, 180, switch_time});
        RunResult run;
        try {
            run = run_experiment(cfg);
        } catch (const Error& e) {
            fail(out, "seed " + std::to_string(seed) + ": " + e.what());
            continue;
        }
        double worst_30 = 0.0, worst_100 = 0.0;
        for (int t = switch_time + 30; t <= horizon; ++t) {
            const double err = (run.record.y.col(t) - run.record.theta.col(t)).norm() +
                               (run.record.u.col(t) - run.record.eta.col(t)).norm();
            worst_30 = std::max(worst_30, err);
            if (t >= switch_time + 100) worst_100 = std::max(worst_100, err);
        }
        if (worst_30 > 1e-3)
            fail(out, "seed " + std::to_string(seed) + " error after 30 steps " +
                          std::to_string(worst_30));
        if (worst_100 > 1e-6)
            fail(out, "seed " + std::to_string(seed) + " error after 100 steps " +
                          std::to_string(worst_100));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 6. Regret saturates: with the switches fixed, R(T) varies by < 1% over
//    T in {200, 400, 800}, across 10 seeds.
Outcome criterion_regret_saturation() {
    Outcome out;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<double> totals;
        for (int horizon : {200, 400, 800}) {
            const ExperimentConfig cfg =
                benchmark_config(seed, horizon, {0, 30, 60, 90, 120});
            try {
                totals.push_back(run_experiment(cfg).regret.total_regret);
            } catch (const Error& e) {
                fail(out, "seed " + std::to_string(seed) + ": " + e.what());
            }
        }
        if (totals.size() != 3) continue;
        const double reference = std::abs(totals.front());
        const double spread =
            *std::max_element(totals.begin(), totals.end()) -
            *std::min_element(totals.begin(), totals.end());
        if (!(spread < 0.01 * reference))
            fail(out, "seed " + std::to_string(seed) + " regret spread " +
                          std::to_string(spread) + " vs total " + std::to_string(reference));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 7. Gradient-descent contraction at rate 1 - alpha*gamma on 1e4 samples.
Outcome criterion_contraction() {
    Outcome out;
    Rng rng(70'000);
    for (int trial = 0; trial < 10'000; ++trial) {
        const int dim = rng.uniform_int(1, 6);
        const double gamma = rng.uniform(0.05, 1.0);  // 2/(l+alpha) = 1
        const Vector target = rng.uniform_vector(dim, -3.0, 3.0);
        const CostPair cost = quadratic_tracking(target, Vector::Zero(1));
        const Vector z = rng.uniform_vector(dim, -10.0, 10.0);
        const Vector next = ogd_step(z, cost.grad_u(z), gamma);
        const double kappa = 1.0 - cost.alpha_u * gamma;
        if ((next - target).norm() > kappa * (z - target).norm() * (1.0 + 1e-12) + 1e-15) {
            fail(out, "contraction violated at trial " + std::to_string(trial));
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 8. Noise robustness: noisy-data and noisy-measurement runs stay bounded and
//    their mean tracking error stays within 10x the noiseless level.
Outcome criterion_noise_robustness() {
    Outcome out;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        double noiseless_error = 0.0;
        for (int noise_case : {1, 2, 3}) {
            ExperimentConfig cfg = benchmark_config(seed, 200, {0, 50, 100, 150});
            cfg.noise.case_id = noise_case;
            cfg.noise.data_bound = 1e-5;
            cfg.noise.measurement_bound = 1e-2;
            if (noise_case >= 2) cfg.controller.steady_rank_cutoff = 1e-5;
            RunResult run;
            try {
                run = run_experiment(cfg);
            } catch (const Error& e) {
                fail(out, "seed " + std::to_string(seed) + " case " +
                              std::to_string(noise_case) + ": " + e.what());
                continue;
            }
            double max_theta = 0.0;
            for (int t = 0; t < run.record.steps(); ++t)
                max_theta = std::max(max_theta, run.record.theta.col(t).norm());
            if (max_output_norm(run.record) > 10.0 * max_theta)
                fail(out, "seed " + std::to_string(seed) + " case " +
                              std::to_string(noise_case) + " unbounded output");
            const double tracking = mean_tracking_error(run.record, 30);
            if (noise_case == 1) {
                noiseless_error = tracking;
            } else if (tracking > 10.0 * noiseless_error) {
                fail(out, "seed " + std::to_string(seed) + " case " +
                              std::to_string(noise_case) + " tracking " +
                              std::to_string(tracking) + " vs noiseless " +
                              std::to_string(noiseless_error));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// 9. A full T = 1000 benchmark run finishes in under 2 s and the online step
//    performs no matrix factorization.
Outcome criterion_performance() {
    Outcome out;
    const ExperimentConfig cfg = benchmark_config(9, 1000, {0, 200, 400, 600, 800});
    const double started = now_seconds();
    std::int64_t factorizations_in_loop = 0;
    std::int64_t before_first_step = -1;
    const RunResult run = run_experiment(cfg, [&](const StepContext& ctx) {
        if (ctx.t == 0) before_first_step = factorization_count();
        if (ctx.t == cfg.horizon)
            factorizations_in_loop = factorization_count() - before_first_step;
    });
    const double elapsed = now_seconds() - started;
    if (run.record.steps() != 1001) fail(out, "incomplete run");
    if (elapsed >= 2.0) fail(out, "runtime " + std::to_string(elapsed) + " s");
    if (factorizations_in_loop != 0)
        fail(out, std::to_string(factorizations_in_loop) + " factorizations in the online loop");
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* description;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "trajectory membership equivalence (500 systems)", criterion_membership},
        {2, "steady-state characterization agreement (1000 cases)", criterion_steady_state},
        {3, "weighted minimum-norm solve vs KKT oracle (200 triples)",
         criterion_weighted_solve},
        {4, "closed-loop trajectory identities over T = 500", criterion_loop_identities},
        {5, "convergence after the final switch (20 seeds)", criterion_convergence},
        {6, "regret saturation across horizons (10 seeds)", criterion_regret_saturation},
        {7, "gradient-descent contraction (10^4 samples)", criterion_contraction},
        {8, "noise robustness (cases 2-3)", criterion_noise_robustness},
        {9, "T = 1000 run under 2 s, factorization-free online step",
         criterion_performance},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const double started = now_seconds();
        Outcome outcome;
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = now_seconds() - started;
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", outcome.pass ? "PASS" : "FAIL",
                    criterion.id, criterion.description, elapsed,
                    outcome.detail.empty() ? "" : " - ", outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
