#include "ddoc/harness.hpp"

#include <atomic>
#include <future>
#include <sstream>

#include "ddoc/errors.hpp"
#include "ddoc/validation.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ddoc;

TEST_CASE("generated data is persistently exciting at the benchmark order") {
    SystemSpec spec;
    DataSpec data_spec;
    const GeneratedData gen = generate_data(spec, data_spec, 21, 1);
    CHECK(gen.trajectory.length() == 100);
    const RankTolerance tol = RankTolerance::standard(2 * 21, 80);
    CHECK(is_persistently_exciting(gen.trajectory.inputs, 21, tol));
    CHECK(gen.trajectory.outputs.colwise().norm().maxCoeff() <= data_spec.max_output_norm);
}

TEST_CASE("degenerate input distribution fails generation") {
    SystemSpec spec;
    DataSpec data_spec;
    data_spec.input_bound = 0.0;
    CHECK_THROWS_AS(generate_data(spec, data_spec, 21, 1), GenerationFailureError);
}

TEST_CASE("generation is deterministic in the seed") {
    SystemSpec spec;
    DataSpec data_spec;
    const GeneratedData a = generate_data(spec, data_spec, 21, 7);
    const GeneratedData b = generate_data(spec, data_spec, 21, 7);
    CHECK((a.trajectory.inputs - b.trajectory.inputs).norm() == 0.0);
    CHECK((a.trajectory.outputs - b.trajectory.outputs).norm() == 0.0);
    CHECK((a.system.a() - b.system.a()).norm() == 0.0);
}

TEST_CASE("noise injection respects the norm bound") {
    Rng rng(701);
    const Matrix signal = rng.uniform_matrix(3, 50, -1.0, 1.0);
    Rng zero_rng = Rng::stream(1, 2);
    CHECK((inject_noise(signal, 0.0, zero_rng) - signal).norm() == 0.0);
    for (double bound : {1e-5, 1e-2}) {
        Rng noise_rng = Rng::stream(1, 3);
        const Matrix noisy = inject_noise(signal, bound, noise_rng);
        for (int k = 0; k < 50; ++k)
            CHECK((noisy.col(k) - signal.col(k)).norm() <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("config json round trip") {
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.horizon = 123;
    cfg.noise.case_id = 2;
    cfg.noise.data_bound = 3e-5;
    cfg.controller.gamma_u = 0.6;
    cfg.controller.rank_cutoff = 1e-7;
    cfg.schedule.switch_times = {0, 11, 47};
    const std::string text = cfg.to_json();
    const ExperimentConfig parsed = ExperimentConfig::from_json(text);
    CHECK(parsed.to_json() == text);
    CHECK(parsed.seed == 42);
    CHECK(parsed.noise.data_bound == 3e-5);
    CHECK(parsed.schedule.switch_times == std::vector<int>{0, 11, 47});

    CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), InvalidInputError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"noise": {"case": 9}})"), InvalidInputError);
}

TEST_CASE("experiment runs are deterministic and serializable") {
    ExperimentConfig cfg;
    cfg.seed = 11;
    cfg.horizon = 60;
    cfg.schedule.switch_times = {0, 20};

    const RunResult first = run_experiment(cfg);
    const std::string csv_a = first.record.to_csv();
    auto second = std::async(std::launch::async, [&] { return run_experiment(cfg); });
    const std::string csv_b = second.get().record.to_csv();
    CHECK(csv_a == csv_b);

    // header names every expanded component
    std::istringstream lines(csv_a);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "t,u_t_0,u_t_1,y_t_0,eta_t_0,eta_t_1,theta_t_0,u_s_t_0,u_s_t_1,y_s_t_0,"
          "y_hat_mu_t_0,stage_cost,hindsight_stage_cost,cumulative_regret");
    // 17 significant digits reproduce the stored value exactly
    std::string row;
    std::getline(lines, row);
    const std::size_t comma = row.find(',');
    const double u0 = std::stod(row.substr(comma + 1, row.find(',', comma + 1) - comma - 1));
    CHECK(u0 == first.record.u(0, 0));
    CHECK(first.record.steps() == 61);
}

TEST_CASE("horizon zero produces a single row with nonnegative regret") {
    ExperimentConfig cfg;
    cfg.seed = 3;
    cfg.horizon = 0;
    cfg.schedule.switches = 1;
    const RunResult run = run_experiment(cfg);
    CHECK(run.record.steps() == 1);
    CHECK(run.regret.total_regret >= -1e-9);
}

TEST_CASE("costs are only queried after revelation") {
    ExperimentConfig cfg;
    cfg.seed = 13;
    cfg.horizon = 12;

    // derive a valid schedule, then instrument every gradient
    const GeneratedData gen = generate_data(cfg.system, cfg.data, 21, cfg.seed);
    std::shared_ptr<std::atomic<int>> current_step = std::make_shared<std::atomic<int>>(-1);
    std::shared_ptr<std::atomic<int>> violations = std::make_shared<std::atomic<int>>(0);
    std::vector<std::pair<int, CostPair>> entries;
    Rng rng = Rng::stream(cfg.seed, 0x300);
    for (int t = 0; t <= cfg.horizon; ++t) {  // switch at every step
        const Vector eta = rng.uniform_vector(2, -1.0, 1.0);
        CostPair pair = quadratic_tracking(eta, steady_output_for_input(gen.system, eta));
        const auto base_u = pair.grad_u;
        const auto base_y = pair.grad_y;
        pair.grad_u = [base_u, t, current_step, violations](const Vector& v) {
            if (current_step->load() < t) ++(*violations);
            return base_u(v);
        };
        pair.grad_y = [base_y, t, current_step, violations](const Vector& y) {
            if (current_step->load() < t) ++(*violations);
            return base_y(y);
        };
        entries.emplace_back(t, std::move(pair));
    }
    const CostSchedule schedule(std::move(entries), cfg.horizon);
    run_experiment(
        cfg, [&](const StepContext& ctx) { current_step->store(ctx.t); }, &schedule);
    CHECK(violations->load() == 0);
}

TEST_CASE("aborted runs preserve the partial record") {
    ExperimentConfig cfg;
    cfg.seed = 17;
    cfg.horizon = 40;
    // a tolerance below the floating-point floor aborts once signals are live
    cfg.controller.feasibility_rel = 1e-17;
    try {
        run_experiment(cfg);
        FAIL("expected the run to abort");
    } catch (const RunAbortedError& e) {
        CHECK(e.step() >= 0);
        CHECK(e.partial_record().steps() == e.step());
    }
}

TEST_CASE("noisy cases complete and stay bounded") {
    for (int noise_case : {2, 3}) {
        ExperimentConfig cfg;
        cfg.seed = 19;
        cfg.horizon = 80;
        cfg.schedule.switch_times = {0, 40};
        cfg.noise.case_id = noise_case;
        cfg.controller.steady_rank_cutoff = 1e-5;
        const RunResult run = run_experiment(cfg);
        double max_theta = 0.0;
        for (int t = 0; t < run.record.steps(); ++t)
            max_theta = std::max(max_theta, run.record.theta.col(t).norm());
        CHECK(max_output_norm(run.record) <= 10.0 * max_theta);
    }
}

TEST_CASE("invariant suite passes on a noiseless benchmark config") {
    ExperimentConfig cfg;
    cfg.seed = 23;
    cfg.horizon = 60;
    cfg.schedule.switch_times = {0, 30};
    const InvariantSuiteResult suite = run_invariant_suite(cfg);
    for (const auto& check : suite.checks) {
        INFO(check.name, " value=", check.value, " threshold=", check.threshold);
        CHECK(check.pass);
    }
    CHECK(suite.all_passed());
}

TEST_CASE("trajectory csv lists every signal component") {
    Rng rng(703);
    const Trajectory traj(rng.uniform_matrix(2, 3, -1, 1), rng.uniform_matrix(1, 3, -1, 1));
    const std::string csv = trajectory_to_csv(traj);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "k,u_d_0,u_d_1,y_d_0");
    int rows = 0;
    std::string row;
    while (std::getline(lines, row)) ++rows;
    CHECK(rows == 3);
}
