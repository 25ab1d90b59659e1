#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ddoc/controller.hpp"
#include "ddoc/errors.hpp"
#include "ddoc/lti.hpp"
#include "ddoc/regret.hpp"
#include "ddoc/rng.hpp"

namespace ddoc {

struct DataSpec {
    int length = 100;
    double input_bound = 1.0;      // data inputs i.i.d. uniform on [-b, b]^m
    double max_output_norm = 1e3;  // regenerate when the open-loop data exceeds this
    int max_retries = 64;
    double steady_margin = 0.05;  // min singular value of I - A and of [I-A,-B;C,D]
};

struct ScheduleSpec {
    int switches = 5;                    // cost changes incl. the t = 0 activation
    std::vector<int> switch_times;       // explicit activation times; overrides `switches`
    double eta_bound = 1.0;              // input minimizers drawn uniform on [-b, b]^m
    double validation_tolerance = 1e-6;  // equilibrium residual tolerance (relative)
};

struct NoiseSpec {
    int case_id = 1;  // 1 noiseless, 2 noisy data, 3 noisy data + measurements
    double data_bound = 1e-5;
    double measurement_bound = 1e-2;
};

struct OutputSpec {
    std::string dir = ".";
    std::string record = "record.csv";
    std::string summary = "summary.json";
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    SystemSpec system;
    DataSpec data;
    ControllerConfig controller;
    ScheduleSpec schedule;
    int horizon = 300;
    NoiseSpec noise;
    OutputSpec output;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    void save(const std::string& path) const;

    // Controller config with defaults resolved: n_bar falls back to the
    // system-order bound from the system spec, mu to n_bar.
    ControllerConfig resolved_controller() const;
    int excitation_order() const;  // 3*n_bar + mu + 1
};

// Per-step log of the closed loop; row count horizon + 1.
struct RunRecord {
    std::vector<long> t;
    Matrix u, y;            // applied inputs, true outputs
    Matrix eta, theta;      // active cost minimizers
    Matrix u_s, y_s;        // steady-state targets chosen by the controller
    Matrix y_hat;           // mu-step-ahead predictions
    std::vector<double> stage_cost, hindsight_cost, cumulative_regret;

    int steps() const { return static_cast<int>(t.size()); }
    std::string to_csv() const;
};

struct GeneratedData {
    LtiSystem system;  // plant at state zero
    Trajectory trajectory;
    int retries = 0;
};

// Draws the system and an i.i.d.-uniform input sequence, simulates from the
// zero state, and verifies persistency of excitation of the given order and
// boundedness of the outputs; deterministically retries on failure.
GeneratedData generate_data(const SystemSpec& system, const DataSpec& data, int pe_order,
                            std::uint64_t seed);

// Additive perturbation of each column, uniform on the norm ball.
Matrix inject_noise(const Matrix& signal, double bound, Rng& rng);

// Draws eta per switch and derives theta from the model steady-state map so
// the Assumption-3 equilibrium property holds by construction.
CostSchedule build_schedule(const LtiSystem& sys, const ScheduleSpec& spec, int horizon,
                            std::uint64_t seed);

// Observer invoked once per closed-loop step (after the plant is advanced).
struct StepContext {
    int t = 0;
    Vector u_applied;
    Vector y_measured;      // what the controller saw (noisy in case 3)
    Vector y_true;          // the plant output at t
    Vector plant_state;     // true state x_t, before applying u_t
    const StepDiagnostics* diag = nullptr;
};
using StepHook = std::function<void(const StepContext&)>;

struct RunResult {
    RunRecord record;
    RegretReport regret;
    std::optional<LtiSystem> system;           // plant after the run
    std::optional<Trajectory> data;            // clean data trajectory
    std::optional<Trajectory> data_used;       // copy seen by the controller
    std::optional<DataMatrices> matrices;
    std::optional<CostSchedule> schedule;
    std::vector<std::string> warnings;
    double runtime_seconds = 0.0;

    std::string summary_json(const ExperimentConfig& config) const;
};

// Full closed loop: generation, warm-up, per-step advance with the one-step
// cost revelation lag, logging, regret post-processing. A schedule override
// replaces the spec-derived schedule (it is still validated).
RunResult run_experiment(const ExperimentConfig& config, const StepHook& hook = nullptr,
                         const CostSchedule* schedule_override = nullptr);

// Raised when a closed-loop step fails; carries the rows logged so far.
class RunAbortedError : public Error {
public:
    RunAbortedError(const Error& inner, long step, RunRecord partial)
        : Error(inner.code(), inner.what()), step_(step), partial_(std::move(partial)) {}
    long step() const noexcept { return step_; }
    const RunRecord& partial_record() const noexcept { return partial_; }

private:
    long step_;
    RunRecord partial_;
};

// Mean of ||y_t - theta_t|| over t >= skip_initial.
double mean_tracking_error(const RunRecord& record, int skip_initial = 30);
double max_output_norm(const RunRecord& record);

// Data trajectory CSV (columns k, u_d_*, y_d_*).
std::string trajectory_to_csv(const Trajectory& trajectory);

// 17-significant-digit float formatting used by all CSV emitters.
std::string format_double(double value);

}  // namespace ddoc
