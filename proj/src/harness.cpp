#include "ddoc/harness.hpp"

#include <Eigen/SVD>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ddoc {

using nlohmann::json;

namespace {

// Fixed stream identifiers so every random draw is attributable to the seed.
constexpr std::uint64_t kSystemStream = 0x100;
constexpr std::uint64_t kDataInputStream = 0x200;
constexpr std::uint64_t kScheduleStream = 0x300;
constexpr std::uint64_t kDataNoiseStream = 0x400;
constexpr std::uint64_t kMeasurementNoiseStream = 0x500;

double smallest_singular_value(const Matrix& m) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues().minCoeff();
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    const auto r = rows.size();
    const auto c = r ? rows.at(0).size() : 0;
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
    return m;
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["seed"] = seed;
    json sys;
    sys["mode"] = system.mode == SystemSpec::Mode::random ? "random" : "explicit";
    sys["n"] = system.n;
    sys["m"] = system.m;
    sys["p"] = system.p;
    sys["entry_bound"] = system.entry_bound;
    if (system.mode == SystemSpec::Mode::explicit_matrices) {
        sys["a"] = matrix_to_json(system.a);
        sys["b"] = matrix_to_json(system.b);
        sys["c"] = matrix_to_json(system.c);
        sys["d"] = matrix_to_json(system.d);
    }
    j["system"] = sys;
    j["data"] = {{"length", data.length},
                 {"input_bound", data.input_bound},
                 {"max_output_norm", data.max_output_norm},
                 {"max_retries", data.max_retries},
                 {"steady_margin", data.steady_margin}};
    j["controller"] = {{"gamma_u", controller.gamma_u},
                       {"gamma_y", controller.gamma_y},
                       {"n_bar", controller.n_bar},
                       {"mu", controller.mu},
                       {"rank_cutoff", controller.rank_cutoff},
                       {"steady_rank_cutoff", controller.steady_rank_cutoff},
                       {"feasibility_rel", controller.feasibility_rel},
                       {"transient_weight", controller.weight.transient_weight},
                       {"identity_regularization", controller.weight.identity_regularization}};
    j["schedule"] = {{"switches", schedule.switches},
                     {"switch_times", schedule.switch_times},
                     {"eta_bound", schedule.eta_bound},
                     {"validation_tolerance", schedule.validation_tolerance}};
    j["horizon"] = horizon;
    j["noise"] = {{"case", noise.case_id},
                  {"data_bound", noise.data_bound},
                  {"measurement_bound", noise.measurement_bound}};
    j["output"] = {{"dir", output.dir}, {"record", output.record}, {"summary", output.summary}};
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("config parse failure: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("system")) {
            const json& sys = j["system"];
            const std::string mode = sys.value("mode", "random");
            cfg.system.mode = mode == "explicit" ? SystemSpec::Mode::explicit_matrices
                                                 : SystemSpec::Mode::random;
            cfg.system.n = sys.value("n", cfg.system.n);
            cfg.system.m = sys.value("m", cfg.system.m);
            cfg.system.p = sys.value("p", cfg.system.p);
            cfg.system.entry_bound = sys.value("entry_bound", cfg.system.entry_bound);
            if (cfg.system.mode == SystemSpec::Mode::explicit_matrices) {
                cfg.system.a = matrix_from_json(sys.at("a"));
                cfg.system.b = matrix_from_json(sys.at("b"));
                cfg.system.c = matrix_from_json(sys.at("c"));
                cfg.system.d = matrix_from_json(sys.at("d"));
                cfg.system.n = static_cast<int>(cfg.system.a.rows());
                cfg.system.m = static_cast<int>(cfg.system.b.cols());
                cfg.system.p = static_cast<int>(cfg.system.c.rows());
            }
        }
        if (j.contains("data")) {
            const json& d = j["data"];
            cfg.data.length = d.value("length", cfg.data.length);
            cfg.data.input_bound = d.value("input_bound", cfg.data.input_bound);
            cfg.data.max_output_norm = d.value("max_output_norm", cfg.data.max_output_norm);
            cfg.data.max_retries = d.value("max_retries", cfg.data.max_retries);
            cfg.data.steady_margin = d.value("steady_margin", cfg.data.steady_margin);
        }
        if (j.contains("controller")) {
            const json& c = j["controller"];
            cfg.controller.gamma_u = c.value("gamma_u", cfg.controller.gamma_u);
            cfg.controller.gamma_y = c.value("gamma_y", cfg.controller.gamma_y);
            cfg.controller.n_bar = c.value("n_bar", cfg.controller.n_bar);
            cfg.controller.mu = c.value("mu", cfg.controller.mu);
            cfg.controller.rank_cutoff = c.value("rank_cutoff", cfg.controller.rank_cutoff);
            cfg.controller.steady_rank_cutoff =
                c.value("steady_rank_cutoff", cfg.controller.steady_rank_cutoff);
            cfg.controller.feasibility_rel =
                c.value("feasibility_rel", cfg.controller.feasibility_rel);
            cfg.controller.weight.transient_weight =
                c.value("transient_weight", cfg.controller.weight.transient_weight);
            cfg.controller.weight.identity_regularization =
                c.value("identity_regularization", cfg.controller.weight.identity_regularization);
        }
        if (j.contains("schedule")) {
            const json& s = j["schedule"];
            cfg.schedule.switches = s.value("switches", cfg.schedule.switches);
            cfg.schedule.switch_times =
                s.value("switch_times", cfg.schedule.switch_times);
            cfg.schedule.eta_bound = s.value("eta_bound", cfg.schedule.eta_bound);
            cfg.schedule.validation_tolerance =
                s.value("validation_tolerance", cfg.schedule.validation_tolerance);
        }
        cfg.horizon = j.value("horizon", cfg.horizon);
        if (j.contains("noise")) {
            const json& n = j["noise"];
            cfg.noise.case_id = n.value("case", cfg.noise.case_id);
            cfg.noise.data_bound = n.value("data_bound", cfg.noise.data_bound);
            cfg.noise.measurement_bound =
                n.value("measurement_bound", cfg.noise.measurement_bound);
        }
        if (j.contains("output")) {
            const json& o = j["output"];
            cfg.output.dir = o.value("dir", cfg.output.dir);
            cfg.output.record = o.value("record", cfg.output.record);
            cfg.output.summary = o.value("summary", cfg.output.summary);
        }
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("config field error: ") + e.what());
    }
    if (cfg.horizon < 0) throw InvalidInputError("horizon must be >= 0");
    if (cfg.noise.case_id < 1 || cfg.noise.case_id > 3)
        throw InvalidInputError("noise case must be 1, 2 or 3");
    if (cfg.noise.data_bound < 0 || cfg.noise.measurement_bound < 0)
        throw InvalidInputError("noise bounds must be >= 0");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write config file " + path);
    out << to_json() << "\n";
}

ControllerConfig ExperimentConfig::resolved_controller() const {
    ControllerConfig ctrl = controller;
    if (ctrl.n_bar == 0) ctrl.n_bar = system.n;
    ctrl.mu = ctrl.resolved_mu();
    return ctrl;
}

int ExperimentConfig::excitation_order() const {
    const ControllerConfig ctrl = resolved_controller();
    return 3 * ctrl.n_bar + ctrl.mu + 1;
}

GeneratedData generate_data(const SystemSpec& system, const DataSpec& data, int pe_order,
                            std::uint64_t seed) {
    if (data.length < 1) throw InvalidInputError("data length must be positive");
    if (data.input_bound <= 0.0)
        throw GenerationFailureError("input distribution width must be positive for excitation");
    std::string last_failure = "no attempt made";
    for (int retry = 0; retry < std::max(1, data.max_retries); ++retry) {
        std::optional<LtiSystem> sys;
        if (system.mode == SystemSpec::Mode::explicit_matrices) {
            sys = make_system(system);
        } else {
            Rng sys_rng = Rng::stream(seed, kSystemStream + retry);
            sys = random_system(system, sys_rng);
            const int n = sys->order();
            if (smallest_singular_value(Matrix::Identity(n, n) - sys->a()) <
                data.steady_margin) {
                last_failure = "steady-state map near singular";
                continue;
            }
        }
        Rng input_rng = Rng::stream(seed, kDataInputStream + retry);
        const Matrix inputs = input_rng.uniform_matrix(sys->input_dim(), data.length,
                                                       -data.input_bound, data.input_bound);
        LtiSystem sim = *sys;
        sim.set_state(Vector::Zero(sys->order()));
        Trajectory trajectory = sim.simulate(inputs);
        if (trajectory.outputs.colwise().norm().maxCoeff() > data.max_output_norm) {
            last_failure = "open-loop data outputs exceeded max_output_norm";
            if (system.mode == SystemSpec::Mode::explicit_matrices) break;
            continue;
        }
        const RankTolerance tol = RankTolerance::standard(
            static_cast<Eigen::Index>(sys->input_dim()) * pe_order, data.length - pe_order + 1);
        if (data.length < pe_order ||
            !is_persistently_exciting(inputs, pe_order, tol)) {
            last_failure = "input not persistently exciting of order " + std::to_string(pe_order);
            continue;
        }
        sys->set_state(Vector::Zero(sys->order()));
        return GeneratedData{std::move(*sys), std::move(trajectory), retry};
    }
    throw GenerationFailureError("data generation failed after " +
                                 std::to_string(data.max_retries) +
                                 " attempts: " + last_failure);
}

Matrix inject_noise(const Matrix& signal, double bound, Rng& rng) {
    if (bound < 0.0) throw InvalidInputError("noise bound must be >= 0");
    Matrix out = signal;
    for (Eigen::Index k = 0; k < out.cols(); ++k)
        out.col(k) += rng.uniform_ball(static_cast<int>(out.rows()), bound);
    return out;
}

CostSchedule build_schedule(const LtiSystem& sys, const ScheduleSpec& spec, int horizon,
                            std::uint64_t seed) {
    std::vector<int> times = spec.switch_times;
    if (times.empty()) {
        if (spec.switches < 1) throw InvalidInputError("schedule needs at least one cost");
        if (spec.switches > horizon + 1)
            throw InvalidInputError("more switches than time steps");
        for (int i = 0; i < spec.switches; ++i)
            times.push_back(i * (horizon + 1) / spec.switches);
    }
    Rng rng = Rng::stream(seed, kScheduleStream);
    std::vector<std::pair<int, CostPair>> entries;
    entries.reserve(times.size());
    for (int time : times) {
        const Vector eta = rng.uniform_vector(sys.input_dim(), -spec.eta_bound, spec.eta_bound);
        const Vector theta = steady_output_for_input(sys, eta);
        entries.emplace_back(time, quadratic_tracking(eta, theta));
    }
    return CostSchedule(std::move(entries), horizon);
}

std::string RunRecord::to_csv() const {
    std::ostringstream out;
    const int m = static_cast<int>(u.rows());
    const int p = static_cast<int>(y.rows());
    out << "t";
    auto header_vec = [&](const char* name, int dim) {
        for (int i = 0; i < dim; ++i) out << "," << name << "_" << i;
    };
    header_vec("u_t", m);
    header_vec("y_t", p);
    header_vec("eta_t", m);
    header_vec("theta_t", p);
    header_vec("u_s_t", m);
    header_vec("y_s_t", p);
    header_vec("y_hat_mu_t", p);
    out << ",stage_cost,hindsight_stage_cost,cumulative_regret\n";
    for (int k = 0; k < steps(); ++k) {
        out << t[k];
        auto emit_col = [&](const Matrix& mat) {
            for (Eigen::Index i = 0; i < mat.rows(); ++i)
                out << "," << format_double(mat(i, k));
        };
        emit_col(u);
        emit_col(y);
        emit_col(eta);
        emit_col(theta);
        emit_col(u_s);
        emit_col(y_s);
        emit_col(y_hat);
        out << "," << format_double(stage_cost[k]) << "," << format_double(hindsight_cost[k])
            << "," << format_double(cumulative_regret[k]) << "\n";
    }
    return out.str();
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    out << "k";
    for (int i = 0; i < trajectory.input_dim(); ++i) out << ",u_d_" << i;
    for (int i = 0; i < trajectory.output_dim(); ++i) out << ",y_d_" << i;
    out << "\n";
    for (int k = 0; k < trajectory.length(); ++k) {
        out << k;
        for (int i = 0; i < trajectory.input_dim(); ++i)
            out << "," << format_double(trajectory.inputs(i, k));
        for (int i = 0; i < trajectory.output_dim(); ++i)
            out << "," << format_double(trajectory.outputs(i, k));
        out << "\n";
    }
    return out.str();
}

namespace {

RunRecord truncate_record(RunRecord record, int filled) {
    record.t.resize(filled);
    record.u.conservativeResize(Eigen::NoChange, filled);
    record.y.conservativeResize(Eigen::NoChange, filled);
    record.eta.conservativeResize(Eigen::NoChange, filled);
    record.theta.conservativeResize(Eigen::NoChange, filled);
    record.u_s.conservativeResize(Eigen::NoChange, filled);
    record.y_s.conservativeResize(Eigen::NoChange, filled);
    record.y_hat.conservativeResize(Eigen::NoChange, filled);
    record.stage_cost.resize(filled, 0.0);
    record.hindsight_cost.resize(filled, 0.0);
    record.cumulative_regret.resize(filled, 0.0);
    return record;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const StepHook& hook,
                         const CostSchedule* schedule_override) {
    const auto started = std::chrono::steady_clock::now();
    ControllerConfig ctrl = config.resolved_controller();
    ctrl.validate();

    const int pe_order = 3 * ctrl.n_bar + ctrl.mu + 1;
    GeneratedData gen = generate_data(config.system, config.data, pe_order, config.seed);
    const int m = gen.system.input_dim();
    const int p = gen.system.output_dim();

    Trajectory data_used = gen.trajectory;
    if (config.noise.case_id >= 2) {
        Rng noise_rng = Rng::stream(config.seed, kDataNoiseStream);
        data_used.outputs = inject_noise(data_used.outputs, config.noise.data_bound, noise_rng);
    }

    DataMatrices dm = precompute(data_used, ctrl);
    CostSchedule schedule = schedule_override
                                ? *schedule_override
                                : build_schedule(gen.system, config.schedule, config.horizon,
                                                 config.seed);
    if (schedule.horizon() != config.horizon)
        throw InvalidInputError("schedule horizon does not match the experiment horizon");
    std::vector<std::string> warnings = schedule.step_size_warnings(ctrl.gamma_u, ctrl.gamma_y);
    // Noisy steady maps cannot certify equilibria to the noiseless tolerance.
    const double validation_tol =
        config.noise.case_id >= 2
            ? std::max(config.schedule.validation_tolerance, 1e3 * config.noise.data_bound)
            : config.schedule.validation_tolerance;
    schedule.validate_assumption3(dm.steady, validation_tol);

    LtiSystem plant = gen.system;
    const Trajectory warmup = plant.simulate(Matrix::Zero(m, ctrl.n_bar));
    const Vector x_at_start = plant.state();
    auto [state, pending_y] = make_initial_state(dm, warmup);

    const int steps = config.horizon + 1;
    RunRecord record;
    record.t.resize(steps);
    record.u.resize(m, steps);
    record.y.resize(p, steps);
    record.eta.resize(m, steps);
    record.theta.resize(p, steps);
    record.u_s.resize(m, steps);
    record.y_s.resize(p, steps);
    record.y_hat.resize(p, steps);
    record.stage_cost.assign(steps, 0.0);
    record.hindsight_cost.assign(steps, 0.0);
    record.cumulative_regret.assign(steps, 0.0);

    Rng measurement_rng = Rng::stream(config.seed, kMeasurementNoiseStream);
    const GradientFn zero_grad_u = [m](const Vector&) { return Vector::Zero(m); };
    const GradientFn zero_grad_y = [p](const Vector&) { return Vector::Zero(p); };

    Vector y_prev = pending_y;
    Vector theta_init;
    for (int t = 0; t < steps; ++t) {
        GradientFn grad_u = zero_grad_u;
        GradientFn grad_y = zero_grad_y;
        if (t > 0) {
            const CostPair& prev = schedule.cost_at(t - 1);
            grad_u = prev.grad_u;
            grad_y = prev.grad_y;
        }
        Vector y_measured = y_prev;
        if (config.noise.case_id == 3)
            y_measured += measurement_rng.uniform_ball(p, config.noise.measurement_bound);

        const Vector plant_state = plant.state();
        Vector u_t;
        StepDiagnostics diag;
        try {
            std::tie(u_t, diag) = advance(state, dm, grad_u, grad_y, y_measured);
        } catch (const Error& e) {
            throw RunAbortedError(e, t, truncate_record(std::move(record), t));
        }
        const Vector y_t = plant.step(u_t);

        record.t[t] = t;
        record.u.col(t) = u_t;
        record.y.col(t) = y_t;
        record.eta.col(t) = schedule.eta_at(t);
        record.theta.col(t) = schedule.theta_at(t);
        record.u_s.col(t) = diag.u_s;
        record.y_s.col(t) = diag.y_s;
        record.y_hat.col(t) = diag.y_hat_mu;
        if (t == 0) theta_init = diag.y_hat_mu;

        if (hook) {
            StepContext ctx;
            ctx.t = t;
            ctx.u_applied = u_t;
            ctx.y_measured = y_measured;
            ctx.y_true = y_t;
            ctx.plant_state = plant_state;
            ctx.diag = &diag;
            hook(ctx);
        }
        y_prev = y_t;
    }

    RunResult result;
    const Vector eta_init = Vector::Zero(m);  // v_{-1} initialization
    result.regret = compute_regret(Trajectory(record.u, record.y), gen.system, schedule,
                                   x_at_start, eta_init, theta_init);
    for (int t = 0; t < steps; ++t) {
        record.stage_cost[t] = result.regret.realized[t];
        record.hindsight_cost[t] = result.regret.hindsight[t];
        record.cumulative_regret[t] = result.regret.cumulative[t];
    }
    result.record = std::move(record);
    result.system = std::move(plant);
    result.data = std::move(gen.trajectory);
    result.data_used = std::move(data_used);
    result.matrices = std::move(dm);
    result.schedule = std::move(schedule);
    result.warnings = std::move(warnings);
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

double mean_tracking_error(const RunRecord& record, int skip_initial) {
    double sum = 0.0;
    int count = 0;
    for (int t = skip_initial; t < record.steps(); ++t) {
        sum += (record.y.col(t) - record.theta.col(t)).norm();
        ++count;
    }
    return count ? sum / count : 0.0;
}

double max_output_norm(const RunRecord& record) {
    double worst = 0.0;
    for (int t = 0; t < record.steps(); ++t) worst = std::max(worst, record.y.col(t).norm());
    return worst;
}

std::string RunResult::summary_json(const ExperimentConfig& config) const {
    json j;
    j["seed"] = config.seed;
    j["horizon"] = config.horizon;
    j["noise_case"] = config.noise.case_id;
    j["total_regret"] = regret.total_regret;
    j["theta_path"] = regret.theta_path;
    j["eta_path"] = regret.eta_path;
    double realized = 0.0, hindsight = 0.0;
    for (double v : regret.realized) realized += v;
    for (double v : regret.hindsight) hindsight += v;
    j["total_realized_cost"] = realized;
    j["total_hindsight_cost"] = hindsight;
    j["mean_tracking_error"] = mean_tracking_error(record);
    j["max_output_norm"] = max_output_norm(record);
    j["runtime_seconds"] = runtime_seconds;
    j["warnings"] = warnings;
    return j.dump(2);
}

}  // namespace ddoc
