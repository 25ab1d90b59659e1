// Python bindings for the core operations: Hankel algebra, excitation
// checks, pseudoinverse utilities, the simulation oracle, the controller
// and the experiment runner.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ddoc/controller.hpp"
#include "ddoc/equilibria.hpp"
#include "ddoc/harness.hpp"
#include "ddoc/lti.hpp"
#include "ddoc/numerics.hpp"

namespace py = pybind11;
using namespace ddoc;

namespace {

RankTolerance tol_for(const Matrix& m, double cutoff) {
    return cutoff > 0.0 ? RankTolerance{cutoff} : RankTolerance::standard(m.rows(), m.cols());
}

ControllerConfig config_from_kwargs(int n_bar, int mu, double gamma_u, double gamma_y,
                                    double rank_cutoff, double feasibility_rel,
                                    double transient_weight, bool identity_regularization) {
    ControllerConfig cfg;
    cfg.n_bar = n_bar;
    cfg.mu = mu;
    cfg.gamma_u = gamma_u;
    cfg.gamma_y = gamma_y;
    cfg.rank_cutoff = rank_cutoff;
    cfg.feasibility_rel = feasibility_rel;
    cfg.weight.transient_weight = transient_weight;
    cfg.weight.identity_regularization = identity_regularization;
    return cfg;
}

// Owns the precomputed matrices plus the evolving state; mirrors the C++
// precompute / make_initial_state / advance flow for scripting use.
class Controller {
public:
    Controller(const Matrix& data_inputs, const Matrix& data_outputs,
               const ControllerConfig& config)
        : dm_(precompute(Trajectory(data_inputs, data_outputs), config)) {}

    py::tuple warm_start(const Matrix& warmup_inputs, const Matrix& warmup_outputs) {
        auto [state, pending] =
            make_initial_state(dm_, Trajectory(warmup_inputs, warmup_outputs));
        state_ = std::move(state);
        return py::make_tuple(pending);
    }

    py::dict step(const std::function<Vector(const Vector&)>& grad_u,
                  const std::function<Vector(const Vector&)>& grad_y, const Vector& y_measured) {
        auto [u, diag] = advance(state_, dm_, grad_u, grad_y, y_measured);
        py::dict out;
        out["u"] = u;
        out["y_hat_mu"] = diag.y_hat_mu;
        out["y_s"] = diag.y_s;
        out["u_s"] = diag.u_s;
        out["omega"] = diag.omega;
        out["alpha"] = diag.alpha;
        out["beta"] = diag.beta;
        return out;
    }

    int columns() const { return dm_.cols; }
    int mu() const { return dm_.config.mu; }

private:
    DataMatrices dm_;
    ControllerState state_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Data-driven online convex optimization control of unknown LTI systems";

    py::register_exception<Error>(m, "DdocError");

    m.def(
        "pseudoinverse",
        [](const Matrix& mat, double cutoff) { return pseudoinverse(mat, tol_for(mat, cutoff)); },
        py::arg("matrix"), py::arg("rank_cutoff") = 0.0);
    m.def(
        "numerical_rank",
        [](const Matrix& mat, double cutoff) { return numerical_rank(mat, tol_for(mat, cutoff)); },
        py::arg("matrix"), py::arg("rank_cutoff") = 0.0);
    m.def(
        "weighted_min_norm_solve",
        [](const Matrix& h, const Vector& g, const Matrix& q, double cutoff,
           double feasibility_rel) {
            return weighted_min_norm_solve(h, g, q, tol_for(h, cutoff), feasibility_rel);
        },
        py::arg("h"), py::arg("g"), py::arg("q"), py::arg("rank_cutoff") = 0.0,
        py::arg("feasibility_rel") = 1e-6);

    m.def(
        "build_hankel",
        [](const Matrix& signal, int depth) { return build_hankel(signal, depth).matrix; },
        py::arg("signal"), py::arg("depth"),
        "Block Hankel matrix of the signal (columns index time)");
    m.def(
        "is_persistently_exciting",
        [](const Matrix& u, int order, double cutoff) {
            const RankTolerance tol =
                cutoff > 0.0 ? RankTolerance{cutoff}
                             : RankTolerance::standard(u.rows() * order, u.cols() - order + 1);
            return is_persistently_exciting(u, order, tol);
        },
        py::arg("u"), py::arg("order"), py::arg("rank_cutoff") = 0.0);
    m.def(
        "trajectory_residual",
        [](const Matrix& cand_u, const Matrix& cand_y, const Matrix& data_u,
           const Matrix& data_y) {
            const int depth = static_cast<int>(cand_u.cols());
            return trajectory_residual(Trajectory(cand_u, cand_y), build_hankel(data_u, depth),
                                       build_hankel(data_y, depth));
        },
        py::arg("candidate_inputs"), py::arg("candidate_outputs"), py::arg("data_inputs"),
        py::arg("data_outputs"));

    py::class_<LtiSystem>(m, "LtiSystem")
        .def(py::init<Matrix, Matrix, Matrix, Matrix, Vector>(), py::arg("a"), py::arg("b"),
             py::arg("c"), py::arg("d"), py::arg("x0"))
        .def_property_readonly("order", &LtiSystem::order)
        .def_property_readonly("input_dim", &LtiSystem::input_dim)
        .def_property_readonly("output_dim", &LtiSystem::output_dim)
        .def_property_readonly("state", &LtiSystem::state)
        .def("set_state", &LtiSystem::set_state)
        .def("step", &LtiSystem::step, py::arg("u"))
        .def(
            "simulate",
            [](LtiSystem& sys, const Matrix& u) {
                const Trajectory t = sys.simulate(u);
                return py::make_tuple(t.inputs, t.outputs);
            },
            py::arg("inputs"));
    m.def("controllability_index", &controllability_index);
    m.def("steady_output_for_input", &steady_output_for_input, py::arg("system"), py::arg("u"));
    m.def(
        "model_steady_state",
        [](const LtiSystem& sys, const Vector& y_target, const Vector& v) {
            const auto pair = model_steady_state(sys, y_target, v);
            return py::make_tuple(pair.input, pair.state);
        },
        py::arg("system"), py::arg("y_target"), py::arg("v"));

    py::class_<SteadyMaps>(m, "SteadyMaps")
        .def_readonly("s_u", &SteadyMaps::s_u)
        .def_readonly("s_y", &SteadyMaps::s_y)
        .def_readonly("p0", &SteadyMaps::p0);
    m.def(
        "compute_steady_maps",
        [](const Matrix& data_u, const Matrix& data_y, int n_bar, double cutoff) {
            const Trajectory data(data_u, data_y);
            const RankTolerance tol = cutoff > 0.0
                                          ? RankTolerance{cutoff}
                                          : RankTolerance::standard(
                                                (data_u.rows() + data_y.rows()) * (n_bar + 1),
                                                data_u.cols() - n_bar);
            return compute_steady_maps(data, n_bar, tol);
        },
        py::arg("data_inputs"), py::arg("data_outputs"), py::arg("n_bar"),
        py::arg("rank_cutoff") = 0.0);
    m.def("equilibrium_residual", &equilibrium_residual, py::arg("maps"), py::arg("u"),
          py::arg("y"));
    m.def("nearest_steady_input", &nearest_steady_input, py::arg("maps"), py::arg("v"),
          py::arg("y"), py::arg("feasibility_rel") = 1e-6);

    py::class_<ControllerConfig>(m, "ControllerConfig")
        .def(py::init(&config_from_kwargs), py::arg("n_bar"), py::arg("mu") = 0,
             py::arg("gamma_u") = 0.75, py::arg("gamma_y") = 0.75, py::arg("rank_cutoff") = 0.0,
             py::arg("feasibility_rel") = 1e-6, py::arg("transient_weight") = 100.0,
             py::arg("identity_regularization") = true);
    py::class_<Controller>(m, "Controller")
        .def(py::init<const Matrix&, const Matrix&, const ControllerConfig&>(),
             py::arg("data_inputs"), py::arg("data_outputs"), py::arg("config"))
        .def("warm_start", &Controller::warm_start, py::arg("warmup_inputs"),
             py::arg("warmup_outputs"))
        .def("step", &Controller::step, py::arg("grad_u"), py::arg("grad_y"),
             py::arg("y_measured"))
        .def_property_readonly("columns", &Controller::columns)
        .def_property_readonly("mu", &Controller::mu);

    m.def(
        "run_experiment",
        [](const std::string& config_json) {
            const auto config = ExperimentConfig::from_json(config_json);
            const auto result = run_experiment(config);
            py::dict out;
            out["record_csv"] = result.record.to_csv();
            out["summary_json"] = result.summary_json(config);
            out["u"] = result.record.u;
            out["y"] = result.record.y;
            out["theta"] = result.record.theta;
            out["eta"] = result.record.eta;
            out["total_regret"] = result.regret.total_regret;
            return out;
        },
        py::arg("config_json"), "Run a full closed-loop experiment from a JSON config string");
}
