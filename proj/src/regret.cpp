#include "ddoc/regret.hpp"

#include "ddoc/errors.hpp"

namespace ddoc {

std::pair<double, double> variation_metrics(const CostSchedule& schedule, const Vector& eta_init,
                                            const Vector& theta_init) {
    Vector eta_prev = eta_init.size() ? eta_init : schedule.eta_at(0);
    Vector theta_prev = theta_init.size() ? theta_init : schedule.theta_at(0);
    double theta_path = 0.0, eta_path = 0.0;
    for (int t = 0; t <= schedule.horizon(); ++t) {
        theta_path += (schedule.theta_at(t) - theta_prev).norm();
        eta_path += (schedule.eta_at(t) - eta_prev).norm();
        theta_prev = schedule.theta_at(t);
        eta_prev = schedule.eta_at(t);
    }
    return {theta_path, eta_path};
}

RegretReport compute_regret(const Trajectory& realized, const LtiSystem& sys,
                            const CostSchedule& schedule, const Vector& xbar,
                            const Vector& eta_init, const Vector& theta_init) {
    const int steps = schedule.horizon() + 1;
    if (realized.length() != steps)
        throw InvalidInputError("realized trajectory length " + std::to_string(realized.length()) +
                                " does not match schedule horizon + 1 = " + std::to_string(steps));

    LtiSystem comparator = sys;
    comparator.set_state(xbar);
    auto [optimal, optimal_cost] = solve_hindsight(comparator, schedule, xbar);

    RegretReport report;
    report.realized.resize(steps);
    report.hindsight.resize(steps);
    report.cumulative.resize(steps);
    double running = 0.0;
    for (int t = 0; t < steps; ++t) {
        const CostPair& cost = schedule.cost_at(t);
        report.realized[t] = cost.value(realized.inputs.col(t), realized.outputs.col(t));
        report.hindsight[t] = cost.value(optimal.inputs.col(t), optimal.outputs.col(t));
        running += report.realized[t] - report.hindsight[t];
        report.cumulative[t] = running;
    }
    report.total_regret = running;
    std::tie(report.theta_path, report.eta_path) =
        variation_metrics(schedule, eta_init, theta_init);
    report.hindsight_trajectory = std::move(optimal);
    return report;
}

}  // namespace ddoc
