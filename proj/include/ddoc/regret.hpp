#pragma once

#include <vector>

#include "ddoc/costs.hpp"
#include "ddoc/lti.hpp"

namespace ddoc {

// Dynamic-regret report against the hindsight-optimal trajectory, plus the
// cost-variation path lengths that bound the regret.
struct RegretReport {
    std::vector<double> realized;    // L_t(u_t, y_t)
    std::vector<double> hindsight;   // L_t(u*_t, y*_t)
    std::vector<double> cumulative;  // R(tau) = sum_{t<=tau} realized - hindsight
    double total_regret = 0.0;       // R(T)
    double theta_path = 0.0;         // sum ||theta_t - theta_{t-1}||
    double eta_path = 0.0;           // sum ||eta_t - eta_{t-1}||
    Trajectory hindsight_trajectory;
};

// Path lengths of the schedule minimizers. eta_init / theta_init supply the
// t = -1 conventions; empty vectors default to the t = 0 minimizers
// (zero first term).
std::pair<double, double> variation_metrics(const CostSchedule& schedule,
                                            const Vector& eta_init = Vector(),
                                            const Vector& theta_init = Vector());

// Realized trajectory must cover the schedule horizon (length T+1). The
// comparator is the full-horizon optimal solution from xbar.
RegretReport compute_regret(const Trajectory& realized, const LtiSystem& sys,
                            const CostSchedule& schedule, const Vector& xbar,
                            const Vector& eta_init = Vector(),
                            const Vector& theta_init = Vector());

}  // namespace ddoc
