#pragma once

#include <functional>
#include <vector>

#include "ddoc/numerics.hpp"

namespace ddoc {

struct SteadyMaps;  // equilibria.hpp

// Separable stage cost L(u, y) = f_u(u) + f_y(y) with gradient access.
// alpha_* / l_* are the strong-convexity and smoothness moduli; lipschitz_*
// are value Lipschitz constants over an operating box (diagnostic only).
struct CostPair {
    std::function<double(const Vector&, const Vector&)> value;
    std::function<Vector(const Vector&)> grad_u;
    std::function<Vector(const Vector&)> grad_y;
    double alpha_u = 0.0, alpha_y = 0.0;
    double l_u = 0.0, l_y = 0.0;
    double lipschitz_u = 0.0, lipschitz_y = 0.0;
    Vector eta;    // argmin of f_u (known for the benchmark family)
    Vector theta;  // argmin of f_y
    bool quadratic_tracking_family = false;
};

// f_u(u) = 1/2 ||u - eta||^2, f_y(y) = 1/2 ||y - theta||^2.
// alpha = l = 1 for both parts.
CostPair quadratic_tracking(const Vector& eta, const Vector& theta);

// One online gradient descent step: z - gamma * grad.
Vector ogd_step(const Vector& z, const Vector& grad, double gamma);

// Piecewise-constant schedule of stage costs over horizon 0..T.
// Activation times are strictly increasing with the first at t = 0.
class CostSchedule {
public:
    CostSchedule(std::vector<std::pair<int, CostPair>> entries, int horizon);

    int horizon() const { return horizon_; }
    const CostPair& cost_at(int t) const;
    const Vector& eta_at(int t) const { return cost_at(t).eta; }
    const Vector& theta_at(int t) const { return cost_at(t).theta; }
    const std::vector<std::pair<int, CostPair>>& entries() const { return entries_; }

    // Largest Assumption-3 equilibrium residual over all entries' minimizers.
    double max_equilibrium_residual(const SteadyMaps& maps) const;
    // Rejects schedules whose minimizer pairs fail the equilibrium test.
    void validate_assumption3(const SteadyMaps& maps, double tolerance) const;

    // Step-size warnings for the contraction condition gamma <= 2/(l+alpha);
    // violations are reported, not rejected.
    std::vector<std::string> step_size_warnings(double gamma_u, double gamma_y) const;

private:
    std::vector<std::pair<int, CostPair>> entries_;
    int horizon_;
};

}  // namespace ddoc
