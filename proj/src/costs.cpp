#include "ddoc/costs.hpp"

#include "ddoc/equilibria.hpp"
#include "ddoc/errors.hpp"

namespace ddoc {

CostPair quadratic_tracking(const Vector& eta, const Vector& theta) {
    if (!eta.allFinite() || !theta.allFinite())
        throw InvalidInputError("cost targets must be finite");
    CostPair c;
    c.value = [eta, theta](const Vector& u, const Vector& y) {
        return 0.5 * (u - eta).squaredNorm() + 0.5 * (y - theta).squaredNorm();
    };
    c.grad_u = [eta](const Vector& u) -> Vector { return u - eta; };
    c.grad_y = [theta](const Vector& y) -> Vector { return y - theta; };
    c.alpha_u = c.alpha_y = 1.0;
    c.l_u = c.l_y = 1.0;
    c.eta = eta;
    c.theta = theta;
    c.quadratic_tracking_family = true;
    return c;
}

Vector ogd_step(const Vector& z, const Vector& grad, double gamma) {
    if (grad.size() != z.size()) throw InvalidInputError("gradient dimension mismatch");
    return z - gamma * grad;
}

CostSchedule::CostSchedule(std::vector<std::pair<int, CostPair>> entries, int horizon)
    : entries_(std::move(entries)), horizon_(horizon) {
    if (entries_.empty()) throw InvalidInputError("schedule needs at least one cost");
    if (entries_.front().first != 0) throw InvalidInputError("first cost must activate at t = 0");
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].first <= entries_[i - 1].first)
            throw InvalidInputError("activation times must be strictly increasing");
    if (horizon_ < 0) throw InvalidInputError("horizon must be nonnegative");
}

const CostPair& CostSchedule::cost_at(int t) const {
    if (t < 0 || t > horizon_) throw InvalidIndexError("time outside schedule horizon");
    std::size_t idx = 0;
    while (idx + 1 < entries_.size() && entries_[idx + 1].first <= t) ++idx;
    return entries_[idx].second;
}

double CostSchedule::max_equilibrium_residual(const SteadyMaps& maps) const {
    double worst = 0.0;
    for (const auto& [time, pair] : entries_)
        worst = std::max(worst, equilibrium_residual(maps, pair.eta, pair.theta));
    return worst;
}

void CostSchedule::validate_assumption3(const SteadyMaps& maps, double tolerance) const {
    for (const auto& [time, pair] : entries_) {
        const double r = equilibrium_residual(maps, pair.eta, pair.theta);
        const double scale = 1.0 + pair.eta.norm() + pair.theta.norm();
        if (r > tolerance * scale)
            throw InvalidInputError("schedule minimizer at t = " + std::to_string(time) +
                                    " is not an equilibrium (residual " + std::to_string(r) + ")");
    }
}

std::vector<std::string> CostSchedule::step_size_warnings(double gamma_u, double gamma_y) const {
    std::vector<std::string> warnings;
    for (const auto& [time, pair] : entries_) {
        if (gamma_u > 2.0 / (pair.l_u + pair.alpha_u))
            warnings.push_back("gamma_u exceeds 2/(l_u+alpha_u) for cost at t = " +
                               std::to_string(time) + "; contraction not guaranteed");
        if (gamma_y > 2.0 / (pair.l_y + pair.alpha_y))
            warnings.push_back("gamma_y exceeds 2/(l_y+alpha_y) for cost at t = " +
                               std::to_string(time) + "; contraction not guaranteed");
    }
    return warnings;
}

}  // namespace ddoc
