#include "lcq/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace lcq {

void PenaltyConfig::validate() const {
    if (!(M > 0.0)) throw std::invalid_argument("PenaltyConfig: M must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("PenaltyConfig: epsilon must be in (0, 1)");
}

double box_penalty(std::span<const double> a, double M) {
    if (!(M > 0.0)) throw std::invalid_argument("box_penalty: M must be > 0");
    double s = 0.0;
    for (double c : a) {
        const double excess = std::abs(c) - M;
        if (excess > 0.0) s += excess * excess;
    }
    return s;
}

ControlProblem penalized_problem(const ControlProblem& problem, const PenaltyConfig& cfg) {
    cfg.validate();
    ControlProblem p = problem;
    p.name = problem.name + "+penalty";
    const RewardFn base = problem.reward;
    const double M = cfg.M;
    const double inv_eps = 1.0 / cfg.epsilon;
    p.reward = [base, M, inv_eps](std::span<const double> x, std::span<const double> a) {
        return base(x, a) - box_penalty(a, M) * inv_eps;
    };
    p.reward_bound = std::nullopt;
    return p;
}

}  // namespace lcq
