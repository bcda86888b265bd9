#include "lcq/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace lcq {

double riccati_gain_1d(const Lqr1dParams& params) {
    if (!(params.r_cost > 0.0)) throw std::invalid_argument("riccati_gain_1d: r_cost must be > 0");
    if (!(params.q_cost >= 0.0)) throw std::invalid_argument("riccati_gain_1d: q_cost must be >= 0");
    if (!(params.discount > 0.0)) throw std::invalid_argument("riccati_gain_1d: discount must be > 0");
    const double a2 = params.beta * params.beta / params.r_cost;
    const double b = params.discount - 2.0 * params.alpha;
    const double c = -params.q_cost;
    if (a2 == 0.0) {
        // Linear equation b P = q_cost.
        if (params.q_cost == 0.0) return 0.0;
        if (b <= 0.0) throw std::invalid_argument("riccati_gain_1d: no nonnegative root");
        return params.q_cost / b;
    }
    const double disc = b * b - 4.0 * a2 * c;
    if (disc < 0.0) throw std::invalid_argument("riccati_gain_1d: complex roots");
    const double root = (-b + std::sqrt(disc)) / (2.0 * a2);
    if (root < 0.0) throw std::invalid_argument("riccati_gain_1d: no nonnegative root");
    return root;
}

double riccati_value_1d(const Lqr1dParams& params, double x) {
    return -riccati_gain_1d(params) * x * x;
}

ControlProblem make_lqr_1d(const Lqr1dParams& params) {
    const double gain = riccati_gain_1d(params);  // validates params
    ControlProblem p;
    p.name = "lqr1d";
    p.state_dim = 1;
    p.action_dim = 1;
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double q = params.q_cost;
    const double r = params.r_cost;
    p.dynamics = [alpha, beta](std::span<const double> x, std::span<const double> a,
                               std::span<double> out) { out[0] = alpha * x[0] + beta * a[0]; };
    p.reward = [q, r](std::span<const double> x, std::span<const double> a) {
        return -(q * x[0] * x[0] + r * a[0] * a[0]);
    };
    p.discount = params.discount;
    p.lipschitz_f = std::max(std::abs(alpha), std::abs(beta));
    // Unbounded on R^2; only used on truncated grids where boundedness holds.
    p.reward_bound = std::nullopt;
    p.analytic_value = [gain](std::span<const double> x) { return -gain * x[0] * x[0]; };
    return p;
}

ControlProblem make_decay_toy() {
    ControlProblem p;
    p.name = "decay_toy";
    p.state_dim = 1;
    p.action_dim = 1;
    p.dynamics = [](std::span<const double> x, std::span<const double> a,
                    std::span<double> out) {
        out[0] = -x[0] / (1.0 + x[0] * x[0]) + a[0] / (1.0 + a[0] * a[0]);
    };
    p.reward = [](std::span<const double> x, std::span<const double> a) {
        return 1.0 / ((1.0 + x[0] * x[0]) * (1.0 + a[0] * a[0]));
    };
    p.discount = 2.0;
    p.lipschitz_f = std::sqrt(2.0);
    p.reward_bound = 1.0;
    p.decay_sigma = 2.0;
    return p;
}

ControlProblem make_decay_toy_2d() {
    ControlProblem p;
    p.name = "decay_toy2";
    p.state_dim = 1;
    p.action_dim = 2;
    p.dynamics = [](std::span<const double> x, std::span<const double> a,
                    std::span<double> out) {
        out[0] = -x[0] / (1.0 + x[0] * x[0]) +
                 0.5 * (a[0] / (1.0 + a[0] * a[0]) + a[1] / (1.0 + a[1] * a[1]));
    };
    p.reward = [](std::span<const double> x, std::span<const double> a) {
        return 1.0 / ((1.0 + x[0] * x[0]) * (1.0 + a[0] * a[0]) * (1.0 + a[1] * a[1]));
    };
    p.discount = 2.0;
    p.lipschitz_f = std::sqrt(2.0);
    p.reward_bound = 1.0;
    p.decay_sigma = 2.0;
    return p;
}

}  // namespace lcq
