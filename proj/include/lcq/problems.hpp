#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lcq {

using DynamicsFn = std::function<void(std::span<const double> x, std::span<const double> a,
                                      std::span<double> xdot)>;
using RewardFn = std::function<double(std::span<const double> x, std::span<const double> a)>;
using ValueFn = std::function<double(std::span<const double> x)>;

/// A deterministic infinite-horizon control problem: dynamics x' = f(x, a),
/// running reward r(x, a), discount rate gamma. Immutable after construction;
/// safe for concurrent shared reads.
struct ControlProblem {
    std::string name;
    int state_dim = 0;
    int action_dim = 0;
    DynamicsFn dynamics;
    RewardFn reward;
    double discount = 1.0;  // gamma > 0, in 1/time units

    // Metadata. reward_bound is sup|r| where it exists; decay_sigma is the
    // exponent of the reward/dynamics decay in the action.
    double lipschitz_f = 0.0;
    std::optional<double> reward_bound;
    std::optional<double> decay_sigma;
    ValueFn analytic_value;  // may be empty
};

/// Scalar LQR: x' = alpha x + beta a, r = -(q_cost x^2 + r_cost a^2).
struct Lqr1dParams {
    double alpha = -1.0;
    double beta = 1.0;
    double q_cost = 1.0;
    double r_cost = 1.0;
    double discount = 1.0;
};

/// Nonnegative root P of (beta^2 / r_cost) P^2 + (discount - 2 alpha) P - q_cost = 0.
/// Throws std::invalid_argument when no real nonnegative root exists.
double riccati_gain_1d(const Lqr1dParams& params);

/// Analytic stationary value -P x^2 of the scalar LQR.
double riccati_value_1d(const Lqr1dParams& params, double x);

ControlProblem make_lqr_1d(const Lqr1dParams& params);

/// Bounded toy with reward 1 / ((1+x^2)(1+a^2)) and gamma = 2. Both |f| and
/// |r| are bounded by 1 and the reward decays like ||a||^-2.
ControlProblem make_decay_toy();

/// Two-action variant: reward is a product of two action decay factors,
/// 1 / ((1+x^2)(1+a1^2)(1+a2^2)).
ControlProblem make_decay_toy_2d();

}  // namespace lcq
