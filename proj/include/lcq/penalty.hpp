#pragma once

#include <span>

#include "lcq/problems.hpp"

namespace lcq {

/// Soft box penalty around Omega = [-M, M]^m with weight 1/epsilon.
struct PenaltyConfig {
    double M = 1.0;
    double epsilon = 0.5;  // in (0, 1)

    void validate() const;
};

/// sum_i max(|a_i| - M, 0)^2: zero on the closed box, positive outside, C1.
double box_penalty(std::span<const double> a, double M);

/// Same dynamics, reward replaced by r - box_penalty(a, M) / epsilon. The
/// penalized reward is unbounded below, so the reward_bound metadata is
/// cleared.
ControlProblem penalized_problem(const ControlProblem& problem, const PenaltyConfig& cfg);

}  // namespace lcq
