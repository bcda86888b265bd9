#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcq/actions.hpp"
#include "lcq/mlp.hpp"
#include "lcq/problems.hpp"

namespace lcq {

/// Hyperparameters of the continuous-time deep Q-learning loop. The discount
/// comes from the problem; gamma * h must stay below 1.
struct TrainConfig {
    double h = 0.01;
    double L = 20.0;
    NormIndex p = NormIndex::two();
    double soft_update_alpha = 0.01;  // in (0, 1]
    double noise_std = 0.1;           // sigma of the Gaussian exploration noise
    int batch_size = 32;
    int episodes = 200;           // M
    int steps_per_episode = 200;  // K
    std::size_t replay_capacity = 100000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    std::vector<double> init_state_lo;  // uniform initial-state box
    std::vector<double> init_state_hi;
    std::vector<int> hidden_dims = {64, 64};
    bool record_actions = false;  // keep per-step actions for diagnostics

    void validate(const ControlProblem& problem) const;
};

/// h r + (1 - gamma h) q_next, the discrete Bellman right-hand side.
double td_target(double r, double h, double gamma, double q_next);

struct EpisodeRow {
    int episode = 0;
    double undiscounted_return = 0.0;  // sum_k h r_k
    double loss_mean = 0.0;
};

struct TrainResult {
    MlpParams params;
    std::vector<EpisodeRow> curve;
    // Executed actions per episode/step when cfg.record_actions is set.
    std::vector<std::vector<std::vector<double>>> action_trace;
};

/// Runs M episodes of K steps on x_{k+1} = x_k + h f(x_k, a_k): every step
/// stores the transition, samples a minibatch, regresses Q_theta onto
/// h r + (1 - gamma h) Q_target(x', a') with a' advanced by the closed-form
/// lp maximizer of the target's action gradient, Adam-updates theta, soft
/// updates the target, then advances the executed action with the online
/// network plus Gaussian noise. Deterministic for a fixed seed.
TrainResult train(const ControlProblem& problem, const TrainConfig& cfg);

/// Identical episode protocol with the network policy replaced by seeded
/// uniform draws from the lp ball of radius L; used as a returns baseline.
std::vector<EpisodeRow> random_policy_returns(const ControlProblem& problem,
                                              const TrainConfig& cfg);

/// Action-gradient view of a trained network, for rollouts.
ActionGradientFn network_policy_gradient(MlpParams params);

/// curve.csv: columns episode, return, loss_mean.
void write_curve_csv(const std::string& path, const std::vector<EpisodeRow>& curve);

}  // namespace lcq
