#include "lcq/hjdqn.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lcq/errors.hpp"
#include "lcq/replay.hpp"
#include "lcq/rng.hpp"

namespace lcq {

namespace {

// Distinct deterministic streams derived from one seed.
enum : std::uint64_t { kInitStream = 0x11, kEnvStream = 0x22, kNoiseStream = 0x33,
                       kReplayStream = 0x44, kPolicyStream = 0x55 };

Rng make_stream(std::uint64_t seed, std::uint64_t tag) {
    return Rng(seed * 0x9e3779b97f4a7c15ull + tag);
}

std::vector<double> sample_box(Rng& rng, const std::vector<double>& lo,
                               const std::vector<double>& hi) {
    std::vector<double> x(lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
    return x;
}

// Uniform draw from the lp ball of radius L: a seeded direction on the lp
// sphere scaled by U^(1/m).
std::vector<double> sample_lp_ball(Rng& rng, int m, double L, NormIndex p) {
    std::vector<double> d(m);
    double norm = 0.0;
    do {
        for (int j = 0; j < m; ++j) d[j] = rng.normal();
        norm = p.norm(d);
    } while (norm == 0.0);
    const double radius = L * std::pow(rng.uniform01(), 1.0 / m);
    for (double& c : d) c *= radius / norm;
    return d;
}

}  // namespace

double td_target(double r, double h, double gamma, double q_next) {
    if (!(h >= 0.0) || !(gamma * h < 1.0))
        throw std::invalid_argument("td_target: needs h >= 0 and gamma h < 1");
    return h * r + (1.0 - gamma * h) * q_next;
}

void TrainConfig::validate(const ControlProblem& problem) const {
    if (!(h > 0.0)) throw ConfigError("train: h must be > 0");
    if (!(problem.discount * h < 1.0)) throw ConfigError("train: needs gamma h < 1");
    if (!(L >= 0.0)) throw ConfigError("train: L must be >= 0");
    if (!(soft_update_alpha > 0.0 && soft_update_alpha <= 1.0))
        throw ConfigError("train: soft_update_alpha must be in (0, 1]");
    if (!(noise_std >= 0.0)) throw ConfigError("train: noise_std must be >= 0");
    if (batch_size < 1 || episodes < 1 || steps_per_episode < 1)
        throw ConfigError("train: batch_size, episodes, steps_per_episode must be >= 1");
    if (static_cast<int>(init_state_lo.size()) != problem.state_dim ||
        static_cast<int>(init_state_hi.size()) != problem.state_dim)
        throw ConfigError("train: init_state_box must match the state dimension");
    for (std::size_t i = 0; i < init_state_lo.size(); ++i)
        if (!(init_state_lo[i] <= init_state_hi[i]))
            throw ConfigError("train: init_state_box needs lo <= hi");
}

TrainResult train(const ControlProblem& problem, const TrainConfig& cfg) {
    cfg.validate(problem);
    const int n = problem.state_dim;
    const int m = problem.action_dim;
    const double gamma = problem.discount;
    const double h = cfg.h;

    std::vector<int> dims;
    dims.push_back(n + m);
    dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
    dims.push_back(1);

    Rng init_rng = make_stream(cfg.seed, kInitStream);
    Rng env_rng = make_stream(cfg.seed, kEnvStream);
    Rng noise_rng = make_stream(cfg.seed, kNoiseStream);
    Rng replay_rng = make_stream(cfg.seed, kReplayStream);

    MlpParams online = mlp_init(dims, init_rng.next_u64());
    MlpParams target = online;
    AdamState adam;
    ReplayBuffer buffer(cfg.replay_capacity);

    TrainResult result;
    result.curve.reserve(cfg.episodes);

    std::vector<double> xdot(n);
    std::vector<std::vector<double>> batch_inputs(cfg.batch_size);
    std::vector<double> batch_targets(cfg.batch_size);

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        std::vector<double> x = sample_box(env_rng, cfg.init_state_lo, cfg.init_state_hi);
        std::vector<double> a(m, 0.0);
        if (cfg.record_actions) result.action_trace.emplace_back();
        double ep_return = 0.0;
        double loss_sum = 0.0;
        for (int k = 0; k < cfg.steps_per_episode; ++k) {
            if (cfg.record_actions) result.action_trace.back().push_back(a);
            // Execute a_k.
            const double r = problem.reward(x, a);
            ep_return += h * r;
            problem.dynamics(x, a, xdot);
            std::vector<double> x_next(n);
            for (int i = 0; i < n; ++i) x_next[i] = x[i] + h * xdot[i];
            for (double c : x_next)
                if (!std::isfinite(c))
                    throw NumericalError("train: non-finite state at episode " +
                                         std::to_string(ep) + " step " + std::to_string(k));
            buffer.push(Transition{x, a, r, x_next});

            // Minibatch regression onto the target-network Bellman values.
            const auto batch = buffer.sample(cfg.batch_size, replay_rng);
            for (int j = 0; j < cfg.batch_size; ++j) {
                const Transition& t = *batch[j];
                const auto g = action_gradient(target, t.x_next, t.a);
                const auto eta = hamiltonian_maximizer(g, cfg.L, cfg.p);
                std::vector<double> a_next(t.a);
                for (int i = 0; i < m; ++i) a_next[i] += h * eta[i];
                const double q_next = mlp_forward(target, t.x_next, a_next);
                batch_targets[j] = td_target(t.r, h, gamma, q_next);
                batch_inputs[j].assign(t.x.begin(), t.x.end());
                batch_inputs[j].insert(batch_inputs[j].end(), t.a.begin(), t.a.end());
            }
            auto [grad, loss] = mlp_backward(online, batch_inputs, batch_targets);
            if (!std::isfinite(loss))
                throw NumericalError("train: non-finite loss at episode " + std::to_string(ep) +
                                     " step " + std::to_string(k));
            loss_sum += loss;
            adam_step(online.theta, grad, adam, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                      cfg.adam_eps);
            soft_update(target, online, cfg.soft_update_alpha);

            // Advance the executed action with the online network.
            const auto g_now = action_gradient(online, x, a);
            const auto eta_now = hamiltonian_maximizer(g_now, cfg.L, cfg.p);
            for (int i = 0; i < m; ++i)
                a[i] += h * eta_now[i] + (cfg.noise_std > 0.0 ? cfg.noise_std * noise_rng.normal()
                                                              : 0.0);
            x = std::move(x_next);
        }
        result.curve.push_back(
            EpisodeRow{ep, ep_return, loss_sum / cfg.steps_per_episode});
    }
    result.params = std::move(online);
    return result;
}

std::vector<EpisodeRow> random_policy_returns(const ControlProblem& problem,
                                              const TrainConfig& cfg) {
    cfg.validate(problem);
    const int n = problem.state_dim;
    const int m = problem.action_dim;
    const double h = cfg.h;

    Rng env_rng = make_stream(cfg.seed, kEnvStream);
    Rng noise_rng = make_stream(cfg.seed, kNoiseStream);
    Rng policy_rng = make_stream(cfg.seed, kPolicyStream);

    std::vector<EpisodeRow> curve;
    curve.reserve(cfg.episodes);
    std::vector<double> xdot(n);
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        std::vector<double> x = sample_box(env_rng, cfg.init_state_lo, cfg.init_state_hi);
        std::vector<double> a(m, 0.0);
        double ep_return = 0.0;
        for (int k = 0; k < cfg.steps_per_episode; ++k) {
            ep_return += h * problem.reward(x, a);
            problem.dynamics(x, a, xdot);
            for (int i = 0; i < n; ++i) x[i] += h * xdot[i];
            const auto eta = sample_lp_ball(policy_rng, m, cfg.L, cfg.p);
            for (int i = 0; i < m; ++i)
                a[i] += h * eta[i] + (cfg.noise_std > 0.0 ? cfg.noise_std * noise_rng.normal()
                                                          : 0.0);
        }
        curve.push_back(EpisodeRow{ep, ep_return, 0.0});
    }
    return curve;
}

ActionGradientFn network_policy_gradient(MlpParams params) {
    return [params = std::move(params)](std::span<const double> x, std::span<const double> a) {
        return action_gradient(params, x, a);
    };
}

void write_curve_csv(const std::string& path, const std::vector<EpisodeRow>& curve) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "episode,return,loss_mean\n";
    char buf[96];
    for (const auto& row : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g", row.episode, row.undiscounted_return,
                      row.loss_mean);
        os << buf << "\n";
    }
}

}  // namespace lcq
