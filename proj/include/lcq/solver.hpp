#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lcq/actions.hpp"
#include "lcq/grid.hpp"
#include "lcq/problems.hpp"

namespace lcq {

/// Settings for the semi-Lagrangian fixed-point solver.
struct SolverConfig {
    double time_step = 0.01;  // h, must satisfy gamma h < 1
    double stop_tol = 1e-8;   // sup-norm change threshold
    int max_sweeps = 1000000;
    int extra_direction_samples = 8;  // K extra lp-sphere directions (m >= 2)
    std::optional<BoxConstraint> action_box;  // tangent-cone restriction
    bool gradient_candidate = true;  // include the Hamiltonian-maximizer direction
    std::uint64_t direction_seed = 7u;
};

/// A solved (or in-progress) Q table over the product grid: x axes first,
/// then action axes.
struct QTable {
    ScalarField field;
    std::string problem;
    double lipschitz_bound = 0.0;  // L
    NormIndex p;
    double time_step = 0.0;  // h used by the solve
};

struct SolveStats {
    int sweeps = 0;
    bool converged = false;
    std::vector<double> sup_changes;  // one entry per sweep
};

/// One Jacobi sweep of the discrete Bellman operator
///   Q <- h r + (1 - gamma h) max_b Q(x + h f(x,a), a + h b)
/// with the max taken over segments [0, L] along the candidate directions
/// (axis signs, lp-sphere samples, and the closed-form gradient maximizer).
/// Returns the new table and the sup-norm change.
std::pair<ScalarField, double> bellman_sweep(const ScalarField& q, const ControlProblem& problem,
                                             double L, NormIndex p, const SolverConfig& cfg);
std::pair<QTable, double> bellman_sweep(const QTable& q, const ControlProblem& problem,
                                        const SolverConfig& cfg);

/// Iterates bellman_sweep from Q == 0 until the sup change drops below
/// cfg.stop_tol. Throws NumericalError when max_sweeps is hit with the change
/// still above 100 * stop_tol.
QTable solve_q_l(const ControlProblem& problem, const Grid& grid, double L, NormIndex p,
                 const SolverConfig& cfg, SolveStats* stats = nullptr);

/// Classical state-only value: fixed point of
///   Q <- max over candidate actions a of [h r(x,a) + (1 - gamma h) Q(x + h f(x,a))].
ScalarField solve_q_classic(const ControlProblem& problem, const Grid& x_grid,
                            const std::vector<std::vector<double>>& action_candidates,
                            const SolverConfig& cfg, SolveStats* stats = nullptr);

/// gamma Q - D_x Q . f - L ||D_a Q||_q - r at an interior point, with gradients
/// taken from the interpolated table (q = dual of p).
double pde_residual(const QTable& q, const ControlProblem& problem,
                    std::span<const double> point);

/// Action-gradient view of a table, for rollouts.
ActionGradientFn table_policy_gradient(QTable table);

/// Field-file round trip with a sidecar metadata comment (problem key, L, p, h).
void write_qtable_file(const std::string& path, const QTable& table);
QTable read_qtable_file(const std::string& path);

/// Uniformly spaced candidate actions for solve_q_classic: `count` points per
/// axis spanning [lo, hi], all combinations.
std::vector<std::vector<double>> uniform_action_candidates(const std::vector<double>& lo,
                                                           const std::vector<double>& hi,
                                                           int count);

}  // namespace lcq
