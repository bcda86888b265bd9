#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "lcq/problems.hpp"

namespace lcq {

/// The constraint exponent p in [1, inf] together with its Hoelder dual.
class NormIndex {
public:
    NormIndex() : p_(2.0) {}
    explicit NormIndex(double p);

    static NormIndex one() { return NormIndex(1.0); }
    static NormIndex two() { return NormIndex(2.0); }
    static NormIndex inf() { return NormIndex(std::numeric_limits<double>::infinity()); }

    double value() const { return p_; }
    bool is_inf() const { return std::isinf(p_); }

    /// q with 1/p + 1/q = 1; dual(1) = inf, dual(inf) = 1. An involution.
    NormIndex dual() const;

    /// The lp norm of v.
    double norm(std::span<const double> v) const;

    bool operator==(const NormIndex& o) const { return p_ == o.p_; }

private:
    double p_;
};

inline NormIndex dual_exponent(NormIndex p) { return p.dual(); }

/// Axis-aligned box [lo, hi] with an absolute tolerance for deciding when a
/// point counts as sitting on a face.
struct BoxConstraint {
    std::vector<double> lo;
    std::vector<double> hi;
    double boundary_tol = 1e-9;

    BoxConstraint() = default;
    BoxConstraint(std::vector<double> lo_, std::vector<double> hi_, double tol = 1e-9);

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> a, double slack = 0.0) const;
};

/// argmax of g . b over ||b||_p <= L; the achieved value is L ||g||_q.
/// For p in (1, inf): b_i = L sign(g_i) |g_i|^(q-1) / ||g||_q^(q-1).
/// For p = 1: all mass on the largest |g_i| (lowest index on ties).
/// For p = inf: b_i = L sign(g_i). g = 0 returns b = 0.
std::vector<double> hamiltonian_maximizer(std::span<const double> g, double L, NormIndex p);

/// Componentwise clamp to the box; equals the Euclidean projection onto it.
std::vector<double> clip_box(std::span<const double> a, const BoxConstraint& box);

/// Projection of v onto the tangent cone of the box at a: components pointing
/// out of an active face are zeroed. a must be inside the box up to the
/// boundary tolerance.
std::vector<double> tangent_cone_project(std::span<const double> v, std::span<const double> a,
                                         const BoxConstraint& box);

enum class ConeMode { box_cap, l2_cap };

/// Best feasible velocity at a for the linear payoff g . b:
///   box_cap: argmax over [-L, L]^m intersected with the tangent cone,
///   l2_cap:  argmax over the l2 ball of radius L intersected with the cone.
std::vector<double> constrained_direction(std::span<const double> g, std::span<const double> a,
                                          const BoxConstraint& box, double L, ConeMode mode);

enum class StepMode { free, euler_clip, euler_cone };

/// One forward-Euler action step of size h driven by the action gradient g.
std::vector<double> step_action(std::span<const double> a, std::span<const double> g, double L,
                                NormIndex p, double h, StepMode mode,
                                const std::optional<BoxConstraint>& box = std::nullopt);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> actions;
    std::vector<double> rewards;
    double discounted_return = 0.0;
};

/// Supplies D_a of a Q surrogate at (x, a); used to drive rollouts.
using ActionGradientFn =
    std::function<std::vector<double>(std::span<const double> x, std::span<const double> a)>;

/// Forward-Euler rollout x_{k+1} = x_k + h f(x_k, a_k) with the action advanced
/// by step_action. Discounted return is the left-endpoint quadrature
/// sum_k h e^{-gamma k h} r(x_k, a_k).
Trajectory rollout(const ControlProblem& problem, const ActionGradientFn& grad_source,
                   std::span<const double> x0, std::span<const double> a0, double L, NormIndex p,
                   double h, int steps, StepMode mode,
                   const std::optional<BoxConstraint>& box = std::nullopt);

/// CSV columns: t, x_1..x_n, a_1..a_m, reward, cumulative_discounted_return.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int state_dim, int action_dim,
                          double discount, double h);

}  // namespace lcq
