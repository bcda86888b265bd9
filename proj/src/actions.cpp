#include "lcq/actions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "lcq/errors.hpp"

namespace lcq {

NormIndex::NormIndex(double p) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("NormIndex: p must be >= 1");
}

NormIndex NormIndex::dual() const {
    if (p_ == 1.0) return NormIndex::inf();
    if (is_inf()) return NormIndex::one();
    return NormIndex(p_ / (p_ - 1.0));
}

double NormIndex::norm(std::span<const double> v) const {
    if (is_inf()) {
        double m = 0.0;
        for (double c : v) m = std::max(m, std::abs(c));
        return m;
    }
    if (p_ == 1.0) {
        double s = 0.0;
        for (double c : v) s += std::abs(c);
        return s;
    }
    if (p_ == 2.0) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    }
    // Scale by the max component so large exponents cannot overflow.
    double m = 0.0;
    for (double c : v) m = std::max(m, std::abs(c));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double c : v) s += std::pow(std::abs(c) / m, p_);
    return m * std::pow(s, 1.0 / p_);
}

BoxConstraint::BoxConstraint(std::vector<double> lo_, std::vector<double> hi_, double tol)
    : lo(std::move(lo_)), hi(std::move(hi_)), boundary_tol(tol) {
    if (lo.size() != hi.size()) throw std::invalid_argument("BoxConstraint: lo/hi size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) throw std::invalid_argument("BoxConstraint: needs lo < hi");
        if (!(boundary_tol >= 0.0) || boundary_tol >= 0.5 * (hi[i] - lo[i]))
            throw std::invalid_argument("BoxConstraint: bad boundary tolerance");
    }
}

bool BoxConstraint::contains(std::span<const double> a, double slack) const {
    for (int i = 0; i < dim(); ++i)
        if (a[i] < lo[i] - slack || a[i] > hi[i] + slack) return false;
    return true;
}

std::vector<double> hamiltonian_maximizer(std::span<const double> g, double L, NormIndex p) {
    if (L < 0.0) throw std::invalid_argument("hamiltonian_maximizer: L must be >= 0");
    const int m = static_cast<int>(g.size());
    std::vector<double> b(m, 0.0);
    double gmax = 0.0;
    for (double c : g) gmax = std::max(gmax, std::abs(c));
    if (gmax == 0.0 || L == 0.0) return b;

    if (p.value() == 1.0) {
        int j = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(g[i]) > std::abs(g[j])) j = i;
        b[j] = L * (g[j] > 0.0 ? 1.0 : -1.0);
        return b;
    }
    if (p.is_inf()) {
        for (int i = 0; i < m; ++i) b[i] = g[i] == 0.0 ? 0.0 : L * (g[i] > 0.0 ? 1.0 : -1.0);
        return b;
    }
    // b_i proportional to sign(g_i) |g_i|^(q-1), normalized to the lp sphere.
    // Components are scaled by max|g| first; the formula is scale invariant.
    const double expo = p.dual().value() - 1.0;  // q - 1 = 1/(p-1)
    for (int i = 0; i < m; ++i) {
        const double t = std::pow(std::abs(g[i]) / gmax, expo);
        b[i] = (g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0)) * t;
    }
    const double scale = L / p.norm(b);
    for (double& c : b) c *= scale;
    return b;
}

std::vector<double> clip_box(std::span<const double> a, const BoxConstraint& box) {
    std::vector<double> out(a.begin(), a.end());
    for (int i = 0; i < box.dim(); ++i) out[i] = std::min(std::max(out[i], box.lo[i]), box.hi[i]);
    return out;
}

std::vector<double> tangent_cone_project(std::span<const double> v, std::span<const double> a,
                                         const BoxConstraint& box) {
    if (!box.contains(a, box.boundary_tol))
        throw std::invalid_argument("tangent_cone_project: point outside box beyond tolerance");
    std::vector<double> out(v.begin(), v.end());
    for (int i = 0; i < box.dim(); ++i) {
        if (a[i] >= box.hi[i] - box.boundary_tol) out[i] = std::min(out[i], 0.0);
        if (a[i] <= box.lo[i] + box.boundary_tol) out[i] = std::max(out[i], 0.0);
    }
    return out;
}

std::vector<double> constrained_direction(std::span<const double> g, std::span<const double> a,
                                          const BoxConstraint& box, double L, ConeMode mode) {
    if (mode == ConeMode::box_cap) {
        std::vector<double> b(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            b[i] = g[i] == 0.0 ? 0.0 : L * (g[i] > 0.0 ? 1.0 : -1.0);
        return tangent_cone_project(b, a, box);
    }
    if (mode == ConeMode::l2_cap) {
        std::vector<double> pg = tangent_cone_project(g, a, box);
        const double n = NormIndex::two().norm(pg);
        if (n == 0.0) return std::vector<double>(g.size(), 0.0);
        for (double& c : pg) c *= L / n;
        return pg;
    }
    throw std::invalid_argument("constrained_direction: invalid mode");
}

std::vector<double> step_action(std::span<const double> a, std::span<const double> g, double L,
                                NormIndex p, double h, StepMode mode,
                                const std::optional<BoxConstraint>& box) {
    if (!(h >= 0.0)) throw std::invalid_argument("step_action: h must be >= 0");
    if (mode != StepMode::free && !box)
        throw std::invalid_argument("step_action: constrained mode needs a box");
    std::vector<double> out(a.begin(), a.end());
    switch (mode) {
        case StepMode::free: {
            const auto b = hamiltonian_maximizer(g, L, p);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * b[i];
            return out;
        }
        case StepMode::euler_clip: {
            const auto b = hamiltonian_maximizer(g, L, NormIndex::two());
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * b[i];
            return clip_box(out, *box);
        }
        case StepMode::euler_cone: {
            const double n = NormIndex::two().norm(g);
            if (n == 0.0) return out;
            std::vector<double> dir(g.begin(), g.end());
            for (double& c : dir) c *= L / n;
            const auto b = tangent_cone_project(dir, a, *box);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * b[i];
            return out;
        }
    }
    throw std::invalid_argument("step_action: invalid mode");
}

Trajectory rollout(const ControlProblem& problem, const ActionGradientFn& grad_source,
                   std::span<const double> x0, std::span<const double> a0, double L, NormIndex p,
                   double h, int steps, StepMode mode, const std::optional<BoxConstraint>& box) {
    if (!(problem.discount * h < 1.0)) throw std::invalid_argument("rollout: needs gamma h < 1");
    const int n = problem.state_dim;
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.actions.reserve(steps + 1);
    traj.rewards.reserve(steps);

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> a(a0.begin(), a0.end());
    std::vector<double> xdot(n);
    double ret = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double r = problem.reward(x, a);
        ret += h * std::exp(-problem.discount * k * h) * r;
        traj.times.push_back(k * h);
        traj.states.push_back(x);
        traj.actions.push_back(a);
        traj.rewards.push_back(r);

        problem.dynamics(x, a, xdot);
        const auto g = grad_source(x, a);
        a = step_action(a, g, L, p, h, mode, box);
        for (int i = 0; i < n; ++i) x[i] += h * xdot[i];
        for (double c : x)
            if (!std::isfinite(c)) throw NumericalError("rollout: state became non-finite");
    }
    traj.times.push_back(steps * h);
    traj.states.push_back(x);
    traj.actions.push_back(a);
    traj.discounted_return = ret;
    return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int state_dim, int action_dim,
                          double discount, double h) {
    os << "t";
    for (int i = 1; i <= state_dim; ++i) os << ",x_" << i;
    for (int i = 1; i <= action_dim; ++i) os << ",a_" << i;
    os << ",reward,cumulative_discounted_return\n";
    char buf[64];
    double cum = 0.0;
    for (std::size_t k = 0; k < traj.rewards.size(); ++k) {
        cum += h * std::exp(-discount * traj.times[k]) * traj.rewards[k];
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
        os << buf;
        for (int i = 0; i < state_dim; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", traj.states[k][i]);
            os << buf;
        }
        for (int i = 0; i < action_dim; ++i) {
            std::snprintf(buf, sizeof buf, ",%.17g", traj.actions[k][i]);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g", traj.rewards[k], cum);
        os << buf << "\n";
    }
}

}  // namespace lcq
