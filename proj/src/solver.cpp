#include "lcq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lcq/errors.hpp"
#include "lcq/rng.hpp"

#include <memory>

namespace lcq {

namespace {

constexpr int kMaxActionDim = 3;

// Locates the cell and fractional offset for one clamped coordinate.
inline void locate(const GridAxis& ax, double c, int& cell, double& frac) {
    if (c <= ax.lo) {
        cell = 0;
        frac = 0.0;
        return;
    }
    if (c >= ax.hi) {
        cell = ax.count - 2;
        frac = 1.0;
        return;
    }
    const double u = (c - ax.lo) / ax.spacing();
    cell = std::min(static_cast<int>(u), ax.count - 2);
    frac = u - cell;
}

// Interpolation stencil of the drifted state x + h f(x, a); action axes are
// handled separately per probe.
struct NodePlan {
    double reward;
    double xw[8];           // weights over 2^n state corners
    std::size_t xbase[8];   // flat base offset of each state corner
    int xcorners;
};

// Evaluates the x-blended table slice at action points; the workhorse of one
// node update.
class SliceEval {
public:
    SliceEval(const Grid& grid, int n, int m, const NodePlan& plan, const double* values)
        : grid_(grid), n_(n), m_(m), plan_(plan), values_(values) {}

    double operator()(const double* a_pt) const {
        int cell[kMaxActionDim];
        double frac[kMaxActionDim];
        for (int j = 0; j < m_; ++j) locate(grid_.axis(n_ + j), a_pt[j], cell[j], frac[j]);
        const int corners = 1 << m_;
        double aw[8];
        std::size_t aoff[8];
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            std::size_t off = 0;
            for (int j = 0; j < m_; ++j) {
                const int bit = (c >> j) & 1;
                w *= bit ? frac[j] : (1.0 - frac[j]);
                off += static_cast<std::size_t>(cell[j] + bit) * grid_.stride(n_ + j);
            }
            aw[c] = w;
            aoff[c] = off;
        }
        double acc = 0.0;
        for (int xc = 0; xc < plan_.xcorners; ++xc) {
            double row = 0.0;
            const std::size_t base = plan_.xbase[xc];
            for (int c = 0; c < corners; ++c) row += aw[c] * values_[base + aoff[c]];
            acc += plan_.xw[xc] * row;
        }
        return acc;
    }

private:
    const Grid& grid_;
    int n_, m_;
    const NodePlan& plan_;
    const double* values_;
};

struct Ray {
    double d[kMaxActionDim];  // l2-normalized direction
    double p_norm;            // ||d||_p, so t ranges over [0, L / p_norm]
};

double norm2(const double* v, int m) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

}  // namespace

/// Precomputed sweep machinery shared by bellman_sweep and solve_q_l.
class SweepContext {
public:
    SweepContext(const ControlProblem& problem, const Grid& grid, double L, NormIndex p,
                 const SolverConfig& cfg)
        : grid_(grid), cfg_(cfg), L_(L), p_(p), gamma_(problem.discount), h_(cfg.time_step) {
        if (!(h_ > 0.0) || !(gamma_ * h_ < 1.0))
            throw std::invalid_argument("solver: needs h > 0 and gamma h < 1");
        if (!(L >= 0.0) || !std::isfinite(L))
            throw std::invalid_argument("solver: L must be finite and >= 0");
        n_ = problem.state_dim;
        m_ = problem.action_dim;
        if (n_ < 1 || m_ < 1) throw std::invalid_argument("solver: needs state and action dims");
        if (grid.dim() != n_ + m_)
            throw std::invalid_argument("solver: grid must cover state + action axes");
        if (m_ > kMaxActionDim) throw std::invalid_argument("solver: action dim > 3 unsupported");
        if (cfg.action_box && cfg.action_box->dim() != m_)
            throw std::invalid_argument("solver: action_box dimension mismatch");

        build_plans(problem);
        build_fixed_rays();
    }

    int state_dim() const { return n_; }
    int action_dim() const { return m_; }
    double contraction_factor() const { return 1.0 - gamma_ * h_; }
    const Grid& grid() const { return grid_; }

    // One Jacobi sweep; returns the sup-norm change.
    double apply(const std::vector<double>& old_values, std::vector<double>& out) const {
        const std::size_t total = grid_.size();
        double sup_change = 0.0;
        bool bad = false;
#pragma omp parallel for schedule(static) reduction(max : sup_change) reduction(|| : bad)
        for (long long node = 0; node < static_cast<long long>(total); ++node) {
            const double v = update_node(static_cast<std::size_t>(node), old_values.data());
            if (!std::isfinite(v)) bad = true;
            out[node] = v;
            sup_change = std::max(sup_change, std::abs(v - old_values[node]));
        }
        if (bad) throw NumericalError("bellman_sweep: non-finite value produced");
        return sup_change;
    }

private:
    void build_plans(const ControlProblem& problem) {
        const std::size_t total = grid_.size();
        plans_.resize(total);
        std::vector<double> pt(n_ + m_), xdot(n_);
        const int xc = 1 << n_;
        for (std::size_t node = 0; node < total; ++node) {
            grid_.node_coords(node, pt);
            std::span<const double> x(pt.data(), n_);
            std::span<const double> a(pt.data() + n_, m_);
            NodePlan& plan = plans_[node];
            plan.reward = problem.reward(x, a);
            problem.dynamics(x, a, xdot);
            int cell[8];
            double frac[8];
            for (int i = 0; i < n_; ++i) {
                const double zi = x[i] + h_ * xdot[i];  // clamped by locate
                if (!std::isfinite(zi))
                    throw NumericalError("solver: non-finite dynamics at a grid node");
                locate(grid_.axis(i), zi, cell[i], frac[i]);
            }
            plan.xcorners = xc;
            for (int c = 0; c < xc; ++c) {
                double w = 1.0;
                std::size_t base = 0;
                for (int i = 0; i < n_; ++i) {
                    const int bit = (c >> i) & 1;
                    w *= bit ? frac[i] : (1.0 - frac[i]);
                    base += static_cast<std::size_t>(cell[i] + bit) * grid_.stride(i);
                }
                plan.xw[c] = w;
                plan.xbase[c] = base;
            }
            if (!std::isfinite(plan.reward))
                throw NumericalError("solver: non-finite reward at a grid node");
        }
    }

    void build_fixed_rays() {
        fixed_rays_.clear();
        if (m_ == 1) {
            for (double s : {1.0, -1.0}) {
                Ray r{};
                r.d[0] = s;
                r.p_norm = 1.0;
                fixed_rays_.push_back(r);
            }
            return;
        }
        // All nonzero sign patterns: axis directions plus diagonals. These
        // contain every possible p=1 and p=inf maximizer direction.
        std::vector<int> sign(m_, -1);
        while (true) {
            bool all_zero = true;
            for (int j = 0; j < m_; ++j)
                if (sign[j] != 0) all_zero = false;
            if (!all_zero) {
                Ray r{};
                for (int j = 0; j < m_; ++j) r.d[j] = static_cast<double>(sign[j]);
                push_normalized(r);
            }
            int j = 0;
            while (j < m_ && sign[j] == 1) sign[j++] = -1;
            if (j == m_) break;
            ++sign[j];
        }
        Rng rng(cfg_.direction_seed);
        for (int k = 0; k < cfg_.extra_direction_samples; ++k) {
            Ray r{};
            for (int j = 0; j < m_; ++j) r.d[j] = rng.normal();
            if (norm2(r.d, m_) == 0.0) continue;
            push_normalized(r);
        }
    }

    void push_normalized(Ray r) {
        const double n2 = norm2(r.d, m_);
        for (int j = 0; j < m_; ++j) r.d[j] /= n2;
        r.p_norm = p_norm_of(r.d);
        fixed_rays_.push_back(r);
    }

    double p_norm_of(const double* d) const {
        return p_.norm(std::span<const double>(d, static_cast<std::size_t>(m_)));
    }

    double update_node(std::size_t node, const double* values) const {
        const NodePlan& plan = plans_[node];
        const SliceEval psi(grid_, n_, m_, plan, values);

        // Action-axis node indices and coordinates.
        int aidx[kMaxActionDim];
        double a0[kMaxActionDim];
        {
            std::size_t rest = node % grid_.stride(n_ - 1);
            // stride(n_-1) covers all action axes (x axes are slower).
            for (int j = 0; j < m_; ++j) {
                aidx[j] = static_cast<int>(rest / grid_.stride(n_ + j));
                rest %= grid_.stride(n_ + j);
                a0[j] = grid_.axis(n_ + j).coord(aidx[j]);
            }
        }

        double best = psi(a0);  // b = 0 candidate
        if (L_ > 0.0) {
            for (const Ray& ray : fixed_rays_) best = std::max(best, ray_max(psi, ray, a0, aidx));
            if (cfg_.gradient_candidate && m_ >= 2) {
                double g[kMaxActionDim];
                action_gradient(psi, a0, aidx, g);
                if (norm2(g, m_) > 0.0) {
                    // The closed-form maximizer direction plus the raw gradient
                    // direction; for p = 2 they coincide.
                    const auto bstar = hamiltonian_maximizer(
                        std::span<const double>(g, static_cast<std::size_t>(m_)), 1.0, p_);
                    Ray rg{};
                    for (int j = 0; j < m_; ++j) rg.d[j] = g[j];
                    push_local(rg);
                    best = std::max(best, ray_max(psi, rg, a0, aidx));
                    Ray rb{};
                    bool nonzero = false;
                    for (int j = 0; j < m_; ++j) {
                        rb.d[j] = bstar[j];
                        if (bstar[j] != 0.0) nonzero = true;
                    }
                    if (nonzero) {
                        push_local(rb);
                        double cosangle = 0.0;
                        for (int j = 0; j < m_; ++j) cosangle += rb.d[j] * rg.d[j];
                        if (cosangle < 1.0 - 1e-12)
                            best = std::max(best, ray_max(psi, rb, a0, aidx));
                    }
                }
            }
        }
        return h_ * plan.reward + (1.0 - gamma_ * h_) * best;
    }

    // Normalizes a locally built ray in place.
    void push_local(Ray& r) const {
        const double n2 = norm2(r.d, m_);
        for (int j = 0; j < m_; ++j) r.d[j] /= n2;
        r.p_norm = p_norm_of(r.d);
    }

    // Central-difference action gradient of the x-blended slice at the node.
    void action_gradient(const SliceEval& psi, const double* a0, const int* aidx,
                         double* g) const {
        double probe[kMaxActionDim];
        for (int j = 0; j < m_; ++j) probe[j] = a0[j];
        for (int j = 0; j < m_; ++j) {
            const GridAxis& ax = grid_.axis(n_ + j);
            const double step = ax.spacing();
            const bool up = aidx[j] + 1 < ax.count;
            const bool down = aidx[j] > 0;
            if (up && down) {
                probe[j] = a0[j] + step;
                const double hi = psi(probe);
                probe[j] = a0[j] - step;
                const double lo = psi(probe);
                g[j] = (hi - lo) / (2.0 * step);
            } else if (up) {
                probe[j] = a0[j] + step;
                g[j] = (psi(probe) - psi(a0)) / step;
            } else {
                probe[j] = a0[j] - step;
                g[j] = (psi(a0) - psi(probe)) / step;
            }
            probe[j] = a0[j];
        }
    }

    // Exact maximum of the interpolated slice along {a0 + h t d : t in [0, tmax]}.
    // Piece boundaries are the grid-plane crossings; within a piece the slice
    // is a polynomial of degree <= m in t, maximized in closed form.
    double ray_max(const SliceEval& psi, const Ray& ray, const double* a0,
                   const int* aidx) const {
        double d[kMaxActionDim];
        for (int j = 0; j < m_; ++j) d[j] = ray.d[j];
        double p_norm = ray.p_norm;

        if (cfg_.action_box) {
            const BoxConstraint& box = *cfg_.action_box;
            bool changed = false;
            for (int j = 0; j < m_; ++j) {
                if (a0[j] >= box.hi[j] - box.boundary_tol && d[j] > 0.0) {
                    d[j] = 0.0;
                    changed = true;
                }
                if (a0[j] <= box.lo[j] + box.boundary_tol && d[j] < 0.0) {
                    d[j] = 0.0;
                    changed = true;
                }
            }
            if (changed) {
                if (norm2(d, m_) == 0.0) return -std::numeric_limits<double>::infinity();
                p_norm = p_norm_of(d);
            }
        }

        double tmax = L_ / p_norm;
        if (cfg_.action_box) {
            const BoxConstraint& box = *cfg_.action_box;
            for (int j = 0; j < m_; ++j) {
                if (d[j] > 0.0) tmax = std::min(tmax, (box.hi[j] - a0[j]) / (h_ * d[j]));
                if (d[j] < 0.0) tmax = std::min(tmax, (box.lo[j] - a0[j]) / (h_ * d[j]));
            }
            tmax = std::max(tmax, 0.0);
        }
        if (tmax <= 0.0) return -std::numeric_limits<double>::infinity();

        // Collect grid-plane crossing times in (0, tmax).
        thread_local std::vector<double> ts;
        ts.clear();
        for (int j = 0; j < m_; ++j) {
            const double s = h_ * d[j];
            if (s == 0.0) continue;
            const GridAxis& ax = grid_.axis(n_ + j);
            const double step = ax.spacing();
            const int room = s > 0.0 ? ax.count - 1 - aidx[j] : aidx[j];
            const double as = std::abs(s);
            for (int k = 1; k <= room; ++k) {
                const double t = k * step / as;
                if (t >= tmax) break;
                ts.push_back(t);
            }
        }
        std::sort(ts.begin(), ts.end());
        ts.push_back(tmax);

        double probe[kMaxActionDim];
        auto eval_at = [&](double t) {
            for (int j = 0; j < m_; ++j) probe[j] = a0[j] + h_ * t * d[j];
            return psi(probe);
        };

        double best = -std::numeric_limits<double>::infinity();
        double t_prev = 0.0;
        double f_prev = psi(a0);
        best = std::max(best, f_prev);
        for (double t : ts) {
            const double f_here = eval_at(t);
            best = std::max(best, f_here);
            const double width = t - t_prev;
            if (m_ >= 2 && width > 1e-13 * tmax)
                best = std::max(best, piece_interior_max(eval_at, t_prev, t, f_prev, f_here));
            t_prev = t;
            f_prev = f_here;
        }
        return best;
    }

    // Closed-form interior maximum of the degree <= m polynomial piece.
    template <typename Eval>
    double piece_interior_max(Eval&& eval_at, double t0, double t1, double f0, double f1) const {
        const double w = t1 - t0;
        double best = -std::numeric_limits<double>::infinity();
        if (m_ == 2) {
            const double fm = eval_at(t0 + 0.5 * w);
            best = std::max(best, fm);
            const double a2 = 2.0 * f0 - 4.0 * fm + 2.0 * f1;
            const double b1 = -3.0 * f0 + 4.0 * fm - f1;
            if (a2 < 0.0) {
                const double u = -b1 / (2.0 * a2);
                if (u > 0.0 && u < 1.0) best = std::max(best, eval_at(t0 + u * w));
            }
            return best;
        }
        // Cubic via Newton divided differences at u = 0, 1/3, 2/3, 1.
        const double fa = eval_at(t0 + w / 3.0);
        const double fb = eval_at(t0 + 2.0 * w / 3.0);
        best = std::max(best, std::max(fa, fb));
        const double d01 = (fa - f0) * 3.0;
        const double d12 = (fb - fa) * 3.0;
        const double d23 = (f1 - fb) * 3.0;
        const double d012 = (d12 - d01) * 1.5;
        const double d123 = (d23 - d12) * 1.5;
        const double d0123 = d123 - d012;
        // f'(u) = d01 + d012 (2u - 1/3) + d0123 (3u^2 - 2u + 2/9)
        const double A = 3.0 * d0123;
        const double B = 2.0 * d012 - 2.0 * d0123;
        const double C = d01 - d012 / 3.0 + (2.0 / 9.0) * d0123;
        if (A == 0.0) {
            if (B != 0.0) {
                const double u = -C / B;
                if (u > 0.0 && u < 1.0) best = std::max(best, eval_at(t0 + u * w));
            }
            return best;
        }
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            for (double u : {(-B + sq) / (2.0 * A), (-B - sq) / (2.0 * A)})
                if (u > 0.0 && u < 1.0) best = std::max(best, eval_at(t0 + u * w));
        }
        return best;
    }

    Grid grid_;
    SolverConfig cfg_;
    double L_;
    NormIndex p_;
    double gamma_;
    double h_;
    int n_ = 0, m_ = 0;
    std::vector<NodePlan> plans_;
    std::vector<Ray> fixed_rays_;
};

std::pair<ScalarField, double> bellman_sweep(const ScalarField& q, const ControlProblem& problem,
                                             double L, NormIndex p, const SolverConfig& cfg) {
    SweepContext ctx(problem, q.grid(), L, p, cfg);
    std::vector<double> out(q.grid().size());
    const std::vector<double> old(q.values().begin(), q.values().end());
    const double change = ctx.apply(old, out);
    return {ScalarField(q.grid(), std::move(out)), change};
}

std::pair<QTable, double> bellman_sweep(const QTable& q, const ControlProblem& problem,
                                        const SolverConfig& cfg) {
    auto [field, change] = bellman_sweep(q.field, problem, q.lipschitz_bound, q.p, cfg);
    QTable next = q;
    next.field = std::move(field);
    next.time_step = cfg.time_step;
    return {std::move(next), change};
}

QTable solve_q_l(const ControlProblem& problem, const Grid& grid, double L, NormIndex p,
                 const SolverConfig& cfg, SolveStats* stats) {
    SweepContext ctx(problem, grid, L, p, cfg);
    std::vector<double> old(grid.size(), 0.0), next(grid.size());
    SolveStats local;
    double change = std::numeric_limits<double>::infinity();
    while (local.sweeps < cfg.max_sweeps) {
        change = ctx.apply(old, next);
        old.swap(next);
        ++local.sweeps;
        local.sup_changes.push_back(change);
        if (change < cfg.stop_tol) {
            local.converged = true;
            break;
        }
    }
    if (!local.converged && change > 100.0 * cfg.stop_tol) {
        const int sweeps = local.sweeps;
        if (stats) *stats = std::move(local);
        throw NumericalError("solve_q_l: no convergence after " + std::to_string(sweeps) +
                             " sweeps (sup change " + std::to_string(change) + ")");
    }
    if (stats) *stats = std::move(local);
    QTable table;
    table.field = ScalarField(grid, std::move(old));
    table.problem = problem.name;
    table.lipschitz_bound = L;
    table.p = p;
    table.time_step = cfg.time_step;
    return table;
}

ScalarField solve_q_classic(const ControlProblem& problem, const Grid& x_grid,
                            const std::vector<std::vector<double>>& action_candidates,
                            const SolverConfig& cfg, SolveStats* stats) {
    if (action_candidates.empty())
        throw std::invalid_argument("solve_q_classic: empty candidate list");
    const double gamma = problem.discount;
    const double h = cfg.time_step;
    if (!(h > 0.0) || !(gamma * h < 1.0))
        throw std::invalid_argument("solve_q_classic: needs h > 0 and gamma h < 1");
    const int n = problem.state_dim;
    if (x_grid.dim() != n) throw std::invalid_argument("solve_q_classic: grid must cover x axes");

    const std::size_t total = x_grid.size();
    const std::size_t ncand = action_candidates.size();
    const int xc = 1 << n;
    // Precompute reward and drift stencil per (node, candidate).
    std::vector<double> reward(total * ncand);
    std::vector<double> w(total * ncand * xc);
    std::vector<std::size_t> base(total * ncand * xc);
    {
        std::vector<double> x(n), xdot(n);
        for (std::size_t node = 0; node < total; ++node) {
            x_grid.node_coords(node, x);
            for (std::size_t j = 0; j < ncand; ++j) {
                const auto& a = action_candidates[j];
                if (static_cast<int>(a.size()) != problem.action_dim)
                    throw std::invalid_argument("solve_q_classic: candidate dimension mismatch");
                const std::size_t slot = node * ncand + j;
                reward[slot] = problem.reward(x, a);
                problem.dynamics(x, a, xdot);
                int cell[8];
                double frac[8];
                for (int i = 0; i < n; ++i) {
                    const double zi = x[i] + h * xdot[i];
                    if (!std::isfinite(zi))
                        throw NumericalError("solve_q_classic: non-finite dynamics");
                    locate(x_grid.axis(i), zi, cell[i], frac[i]);
                }
                for (int c = 0; c < xc; ++c) {
                    double ww = 1.0;
                    std::size_t bb = 0;
                    for (int i = 0; i < n; ++i) {
                        const int bit = (c >> i) & 1;
                        ww *= bit ? frac[i] : (1.0 - frac[i]);
                        bb += static_cast<std::size_t>(cell[i] + bit) * x_grid.stride(i);
                    }
                    w[slot * xc + c] = ww;
                    base[slot * xc + c] = bb;
                }
            }
        }
    }

    std::vector<double> old(total, 0.0), next(total);
    SolveStats local;
    double change = std::numeric_limits<double>::infinity();
    while (local.sweeps < cfg.max_sweeps) {
        change = 0.0;
        bool bad = false;
#pragma omp parallel for schedule(static) reduction(max : change) reduction(|| : bad)
        for (long long node = 0; node < static_cast<long long>(total); ++node) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < ncand; ++j) {
                const std::size_t slot = node * ncand + j;
                double interp = 0.0;
                for (int c = 0; c < xc; ++c) interp += w[slot * xc + c] * old[base[slot * xc + c]];
                best = std::max(best, h * reward[slot] + (1.0 - gamma * h) * interp);
            }
            if (!std::isfinite(best)) bad = true;
            next[node] = best;
            change = std::max(change, std::abs(best - old[node]));
        }
        if (bad) throw NumericalError("solve_q_classic: non-finite value produced");
        old.swap(next);
        ++local.sweeps;
        local.sup_changes.push_back(change);
        if (change < cfg.stop_tol) {
            local.converged = true;
            break;
        }
    }
    if (!local.converged && change > 100.0 * cfg.stop_tol) {
        if (stats) *stats = std::move(local);
        throw NumericalError("solve_q_classic: no convergence");
    }
    if (stats) *stats = std::move(local);
    return ScalarField(x_grid, std::move(old));
}

double pde_residual(const QTable& q, const ControlProblem& problem,
                    std::span<const double> point) {
    const Grid& grid = q.field.grid();
    if (static_cast<int>(point.size()) != grid.dim())
        throw std::invalid_argument("pde_residual: point dimension mismatch");
    for (int d = 0; d < grid.dim(); ++d)
        if (point[d] < grid.axis(d).lo || point[d] > grid.axis(d).hi)
            throw std::invalid_argument("pde_residual: point outside grid");
    const int n = problem.state_dim;
    const int m = problem.action_dim;
    const auto grad = q.field.gradient(point);
    std::span<const double> x(point.data(), n);
    std::span<const double> a(point.data() + n, m);
    std::vector<double> xdot(n);
    problem.dynamics(x, a, xdot);
    double adv = 0.0;
    for (int i = 0; i < n; ++i) adv += grad[i] * xdot[i];
    const NormIndex dual = q.p.dual();
    const double ga = dual.norm(std::span<const double>(grad.data() + n, m));
    return problem.discount * q.field.interpolate(point) - adv - q.lipschitz_bound * ga -
           problem.reward(x, a);
}

ActionGradientFn table_policy_gradient(QTable table) {
    auto field = std::make_shared<const ScalarField>(std::move(table.field));
    return [field](std::span<const double> x, std::span<const double> a) {
        std::vector<double> pt;
        pt.reserve(x.size() + a.size());
        pt.insert(pt.end(), x.begin(), x.end());
        pt.insert(pt.end(), a.begin(), a.end());
        const auto g = field->gradient(pt);
        return std::vector<double>(g.begin() + x.size(), g.end());
    };
}

void write_qtable_file(const std::string& path, const QTable& table) {
    char meta[160];
    std::snprintf(meta, sizeof meta, "qtable problem=%s L=%.17g p=%.17g h=%.17g",
                  table.problem.c_str(), table.lipschitz_bound,
                  table.p.is_inf() ? std::numeric_limits<double>::infinity() : table.p.value(),
                  table.time_step);
    write_field_file(path, table.field, {meta});
}

QTable read_qtable_file(const std::string& path) {
    std::vector<std::string> comments;
    ScalarField field = read_field_file(path, &comments);
    QTable table;
    table.field = std::move(field);
    bool found = false;
    for (const auto& line : comments) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag != "qtable") continue;
        std::string kv;
        while (ss >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "problem") table.problem = val;
            else if (key == "L") table.lipschitz_bound = std::stod(val);
            else if (key == "p") table.p = NormIndex(std::stod(val));
            else if (key == "h") table.time_step = std::stod(val);
        }
        found = true;
    }
    if (!found) throw std::runtime_error("read_qtable_file: missing qtable metadata comment");
    return table;
}

std::vector<std::vector<double>> uniform_action_candidates(const std::vector<double>& lo,
                                                           const std::vector<double>& hi,
                                                           int count) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("uniform_action_candidates: bad bounds");
    if (count < 2) throw std::invalid_argument("uniform_action_candidates: count must be >= 2");
    const int m = static_cast<int>(lo.size());
    std::vector<std::vector<double>> out;
    std::vector<int> idx(m, 0);
    while (true) {
        std::vector<double> a(m);
        for (int j = 0; j < m; ++j) a[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / (count - 1);
        out.push_back(std::move(a));
        int j = 0;
        while (j < m && idx[j] == count - 1) idx[j++] = 0;
        if (j == m) break;
        ++idx[j];
    }
    return out;
}

}  // namespace lcq
