#include "lcq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lcq/errors.hpp"

namespace lcq {

namespace {

std::string format_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // average rank, 1-based
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

bool is_inner(const Grid& grid, std::span<const double> pt) {
    for (int d = 0; d < grid.dim(); ++d) {
        const auto& ax = grid.axis(d);
        const double margin = 0.2 * (ax.hi - ax.lo);
        if (pt[d] < ax.lo + margin - 1e-12 || pt[d] > ax.hi - margin + 1e-12) return false;
    }
    return true;
}

}  // namespace

void ExperimentReport::to_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        os << columns[c] << (c + 1 == columns.size() ? '\n' : ',');
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << format_cell(row[c]) << (c + 1 == row.size() ? '\n' : ',');
    }
}

std::string ExperimentReport::to_csv_string() const {
    std::ostringstream ss;
    to_csv(ss);
    return ss.str();
}

ExperimentReport ExperimentReport::from_csv(std::istream& is, const std::string& kind) {
    ExperimentReport rep;
    rep.kind = kind;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("from_csv: empty input");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) rep.columns.push_back(cell);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        if (row.size() != rep.columns.size()) throw std::runtime_error("from_csv: ragged row");
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void ExperimentReport::write_csv_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    to_csv(os);
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series");
    const auto rx = ranks(xs);
    const auto ry = ranks(ys);
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double fit_rate(const std::vector<double>& Ls, const std::vector<double>& gaps) {
    if (Ls.size() != gaps.size()) throw std::invalid_argument("fit_rate: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        if (gaps[i] > 0.0) {
            lx.push_back(std::log(Ls[i]));
            ly.push_back(std::log(gaps[i]));
        }
    }
    if (lx.size() < 2) throw std::invalid_argument("fit_rate: not enough positive gaps");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate L values");
    return sxy / sxx;
}

double min_signed_diff(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("min_signed_diff: grid mismatch");
    double m = std::numeric_limits<double>::infinity();
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::min(m, vb[i] - va[i]);
    return m;
}

ExperimentReport sweep_l(const ControlProblem& problem, const Grid& grid,
                         const std::vector<double>& Ls, NormIndex p, const SolverConfig& cfg,
                         SweepLDetail* detail) {
    if (Ls.size() < 2) throw std::invalid_argument("sweep_l: need at least two L values");
    for (std::size_t i = 1; i < Ls.size(); ++i)
        if (!(Ls[i] > Ls[i - 1])) throw std::invalid_argument("sweep_l: Ls must increase");

    SweepLDetail local;
    for (double L : Ls) {
        SolveStats stats;
        try {
            local.tables.push_back(solve_q_l(problem, grid, L, p, cfg, &stats));
        } catch (const NumericalError& e) {
            throw NumericalError("sweep_l at L=" + std::to_string(L) + ": " + e.what());
        }
        local.stats.push_back(std::move(stats));
    }

    std::vector<double> sup_diffs, ells, lows;
    for (std::size_t k = 0; k + 1 < Ls.size(); ++k) {
        const double sd = sup_diff(local.tables[k].field, local.tables[k + 1].field);
        const double msd = min_signed_diff(local.tables[k].field, local.tables[k + 1].field);
        local.min_signed_diffs.push_back(msd);
        if (msd < -1e-8)
            throw NumericalError("sweep_l: monotonicity in L violated at L=" +
                                 std::to_string(Ls[k]) + " (min diff " + std::to_string(msd) +
                                 ")");
        sup_diffs.push_back(sd);
        ells.push_back(Ls[k + 1] - Ls[k]);
        lows.push_back(Ls[k]);
    }

    // Constant fit of sup_diff (L + l) / l. The unconstrained least-squares
    // value is the mean; constrained to dominate every measured diff (an
    // upper-bound constant) the least-squares solution is the max.
    double mean = 0.0, C = 0.0;
    for (std::size_t k = 0; k < sup_diffs.size(); ++k) {
        const double y = sup_diffs[k] * (lows[k] + ells[k]) / ells[k];
        mean += y;
        C = std::max(C, y);
    }
    mean /= static_cast<double>(sup_diffs.size());
    local.fitted_C = C;
    local.fitted_C_mean = mean;

    ExperimentReport rep;
    rep.kind = "sweep_l";
    rep.columns = {"L_low", "L_high", "sup_diff", "bound_fit"};
    for (std::size_t k = 0; k < sup_diffs.size(); ++k)
        rep.rows.push_back(
            {lows[k], lows[k] + ells[k], sup_diffs[k], C * ells[k] / (lows[k] + ells[k])});
    if (detail) *detail = std::move(local);
    return rep;
}

ExperimentReport convergence_to_classic(const ControlProblem& problem, const Grid& grid,
                                        const std::vector<double>& Ls, NormIndex p,
                                        const SolverConfig& cfg, ConvergenceDetail* detail) {
    if (Ls.empty()) throw std::invalid_argument("convergence_to_classic: empty L list");
    const int n = problem.state_dim;
    const int m = problem.action_dim;
    if (grid.dim() != n + m)
        throw std::invalid_argument("convergence_to_classic: grid must cover state + action");

    std::vector<GridAxis> x_axes(grid.axes().begin(), grid.axes().begin() + n);
    Grid x_grid(x_axes);

    // Candidate actions = the action nodes of the joint grid, so the classical
    // table dominates every Q^L on the same nodes.
    std::vector<std::vector<double>> candidates;
    {
        std::vector<int> idx(m, 0);
        while (true) {
            std::vector<double> a(m);
            for (int j = 0; j < m; ++j) a[j] = grid.axis(n + j).coord(idx[j]);
            candidates.push_back(std::move(a));
            int j = 0;
            while (j < m && idx[j] == grid.axis(n + j).count - 1) idx[j++] = 0;
            if (j == m) break;
            ++idx[j];
        }
    }

    ConvergenceDetail local{ScalarField{}, {}, {}, {}};
    SolveStats cstats;
    local.classic = solve_q_classic(problem, x_grid, candidates, cfg, &cstats);
    local.stats.push_back(std::move(cstats));

    ExperimentReport rep;
    rep.kind = "conv";
    rep.columns = {"L", "gap"};

    std::vector<double> pt(grid.dim());
    for (double L : Ls) {
        SolveStats stats;
        QTable table = solve_q_l(problem, grid, L, p, cfg, &stats);
        local.stats.push_back(std::move(stats));

        double gap = 0.0;
        double min_signed = std::numeric_limits<double>::infinity();
        for (std::size_t node = 0; node < grid.size(); ++node) {
            grid.node_coords(node, pt);
            const double qc = local.classic.interpolate(std::span<const double>(pt.data(), n));
            const double ql = table.field.value_at_node(node);
            min_signed = std::min(min_signed, qc - ql);
            if (is_inner(grid, pt)) gap = std::max(gap, std::abs(ql - qc));
        }
        local.min_signed_gap.push_back(min_signed);
        if (min_signed < -1e-6)
            throw NumericalError("convergence_to_classic: Q^L exceeds Q at L=" +
                                 std::to_string(L));
        rep.rows.push_back({L, gap});
        local.tables.push_back(std::move(table));
    }
    if (detail) *detail = std::move(local);
    return rep;
}

namespace {

// Index offset of the box subgrid inside the margin grid, one per action axis.
std::vector<int> box_offsets(const Grid& margin, const Grid& box, int n, int m) {
    std::vector<int> off(m);
    for (int j = 0; j < m; ++j) {
        const auto& ma = margin.axis(n + j);
        const auto& ba = box.axis(n + j);
        const double step = ma.spacing();
        const double raw = (ba.lo - ma.lo) / step;
        off[j] = static_cast<int>(std::lround(raw));
        if (std::abs(raw - off[j]) > 1e-6 || off[j] < 0 ||
            off[j] + ba.count > ma.count)
            throw std::invalid_argument("sweep_epsilon: box nodes must align with the grid");
    }
    return off;
}

}  // namespace

ExperimentReport sweep_epsilon(const ControlProblem& problem, const Grid& grid, double L,
                               NormIndex p, double M, const std::vector<double>& epsilons,
                               const SolverConfig& cfg, SweepEpsilonDetail* detail) {
    if (epsilons.empty()) throw std::invalid_argument("sweep_epsilon: empty epsilon list");
    for (double e : epsilons)
        if (!(e > 0.0 && e < 1.0))
            throw std::invalid_argument("sweep_epsilon: epsilons must lie in (0, 1)");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("sweep_epsilon: epsilons must decrease");
    const int n = problem.state_dim;
    const int m = problem.action_dim;

    // Box subgrid: action axes clipped to [-M, M]. A face needs a grid node
    // exactly on it; axes already contained in the box are kept whole (the
    // constraint is then inactive along them).
    std::vector<GridAxis> box_axes(grid.axes().begin(), grid.axes().end());
    for (int j = 0; j < m; ++j) {
        const auto& ax = grid.axis(n + j);
        const double step = ax.spacing();
        int lo_idx = 0, hi_idx = ax.count - 1;
        if (ax.lo < -M - 1e-9) {
            lo_idx = static_cast<int>(std::lround((-M - ax.lo) / step));
            if (lo_idx < 0 || lo_idx >= ax.count || std::abs(ax.coord(lo_idx) + M) > 1e-9)
                throw std::invalid_argument("sweep_epsilon: -M must be a grid node");
        }
        if (ax.hi > M + 1e-9) {
            hi_idx = static_cast<int>(std::lround((M - ax.lo) / step));
            if (hi_idx < 0 || hi_idx >= ax.count || std::abs(ax.coord(hi_idx) - M) > 1e-9)
                throw std::invalid_argument("sweep_epsilon: +M must be a grid node");
        }
        if (hi_idx <= lo_idx) throw std::invalid_argument("sweep_epsilon: empty box subgrid");
        box_axes[n + j] = GridAxis{ax.coord(lo_idx), ax.coord(hi_idx), hi_idx - lo_idx + 1};
    }
    Grid box_grid(box_axes);

    SweepEpsilonDetail local;
    {
        SolveStats s;
        local.unconstrained = solve_q_l(problem, grid, L, p, cfg, &s);
        local.stats.push_back(std::move(s));
    }
    {
        SolverConfig box_cfg = cfg;
        box_cfg.action_box = BoxConstraint(std::vector<double>(m, -M), std::vector<double>(m, M));
        SolveStats s;
        local.box_constrained = solve_q_l(problem, box_grid, L, p, box_cfg, &s);
        local.stats.push_back(std::move(s));
    }

    const auto offsets = box_offsets(grid, box_grid, n, m);

    // Walk the box subgrid and map each node into the margin grid.
    const std::size_t box_total = box_grid.size();
    std::vector<int> multi(grid.dim());
    auto margin_index = [&](std::size_t box_node) {
        box_grid.multi_index(box_node, multi);
        for (int j = 0; j < m; ++j) multi[n + j] += offsets[j];
        return grid.flat_index(multi);
    };

    ExperimentReport rep;
    rep.kind = "eps";
    rep.columns = {"epsilon", "gap", "ordering_ok"};

    const double tol = 1e-6;
    const ScalarField* prev = nullptr;
    for (double eps : epsilons) {
        PenaltyConfig pcfg{M, eps};
        const ControlProblem pen = penalized_problem(problem, pcfg);
        SolveStats s;
        QTable qe = solve_q_l(pen, grid, L, p, cfg, &s);
        local.stats.push_back(std::move(s));

        double gap = 0.0;       // sup over box nodes of Q^L - Q^{eps,L}
        double box_gap = 0.0;   // sup over box nodes of Q^{eps,L} - Q^L_box
        bool ok = true;
        for (std::size_t b = 0; b < box_total; ++b) {
            const std::size_t g = margin_index(b);
            const double ql = local.unconstrained.field.value_at_node(g);
            const double qeps = qe.field.value_at_node(g);
            const double qbox = local.box_constrained.field.value_at_node(b);
            gap = std::max(gap, ql - qeps);
            box_gap = std::max(box_gap, qeps - qbox);
            if (qeps > ql + tol) ok = false;            // Q^{eps,L} <= Q^L
            if (qbox > qeps + tol) ok = false;          // Q^L_box <= Q^{eps,L}
            if (prev && qeps > prev->value_at_node(g) + tol) ok = false;  // decreasing in eps
        }
        local.box_gaps.push_back(box_gap);
        rep.rows.push_back({eps, gap, ok ? 1.0 : 0.0});
        local.penalized.push_back(std::move(qe));
        prev = &local.penalized.back().field;
    }
    if (detail) *detail = std::move(local);
    return rep;
}

ExperimentReport compare_p(const ControlProblem& problem, const Grid& grid, double L,
                           const std::vector<NormIndex>& ps, const SolverConfig& cfg,
                           CompareGridDetail* detail) {
    if (ps.empty()) throw std::invalid_argument("compare_p: empty p list");
    for (std::size_t i = 1; i < ps.size(); ++i)
        if (!(ps[i - 1].value() < ps[i].value()))
            throw std::invalid_argument("compare_p: ps must be sorted ascending");

    CompareGridDetail local;
    ExperimentReport rep;
    rep.kind = "pcomp";
    rep.columns = {"p", "q_mean", "q_min", "q_max", "ordering_ok"};
    const double tol = 1e-6;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        SolveStats s;
        QTable table = solve_q_l(problem, grid, L, ps[i], cfg, &s);
        local.stats.push_back(std::move(s));
        const auto vals = table.field.values();
        double mean = 0.0, vmin = vals[0], vmax = vals[0];
        for (double v : vals) {
            mean += v;
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        mean /= static_cast<double>(vals.size());
        bool ok = true;
        if (i > 0) {
            const double msd = min_signed_diff(local.tables.back().field, table.field);
            local.min_signed_diffs.push_back(msd);
            ok = msd >= -tol;
        }
        rep.rows.push_back({ps[i].value(), mean, vmin, vmax, ok ? 1.0 : 0.0});
        local.tables.push_back(std::move(table));
    }
    if (detail) *detail = std::move(local);
    return rep;
}

}  // namespace lcq
