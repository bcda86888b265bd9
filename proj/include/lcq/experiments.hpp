#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lcq/penalty.hpp"
#include "lcq/solver.hpp"

namespace lcq {

/// Rectangular result table, CSV-serializable with exact round trips.
struct ExperimentReport {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void to_csv(std::ostream& os) const;
    std::string to_csv_string() const;
    static ExperimentReport from_csv(std::istream& is, const std::string& kind = "");
    void write_csv_file(const std::string& path) const;
};

/// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Least-squares slope of log(gap) against log(L). Rows with gap <= 0 are
/// dropped; throws when nothing is left.
double fit_rate(const std::vector<double>& Ls, const std::vector<double>& gaps);

struct SweepLDetail {
    std::vector<QTable> tables;          // one per L
    std::vector<SolveStats> stats;       // one per L
    std::vector<double> min_signed_diffs;  // min nodewise Q^{L+} - Q^L per pair
    double fitted_C = 0.0;       // constrained fit used for bound_fit
    double fitted_C_mean = 0.0;  // unconstrained least-squares constant
};

/// Solves Q^L along an increasing L ladder; rows are
/// (L_low, L_high, sup_diff, bound_fit) with bound_fit = C l / (L + l). C is
/// the least-squares constant fit to sup_diff (L + l) / l constrained to
/// dominate every measured diff (the tightest admissible bound constant).
/// Throws NumericalError if nodewise monotonicity in L fails beyond 1e-8.
ExperimentReport sweep_l(const ControlProblem& problem, const Grid& grid,
                         const std::vector<double>& Ls, NormIndex p, const SolverConfig& cfg,
                         SweepLDetail* detail = nullptr);

struct ConvergenceDetail {
    ScalarField classic;
    std::vector<QTable> tables;
    std::vector<SolveStats> stats;
    std::vector<double> min_signed_gap;  // min nodewise Q_classic - Q^L per L
};

/// Gap between Q^L(x, a) and the classical Q(x) over the inner 60% of every
/// axis; also checks Q^L <= Q_classic + 1e-6 nodewise. The classical solve
/// uses the action nodes of the joint grid as its candidate set. Rows: (L, gap).
ExperimentReport convergence_to_classic(const ControlProblem& problem, const Grid& grid,
                                        const std::vector<double>& Ls, NormIndex p,
                                        const SolverConfig& cfg,
                                        ConvergenceDetail* detail = nullptr);

struct SweepEpsilonDetail {
    QTable unconstrained;            // Q^L on the margin grid
    QTable box_constrained;          // Q^L over the box subgrid
    std::vector<QTable> penalized;   // one per epsilon
    std::vector<SolveStats> stats;   // all solves, base + box + penalized
    std::vector<double> box_gaps;    // sup over box nodes of Q^{eps,L} - Q^L_box
};

/// Penalty sweep on a grid whose action axes extend one cell beyond the box
/// [-M, M]^m. Rows: (epsilon, gap, ordering_ok) with gap = sup over box nodes
/// of Q^L - Q^{eps,L}; ordering_ok records the nodewise chain
/// Q^L_box <= Q^{eps1,L} <= Q^{eps2,L} <= Q^L at tolerance 1e-6.
ExperimentReport sweep_epsilon(const ControlProblem& problem, const Grid& grid, double L,
                               NormIndex p, double M, const std::vector<double>& epsilons,
                               const SolverConfig& cfg, SweepEpsilonDetail* detail = nullptr);

struct CompareGridDetail {
    std::vector<QTable> tables;
    std::vector<SolveStats> stats;
    std::vector<double> min_signed_diffs;  // min nodewise Q_{p_k} - Q_{p_{k-1}}
};

/// Solves Q^L_p for ascending p; rows (p, q_mean, q_min, q_max, ordering_ok)
/// with the nodewise lp-ball inclusion ordering checked at 1e-6.
ExperimentReport compare_p(const ControlProblem& problem, const Grid& grid, double L,
                           const std::vector<NormIndex>& ps, const SolverConfig& cfg,
                           CompareGridDetail* detail = nullptr);

/// Min over nodes of b - a (>= -tol means a <= b + tol nodewise).
double min_signed_diff(const ScalarField& a, const ScalarField& b);

}  // namespace lcq
