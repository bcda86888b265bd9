#include "lcq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "lcq/errors.hpp"
#include "lcq/experiments.hpp"
#include "lcq/hjdqn.hpp"
#include "lcq/rng.hpp"

namespace lcq {

namespace {

using nlohmann::json;

constexpr const char* kUsage =
    "usage: lcqlab <subcommand> --config <path> --out <dir>\n"
    "subcommands: solve solve-classic rollout sweep-l sweep-eps compare-p residual-check train\n";

// Unknown keys are configuration errors, never ignored.
void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

NormIndex norm_index(const json& v, const std::string& where) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return NormIndex::inf();
        throw ConfigError(where + ": expected a number or \"inf\"");
    }
    const double p = number(v, where);
    if (!(p >= 1.0)) throw ConfigError(where + ": p must be >= 1");
    return NormIndex(p);
}

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& item : v) out.push_back(number(item, where));
    return out;
}

ControlProblem problem_from_json(const json& j) {
    check_keys(j, {"name", "params"}, "problem");
    const std::string name = require(j, "name", "problem").get<std::string>();
    if (name == "decay_toy") return make_decay_toy();
    if (name == "decay_toy2") return make_decay_toy_2d();
    if (name == "lqr1d") {
        Lqr1dParams params;
        if (j.contains("params")) {
            const json& p = j.at("params");
            check_keys(p, {"alpha", "beta", "q_cost", "r_cost", "discount"}, "problem.params");
            if (p.contains("alpha")) params.alpha = number(p.at("alpha"), "alpha");
            if (p.contains("beta")) params.beta = number(p.at("beta"), "beta");
            if (p.contains("q_cost")) params.q_cost = number(p.at("q_cost"), "q_cost");
            if (p.contains("r_cost")) params.r_cost = number(p.at("r_cost"), "r_cost");
            if (p.contains("discount")) params.discount = number(p.at("discount"), "discount");
        }
        try {
            return make_lqr_1d(params);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("problem: ") + e.what());
        }
    }
    throw ConfigError("problem: unknown name '" + name + "'");
}

Grid grid_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("grid: expected an array of [lo, hi, count]");
    std::vector<GridAxis> axes;
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 3) throw ConfigError("grid: each axis is [lo, hi, count]");
        GridAxis ax;
        ax.lo = number(item[0], "grid.lo");
        ax.hi = number(item[1], "grid.hi");
        ax.count = item[2].get<int>();
        axes.push_back(ax);
    }
    try {
        return Grid(std::move(axes));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

BoxConstraint box_from_json(const json& j, const std::string& where) {
    check_keys(j, {"lo", "hi", "tolerance"}, where);
    try {
        return BoxConstraint(number_list(require(j, "lo", where), where),
                             number_list(require(j, "hi", where), where),
                             j.contains("tolerance") ? number(j.at("tolerance"), where) : 1e-9);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

SolverConfig solver_from_json(const json& j) {
    SolverConfig cfg;
    check_keys(j,
               {"h", "stop_tol", "max_sweeps", "extra_direction_samples", "direction_seed",
                "gradient_candidate", "action_box"},
               "solver");
    cfg.time_step = number(require(j, "h", "solver"), "solver.h");
    if (j.contains("stop_tol")) cfg.stop_tol = number(j.at("stop_tol"), "solver.stop_tol");
    if (j.contains("max_sweeps")) cfg.max_sweeps = j.at("max_sweeps").get<int>();
    if (j.contains("extra_direction_samples"))
        cfg.extra_direction_samples = j.at("extra_direction_samples").get<int>();
    if (j.contains("direction_seed"))
        cfg.direction_seed = j.at("direction_seed").get<std::uint64_t>();
    if (j.contains("gradient_candidate"))
        cfg.gradient_candidate = j.at("gradient_candidate").get<bool>();
    if (j.contains("action_box")) cfg.action_box = box_from_json(j.at("action_box"), "solver.action_box");
    if (!(cfg.stop_tol > 0.0)) throw ConfigError("solver: stop_tol must be > 0");
    if (cfg.max_sweeps < 1) throw ConfigError("solver: max_sweeps must be >= 1");
    if (cfg.extra_direction_samples < 0)
        throw ConfigError("solver: extra_direction_samples must be >= 0");
    return cfg;
}

void validate_solver_against(const ControlProblem& problem, const SolverConfig& cfg) {
    if (!(cfg.time_step > 0.0) || !(problem.discount * cfg.time_step < 1.0))
        throw ConfigError("solver: needs h > 0 and gamma h < 1");
}

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

namespace fs = std::filesystem;

int cmd_solve(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "L", "p", "penalty"}, "config");
    ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    if (cfg.contains("penalty")) {
        const json& jp = cfg.at("penalty");
        check_keys(jp, {"M", "epsilon"}, "penalty");
        PenaltyConfig pcfg{number(require(jp, "M", "penalty"), "penalty.M"),
                           number(require(jp, "epsilon", "penalty"), "penalty.epsilon")};
        try {
            problem = penalized_problem(problem, pcfg);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("penalty: ") + e.what());
        }
    }
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const double L = number(require(cfg, "L", "config"), "L");
    const NormIndex p = norm_index(require(cfg, "p", "config"), "p");
    SolveStats stats;
    QTable table = solve_q_l(problem, grid, L, p, solver, &stats);
    write_qtable_file((out / "qtable.field").string(), table);
    std::cout << "solve: " << stats.sweeps << " sweeps, final change "
              << (stats.sup_changes.empty() ? 0.0 : stats.sup_changes.back()) << "\n";
    return 0;
}

int cmd_solve_classic(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "action_candidates"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const json& jc = require(cfg, "action_candidates", "config");
    check_keys(jc, {"lo", "hi", "count", "values"}, "action_candidates");
    std::vector<std::vector<double>> candidates;
    if (jc.contains("values")) {
        for (const auto& v : jc.at("values")) candidates.push_back(number_list(v, "values"));
    } else {
        candidates = uniform_action_candidates(
            number_list(require(jc, "lo", "action_candidates"), "lo"),
            number_list(require(jc, "hi", "action_candidates"), "hi"),
            require(jc, "count", "action_candidates").get<int>());
    }
    SolveStats stats;
    ScalarField field = solve_q_classic(problem, grid, candidates, solver, &stats);
    write_field_file((out / "classic.field").string(), field,
                     {"classic problem=" + problem.name});
    std::cout << "solve-classic: " << stats.sweeps << " sweeps\n";
    return 0;
}

int cmd_rollout(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "table", "x0", "a0", "L", "p", "h", "steps", "mode", "box"},
               "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const std::string table_path = require(cfg, "table", "config").get<std::string>();
    QTable table;
    try {
        table = read_qtable_file(table_path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("rollout: ") + e.what());
    }
    const auto x0 = number_list(require(cfg, "x0", "config"), "x0");
    const auto a0 = number_list(require(cfg, "a0", "config"), "a0");
    const double L = number(require(cfg, "L", "config"), "L");
    const NormIndex p = norm_index(require(cfg, "p", "config"), "p");
    const double h = number(require(cfg, "h", "config"), "h");
    const int steps = require(cfg, "steps", "config").get<int>();
    const std::string mode_name = require(cfg, "mode", "config").get<std::string>();
    StepMode mode;
    if (mode_name == "free") mode = StepMode::free;
    else if (mode_name == "euler_clip") mode = StepMode::euler_clip;
    else if (mode_name == "euler_cone") mode = StepMode::euler_cone;
    else throw ConfigError("rollout: unknown mode '" + mode_name + "'");
    std::optional<BoxConstraint> box;
    if (cfg.contains("box")) box = box_from_json(cfg.at("box"), "box");
    if (mode != StepMode::free && !box) throw ConfigError("rollout: constrained mode needs a box");
    if (!(h > 0.0) || !(problem.discount * h < 1.0))
        throw ConfigError("rollout: needs h > 0 and gamma h < 1");
    if (static_cast<int>(x0.size()) != problem.state_dim ||
        static_cast<int>(a0.size()) != problem.action_dim)
        throw ConfigError("rollout: x0/a0 dimension mismatch");

    Trajectory traj = rollout(problem, table_policy_gradient(std::move(table)), x0, a0, L, p, h,
                              steps, mode, box);
    std::ofstream os(out / "rollout.csv");
    write_trajectory_csv(os, traj, problem.state_dim, problem.action_dim, problem.discount, h);
    std::cout << "rollout: discounted return " << traj.discounted_return << "\n";
    return 0;
}

int cmd_sweep_l(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "Ls", "p", "classic_gap"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const auto Ls = number_list(require(cfg, "Ls", "config"), "Ls");
    const NormIndex p = norm_index(require(cfg, "p", "config"), "p");
    ExperimentReport rep;
    try {
        rep = sweep_l(problem, grid, Ls, p, solver);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep-l: ") + e.what());
    }
    rep.write_csv_file((out / "sweep_l.csv").string());
    if (cfg.contains("classic_gap") && cfg.at("classic_gap").get<bool>()) {
        ExperimentReport conv;
        try {
            conv = convergence_to_classic(problem, grid, Ls, p, solver);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("sweep-l: ") + e.what());
        }
        conv.write_csv_file((out / "conv.csv").string());
    }
    std::cout << "sweep-l: " << rep.rows.size() << " rows\n";
    return 0;
}

int cmd_sweep_eps(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "L", "p", "penalty", "epsilons"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const double L = number(require(cfg, "L", "config"), "L");
    const NormIndex p = norm_index(require(cfg, "p", "config"), "p");
    const json& jp = require(cfg, "penalty", "config");
    check_keys(jp, {"M"}, "penalty");
    const double M = number(require(jp, "M", "penalty"), "penalty.M");
    const auto epsilons = number_list(require(cfg, "epsilons", "config"), "epsilons");
    ExperimentReport rep;
    try {
        rep = sweep_epsilon(problem, grid, L, p, M, epsilons, solver);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sweep-eps: ") + e.what());
    }
    rep.write_csv_file((out / "eps.csv").string());
    std::cout << "sweep-eps: " << rep.rows.size() << " rows\n";
    return 0;
}

int cmd_compare_p(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "L", "ps"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const double L = number(require(cfg, "L", "config"), "L");
    const json& jp = require(cfg, "ps", "config");
    if (!jp.is_array() || jp.empty()) throw ConfigError("ps: expected a non-empty array");
    std::vector<NormIndex> ps;
    for (const auto& v : jp) ps.push_back(norm_index(v, "ps"));
    ExperimentReport rep;
    try {
        rep = compare_p(problem, grid, L, ps, solver);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("compare-p: ") + e.what());
    }
    rep.write_csv_file((out / "pcomp.csv").string());
    std::cout << "compare-p: " << rep.rows.size() << " rows\n";
    return 0;
}

int cmd_residual_check(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "grid", "solver", "L", "p", "num_points", "seed"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const Grid grid = grid_from_json(require(cfg, "grid", "config"));
    const SolverConfig solver = solver_from_json(require(cfg, "solver", "config"));
    validate_solver_against(problem, solver);
    const double L = number(require(cfg, "L", "config"), "L");
    const NormIndex p = norm_index(require(cfg, "p", "config"), "p");
    const int num_points = cfg.contains("num_points") ? cfg.at("num_points").get<int>() : 100;
    const std::uint64_t seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1;
    if (num_points < 1) throw ConfigError("residual-check: num_points must be >= 1");

    const QTable table = solve_q_l(problem, grid, L, p, solver);
    Rng rng(seed);
    ExperimentReport rep;
    rep.kind = "residuals";
    for (int i = 0; i < problem.state_dim; ++i) rep.columns.push_back("x_" + std::to_string(i + 1));
    for (int i = 0; i < problem.action_dim; ++i) rep.columns.push_back("a_" + std::to_string(i + 1));
    rep.columns.push_back("residual");
    std::vector<double> pt(grid.dim());
    for (int k = 0; k < num_points; ++k) {
        std::vector<double> row;
        for (int d = 0; d < grid.dim(); ++d) {
            const auto& ax = grid.axis(d);
            const double margin = 0.2 * (ax.hi - ax.lo);
            pt[d] = rng.uniform(ax.lo + margin, ax.hi - margin);
            row.push_back(pt[d]);
        }
        row.push_back(pde_residual(table, problem, pt));
        rep.rows.push_back(std::move(row));
    }
    rep.write_csv_file((out / "residuals.csv").string());
    std::cout << "residual-check: " << rep.rows.size() << " points\n";
    return 0;
}

int cmd_train(const json& cfg, const fs::path& out) {
    check_keys(cfg, {"problem", "train"}, "config");
    const ControlProblem problem = problem_from_json(require(cfg, "problem", "config"));
    const json& jt = require(cfg, "train", "config");
    check_keys(jt,
               {"h", "L", "p", "soft_update_alpha", "noise_std", "batch_size", "episodes",
                "steps_per_episode", "replay_capacity", "learning_rate", "adam_beta1",
                "adam_beta2", "adam_eps", "seed", "init_state_box", "hidden_dims"},
               "train");
    TrainConfig tc;
    tc.h = number(require(jt, "h", "train"), "train.h");
    tc.L = number(require(jt, "L", "train"), "train.L");
    if (jt.contains("p")) tc.p = norm_index(jt.at("p"), "train.p");
    if (jt.contains("soft_update_alpha"))
        tc.soft_update_alpha = number(jt.at("soft_update_alpha"), "train.soft_update_alpha");
    if (jt.contains("noise_std")) tc.noise_std = number(jt.at("noise_std"), "train.noise_std");
    if (jt.contains("batch_size")) tc.batch_size = jt.at("batch_size").get<int>();
    if (jt.contains("episodes")) tc.episodes = jt.at("episodes").get<int>();
    if (jt.contains("steps_per_episode"))
        tc.steps_per_episode = jt.at("steps_per_episode").get<int>();
    if (jt.contains("replay_capacity"))
        tc.replay_capacity = jt.at("replay_capacity").get<std::size_t>();
    if (jt.contains("learning_rate"))
        tc.learning_rate = number(jt.at("learning_rate"), "train.learning_rate");
    if (jt.contains("adam_beta1")) tc.adam_beta1 = number(jt.at("adam_beta1"), "train.adam_beta1");
    if (jt.contains("adam_beta2")) tc.adam_beta2 = number(jt.at("adam_beta2"), "train.adam_beta2");
    if (jt.contains("adam_eps")) tc.adam_eps = number(jt.at("adam_eps"), "train.adam_eps");
    if (jt.contains("seed")) tc.seed = jt.at("seed").get<std::uint64_t>();
    const json& jb = require(jt, "init_state_box", "train");
    check_keys(jb, {"lo", "hi"}, "train.init_state_box");
    tc.init_state_lo = number_list(require(jb, "lo", "init_state_box"), "lo");
    tc.init_state_hi = number_list(require(jb, "hi", "init_state_box"), "hi");
    if (jt.contains("hidden_dims")) {
        tc.hidden_dims.clear();
        for (const auto& v : jt.at("hidden_dims")) tc.hidden_dims.push_back(v.get<int>());
    }
    tc.validate(problem);  // throws ConfigError before any episode runs

    TrainResult result = train(problem, tc);
    write_curve_csv((out / "curve.csv").string(), result.curve);
    std::string dims = "dims";
    for (int d : result.params.layer_dims) dims += " " + std::to_string(d);
    write_checkpoint_file((out / "checkpoint.txt").string(), result.params,
                          {"problem=" + problem.name, dims,
                           "h=" + std::to_string(tc.h) + " L=" + std::to_string(tc.L) +
                               " seed=" + std::to_string(tc.seed)});
    double last = result.curve.empty() ? 0.0 : result.curve.back().undiscounted_return;
    std::cout << "train: " << result.curve.size() << " episodes, last return " << last << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    std::string sub, config_path, out_dir;
    if (args.empty()) {
        std::cerr << kUsage;
        return 2;
    }
    sub = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[++i];
        else if (args[i] == "--out" && i + 1 < args.size()) out_dir = args[++i];
        else {
            std::cerr << "unknown argument: " << args[i] << "\n" << kUsage;
            return 2;
        }
    }
    if (config_path.empty() || out_dir.empty()) {
        std::cerr << kUsage;
        return 2;
    }

    try {
        const json cfg = load_config(config_path);
        fs::path out(out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) throw ConfigError("cannot create output directory: " + out_dir);

        if (sub == "solve") return cmd_solve(cfg, out);
        if (sub == "solve-classic") return cmd_solve_classic(cfg, out);
        if (sub == "rollout") return cmd_rollout(cfg, out);
        if (sub == "sweep-l") return cmd_sweep_l(cfg, out);
        if (sub == "sweep-eps") return cmd_sweep_eps(cfg, out);
        if (sub == "compare-p") return cmd_compare_p(cfg, out);
        if (sub == "residual-check") return cmd_residual_check(cfg, out);
        if (sub == "train") return cmd_train(cfg, out);
        std::cerr << "unknown subcommand: " << sub << "\n" << kUsage;
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace lcq
