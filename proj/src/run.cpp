#include "evi/run.hpp"

#include "evi/csvio.hpp"
#include "evi/errors.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

namespace evi {

namespace {

namespace fs = std::filesystem;

using Artifacts = std::vector<std::pair<std::string, std::string>>;

void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    const fs::path tmp = dir / (name + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot open " + tmp.string());
        }
        f << content;
        f.flush();
        if (!f) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, dir / name);
}

Artifacts do_solve_state(const RunConfig& cfg, std::ostream& out) {
    const StateSetup setup = build_state_setup(cfg);
    const StateTrajectory traj = solve_state(setup);
    const double tau = setup.tau();

    const auto samples = sample_feasible(setup.phi.set, setup.phi.grid, 20, cfg.seed);
    std::vector<csv::DiagnosticsRow> rows;
    rows.reserve(traj.n_steps());
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const GridFunction& y = traj.states[k];
        const GridFunction dy = lin_comb(1.0 / tau, y, -1.0 / tau, traj.states[k - 1]);
        const GridFunction a = smooth_gradient(setup.phi, y);
        const GridFunction f_k = setup.f(traj.times[k]);
        const GridFunction& b_k = traj.memory_values[k - 1];
        GridFunction r = GridFunction::zeros(setup.phi.grid);
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            r.values[i] = dy.values[i] + a.values[i] + b_k.values[i] - f_k.values[i];
        }
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& v : samples) {
            gap = std::min(gap, h_inner(r, lin_comb(1.0, v, -1.0, y)));
        }
        csv::DiagnosticsRow row;
        row.step = static_cast<int>(k);
        row.y_h_norm = h_norm(y);
        row.phi = phi_value(setup.phi, y);
        row.dy_h_norm = h_norm(dy);
        row.vi_gap = gap;
        row.subgrad_violation = subgradient_check(setup.phi, y, traj.subgradients[k - 1], 20,
                                                  cfg.seed + k);
        rows.push_back(row);
    }

    out << "solve-state: " << cfg.n_steps << " steps, tau " << tau << "\n";
    out << "  final |y(T)|_H = " << h_norm(traj.states.back()) << "\n";

    Artifacts art;
    art.emplace_back("trajectory.csv", csv::trajectory_csv(traj));
    art.emplace_back("diagnostics.csv", csv::diagnostics_csv(rows));
    return art;
}

Artifacts do_optimize(const RunConfig& cfg, std::ostream& out) {
    const ControlProblem problem = build_control_problem(cfg);
    OptOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.fd_step = cfg.fd_step;
    opts.grad_tol = cfg.grad_tol;
    opts.seed = cfg.seed;
    const OptResult res = optimize(problem, opts);

    out << "optimize: " << res.log.size() - 1 << " descent steps\n";
    out << "  J* = " << res.j_star
        << ", |u*|_U = " << control_norm(res.u_star, problem.omega) << "\n";

    Artifacts art;
    art.emplace_back("control.csv", csv::control_csv(res.u_star));
    art.emplace_back("optimizer_log.csv", csv::optimizer_log_csv(res.log));
    art.emplace_back("trajectory.csv", csv::trajectory_csv(res.state_star));
    return art;
}

Artifacts do_check_estimates(const RunConfig& cfg, std::ostream& out) {
    const StateSetup base = build_state_setup(cfg);
    std::vector<csv::EstimateRow> rows;
    for (int mult : {1, 2, 4, 8, 16}) {
        const StateSetup setup = base.with_n_steps(cfg.n_steps * mult);
        const StateTrajectory traj = solve_state(setup);
        const EstimateReport rep = energy_estimate_report(traj, setup);
        csv::EstimateRow row;
        row.n_steps = setup.n_steps;
        row.tau = setup.tau();
        row.lhs = rep.lhs;
        row.rhs_core = rep.rhs_core;
        row.ratio = rep.ratio;
        rows.push_back(row);
    }

    out << "check-estimates: ratios";
    for (const auto& r : rows) {
        out << " " << r.ratio;
    }
    out << "\n";

    Artifacts art;
    art.emplace_back("estimate_report.csv", csv::estimate_report_csv(rows));
    return art;
}

Artifacts do_convergence(const RunConfig& cfg, std::ostream& out) {
    if (cfg.halvings < 3) {
        throw std::invalid_argument("convergence needs at least 3 halvings");
    }
    const StateSetup base = build_state_setup(cfg);
    std::vector<int> list;
    int n = cfg.n_steps;
    for (int i = 0; i < cfg.halvings; ++i) {
        list.push_back(n);
        n *= 2;
    }
    const StateTrajectory reference = solve_state(base.with_n_steps(16 * list.back()));
    const ConvergenceResult result = convergence_order(base, list, reference);

    out << "convergence: rates";
    for (std::size_t i = 1; i < result.rates.size(); ++i) {
        if (result.exact[i]) {
            out << " exact";
        } else {
            out << " " << result.rates[i];
        }
    }
    out << "\n";

    Artifacts art;
    art.emplace_back("rates.csv", csv::rates_csv(result));
    return art;
}

} // namespace

int run_command(const RunConfig& cfg, std::ostream& out) {
    Artifacts art;
    try {
        switch (cfg.command) {
        case Command::SolveState:
            art = do_solve_state(cfg, out);
            break;
        case Command::Optimize:
            art = do_optimize(cfg, out);
            break;
        case Command::CheckEstimates:
            art = do_check_estimates(cfg, out);
            break;
        case Command::Convergence:
            art = do_convergence(cfg, out);
            break;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }

    try {
        for (const auto& [name, content] : art) {
            write_atomic(cfg.out_dir, name, content);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& item : art) {
        out << "  wrote " << (fs::path(cfg.out_dir) / item.first).string() << "\n";
    }
    return 0;
}

} // namespace evi
