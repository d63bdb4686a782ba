#include "evi/csvio.hpp"
#include "evi/oracle.hpp"
#include "evi/run.hpp"
#include "evi/runconfig.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace evi;

namespace {

std::vector<std::vector<double>> nodal(const std::vector<GridFunction>& fns) {
    std::vector<std::vector<double>> out;
    out.reserve(fns.size());
    for (const auto& f : fns) out.push_back(f.values);
    return out;
}

py::dict trajectory_dict(const StateTrajectory& traj) {
    py::dict d;
    d["times"] = traj.times;
    d["states"] = nodal(traj.states);
    d["subgradients"] = nodal(traj.subgradients);
    d["memory_values"] = nodal(traj.memory_values);
    d["prox_iterations"] = traj.prox_iterations;
    return d;
}

py::dict py_solve_state(const std::string& config_json) {
    const RunConfig cfg = parse_config_json(config_json);
    const StateSetup setup = build_state_setup(cfg);
    return trajectory_dict(solve_state(setup));
}

py::dict py_optimize(const std::string& config_json) {
    const RunConfig cfg = parse_config_json(config_json);
    const ControlProblem problem = build_control_problem(cfg);
    OptOptions opts;
    opts.max_iters = cfg.max_iters;
    opts.fd_step = cfg.fd_step;
    opts.grad_tol = cfg.grad_tol;
    opts.seed = cfg.seed;
    const OptResult res = optimize(problem, opts);

    py::list log;
    for (const auto& rec : res.log) {
        py::dict row;
        row["iteration"] = rec.iteration;
        row["j"] = rec.j;
        row["pg_norm"] = rec.pg_norm;
        row["armijo_steps"] = rec.armijo_steps;
        row["u_norm"] = rec.u_norm;
        log.append(row);
    }

    py::dict d;
    d["control"] = nodal(res.u_star.values);
    d["j_star"] = res.j_star;
    d["u_norm"] = control_norm(res.u_star, problem.omega);
    d["log"] = log;
    d["trajectory"] = trajectory_dict(res.state_star);
    return d;
}

py::dict py_energy_report(const std::string& config_json) {
    const RunConfig cfg = parse_config_json(config_json);
    const StateSetup setup = build_state_setup(cfg);
    const StateTrajectory traj = solve_state(setup);
    const EstimateReport rep = energy_estimate_report(traj, setup);
    py::dict d;
    d["lhs"] = rep.lhs;
    d["rhs_core"] = rep.rhs_core;
    d["ratio"] = rep.ratio;
    d["trivial_zero"] = rep.trivial_zero;
    return d;
}

py::dict py_convergence(const std::string& config_json) {
    const RunConfig cfg = parse_config_json(config_json);
    const StateSetup base = build_state_setup(cfg);
    std::vector<int> list;
    int n = cfg.n_steps;
    for (int i = 0; i < cfg.halvings; ++i) {
        list.push_back(n);
        n *= 2;
    }
    const StateTrajectory reference = solve_state(base.with_n_steps(16 * list.back()));
    const ConvergenceResult res = convergence_order(base, list, reference);
    py::dict d;
    d["n_steps"] = res.n_steps;
    d["taus"] = res.taus;
    d["errors"] = res.errors;
    d["rates"] = res.rates;
    d["exact"] = res.exact;
    return d;
}

py::dict py_prox(const std::string& config_json, const std::vector<double>& z, double tau) {
    const RunConfig cfg = parse_config_json(config_json);
    const StateSetup setup = build_state_setup(cfg);
    const GridFunction zf(setup.phi.grid, z);
    const ProxResult res = prox_step(setup.phi, zf, tau, cfg.prox_tol);
    py::dict d;
    d["y"] = res.y.values;
    d["g"] = res.g.values;
    d["iterations"] = res.iterations;
    d["direct"] = res.direct;
    return d;
}

py::tuple py_run(const std::string& config_json, std::optional<std::string> out_dir,
                 std::optional<std::uint64_t> seed) {
    RunConfig cfg = parse_config_json(config_json);
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) cfg.seed = *seed;
    std::ostringstream out;
    const int code = run_command(cfg, out);
    return py::make_tuple(code, out.str());
}

py::dict py_oracle_best_control(const std::string& config_json, int n_samples,
                                std::uint64_t seed) {
    const RunConfig cfg = parse_config_json(config_json);
    const ControlProblem problem = build_control_problem(cfg);
    const OracleControlResult res = oracle_best_control(problem, n_samples, seed);
    py::dict d;
    d["control"] = nodal(res.u_best.values);
    d["j_best"] = res.j_best;
    return d;
}

std::vector<double> py_grid_nodes(int n_cells, double length) {
    return make_grid(n_cells, length)->nodes();
}

double py_h_inner(int n_cells, double length, const std::vector<double>& a,
                  const std::vector<double>& b) {
    const GridPtr g = make_grid(n_cells, length);
    return h_inner(GridFunction(g, a), GridFunction(g, b));
}

double py_v_norm(int n_cells, double length, const std::vector<double>& a, double p) {
    return v_norm(GridFunction(make_grid(n_cells, length), a), p);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Implicit time stepping for constrained evolution problems with memory";
    m.attr("__version__") = "0.1.0";

    m.def("solve_state", &py_solve_state, py::arg("config_json"),
          "Run the time stepper described by a JSON config; returns the trajectory.");
    m.def("optimize", &py_optimize, py::arg("config_json"),
          "Run projected descent on the control problem described by a JSON config.");
    m.def("energy_report", &py_energy_report, py::arg("config_json"),
          "Solve once and report the energy-estimate sides and their ratio.");
    m.def("convergence", &py_convergence, py::arg("config_json"),
          "Solve on a family of halved step sizes and report errors and rates.");
    m.def("prox", &py_prox, py::arg("config_json"), py::arg("z"), py::arg("tau"),
          "Single implicit step from nodal values z; returns y, the subgradient and stats.");
    m.def("run", &py_run, py::arg("config_json"), py::arg("out_dir") = std::nullopt,
          py::arg("seed") = std::nullopt,
          "Execute a config end to end like the CLI; returns (exit_code, summary_text).");
    m.def("oracle_best_control", &py_oracle_best_control, py::arg("config_json"),
          py::arg("n_samples"), py::arg("seed"),
          "Brute-force reference search over admissible controls on small instances.");
    m.def("grid_nodes", &py_grid_nodes, py::arg("n_cells"), py::arg("length") = 1.0);
    m.def("h_inner", &py_h_inner, py::arg("n_cells"), py::arg("length"), py::arg("a"),
          py::arg("b"));
    m.def("v_norm", &py_v_norm, py::arg("n_cells"), py::arg("length"), py::arg("a"),
          py::arg("p"));
}
