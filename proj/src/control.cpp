#include "evi/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_control_valid(const Control& u) {
    if (u.values.empty()) {
        throw std::invalid_argument("Control: needs at least one interval");
    }
    if (!(u.horizon > 0.0) || !std::isfinite(u.horizon)) {
        throw std::invalid_argument("Control: horizon must be positive");
    }
    const GridPtr& g = u.values.front().grid;
    if (!g) {
        throw std::invalid_argument("Control: null grid");
    }
    for (const auto& v : u.values) {
        if (!v.grid || !same_grid(*v.grid, *g)) {
            throw std::invalid_argument("Control: all intervals must share one grid");
        }
        if (!v.all_finite()) {
            throw std::invalid_argument("Control: non-finite values");
        }
    }
}

} // namespace

Control::Control(double horizon_, std::vector<GridFunction> values_)
    : horizon(horizon_), values(std::move(values_)) {
    require_control_valid(*this);
}

Control Control::zeros(const GridPtr& grid, double horizon, int n_intervals) {
    if (n_intervals < 1) {
        throw std::invalid_argument("Control: needs at least one interval");
    }
    std::vector<GridFunction> vals(static_cast<std::size_t>(n_intervals),
                                   GridFunction::zeros(grid));
    return Control(horizon, std::move(vals));
}

Control Control::constant(const GridPtr& grid, double horizon, int n_intervals, double c) {
    if (n_intervals < 1) {
        throw std::invalid_argument("Control: needs at least one interval");
    }
    std::vector<GridFunction> vals(static_cast<std::size_t>(n_intervals),
                                   GridFunction::constant(grid, c));
    return Control(horizon, std::move(vals));
}

AdmissibleBox::AdmissibleBox(double lower_, double upper_) : lower(lower_), upper(upper_) {
    if (std::isnan(lower) || std::isnan(upper) || !(lower <= upper)) {
        throw std::invalid_argument("AdmissibleBox: lower must not exceed upper");
    }
}

bool AdmissibleBox::is_finite() const {
    return std::isfinite(lower) && std::isfinite(upper);
}

double AdmissibleBox::clamp(double x) const {
    return std::min(std::max(x, lower), upper);
}

TerminalTracking::TerminalTracking(GridFunction target) : target_(std::move(target)) {
    if (!target_.grid || !target_.all_finite()) {
        throw std::invalid_argument("TerminalTracking: invalid target");
    }
}

double TerminalTracking::value(const StateTrajectory& traj) const {
    const GridFunction diff = lin_comb(1.0, traj.states.back(), -1.0, target_);
    const double n = h_norm(diff);
    return n * n;
}

DistributedTracking::DistributedTracking(GridFunction target) : target_(std::move(target)) {
    if (!target_.grid || !target_.all_finite()) {
        throw std::invalid_argument("DistributedTracking: invalid target");
    }
}

double DistributedTracking::value(const StateTrajectory& traj) const {
    double acc = 0.0;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const double dt = traj.times[k] - traj.times[k - 1];
        const double n = h_norm(lin_comb(1.0, traj.states[k], -1.0, target_));
        acc += dt * n * n;
    }
    return acc;
}

ControlProblem::ControlProblem(StateSetup setup_, ControlMapKind c_kind_,
                               int smoothing_halfwidth_, WeightCallback omega_, double mu_,
                               std::shared_ptr<const CostTerm> cost_, AdmissibleBox box_,
                               int n_intervals_)
    : setup(std::move(setup_)),
      c_kind(c_kind_),
      smoothing_halfwidth(smoothing_halfwidth_),
      omega(std::move(omega_)),
      mu(mu_),
      cost(std::move(cost_)),
      box(box_),
      n_intervals(n_intervals_) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw std::invalid_argument("ControlProblem: mu must be positive");
    }
    if (!cost) {
        throw std::invalid_argument("ControlProblem: cost term required");
    }
    if (!omega) {
        throw std::invalid_argument("ControlProblem: weight callback required");
    }
    if (n_intervals < 1) {
        throw std::invalid_argument("ControlProblem: needs at least one interval");
    }
    if (setup.n_steps % n_intervals != 0) {
        throw std::invalid_argument("ControlProblem: n_steps must be divisible by n_intervals");
    }
    if (smoothing_halfwidth < 0) {
        throw std::invalid_argument("ControlProblem: smoothing half-width must be >= 0");
    }
    const double dt = setup.horizon / n_intervals;
    for (int m = 0; m < n_intervals; ++m) {
        const double w = omega((m + 0.5) * dt);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("ControlProblem: weight must be positive at midpoints");
        }
    }
}

double control_inner(const Control& a, const Control& b, const WeightCallback& omega) {
    require_control_valid(a);
    require_control_valid(b);
    if (a.n_intervals() != b.n_intervals() || a.horizon != b.horizon
        || !same_grid(*a.grid(), *b.grid())) {
        throw std::invalid_argument("control_inner: control meshes differ");
    }
    const double dt = a.dt();
    double acc = 0.0;
    for (int m = 0; m < a.n_intervals(); ++m) {
        const double w = omega(a.midpoint(m));
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("control_inner: weight must be positive at midpoints");
        }
        acc += w * dt * h_inner(a.values[static_cast<std::size_t>(m)],
                                b.values[static_cast<std::size_t>(m)]);
    }
    return acc;
}

double control_norm(const Control& u, const WeightCallback& omega) {
    return std::sqrt(std::max(0.0, control_inner(u, u, omega)));
}

namespace {

GridFunction moving_average(const GridFunction& v, int halfwidth) {
    if (halfwidth == 0) {
        return v;
    }
    GridFunction out = GridFunction::zeros(v.grid);
    const int n = static_cast<int>(v.values.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - halfwidth);
        const int hi = std::min(n - 1, i + halfwidth);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) {
            acc += v.values[static_cast<std::size_t>(j)];
        }
        out.values[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// Right-closed interval lookup: t in (m dt, (m+1) dt] maps to index m. The
// small shift absorbs roundoff when t sits on a shared mesh boundary.
int interval_index(double t, double dt, int n_intervals) {
    const double q = t / dt;
    int idx = static_cast<int>(std::ceil(q - 1e-9)) - 1;
    return std::clamp(idx, 0, n_intervals - 1);
}

} // namespace

TimeCallback apply_C(const ControlProblem& problem, const Control& u) {
    require_control_valid(u);
    if (!same_grid(*u.grid(), *problem.setup.phi.grid)) {
        throw std::invalid_argument("apply_C: control grid mismatch");
    }
    std::vector<GridFunction> vals;
    vals.reserve(u.values.size());
    for (const auto& v : u.values) {
        vals.push_back(problem.c_kind == ControlMapKind::Smoothing
                           ? moving_average(v, problem.smoothing_halfwidth)
                           : v);
    }
    const double dt = u.dt();
    const int m = u.n_intervals();
    return [vals = std::move(vals), dt, m](double t) {
        return vals[static_cast<std::size_t>(interval_index(t, dt, m))];
    };
}

Control project_admissible(const AdmissibleBox& box, const Control& u) {
    require_control_valid(u);
    Control out = u;
    for (auto& v : out.values) {
        for (double& x : v.values) {
            x = box.clamp(x);
        }
    }
    return out;
}

CostResult evaluate_cost(const ControlProblem& problem, const Control& u) {
    require_control_valid(u);
    if (u.horizon != problem.setup.horizon) {
        throw std::invalid_argument("evaluate_cost: control horizon mismatch");
    }
    if (problem.setup.n_steps % u.n_intervals() != 0) {
        throw std::invalid_argument("evaluate_cost: state steps not divisible by intervals");
    }
    CostResult res;
    res.traj = solve_state(problem.setup, apply_C(problem, u));
    const double un = control_norm(u, problem.omega);
    res.j = problem.cost->value(res.traj) + problem.mu * un * un;
    return res;
}

namespace {

struct FlatIndex {
    std::size_t m;
    std::size_t i;
};

// U-metric diagonal weight of coordinate (m, i).
double metric_weight(const ControlProblem& problem, const Control& u, std::size_t m,
                     std::size_t i) {
    return problem.omega(u.midpoint(static_cast<int>(m))) * u.dt()
        * u.grid()->quad_weight(i);
}

} // namespace

OptResult optimize(const ControlProblem& problem, const OptOptions& opts) {
    if (opts.max_iters < 0 || !(opts.fd_step > 0.0) || !(opts.grad_tol > 0.0)) {
        throw std::invalid_argument("optimize: options must be positive");
    }
    const GridPtr& grid = problem.setup.phi.grid;
    const std::size_t n_nodes = grid->n_nodes();
    const std::size_t n_int = static_cast<std::size_t>(problem.n_intervals);

    Control u = project_admissible(
        problem.box, Control::zeros(grid, problem.setup.horizon, problem.n_intervals));
    CostResult cur = evaluate_cost(problem, u);

    OptResult res;
    double alpha = 1.0;
    int last_armijo = 0;

    for (int it = 0;; ++it) {
        // forward-difference coordinate gradient of J at u
        std::vector<std::vector<double>> grad(n_int, std::vector<double>(n_nodes, 0.0));
        for (std::size_t m = 0; m < n_int; ++m) {
            for (std::size_t i = 0; i < n_nodes; ++i) {
                Control probe = u;
                const double delta =
                    opts.fd_step * (1.0 + std::abs(probe.values[m].values[i]));
                probe.values[m].values[i] += delta;
                const CostResult shifted = evaluate_cost(problem, probe);
                grad[m][i] = (shifted.j - cur.j) / delta;
            }
        }

        // steepest-descent direction in the control metric
        std::vector<std::vector<double>> dir(n_int, std::vector<double>(n_nodes, 0.0));
        for (std::size_t m = 0; m < n_int; ++m) {
            for (std::size_t i = 0; i < n_nodes; ++i) {
                dir[m][i] = grad[m][i] / metric_weight(problem, u, m, i);
            }
        }

        // projected-gradient mapping at unit step
        double pg_sq = 0.0;
        for (std::size_t m = 0; m < n_int; ++m) {
            for (std::size_t i = 0; i < n_nodes; ++i) {
                const double moved = problem.box.clamp(u.values[m].values[i] - dir[m][i]);
                const double d = u.values[m].values[i] - moved;
                pg_sq += metric_weight(problem, u, m, i) * d * d;
            }
        }
        const double pg_norm = std::sqrt(pg_sq);

        res.log.push_back({it, cur.j, pg_norm, last_armijo, control_norm(u, problem.omega)});
        if (pg_norm <= opts.grad_tol || it >= opts.max_iters) {
            break;
        }

        // Armijo backtracking along the projected path
        bool accepted = false;
        Control trial = u;
        CostResult trial_res;
        int halvings = 0;
        for (; halvings <= 60; ++halvings) {
            double decrease = 0.0;
            for (std::size_t m = 0; m < n_int; ++m) {
                for (std::size_t i = 0; i < n_nodes; ++i) {
                    const double moved =
                        problem.box.clamp(u.values[m].values[i] - alpha * dir[m][i]);
                    trial.values[m].values[i] = moved;
                    decrease += grad[m][i] * (u.values[m].values[i] - moved);
                }
            }
            if (decrease > 0.0) {
                trial_res = evaluate_cost(problem, trial);
                if (trial_res.j <= cur.j - 1e-4 * decrease) {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            break;
        }
        u = std::move(trial);
        cur = std::move(trial_res);
        last_armijo = halvings;
        alpha = std::min(alpha * 2.0, 1e3);
    }

    res.u_star = std::move(u);
    res.j_star = cur.j;
    res.state_star = std::move(cur.traj);
    return res;
}

} // namespace evi
