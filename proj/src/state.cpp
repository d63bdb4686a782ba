#include "evi/state.hpp"

#include "evi/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace evi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GridFunction eval_forcing(const TimeCallback& f, const TimeCallback& extra, double t,
                          const SpatialGrid& grid) {
    GridFunction out = f(t);
    if (!out.grid || !same_grid(*out.grid, grid)) {
        throw std::invalid_argument("solve_state: forcing on wrong grid");
    }
    if (extra) {
        const GridFunction add = extra(t);
        if (!add.grid || !same_grid(*add.grid, grid)) {
            throw std::invalid_argument("solve_state: extra forcing on wrong grid");
        }
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] += add.values[i];
        }
    }
    if (!out.all_finite()) {
        throw std::invalid_argument("solve_state: non-finite forcing");
    }
    return out;
}

} // namespace

StateSetup::StateSetup(EnergyFunctional phi_, MemoryOperator memory_, TimeCallback f_,
                       GridFunction y0_, double horizon_, int n_steps_, double prox_tol_)
    : phi(std::move(phi_)),
      memory(std::move(memory_)),
      f(std::move(f_)),
      y0(std::move(y0_)),
      horizon(horizon_),
      n_steps(n_steps_),
      prox_tol(prox_tol_) {
    if (!f) {
        throw std::invalid_argument("StateSetup: f callback required");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("StateSetup: horizon must be positive");
    }
    if (n_steps < 1) {
        throw std::invalid_argument("StateSetup: n_steps must be >= 1");
    }
    if (!(prox_tol > 0.0)) {
        throw std::invalid_argument("StateSetup: prox_tol must be positive");
    }
    if (!y0.grid || !same_grid(*y0.grid, *phi.grid)) {
        throw std::invalid_argument("StateSetup: y0 grid mismatch");
    }
    if (!std::isfinite(phi_value(phi, y0))) {
        throw std::invalid_argument("StateSetup: y0 must have finite energy");
    }
}

StateSetup StateSetup::with_n_steps(int n) const {
    StateSetup copy = *this;
    if (n < 1) {
        throw std::invalid_argument("StateSetup: n_steps must be >= 1");
    }
    copy.n_steps = n;
    return copy;
}

StateTrajectory solve_state(const StateSetup& setup, const TimeCallback& forcing_extra,
                            const SolveOptions& opts) {
    const GridPtr& grid = setup.phi.grid;
    const double tau = setup.tau();
    const int n = setup.n_steps;

    StateTrajectory traj;
    traj.times.reserve(static_cast<std::size_t>(n) + 1);
    traj.states.reserve(static_cast<std::size_t>(n) + 1);
    traj.subgradients.reserve(static_cast<std::size_t>(n));
    traj.memory_values.reserve(static_cast<std::size_t>(n));
    traj.prox_iterations.reserve(static_cast<std::size_t>(n));
    traj.times.push_back(0.0);
    traj.states.push_back(setup.y0);

    History hist(grid);
    hist.push(0.0, setup.y0);

    for (int k = 1; k <= n; ++k) {
        const double t_k = k * tau;
        const GridFunction b_k = memory_apply(setup.memory, hist, t_k);
        const GridFunction f_k = eval_forcing(setup.f, forcing_extra, t_k, *grid);
        const GridFunction& prev = traj.states.back();

        GridFunction z = GridFunction::zeros(grid);
        for (std::size_t i = 0; i < z.values.size(); ++i) {
            z.values[i] = prev.values[i] + tau * (f_k.values[i] - b_k.values[i]);
        }

        ProxOptions popts;
        popts.start = (opts.start == ProxStart::Warm) ? prev : GridFunction::zeros(grid);
        ProxResult pr;
        try {
            pr = prox_step(setup.phi, z, tau, setup.prox_tol, popts);
        } catch (const SolveError& e) {
            throw SolveError(std::string(e.what()) + " (time step " + std::to_string(k) + ")", k);
        }

        GridFunction g = GridFunction::zeros(grid);
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            g.values[i] = f_k.values[i] - b_k.values[i]
                - (pr.y.values[i] - prev.values[i]) / tau;
        }

        hist.push(t_k, pr.y);
        traj.times.push_back(t_k);
        traj.states.push_back(std::move(pr.y));
        traj.subgradients.push_back(std::move(g));
        traj.memory_values.push_back(std::move(b_k));
        traj.prox_iterations.push_back(pr.iterations);
    }
    return traj;
}

EstimateReport energy_estimate_report(const StateTrajectory& traj, const StateSetup& setup,
                                      const TimeCallback& forcing_extra) {
    const double tau = setup.tau();
    EstimateReport rep;

    double max_h2 = 0.0;
    double max_vp = 0.0;
    for (const auto& y : traj.states) {
        const double hn = h_norm(y);
        max_h2 = std::max(max_h2, hn * hn);
        max_vp = std::max(max_vp, std::pow(v_norm(y, setup.phi.p), setup.phi.p));
    }
    double dq_sum = 0.0;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const GridFunction dq = lin_comb(1.0 / tau, traj.states[k], -1.0 / tau, traj.states[k - 1]);
        const double dn = h_norm(dq);
        dq_sum += tau * dn * dn;
    }
    rep.lhs = max_h2 + max_vp + dq_sum;

    const double y0n = h_norm(setup.y0);
    double f_sum = 0.0;
    for (std::size_t k = 1; k < traj.times.size(); ++k) {
        const GridFunction f_k =
            eval_forcing(setup.f, forcing_extra, traj.times[k], *setup.phi.grid);
        const double fn = h_norm(f_k);
        f_sum += tau * fn * fn;
    }
    rep.rhs_core = y0n * y0n + phi_value(setup.phi, setup.y0) + f_sum;

    if (rep.rhs_core > 0.0) {
        rep.ratio = rep.lhs / rep.rhs_core;
    } else if (rep.lhs == 0.0) {
        rep.trivial_zero = true;
        rep.ratio = 0.0;
    } else {
        rep.ratio = kInf;
    }
    return rep;
}

double vi_residual_check(const StateTrajectory& traj, const StateSetup& setup,
                         const TimeCallback& forcing_extra, int n_test, std::uint64_t seed) {
    const double tau = setup.tau();
    const auto samples = sample_feasible(setup.phi.set, setup.phi.grid, n_test, seed);
    double min_gap = kInf;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const GridFunction& y = traj.states[k];
        const GridFunction& prev = traj.states[k - 1];
        const GridFunction a = smooth_gradient(setup.phi, y);
        const GridFunction f_k =
            eval_forcing(setup.f, forcing_extra, traj.times[k], *setup.phi.grid);
        const GridFunction& b_k = traj.memory_values[k - 1];
        GridFunction r = GridFunction::zeros(setup.phi.grid);
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            r.values[i] = (y.values[i] - prev.values[i]) / tau + a.values[i]
                + b_k.values[i] - f_k.values[i];
        }
        for (const auto& v : samples) {
            min_gap = std::min(min_gap, h_inner(r, lin_comb(1.0, v, -1.0, y)));
        }
    }
    return min_gap;
}

double inclusion_residual_check(const StateTrajectory& traj, const StateSetup& setup,
                                int n_samples, std::uint64_t seed) {
    double worst = -kInf;
    for (std::size_t k = 1; k < traj.states.size(); ++k) {
        const double viol = subgradient_check(setup.phi, traj.states[k],
                                              traj.subgradients[k - 1], n_samples,
                                              seed + static_cast<std::uint64_t>(k));
        worst = std::max(worst, viol);
    }
    return worst;
}

ConvergenceResult convergence_order(const StateSetup& base, const std::vector<int>& n_steps_list,
                                    const StateTrajectory& reference,
                                    const TimeCallback& forcing_extra) {
    if (n_steps_list.size() < 3) {
        throw std::invalid_argument("convergence_order: need at least 3 step counts");
    }
    for (std::size_t i = 1; i < n_steps_list.size(); ++i) {
        if (n_steps_list[i] != 2 * n_steps_list[i - 1]) {
            throw std::invalid_argument("convergence_order: step counts must double");
        }
    }
    const int finest = n_steps_list.back();
    const int ref_steps = static_cast<int>(reference.n_steps());
    if (ref_steps < 16 * finest || ref_steps % finest != 0) {
        throw std::invalid_argument(
            "convergence_order: reference must refine the finest run by >= 16");
    }

    ConvergenceResult out;
    out.n_steps = n_steps_list;
    for (int n : n_steps_list) {
        out.taus.push_back(base.horizon / n);
        const StateTrajectory traj = solve_state(base.with_n_steps(n), forcing_extra);
        if (ref_steps % n != 0) {
            throw std::invalid_argument("convergence_order: reference mesh must nest every run");
        }
        const int stride = ref_steps / n;
        double err = 0.0;
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            const GridFunction diff = lin_comb(1.0, traj.states[k], -1.0,
                                               reference.states[k * static_cast<std::size_t>(stride)]);
            err = std::max(err, h_norm(diff));
        }
        out.errors.push_back(err);
    }

    out.rates.assign(out.errors.size(), std::numeric_limits<double>::quiet_NaN());
    out.exact.assign(out.errors.size(), false);
    for (std::size_t i = 1; i < out.errors.size(); ++i) {
        if (out.errors[i] == 0.0 && out.errors[i - 1] == 0.0) {
            out.exact[i] = true;
        } else {
            out.rates[i] = std::log2(out.errors[i - 1] / out.errors[i]);
        }
    }
    return out;
}

} // namespace evi
