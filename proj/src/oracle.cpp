#include "evi/oracle.hpp"

#include "evi/errors.hpp"
#include "evi/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace evi {

OracleConfig::OracleConfig(long max_iters_, double residual_tol_, std::uint64_t seed_)
    : max_iters(max_iters_), residual_tol(residual_tol_), seed(seed_) {
    if (max_iters < 1) {
        throw std::invalid_argument("OracleConfig: max_iters must be positive");
    }
    if (!(residual_tol > 0.0) || residual_tol > 1e-12) {
        throw std::invalid_argument(
            "OracleConfig: residual_tol must lie in (0, 1e-12] to dominate module tolerances");
    }
}

GridFunction oracle_prox(const EnergyFunctional& phi, const GridFunction& z, double tau,
                         const OracleConfig& cfg) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("oracle_prox: tau must be positive");
    }
    if (!same_grid(*phi.grid, *z.grid)) {
        throw std::invalid_argument("oracle_prox: grid mismatch");
    }
    const double p = phi.p;
    const double lo = phi.set.lower();
    const double hi = phi.set.upper();
    const std::size_t n = z.values.size();
    const double h = phi.grid->length() / static_cast<double>(n - 1);

    std::vector<double> weight(n, h);
    weight.front() = 0.5 * h;
    weight.back() = 0.5 * h;

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::min(std::max(z.values[i], lo), hi);
    }

    double scale = 1.0;
    for (double v : z.values) scale = std::max(scale, std::abs(v));

    auto objective = [&](const std::vector<double>& v) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += weight[i]
                * (std::pow(std::abs(v[i]), p) / p
                   + (v[i] - z.values[i]) * (v[i] - z.values[i]) / (2.0 * tau));
        }
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const double d = (v[c + 1] - v[c]) / h;
            acc += h * std::pow(std::abs(d), p) / p;
        }
        return acc;
    };

    std::vector<double> grad(n);
    std::vector<double> trial(n);
    double f_cur = objective(w);
    double damping = 1.0;
    for (long iter = 0; iter < cfg.max_iters; ++iter) {
        // coordinate-space gradient of the substep objective
        double wmax = scale;
        for (std::size_t i = 0; i < n; ++i) {
            wmax = std::max(wmax, std::abs(w[i]));
            grad[i] = weight[i]
                * (std::pow(std::abs(w[i]), p - 2.0) * w[i] + (w[i] - z.values[i]) / tau);
        }
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const double d = (w[c + 1] - w[c]) / h;
            const double flux = std::pow(std::abs(d), p - 2.0) * d;
            grad[c] -= flux;
            grad[c + 1] += flux;
        }

        double res_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = grad[i] / weight[i];
            if (w[i] <= lo) r = std::min(r, 0.0);
            if (w[i] >= hi) r = std::max(r, 0.0);
            res_sq += weight[i] * r * r;
        }
        if (std::sqrt(res_sq) <= cfg.residual_tol) {
            return GridFunction(z.grid, std::move(w));
        }

        const double curvature = h
            * (1.0 / tau
               + (p - 1.0) * std::pow(2.0 * wmax, p - 2.0) * (4.0 / (h * h) + 1.0));
        const double step =
            damping * 0.5 / (curvature * (1.0 + static_cast<double>(iter) * 1e-6));
        for (std::size_t i = 0; i < n; ++i) {
            trial[i] = std::min(std::max(w[i] - step * grad[i], lo), hi);
        }
        const double f_trial = objective(trial);
        if (f_trial > f_cur + 1e-9 * (1.0 + std::abs(f_cur))) {
            damping *= 0.5; // overshoot: permanently shorten the schedule
            continue;
        }
        w.swap(trial);
        f_cur = f_trial;
    }
    throw SolveError("oracle_prox: iteration budget exhausted");
}

OracleControlResult oracle_best_control(const ControlProblem& problem, int n_samples,
                                        std::uint64_t seed) {
    if (problem.setup.phi.grid->n_cells() > 16 || problem.n_intervals > 4) {
        throw std::invalid_argument("oracle_best_control: instance too large");
    }
    if (n_samples < 0 || n_samples > 100000) {
        throw std::invalid_argument("oracle_best_control: sample budget out of range");
    }
    if (!problem.box.is_finite()) {
        throw std::invalid_argument("oracle_best_control: box must be bounded");
    }
    const GridPtr& grid = problem.setup.phi.grid;
    const double T = problem.setup.horizon;
    const int m_int = problem.n_intervals;
    const std::size_t n_nodes = grid->n_nodes();
    const std::size_t n_coords = n_nodes * static_cast<std::size_t>(m_int);

    OracleControlResult best;
    best.u_best = Control::zeros(grid, T, m_int);
    best.j_best = evaluate_cost(problem, best.u_best).j;

    auto consider = [&](const Control& u) {
        const double j = evaluate_cost(problem, u).j;
        if (j < best.j_best) {
            best.j_best = j;
            best.u_best = u;
        }
    };

    Rng rng(seed);
    for (int s = 0; s < n_samples; ++s) {
        Control u = Control::zeros(grid, T, m_int);
        for (auto& v : u.values) {
            for (double& x : v.values) {
                x = rng.uniform(problem.box.lower, problem.box.upper);
            }
        }
        consider(u);
    }

    // corner patterns: exhaustive when 2^coords fits the cap, sampled otherwise
    const int cap = 1024;
    if (n_coords <= 10) {
        const std::uint64_t total = std::uint64_t{1} << n_coords;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            Control u = Control::zeros(grid, T, m_int);
            std::size_t c = 0;
            for (auto& v : u.values) {
                for (double& x : v.values) {
                    x = ((mask >> c) & 1u) ? problem.box.upper : problem.box.lower;
                    ++c;
                }
            }
            consider(u);
        }
    } else {
        for (int s = 0; s < cap; ++s) {
            Control u = Control::zeros(grid, T, m_int);
            for (auto& v : u.values) {
                for (double& x : v.values) {
                    x = rng.coin() ? problem.box.upper : problem.box.lower;
                }
            }
            consider(u);
        }
    }
    return best;
}

} // namespace evi
