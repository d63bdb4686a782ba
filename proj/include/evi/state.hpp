#pragma once

#include "evi/convex.hpp"
#include "evi/memory.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace evi {

/// Time-dependent nodal data, sampled at the right endpoint of each step.
/// Must be continuous in time for the pointwise sampling to be meaningful;
/// rough-in-time data would need cell averaging, which is out of scope.
using TimeCallback = std::function<GridFunction(double)>;

/// Everything needed to march y' + dPhi(y) + B(y) = f (+ extra forcing):
/// energy, memory operator, data, horizon and step count, prox tolerance.
struct StateSetup {
    EnergyFunctional phi;
    MemoryOperator memory;
    TimeCallback f;
    GridFunction y0;
    double horizon;
    int n_steps;
    double prox_tol;

    StateSetup(EnergyFunctional phi_, MemoryOperator memory_, TimeCallback f_,
               GridFunction y0_, double horizon_, int n_steps_, double prox_tol_ = 1e-9);

    double tau() const { return horizon / n_steps; }
    StateSetup with_n_steps(int n) const;
};

/// Discrete solution: states at t_0..t_N plus, for each step k >= 1, the
/// subgradient defined as the scheme residual
///   g^k_i = F^k_i - B^k_i - (y^k_i - y^{k-1}_i)/tau
/// (F = f + extra forcing), so the discrete inclusion holds by construction.
struct StateTrajectory {
    std::vector<double> times;
    std::vector<GridFunction> states;
    std::vector<GridFunction> subgradients;
    std::vector<GridFunction> memory_values;
    std::vector<int> prox_iterations;

    std::size_t n_steps() const { return subgradients.size(); }
};

enum class ProxStart { Warm, Zero };

struct SolveOptions {
    ProxStart start = ProxStart::Warm;
};

/// Implicit-explicit march: energy handled by prox_step, memory evaluated
/// explicitly from the history. forcing_extra (optional) is added to f; the
/// control module passes Cu through it.
StateTrajectory solve_state(const StateSetup& setup, const TimeCallback& forcing_extra = {},
                            const SolveOptions& opts = {});

/// Two sides of the a priori energy bound:
///   lhs      = max_k |y^k|_H^2 + max_k v_norm(y^k, p)^p + sum tau |dy^k/tau|_H^2
///   rhs_core = |y0|_H^2 + phi(y0) + sum tau |F^k|_H^2.
struct EstimateReport {
    double lhs = 0.0;
    double rhs_core = 0.0;
    double ratio = 0.0;
    bool trivial_zero = false;
};

EstimateReport energy_estimate_report(const StateTrajectory& traj, const StateSetup& setup,
                                      const TimeCallback& forcing_extra = {});

/// Min over steps k and sampled feasible v of
///   ( dy^k/tau + A_h(y^k) + B^k - F^k, v - y^k )_H
/// where A_h is the gradient of the smooth energy part. Near-nonnegative for
/// a converged trajectory.
double vi_residual_check(const StateTrajectory& traj, const StateSetup& setup,
                         const TimeCallback& forcing_extra, int n_test, std::uint64_t seed);

/// Max over steps of subgradient_check(phi, y^k, g^k, ...): certifies that the
/// stored residuals are (approximate) subgradients at the stored states.
double inclusion_residual_check(const StateTrajectory& traj, const StateSetup& setup,
                                int n_samples = 50, std::uint64_t seed = 2024);

/// Errors and observed orders of a tau-halving family against one fine
/// reference solve on the same data. rates[0] is NaN; a row whose error and
/// predecessor error are both zero is flagged exact instead of rated.
struct ConvergenceResult {
    std::vector<int> n_steps;
    std::vector<double> taus;
    std::vector<double> errors;
    std::vector<double> rates;
    std::vector<bool> exact;
};

ConvergenceResult convergence_order(const StateSetup& base, const std::vector<int>& n_steps_list,
                                    const StateTrajectory& reference,
                                    const TimeCallback& forcing_extra = {});

} // namespace evi
