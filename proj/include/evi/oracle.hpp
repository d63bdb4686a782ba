#pragma once

#include "evi/control.hpp"
#include "evi/convex.hpp"

#include <cstdint>
#include <utility>

namespace evi {

/// Budget and tolerance of the brute-force references. The residual tolerance
/// must undercut the working tolerances of the modules being validated by at
/// least three orders of magnitude; construction enforces the default margin.
struct OracleConfig {
    long max_iters;
    double residual_tol;
    std::uint64_t seed;

    explicit OracleConfig(long max_iters_ = 1000000, double residual_tol_ = 1e-12,
                          std::uint64_t seed_ = 0);
};

/// Reference resolvent: plain projected gradient descent on the substep
/// objective with a diminishing step schedule, coded independently of
/// prox_step (coordinate-space gradient, own projection and residual).
/// Throws SolveError when the budget runs out.
GridFunction oracle_prox(const EnergyFunctional& phi, const GridFunction& z, double tau,
                         const OracleConfig& cfg);

struct OracleControlResult {
    Control u_best;
    double j_best = 0.0;
};

/// Sampling reference for the control search: evaluates the exact cost on
/// uniform box draws, box corners (capped at 1024 patterns) and the zero
/// control, and returns the best. Restricted to tiny instances.
OracleControlResult oracle_best_control(const ControlProblem& problem, int n_samples,
                                        std::uint64_t seed);

} // namespace evi
