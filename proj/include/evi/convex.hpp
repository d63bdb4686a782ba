#pragma once

#include "evi/grid.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace evi {

/// Nodewise feasibility tolerance for the indicator part of the energy.
inline constexpr double kFeasibilityTol = 1e-12;

enum class SetKind { Full, Nonnegative, Box };

/// Closed convex nodewise constraint set. Every kind contains 0; Box
/// construction enforces lower <= 0 <= upper.
class ConstraintSet {
public:
    static ConstraintSet full();
    static ConstraintSet nonnegative();
    static ConstraintSet box(double lower, double upper);

    SetKind kind() const { return kind_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    double clamp(double x) const;
    /// Distance of x outside the set (0 when inside).
    double violation(double x) const;
    double max_violation(const GridFunction& v) const;
    bool is_feasible(const GridFunction& v, double tol = kFeasibilityTol) const;

private:
    ConstraintSet(SetKind k, double lo, double hi) : kind_(k), lower_(lo), upper_(hi) {}
    SetKind kind_;
    double lower_;
    double upper_;
};

/// The convex energy: (1/p) * [sum_cells h|Dv|^p + trapezoid(|v|^p)] plus the
/// indicator of the constraint set.
struct EnergyFunctional {
    double p;
    ConstraintSet set;
    GridPtr grid;

    EnergyFunctional(double p_, ConstraintSet set_, GridPtr grid_);
};

/// Energy value; +infinity when the constraint is violated beyond tolerance.
double phi_value(const EnergyFunctional& phi, const GridFunction& v);

/// Value of the smooth part only (no indicator).
double phi_smooth_value(const EnergyFunctional& phi, const GridFunction& v);

/// Nodewise clamp onto the set. Idempotent, nonexpansive in |.|_H.
GridFunction project_set(const ConstraintSet& set, const GridFunction& v);

/// Gradient of the smooth energy part in the H representation (the discrete
/// p-Laplacian plus |v|^{p-2} v operator).
GridFunction smooth_gradient(const EnergyFunctional& phi, const GridFunction& v);

struct ProxOptions {
    long max_iters = 500000;
    std::optional<GridFunction> start; // default: projection of z
};

struct ProxResult {
    GridFunction y;
    GridFunction g;      // (z - y)/tau
    int iterations = 0;  // 0 for the direct fast path
    double final_step = 0.0;
    bool direct = false;
};

/// One resolvent/backward-Euler substep: y = argmin_w phi(w) + |w-z|^2_H/(2 tau),
/// g = (z-y)/tau. Direct tridiagonal solve when p == 2 and the set is Full,
/// projected gradient with Armijo backtracking otherwise.
ProxResult prox_step(const EnergyFunctional& phi, const GridFunction& z, double tau,
                     double tol, const ProxOptions& opts = {});

/// Deterministic feasible sample points used by the certification checks:
/// rotating constant / nodewise-random / smooth shapes, projected to the set.
std::vector<GridFunction> sample_feasible(const ConstraintSet& set, const GridPtr& grid,
                                          int n_samples, std::uint64_t seed);

/// Max over sampled feasible w (seeded draws plus all projected unit nodal
/// directions) of phi(v) + (g, w-v)_H - phi(w). Nonpositive up to tolerance
/// when g is a subgradient of phi at v.
double subgradient_check(const EnergyFunctional& phi, const GridFunction& v,
                         const GridFunction& g, int n_samples, std::uint64_t seed);

} // namespace evi
