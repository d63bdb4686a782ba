#pragma once

#include "evi/state.hpp"

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

namespace evi {

/// Piecewise-constant-in-time control: one nodal GridFunction per interval of
/// a uniform partition of (0, horizon).
struct Control {
    double horizon = 0.0;
    std::vector<GridFunction> values;

    Control() = default;
    Control(double horizon_, std::vector<GridFunction> values_);

    static Control zeros(const GridPtr& grid, double horizon, int n_intervals);
    static Control constant(const GridPtr& grid, double horizon, int n_intervals, double c);

    int n_intervals() const { return static_cast<int>(values.size()); }
    double dt() const { return horizon / static_cast<double>(values.size()); }
    double midpoint(int m) const { return (m + 0.5) * dt(); }
    const GridPtr& grid() const { return values.front().grid; }
};

/// Positive time weight defining the control-space metric; evaluated at
/// interval midpoints only, so endpoint singularities are allowed.
using WeightCallback = std::function<double(double)>;

/// Pointwise bounds for admissible controls. May be unbounded on either side.
struct AdmissibleBox {
    double lower;
    double upper;

    AdmissibleBox(double lower_, double upper_);
    bool is_finite() const;
    double clamp(double x) const;
};

/// Reduced cost of a trajectory; implementations must be nonnegative.
/// (Lower semicontinuity of custom terms is a contract taken on trust.)
class CostTerm {
public:
    virtual ~CostTerm() = default;
    virtual double value(const StateTrajectory& traj) const = 0;
};

/// |y(T) - target|_H^2 (the default cost).
class TerminalTracking final : public CostTerm {
public:
    explicit TerminalTracking(GridFunction target);
    double value(const StateTrajectory& traj) const override;
    const GridFunction& target() const { return target_; }

private:
    GridFunction target_;
};

/// sum_k dt_k |y^k - target|_H^2: a time-distributed tracking variant.
class DistributedTracking final : public CostTerm {
public:
    explicit DistributedTracking(GridFunction target);
    double value(const StateTrajectory& traj) const override;

private:
    GridFunction target_;
};

enum class ControlMapKind { Identity, Smoothing };

/// State problem + control-to-forcing map + weighted norm + cost.
/// J(u) = cost(y(u)) + mu * |u|_U^2.
struct ControlProblem {
    StateSetup setup;
    ControlMapKind c_kind;
    int smoothing_halfwidth;
    WeightCallback omega;
    double mu;
    std::shared_ptr<const CostTerm> cost;
    AdmissibleBox box;
    int n_intervals;

    ControlProblem(StateSetup setup_, ControlMapKind c_kind_, int smoothing_halfwidth_,
                   WeightCallback omega_, double mu_, std::shared_ptr<const CostTerm> cost_,
                   AdmissibleBox box_, int n_intervals_);
};

/// |u|_U = sqrt(sum_m omega(t_mid) * dt * |u_m|_H^2). Throws if omega is not
/// positive at a midpoint.
double control_norm(const Control& u, const WeightCallback& omega);

/// Matching inner product: sum_m omega(t_mid) * dt * (a_m, b_m)_H.
double control_inner(const Control& a, const Control& b, const WeightCallback& omega);

/// The forcing t -> (Cu)(t). Identity picks the interval value; Smoothing
/// applies a renormalized spatial moving average of the declared half-width.
/// Intervals are right-closed, matching right-endpoint time sampling.
TimeCallback apply_C(const ControlProblem& problem, const Control& u);

Control project_admissible(const AdmissibleBox& box, const Control& u);

struct CostResult {
    double j = 0.0;
    StateTrajectory traj;
};

/// Solve the state with forcing extra = Cu and assemble the cost. u need not
/// be admissible.
CostResult evaluate_cost(const ControlProblem& problem, const Control& u);

struct DescentRecord {
    int iteration = 0;
    double j = 0.0;
    double pg_norm = 0.0;
    int armijo_steps = 0;
    double u_norm = 0.0;
};

struct OptResult {
    Control u_star;
    double j_star = 0.0;
    std::vector<DescentRecord> log;
    StateTrajectory state_star;
};

struct OptOptions {
    int max_iters = 200;
    double fd_step = 1e-6;
    double grad_tol = 1e-6;
    std::uint64_t seed = 0; // reserved; the method itself is deterministic
};

/// Projected gradient on the box with a forward-difference cost gradient
/// (step fd_step * (1 + |coordinate|)), steepest descent in the weighted
/// control metric, Armijo backtracking along the projected path. Terminates
/// when the projected-gradient norm falls below grad_tol, the iteration cap
/// is reached, or backtracking can no longer make progress. The logged cost
/// values are nonincreasing by construction.
OptResult optimize(const ControlProblem& problem, const OptOptions& opts = {});

} // namespace evi
