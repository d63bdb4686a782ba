#pragma once

#include "evi/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace evi {

enum class MemoryKind { Zero, Kernel, Composed };

/// Scalar kernel b(t, s), evaluated for 0 <= s < t.
using ScalarKernel = std::function<double(double, double)>;
/// Outer map (t, v) of the composed operator; Lipschitz in v with B(t, 0) = 0.
using OuterMap = std::function<GridFunction(double, const GridFunction&)>;
/// Inner integrand (t, s, w); Lipschitz in w with b(t, s, 0) = 0.
using InnerMap = std::function<GridFunction(double, double, const GridFunction&)>;

/// Prefix of a state trajectory: strictly increasing times with one finite
/// GridFunction per time, all on one grid.
class History {
public:
    explicit History(GridPtr grid);

    void push(double t, GridFunction state);

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    const std::vector<double>& times() const { return times_; }
    const GridFunction& state(std::size_t j) const { return states_[j]; }
    const GridPtr& grid() const { return grid_; }

private:
    GridPtr grid_;
    std::vector<double> times_;
    std::vector<GridFunction> states_;
};

/// History-dependent (Volterra type) operator. Output at time t depends on
/// states strictly before t through the left-rectangle rule on the history
/// mesh; increments obey |B(w1)(t) - B(w2)(t)|_H <= L * sum_j w_j |w1_j - w2_j|_H.
class MemoryOperator {
public:
    static MemoryOperator zero();
    /// Kernel operator with integrand b(t,s) * w(s) and declared bound
    /// L >= sup |b|. The bound is taken on trust here; declared_bound_excess
    /// cross-checks it by sampling.
    static MemoryOperator kernel(ScalarKernel b, double bound);
    /// Composed operator t -> Bmap(t, integral of bmap(t, s, w(s)) ds) with
    /// per-map Lipschitz constants; the combined bound is l1 * l2.
    static MemoryOperator composed(OuterMap outer, double l1, InnerMap inner, double l2);

    MemoryKind kind() const { return kind_; }
    /// Declared history-increment bound L (0 / sup|b| / l1*l2).
    double lipschitz_bound() const { return bound_; }

    double kernel_value(double t, double s) const;
    GridFunction outer_value(double t, const GridFunction& v) const;
    GridFunction inner_value(double t, double s, const GridFunction& w) const;

private:
    MemoryOperator(MemoryKind k, double bound) : kind_(k), bound_(bound) {}

    MemoryKind kind_;
    double bound_;
    ScalarKernel b_;
    OuterMap outer_;
    InnerMap inner_;
};

/// Evaluate the operator at t_k > last history time (any kind). Empty history
/// gives zero.
GridFunction memory_apply(const MemoryOperator& op, const History& hist, double t_k);

/// Kernel case: sum_{j<k} w_j * b(t_k, t_j) * states[j], nodewise.
GridFunction kernel_apply(const MemoryOperator& op, const History& hist, double t_k);

/// Composed case: outer(t_k, sum_{j<k} w_j * inner(t_k, t_j, states[j])).
GridFunction composed_apply(const MemoryOperator& op, const History& hist, double t_k);

/// Min over interior mesh points t_k of
///   L * sum_{j<k} w_j |w1_j - w2_j|_H  -  |B(w1)(t_k) - B(w2)(t_k)|_H.
/// Nonnegative (up to rounding) for operators honouring their declared bound.
double lipschitz_bound_check(const MemoryOperator& op, const History& hist1,
                             const History& hist2);

/// Named kernel catalog: "zero", "constant:<c>", "exp-decay:<lambda>"
/// (b = exp(-lambda (t-s))), "sin-ts" (b = sin(t s)).
MemoryOperator make_named_kernel(const std::string& name);

/// Sampling cross-check of a Kernel operator's declared bound: returns
/// max(0, max sampled |b(t,s)| - L) over seeded draws with 0 <= s <= t <= horizon.
double declared_bound_excess(const MemoryOperator& op, double horizon, int n_samples,
                             std::uint64_t seed);

} // namespace evi
