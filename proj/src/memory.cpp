#include "evi/memory.hpp"

#include "evi/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace evi {

History::History(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) {
        throw std::invalid_argument("History: null grid");
    }
}

void History::push(double t, GridFunction state) {
    if (!std::isfinite(t)) {
        throw std::invalid_argument("History::push: non-finite time");
    }
    if (!times_.empty() && t <= times_.back()) {
        throw std::invalid_argument("History::push: times must be strictly increasing");
    }
    if (!state.grid || !same_grid(*state.grid, *grid_)) {
        throw std::invalid_argument("History::push: grid mismatch");
    }
    if (!state.all_finite()) {
        throw std::invalid_argument("History::push: non-finite state");
    }
    times_.push_back(t);
    states_.push_back(std::move(state));
}

MemoryOperator MemoryOperator::zero() {
    return MemoryOperator(MemoryKind::Zero, 0.0);
}

MemoryOperator MemoryOperator::kernel(ScalarKernel b, double bound) {
    if (!b) {
        throw std::invalid_argument("MemoryOperator::kernel: empty callback");
    }
    if (!(bound >= 0.0) || !std::isfinite(bound)) {
        throw std::invalid_argument("MemoryOperator::kernel: bound must be finite and >= 0");
    }
    MemoryOperator op(MemoryKind::Kernel, bound);
    op.b_ = std::move(b);
    return op;
}

MemoryOperator MemoryOperator::composed(OuterMap outer, double l1, InnerMap inner, double l2) {
    if (!outer || !inner) {
        throw std::invalid_argument("MemoryOperator::composed: empty callback");
    }
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(l1) || !std::isfinite(l2)) {
        throw std::invalid_argument("MemoryOperator::composed: constants must be finite and >= 0");
    }
    MemoryOperator op(MemoryKind::Composed, l1 * l2);
    op.outer_ = std::move(outer);
    op.inner_ = std::move(inner);
    return op;
}

double MemoryOperator::kernel_value(double t, double s) const {
    if (kind_ != MemoryKind::Kernel) {
        throw std::invalid_argument("kernel_value: operator is not of Kernel kind");
    }
    return b_(t, s);
}

GridFunction MemoryOperator::outer_value(double t, const GridFunction& v) const {
    if (kind_ != MemoryKind::Composed) {
        throw std::invalid_argument("outer_value: operator is not of Composed kind");
    }
    return outer_(t, v);
}

GridFunction MemoryOperator::inner_value(double t, double s, const GridFunction& w) const {
    if (kind_ != MemoryKind::Composed) {
        throw std::invalid_argument("inner_value: operator is not of Composed kind");
    }
    return inner_(t, s, w);
}

namespace {

void require_eval_time(const History& hist, double t_k) {
    if (!std::isfinite(t_k)) {
        throw std::invalid_argument("memory_apply: non-finite evaluation time");
    }
    if (!hist.empty() && t_k <= hist.times().back()) {
        throw std::invalid_argument("memory_apply: evaluation time must exceed the history");
    }
}

// Left-rectangle weight of history node j when integrating up to t_upper.
double rect_weight(const History& hist, std::size_t j, double t_upper) {
    const auto& t = hist.times();
    const double right = (j + 1 < t.size()) ? t[j + 1] : t_upper;
    return right - t[j];
}

} // namespace

GridFunction kernel_apply(const MemoryOperator& op, const History& hist, double t_k) {
    if (op.kind() != MemoryKind::Kernel) {
        throw std::invalid_argument("kernel_apply: operator is not of Kernel kind");
    }
    require_eval_time(hist, t_k);
    GridFunction out = GridFunction::zeros(hist.grid());
    for (std::size_t j = 0; j < hist.size(); ++j) {
        const double bval = op.kernel_value(t_k, hist.times()[j]);
        if (!std::isfinite(bval)) {
            throw std::invalid_argument("kernel_apply: kernel returned a non-finite value");
        }
        const double w = rect_weight(hist, j, t_k) * bval;
        const auto& y = hist.state(j).values;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] += w * y[i];
        }
    }
    return out;
}

GridFunction composed_apply(const MemoryOperator& op, const History& hist, double t_k) {
    if (op.kind() != MemoryKind::Composed) {
        throw std::invalid_argument("composed_apply: operator is not of Composed kind");
    }
    require_eval_time(hist, t_k);
    GridFunction inner_sum = GridFunction::zeros(hist.grid());
    for (std::size_t j = 0; j < hist.size(); ++j) {
        const GridFunction term = op.inner_value(t_k, hist.times()[j], hist.state(j));
        if (!term.grid || !same_grid(*term.grid, *hist.grid()) || !term.all_finite()) {
            throw std::invalid_argument("composed_apply: inner map returned an invalid value");
        }
        const double w = rect_weight(hist, j, t_k);
        for (std::size_t i = 0; i < inner_sum.values.size(); ++i) {
            inner_sum.values[i] += w * term.values[i];
        }
    }
    GridFunction out = op.outer_value(t_k, inner_sum);
    if (!out.grid || !same_grid(*out.grid, *hist.grid()) || !out.all_finite()) {
        throw std::invalid_argument("composed_apply: outer map returned an invalid value");
    }
    return out;
}

GridFunction memory_apply(const MemoryOperator& op, const History& hist, double t_k) {
    switch (op.kind()) {
    case MemoryKind::Zero:
        require_eval_time(hist, t_k);
        return GridFunction::zeros(hist.grid());
    case MemoryKind::Kernel:
        return kernel_apply(op, hist, t_k);
    case MemoryKind::Composed:
        return composed_apply(op, hist, t_k);
    }
    throw std::logic_error("memory_apply: unknown kind");
}

double lipschitz_bound_check(const MemoryOperator& op, const History& hist1,
                             const History& hist2) {
    if (hist1.size() != hist2.size() || hist1.times() != hist2.times()) {
        throw std::invalid_argument("lipschitz_bound_check: history meshes differ");
    }
    if (!same_grid(*hist1.grid(), *hist2.grid())) {
        throw std::invalid_argument("lipschitz_bound_check: history grids differ");
    }
    if (hist1.size() < 2) {
        throw std::invalid_argument("lipschitz_bound_check: need at least two history points");
    }
    const double L = op.lipschitz_bound();
    double slack = std::numeric_limits<double>::infinity();
    double increment_sum = 0.0;
    for (std::size_t k = 1; k < hist1.size(); ++k) {
        const double t_k = hist1.times()[k];
        // prefix of length k
        History pre1(hist1.grid());
        History pre2(hist2.grid());
        for (std::size_t j = 0; j < k; ++j) {
            pre1.push(hist1.times()[j], hist1.state(j));
            pre2.push(hist2.times()[j], hist2.state(j));
        }
        const GridFunction b1 = memory_apply(op, pre1, t_k);
        const GridFunction b2 = memory_apply(op, pre2, t_k);
        const double lhs = h_norm(lin_comb(1.0, b1, -1.0, b2));
        const double w = hist1.times()[k] - hist1.times()[k - 1];
        increment_sum += w * h_norm(lin_comb(1.0, hist1.state(k - 1), -1.0, hist2.state(k - 1)));
        slack = std::min(slack, L * increment_sum - lhs);
    }
    return slack;
}

MemoryOperator make_named_kernel(const std::string& name) {
    if (name == "zero") {
        return MemoryOperator::zero();
    }
    if (name == "sin-ts") {
        return MemoryOperator::kernel([](double t, double s) { return std::sin(t * s); }, 1.0);
    }
    const auto colon = name.find(':');
    if (colon != std::string::npos) {
        const std::string head = name.substr(0, colon);
        const std::string tail = name.substr(colon + 1);
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(tail, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("make_named_kernel: bad numeric suffix in '" + name + "'");
        }
        if (used != tail.size() || !std::isfinite(value)) {
            throw std::invalid_argument("make_named_kernel: bad numeric suffix in '" + name + "'");
        }
        if (head == "constant") {
            return MemoryOperator::kernel([value](double, double) { return value; },
                                          std::abs(value));
        }
        if (head == "exp-decay") {
            if (value < 0.0) {
                throw std::invalid_argument("make_named_kernel: exp-decay rate must be >= 0");
            }
            return MemoryOperator::kernel(
                [value](double t, double s) { return std::exp(-value * (t - s)); }, 1.0);
        }
    }
    throw std::invalid_argument("make_named_kernel: unknown kernel '" + name + "'");
}

double declared_bound_excess(const MemoryOperator& op, double horizon, int n_samples,
                             std::uint64_t seed) {
    if (op.kind() != MemoryKind::Kernel) {
        return 0.0;
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("declared_bound_excess: horizon must be positive");
    }
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double t = rng.uniform(0.0, horizon);
        const double s = rng.uniform(0.0, t);
        worst = std::max(worst, std::abs(op.kernel_value(t, s)));
    }
    return std::max(0.0, worst - op.lipschitz_bound());
}

} // namespace evi
