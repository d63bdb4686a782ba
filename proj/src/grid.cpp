#include "evi/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace evi {

SpatialGrid::SpatialGrid(int n_cells, double length)
    : n_cells_(n_cells), length_(length), spacing_(length / n_cells) {
    nodes_.resize(static_cast<std::size_t>(n_cells) + 1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i] = static_cast<double>(i) * spacing_;
    }
    nodes_.back() = length; // exact right endpoint
}

GridPtr make_grid(int n_cells, double length) {
    if (n_cells < 2) {
        throw std::invalid_argument("make_grid: n_cells must be at least 2");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw std::invalid_argument("make_grid: length must be positive and finite");
    }
    return GridPtr(new SpatialGrid(n_cells, length));
}

bool same_grid(const SpatialGrid& a, const SpatialGrid& b) {
    if (&a == &b) return true;
    return a.n_cells() == b.n_cells() && a.length() == b.length();
}

GridFunction::GridFunction(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (!grid) {
        throw std::invalid_argument("GridFunction: null grid");
    }
    if (values.size() != grid->n_nodes()) {
        throw std::invalid_argument("GridFunction: value count does not match node count");
    }
}

GridFunction GridFunction::zeros(const GridPtr& g) {
    return GridFunction(g, std::vector<double>(g->n_nodes(), 0.0));
}

GridFunction GridFunction::constant(const GridPtr& g, double c) {
    return GridFunction(g, std::vector<double>(g->n_nodes(), c));
}

GridFunction GridFunction::sample(const GridPtr& g, const std::function<double(double)>& profile) {
    std::vector<double> v(g->n_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = profile(g->node(i));
    }
    return GridFunction(g, std::move(v));
}

bool GridFunction::all_finite() const {
    for (double x : values) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

namespace {

void require_same_grid(const GridFunction& u, const GridFunction& v, const char* what) {
    if (!u.grid || !v.grid || !same_grid(*u.grid, *v.grid)) {
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
    }
}

} // namespace

double h_inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v, "h_inner");
    const auto& g = *u.grid;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        acc += g.quad_weight(i) * u.values[i] * v.values[i];
    }
    return acc;
}

double h_norm(const GridFunction& u) {
    return std::sqrt(h_inner(u, u));
}

double v_norm(const GridFunction& v, double p) {
    if (!(p >= 2.0)) {
        throw std::invalid_argument("v_norm: p must be >= 2");
    }
    const auto& g = *v.grid;
    const double h = g.spacing();
    double grad_term = 0.0;
    for (int c = 0; c < g.n_cells(); ++c) {
        const double dv = (v.values[c + 1] - v.values[c]) / h;
        grad_term += h * std::pow(std::abs(dv), p);
    }
    double value_term = 0.0;
    for (std::size_t i = 0; i < g.n_nodes(); ++i) {
        value_term += g.quad_weight(i) * std::pow(std::abs(v.values[i]), p);
    }
    return std::pow(grad_term + value_term, 1.0 / p);
}

GridFunction lin_comb(double a, const GridFunction& x, double b, const GridFunction& y) {
    require_same_grid(x, y, "lin_comb");
    GridFunction out = GridFunction::zeros(x.grid);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = a * x.values[i] + b * y.values[i];
    }
    return out;
}

GridFunction scaled(double a, const GridFunction& x) {
    GridFunction out = x;
    for (double& v : out.values) v *= a;
    return out;
}

} // namespace evi
