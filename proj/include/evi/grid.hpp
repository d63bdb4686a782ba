#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace evi {

/// Uniform 1-D grid on (0, length) with n_cells cells and n_cells+1 nodes.
///
/// The grid also fixes the discrete integration rule used everywhere else:
/// composite trapezoid weights (h/2 at the two boundary nodes, h inside).
class SpatialGrid {
public:
    int n_cells() const { return n_cells_; }
    double length() const { return length_; }
    double spacing() const { return spacing_; }
    std::size_t n_nodes() const { return nodes_.size(); }
    double node(std::size_t i) const { return nodes_[i]; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Trapezoid quadrature weight of node i.
    double quad_weight(std::size_t i) const {
        return (i == 0 || i + 1 == nodes_.size()) ? 0.5 * spacing_ : spacing_;
    }

private:
    friend std::shared_ptr<const SpatialGrid> make_grid(int, double);
    SpatialGrid(int n_cells, double length);

    int n_cells_;
    double length_;
    double spacing_;
    std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const SpatialGrid>;

/// Rejects n_cells < 2 and length <= 0.
GridPtr make_grid(int n_cells, double length);

/// True when the two grids are interchangeable (same object or same layout).
bool same_grid(const SpatialGrid& a, const SpatialGrid& b);

/// Nodal values of a spatial function. Values are plain doubles; the grid
/// reference supplies the quadrature rule for all norms.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v);

    static GridFunction zeros(const GridPtr& g);
    static GridFunction constant(const GridPtr& g, double c);
    /// Samples profile(x) at the nodes.
    static GridFunction sample(const GridPtr& g, const std::function<double(double)>& profile);

    std::size_t size() const { return values.size(); }
    bool all_finite() const;
};

/// L2-type scalar product by the composite trapezoid rule on nodal products.
double h_inner(const GridFunction& u, const GridFunction& v);

/// |u|_H = sqrt(h_inner(u, u)).
double h_norm(const GridFunction& u);

/// Sobolev-type norm: (sum_cells h*|Dv|^p + trapezoid(|v|^p))^(1/p) with the
/// per-cell forward difference Dv. Requires p >= 2.
double v_norm(const GridFunction& v, double p);

// Small nodal arithmetic helpers shared by the solver modules.
GridFunction lin_comb(double a, const GridFunction& x, double b, const GridFunction& y);
GridFunction scaled(double a, const GridFunction& x);

} // namespace evi
