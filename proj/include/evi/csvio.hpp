#pragma once

#include "evi/control.hpp"
#include "evi/state.hpp"

#include <string>
#include <vector>

namespace evi::csv {

/// Shortest round-trip decimal ("%.17g"); used for every floating-point cell.
std::string format_double(double x);

/// Header t,x0..xn; one row per mesh time.
std::string trajectory_csv(const StateTrajectory& traj);

struct DiagnosticsRow {
    int step = 0;
    double y_h_norm = 0.0;
    double phi = 0.0;
    double dy_h_norm = 0.0;
    double vi_gap = 0.0;
    double subgrad_violation = 0.0;
};

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows);

struct EstimateRow {
    int n_steps = 0;
    double tau = 0.0;
    double lhs = 0.0;
    double rhs_core = 0.0;
    double ratio = 0.0;
};

std::string estimate_report_csv(const std::vector<EstimateRow>& rows);

/// Columns n_steps,tau,error,rate; the first rate is "nan" and exact rows
/// print "exact".
std::string rates_csv(const ConvergenceResult& result);

/// Columns x,value, one row per node.
std::string grid_function_csv(const GridFunction& v);

/// Inverse of grid_function_csv on the given grid.
GridFunction parse_grid_function_csv(const std::string& text, const GridPtr& grid);

/// Columns interval_index,x,value in interval-major node order.
std::string control_csv(const Control& u);

/// Inverse of control_csv; expects the exact writer layout on the given grid.
Control parse_control_csv(const std::string& text, const GridPtr& grid, double horizon);

std::string optimizer_log_csv(const std::vector<DescentRecord>& log);

} // namespace evi::csv
