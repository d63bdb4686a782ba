#include "evi/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace evi::csv {

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trajectory_csv(const StateTrajectory& traj) {
    std::string out = "t";
    const std::size_t n = traj.states.front().values.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += ",x" + std::to_string(i);
    }
    out += "\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out += format_double(traj.times[k]);
        for (double v : traj.states[k].values) {
            out += ",";
            out += format_double(v);
        }
        out += "\n";
    }
    return out;
}

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
    std::string out = "step,y_h_norm,phi,dy_h_norm,vi_gap,subgrad_violation\n";
    for (const auto& r : rows) {
        out += std::to_string(r.step);
        out += "," + format_double(r.y_h_norm);
        out += "," + format_double(r.phi);
        out += "," + format_double(r.dy_h_norm);
        out += "," + format_double(r.vi_gap);
        out += "," + format_double(r.subgrad_violation);
        out += "\n";
    }
    return out;
}

std::string estimate_report_csv(const std::vector<EstimateRow>& rows) {
    std::string out = "n_steps,tau,lhs,rhs_core,ratio\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n_steps);
        out += "," + format_double(r.tau);
        out += "," + format_double(r.lhs);
        out += "," + format_double(r.rhs_core);
        out += "," + format_double(r.ratio);
        out += "\n";
    }
    return out;
}

std::string rates_csv(const ConvergenceResult& result) {
    std::string out = "n_steps,tau,error,rate\n";
    for (std::size_t i = 0; i < result.n_steps.size(); ++i) {
        out += std::to_string(result.n_steps[i]);
        out += "," + format_double(result.taus[i]);
        out += "," + format_double(result.errors[i]);
        out += ",";
        if (i == 0) {
            out += "nan";
        } else if (result.exact[i]) {
            out += "exact";
        } else {
            out += format_double(result.rates[i]);
        }
        out += "\n";
    }
    return out;
}

std::string grid_function_csv(const GridFunction& v) {
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        out += format_double(v.grid->node(i));
        out += "," + format_double(v.values[i]);
        out += "\n";
    }
    return out;
}

GridFunction parse_grid_function_csv(const std::string& text, const GridPtr& grid) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "x,value") {
        throw std::invalid_argument("parse_grid_function_csv: bad header");
    }
    GridFunction v = GridFunction::zeros(grid);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        double x = 0.0;
        double value = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf", &x, &value) != 2) {
            throw std::invalid_argument("parse_grid_function_csv: bad row '" + line + "'");
        }
        if (row >= v.values.size()
            || std::abs(x - grid->node(row)) > 1e-9 * (1.0 + grid->length())) {
            throw std::invalid_argument("parse_grid_function_csv: node mismatch");
        }
        v.values[row] = value;
        ++row;
    }
    if (row != v.values.size()) {
        throw std::invalid_argument("parse_grid_function_csv: truncated data");
    }
    return v;
}

std::string control_csv(const Control& u) {
    std::string out = "interval_index,x,value\n";
    for (int m = 0; m < u.n_intervals(); ++m) {
        const auto& v = u.values[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < v.values.size(); ++i) {
            out += std::to_string(m);
            out += "," + format_double(u.grid()->node(i));
            out += "," + format_double(v.values[i]);
            out += "\n";
        }
    }
    return out;
}

Control parse_control_csv(const std::string& text, const GridPtr& grid, double horizon) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "interval_index,x,value") {
        throw std::invalid_argument("parse_control_csv: bad header");
    }
    std::vector<GridFunction> values;
    const std::size_t n = grid->n_nodes();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        int m = 0;
        double x = 0.0;
        double value = 0.0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &m, &x, &value) != 3) {
            throw std::invalid_argument("parse_control_csv: bad row '" + line + "'");
        }
        const std::size_t expect_m = row / n;
        const std::size_t expect_i = row % n;
        if (m < 0 || static_cast<std::size_t>(m) != expect_m) {
            throw std::invalid_argument("parse_control_csv: interval order mismatch");
        }
        if (std::abs(x - grid->node(expect_i)) > 1e-9 * (1.0 + grid->length())) {
            throw std::invalid_argument("parse_control_csv: node mismatch");
        }
        if (expect_i == 0) {
            values.push_back(GridFunction::zeros(grid));
        }
        values.back().values[expect_i] = value;
        ++row;
    }
    if (values.empty() || row % n != 0) {
        throw std::invalid_argument("parse_control_csv: truncated data");
    }
    return Control(horizon, std::move(values));
}

std::string optimizer_log_csv(const std::vector<DescentRecord>& log) {
    std::string out = "iter,J,pg_norm,armijo_steps\n";
    for (const auto& r : log) {
        out += std::to_string(r.iteration);
        out += "," + format_double(r.j);
        out += "," + format_double(r.pg_norm);
        out += "," + std::to_string(r.armijo_steps);
        out += "\n";
    }
    return out;
}

} // namespace evi::csv
