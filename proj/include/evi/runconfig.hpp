#pragma once

#include "evi/control.hpp"
#include "evi/state.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace evi {

enum class Command { SolveState, Optimize, CheckEstimates, Convergence };

/// Flat key-value run description; every field has a default so a config file
/// only states what it changes. Unknown keys are rejected.
struct RunConfig {
    Command command = Command::SolveState;

    double p = 2.0;
    std::string set_kind = "full"; // "full" | "nonnegative" | "box"
    double set_lower = 0.0;
    double set_upper = 0.0;
    std::string kernel = "zero";
    int n_cells = 64;
    int n_steps = 256;
    double length = 1.0;
    double horizon = 1.0;
    double prox_tol = 1e-9;
    std::string y0 = "zero";
    std::string f = "zero";

    std::string y_target = "zero";
    std::string cost = "terminal"; // "terminal" | "distributed"
    std::string omega = "one";
    std::string c_op = "identity"; // "identity" | "smoothing:<halfwidth>"
    double mu = 0.1;
    double box_lower = -1.0;
    double box_upper = 1.0;
    int n_intervals = 4;
    int max_iters = 200;
    double fd_step = 1e-6;
    double grad_tol = 1e-6;

    int halvings = 4;

    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict parse of a flat JSON object; throws ConfigError on unknown keys,
/// type mismatches or malformed text.
RunConfig parse_config_json(const std::string& text);

/// Named spatial profiles: "zero", "cospix" (cos(pi x / length)),
/// "bump" (quartic bump), "const:<c>".
std::function<double(double)> make_profile(const std::string& name, double length);

/// Named time weights on (0, horizon): "one", "ramp" (t),
/// "tent" (min(t, horizon - t)), "inv-sqrt" (1/sqrt(t (horizon - t))).
WeightCallback make_weight(const std::string& name, double horizon);

/// Instantiate the state problem a config describes. Throws on any violated
/// module precondition; nothing is solved.
StateSetup build_state_setup(const RunConfig& cfg);

/// Instantiate the control problem (state setup plus cost, weights, box).
ControlProblem build_control_problem(const RunConfig& cfg);

} // namespace evi
