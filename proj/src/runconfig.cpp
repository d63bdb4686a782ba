#include "evi/runconfig.hpp"

#include <json.hpp>

#include <cmath>
#include <memory>
#include <numbers>
#include <set>

namespace evi {

namespace {

using nlohmann::json;

double parse_suffix_number(const std::string& name, std::size_t colon) {
    const std::string tail = name.substr(colon + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(tail, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric suffix in '" + name + "'");
    }
    if (used != tail.size() || !std::isfinite(value)) {
        throw std::invalid_argument("bad numeric suffix in '" + name + "'");
    }
    return value;
}

Command parse_command(const std::string& name) {
    if (name == "solve-state") return Command::SolveState;
    if (name == "optimize") return Command::Optimize;
    if (name == "check-estimates") return Command::CheckEstimates;
    if (name == "convergence") return Command::Convergence;
    throw ConfigError("unknown command '" + name + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& into) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        into = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for key '") + key + "'");
    }
}

} // namespace

RunConfig parse_config_json(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw ConfigError("config must be a flat JSON object");
    }

    static const std::set<std::string> known = {
        "command",    "p",         "set",        "set_lower",  "set_upper",
        "kernel",     "n_cells",   "n_steps",    "length",     "horizon",
        "prox_tol",   "y0",        "f",          "y_target",   "cost",
        "omega",      "c_op",      "mu",         "box_lower",  "box_upper",
        "n_intervals", "max_iters", "fd_step",   "grad_tol",   "halvings",
        "out_dir",    "seed"};
    for (const auto& item : obj.items()) {
        if (known.find(item.key()) == known.end()) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
        if (item.value().is_object() || item.value().is_array()) {
            throw ConfigError("config key '" + item.key() + "' must be a scalar");
        }
    }
    if (!obj.contains("command")) {
        throw ConfigError("config is missing required key 'command'");
    }

    RunConfig cfg;
    std::string command;
    read(obj, "command", command);
    cfg.command = parse_command(command);

    read(obj, "p", cfg.p);
    read(obj, "set", cfg.set_kind);
    read(obj, "set_lower", cfg.set_lower);
    read(obj, "set_upper", cfg.set_upper);
    read(obj, "kernel", cfg.kernel);
    read(obj, "n_cells", cfg.n_cells);
    read(obj, "n_steps", cfg.n_steps);
    read(obj, "length", cfg.length);
    read(obj, "horizon", cfg.horizon);
    read(obj, "prox_tol", cfg.prox_tol);
    read(obj, "y0", cfg.y0);
    read(obj, "f", cfg.f);
    read(obj, "y_target", cfg.y_target);
    read(obj, "cost", cfg.cost);
    read(obj, "omega", cfg.omega);
    read(obj, "c_op", cfg.c_op);
    read(obj, "mu", cfg.mu);
    read(obj, "box_lower", cfg.box_lower);
    read(obj, "box_upper", cfg.box_upper);
    read(obj, "n_intervals", cfg.n_intervals);
    read(obj, "max_iters", cfg.max_iters);
    read(obj, "fd_step", cfg.fd_step);
    read(obj, "grad_tol", cfg.grad_tol);
    read(obj, "halvings", cfg.halvings);
    read(obj, "out_dir", cfg.out_dir);
    read(obj, "seed", cfg.seed);
    return cfg;
}

std::function<double(double)> make_profile(const std::string& name, double length) {
    if (name == "zero") {
        return [](double) { return 0.0; };
    }
    if (name == "cospix") {
        return [length](double x) { return std::cos(std::numbers::pi * x / length); };
    }
    if (name == "bump") {
        return [length](double x) {
            const double s = 2.0 * x / length - 1.0;
            const double t = std::max(0.0, 1.0 - s * s);
            return t * t;
        };
    }
    const auto colon = name.find(':');
    if (colon != std::string::npos && name.substr(0, colon) == "const") {
        const double c = parse_suffix_number(name, colon);
        return [c](double) { return c; };
    }
    throw std::invalid_argument("unknown profile '" + name + "'");
}

WeightCallback make_weight(const std::string& name, double horizon) {
    if (name == "one") {
        return [](double) { return 1.0; };
    }
    if (name == "ramp") {
        return [](double t) { return t; };
    }
    if (name == "tent") {
        return [horizon](double t) { return std::min(t, horizon - t); };
    }
    if (name == "inv-sqrt") {
        return [horizon](double t) { return 1.0 / std::sqrt(t * (horizon - t)); };
    }
    throw std::invalid_argument("unknown weight '" + name + "'");
}

namespace {

ConstraintSet parse_set(const RunConfig& cfg) {
    if (cfg.set_kind == "full") {
        return ConstraintSet::full();
    }
    if (cfg.set_kind == "nonnegative") {
        return ConstraintSet::nonnegative();
    }
    if (cfg.set_kind == "box") {
        return ConstraintSet::box(cfg.set_lower, cfg.set_upper);
    }
    throw std::invalid_argument("unknown set kind '" + cfg.set_kind + "'");
}

} // namespace

StateSetup build_state_setup(const RunConfig& cfg) {
    const GridPtr grid = make_grid(cfg.n_cells, cfg.length);
    EnergyFunctional phi(cfg.p, parse_set(cfg), grid);
    MemoryOperator memory = make_named_kernel(cfg.kernel);
    const GridFunction y0 = GridFunction::sample(grid, make_profile(cfg.y0, cfg.length));
    const GridFunction f_values = GridFunction::sample(grid, make_profile(cfg.f, cfg.length));
    TimeCallback f = [f_values](double) { return f_values; };
    return StateSetup(std::move(phi), std::move(memory), std::move(f), y0, cfg.horizon,
                      cfg.n_steps, cfg.prox_tol);
}

ControlProblem build_control_problem(const RunConfig& cfg) {
    StateSetup setup = build_state_setup(cfg);
    const GridPtr grid = setup.phi.grid;

    ControlMapKind ck = ControlMapKind::Identity;
    int halfwidth = 0;
    if (cfg.c_op != "identity") {
        const auto colon = cfg.c_op.find(':');
        if (colon == std::string::npos || cfg.c_op.substr(0, colon) != "smoothing") {
            throw std::invalid_argument("unknown control map '" + cfg.c_op + "'");
        }
        const double w = parse_suffix_number(cfg.c_op, colon);
        if (w < 0.0 || w != std::floor(w)) {
            throw std::invalid_argument("smoothing half-width must be a nonnegative integer");
        }
        ck = ControlMapKind::Smoothing;
        halfwidth = static_cast<int>(w);
    }

    const GridFunction target =
        GridFunction::sample(grid, make_profile(cfg.y_target, cfg.length));
    std::shared_ptr<const CostTerm> cost;
    if (cfg.cost == "terminal") {
        cost = std::make_shared<TerminalTracking>(target);
    } else if (cfg.cost == "distributed") {
        cost = std::make_shared<DistributedTracking>(target);
    } else {
        throw std::invalid_argument("unknown cost '" + cfg.cost + "'");
    }

    return ControlProblem(std::move(setup), ck, halfwidth, make_weight(cfg.omega, cfg.horizon),
                          cfg.mu, std::move(cost), AdmissibleBox(cfg.box_lower, cfg.box_upper),
                          cfg.n_intervals);
}

} // namespace evi
