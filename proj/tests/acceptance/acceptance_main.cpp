// End-to-end acceptance harness. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero when any criterion fails. Tolerances are
// pinned here, next to the checks they gate.

#include "evi/control.hpp"
#include "evi/convex.hpp"
#include "evi/csvio.hpp"
#include "evi/memory.hpp"
#include "evi/oracle.hpp"
#include "evi/rng.hpp"
#include "evi/run.hpp"
#include "evi/runconfig.hpp"
#include "evi/state.hpp"

#include "../support/reference_heat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using namespace evi;

namespace {

int failures = 0;

void run_criterion(int number, const std::string& title,
                   const std::function<std::string()>& body) {
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
        std::printf("PASS criterion %d: %s\n", number, title.c_str());
    } else {
        std::printf("FAIL criterion %d: %s [%s]\n", number, title.c_str(), detail.c_str());
        ++failures;
    }
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

GridFunction zero_of(const GridPtr& g) { return GridFunction::zeros(g); }

TimeCallback constant_forcing(const GridFunction& v) {
    return [v](double) { return v; };
}

TimeCallback zero_forcing(const GridPtr& g) {
    return constant_forcing(GridFunction::zeros(g));
}

GridFunction cos_profile(const GridPtr& g) {
    return GridFunction::sample(
        g, [&](double x) { return std::cos(std::numbers::pi * x / g->length()); });
}

GridFunction bump_profile(const GridPtr& g, double amp) {
    return GridFunction::sample(g, [&](double x) {
        const double s = 2.0 * x / g->length() - 1.0;
        const double t = std::max(0.0, 1.0 - s * s);
        return amp * t * t;
    });
}

GridFunction random_fn(const GridPtr& g, Rng& rng, double amp) {
    GridFunction f = GridFunction::zeros(g);
    for (auto& v : f.values) v = rng.uniform(-amp, amp);
    return f;
}

double diff_h_norm(const GridFunction& a, const GridFunction& b) {
    return h_norm(lin_comb(1.0, a, -1.0, b));
}

// Unconstrained quadratic decay instance: p = 2, no constraint, no memory,
// cosine start, short horizon. The dense LU reference reproduces it.
StateSetup heat_instance(int n_cells, int n_steps) {
    const GridPtr g = make_grid(n_cells, 1.0);
    EnergyFunctional phi(2.0, ConstraintSet::full(), g);
    return StateSetup(std::move(phi), MemoryOperator::zero(), zero_forcing(g),
                      cos_profile(g), 0.1, n_steps);
}

// Constant downward push against the nonnegativity constraint from rest.
StateSetup obstacle_instance(int n_steps) {
    const GridPtr g = make_grid(64, 1.0);
    EnergyFunctional phi(2.0, ConstraintSet::nonnegative(), g);
    return StateSetup(std::move(phi), MemoryOperator::zero(),
                      constant_forcing(GridFunction::constant(g, -1.0)), zero_of(g), 1.0,
                      n_steps);
}

// Constrained run with an active memory term and nontrivial start.
StateSetup obstacle_memory_instance(int n_steps) {
    const GridPtr g = make_grid(24, 1.0);
    EnergyFunctional phi(2.0, ConstraintSet::nonnegative(), g);
    return StateSetup(std::move(phi), make_named_kernel("exp-decay:1"),
                      constant_forcing(GridFunction::constant(g, -0.5)),
                      bump_profile(g, 1.0), 0.5, n_steps);
}

// Shared small control instance: 16 cells, 16 steps over T = 1, four control
// intervals, identity control map, unit time weight, terminal tracking of a
// half-height bump from zero data.
ControlProblem tiny_problem(double mu) {
    const GridPtr g = make_grid(16, 1.0);
    EnergyFunctional phi(2.0, ConstraintSet::full(), g);
    StateSetup setup(std::move(phi), MemoryOperator::zero(), zero_forcing(g), zero_of(g),
                     1.0, 16);
    auto cost = std::make_shared<TerminalTracking>(bump_profile(g, 0.5));
    return ControlProblem(std::move(setup), ControlMapKind::Identity, 0,
                          [](double) { return 1.0; }, mu, std::move(cost),
                          AdmissibleBox(-1.0, 1.0), 4);
}

std::string criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const GridPtr g = make_grid(64, 1.0);
    for (const char* kernel : {"zero", "constant:0.7", "exp-decay:2", "sin-ts"}) {
        EnergyFunctional phi(2.0, ConstraintSet::full(), g);
        StateSetup setup(std::move(phi), make_named_kernel(kernel), zero_forcing(g),
                         zero_of(g), 1.0, 256);
        const StateTrajectory traj = solve_state(setup);
        for (const auto& y : traj.states) {
            for (double v : y.values) {
                if (v != 0.0) return std::string("nonzero state with kernel ") + kernel;
            }
        }
        for (const auto& gs : traj.subgradients) {
            for (double v : gs.values) {
                if (v != 0.0) return std::string("nonzero subgradient with kernel ") + kernel;
            }
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 1.0) return "runtime " + fmt(dt) + " s exceeds 1 s";
    return "";
}

std::string criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();

    const int n_steps = 128;
    const StateSetup setup = heat_instance(64, n_steps);
    const double tau = setup.tau();
    const StateTrajectory traj = solve_state(setup);

    const int refine = 64;
    std::vector<double> f0(setup.y0.size(), 0.0);
    const auto dense = refheat::evolve(setup.y0.values, 1.0, setup.horizon, n_steps, refine, f0);
    double worst = 0.0;
    for (int k = 0; k <= n_steps; ++k) {
        const GridFunction ref(setup.phi.grid, dense[static_cast<std::size_t>(k) * refine]);
        worst = std::max(worst, diff_h_norm(traj.states[static_cast<std::size_t>(k)], ref));
    }
    if (worst > 5.0 * tau) {
        return "max deviation " + fmt(worst) + " > 5*tau = " + fmt(5.0 * tau);
    }

    const std::vector<int> counts = {80, 160, 320, 640, 1280};
    const StateSetup base = heat_instance(64, counts.front());
    const StateTrajectory reference = solve_state(base.with_n_steps(16 * counts.back()));
    const ConvergenceResult conv = convergence_order(base, counts, reference);
    for (std::size_t i = 1; i < conv.rates.size(); ++i) {
        if (!(conv.rates[i] >= 0.8 && conv.rates[i] <= 1.2)) {
            return "rate " + fmt(conv.rates[i]) + " outside [0.8, 1.2]";
        }
    }

    const double dt = seconds_since(t0);
    if (dt >= 30.0) return "runtime " + fmt(dt) + " s exceeds 30 s";
    return "";
}

std::string criterion_3() {
    Rng rng(2026);
    const GridPtr g = make_grid(10, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const double p = (rep % 2 == 0) ? 2.0 : 3.0;
        ConstraintSet set = ConstraintSet::full();
        if (rep % 3 == 1) set = ConstraintSet::nonnegative();
        if (rep % 3 == 2) set = ConstraintSet::box(-0.5, 1.0);
        EnergyFunctional phi(p, set, g);
        const double tau = rng.uniform(0.02, 0.25);
        const GridFunction z1 = random_fn(g, rng, 1.0);
        const GridFunction z2 = random_fn(g, rng, 1.0);
        const ProxResult r1 = prox_step(phi, z1, tau, 1e-9);
        const ProxResult r2 = prox_step(phi, z2, tau, 1e-9);
        const double dy = diff_h_norm(r1.y, r2.y);
        const double dz = diff_h_norm(z1, z2);
        if (dy > dz + 1e-8) {
            return "pair " + std::to_string(rep) + " expansive: " + fmt(dy) + " > " + fmt(dz);
        }
        const double pairing =
            h_inner(lin_comb(1.0, r1.g, -1.0, r2.g), lin_comb(1.0, r1.y, -1.0, r2.y));
        if (pairing < -1e-8) {
            return "pair " + std::to_string(rep) + " monotonicity " + fmt(pairing);
        }
    }
    return "";
}

std::string criterion_4() {
    double worst = 0.0;

    const GridPtr g64 = make_grid(64, 1.0);
    for (const char* kernel : {"zero", "constant:0.7", "exp-decay:2", "sin-ts"}) {
        EnergyFunctional phi(2.0, ConstraintSet::full(), g64);
        StateSetup setup(std::move(phi), make_named_kernel(kernel), zero_forcing(g64),
                         zero_of(g64), 1.0, 256);
        worst = std::max(worst, inclusion_residual_check(solve_state(setup), setup));
    }

    for (int n_steps : {80, 128, 160, 320, 640, 1280, 20480}) {
        const StateSetup setup = heat_instance(64, n_steps);
        worst = std::max(worst, inclusion_residual_check(solve_state(setup), setup));
    }

    Rng rng(515);
    const GridPtr g = make_grid(16, 1.0);
    const char* kernels[] = {"constant:0.6", "exp-decay:1", "sin-ts", "zero"};
    for (int rep = 0; rep < 20; ++rep) {
        const double p = (rep % 2 == 0) ? 2.0 : 3.0;
        ConstraintSet set = ConstraintSet::full();
        if (rep % 3 == 1) set = ConstraintSet::nonnegative();
        if (rep % 3 == 2) set = ConstraintSet::box(-0.5, 1.0);
        EnergyFunctional phi(p, set, g);
        const GridFunction y0 =
            sample_feasible(set, g, 1, 7000 + static_cast<std::uint64_t>(rep)).front();
        const GridFunction f = random_fn(g, rng, 0.5);
        StateSetup setup(std::move(phi), make_named_kernel(kernels[rep % 4]),
                         constant_forcing(f), y0, 1.0, 32, 1e-9);
        worst = std::max(worst, inclusion_residual_check(solve_state(setup), setup));
    }

    if (worst > 1e-6) return "worst inclusion residual " + fmt(worst) + " > 1e-6";
    return "";
}

std::string criterion_5() {
    const GridPtr g = make_grid(12, 1.0);
    std::vector<std::pair<std::string, MemoryOperator>> ops;
    for (const char* name : {"zero", "constant:0.7", "exp-decay:2", "sin-ts"}) {
        ops.emplace_back(name, make_named_kernel(name));
    }
    {
        // Sinusoidal outer map (slope bound 1) around a damped-kernel inner
        // integral (slope bound 0.8); combined bound is the product.
        OuterMap outer = [](double, const GridFunction& v) {
            GridFunction out = v;
            for (auto& x : out.values) x = std::sin(x);
            return out;
        };
        InnerMap inner = [](double, double, const GridFunction& w) {
            return scaled(0.8, w);
        };
        ops.emplace_back("composed", MemoryOperator::composed(outer, 1.0, inner, 0.8));
    }

    Rng rng(643);
    for (const auto& [name, op] : ops) {
        for (int rep = 0; rep < 100; ++rep) {
            const double tau = rng.uniform(0.02, 0.1);
            const int len = static_cast<int>(rng.uniform_int(5, 10));
            History h1(g);
            History h2(g);
            for (int j = 0; j < len; ++j) {
                const double t = tau * j;
                h1.push(t, random_fn(g, rng, 1.0));
                h2.push(t, random_fn(g, rng, 1.0));
            }
            const double slack = lipschitz_bound_check(op, h1, h2);
            if (slack < -1e-10) {
                return name + " pair " + std::to_string(rep) + " slack " + fmt(slack);
            }
        }
    }

    // Damped kernel on a frozen unit history has a closed-form integral; the
    // left-rectangle error must be first order in the history step.
    const MemoryOperator decay = make_named_kernel("exp-decay:1");
    const double exact = 1.0 - std::exp(-1.0);
    std::vector<double> errs;
    for (int n : {100, 200, 400}) {
        const double tau = 1.0 / n;
        History hist(g);
        for (int j = 0; j < n; ++j) hist.push(tau * j, GridFunction::constant(g, 1.0));
        const GridFunction v = memory_apply(decay, hist, 1.0);
        const double err = std::abs(v.values[3] - exact);
        if (err > 2.0 * tau) {
            return "quadrature error " + fmt(err) + " > 2*tau at n = " + std::to_string(n);
        }
        errs.push_back(err);
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i - 1];
        if (!(ratio > 0.3 && ratio < 0.7)) {
            return "quadrature error ratio " + fmt(ratio) + " not near one half";
        }
    }
    return "";
}

std::string criterion_6() {
    const auto family = [](const std::function<StateSetup(int)>& instance,
                           const std::string& label) -> std::string {
        double lo = 0.0;
        double hi = 0.0;
        bool first = true;
        for (int n_steps : {80, 160, 320, 640, 1280}) {
            const StateSetup setup = instance(n_steps);
            const EstimateReport rep = energy_estimate_report(solve_state(setup), setup);
            if (!std::isfinite(rep.ratio)) {
                return label + ": ratio not finite at " + std::to_string(n_steps) + " steps";
            }
            lo = first ? rep.ratio : std::min(lo, rep.ratio);
            hi = first ? rep.ratio : std::max(hi, rep.ratio);
            first = false;
        }
        if (hi > 2.0 * lo) {
            return label + ": ratio spread " + fmt(lo) + " .. " + fmt(hi)
                + " exceeds factor 2";
        }
        return "";
    };
    std::string r = family([](int n) { return heat_instance(64, n); }, "cosine instance");
    if (!r.empty()) return r;
    return family([](int n) { return obstacle_memory_instance(n); },
                  "obstacle-plus-memory instance");
}

std::string criterion_7() {
    const StateSetup setup = obstacle_instance(256);
    const StateTrajectory traj = solve_state(setup);
    for (const auto& y : traj.states) {
        for (double v : y.values) {
            if (std::abs(v) > kFeasibilityTol) {
                return "state leaves the constraint by " + fmt(std::abs(v));
            }
        }
    }
    const double gap = vi_residual_check(traj, setup, {}, 100, 909);
    if (gap < -1e-6) return "inequality gap " + fmt(gap) + " below -1e-6";
    return "";
}

std::string criterion_8() {
    SolveOptions warm;
    warm.start = ProxStart::Warm;
    SolveOptions cold;
    cold.start = ProxStart::Zero;

    const auto compare = [&](const StateSetup& setup, const std::string& label) -> std::string {
        const StateTrajectory a = solve_state(setup, {}, warm);
        const StateTrajectory b = solve_state(setup, {}, cold);
        double worst = 0.0;
        for (std::size_t k = 0; k < a.states.size(); ++k) {
            worst = std::max(worst, diff_h_norm(a.states[k], b.states[k]));
        }
        if (worst > 10.0 * setup.prox_tol) {
            return label + ": start sensitivity " + fmt(worst) + " > "
                + fmt(10.0 * setup.prox_tol);
        }
        return "";
    };

    std::string r = compare(heat_instance(64, 128), "cosine instance");
    if (!r.empty()) return r;
    return compare(obstacle_instance(256), "obstacle instance");
}

std::string criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    const ControlProblem problem = tiny_problem(0.1);
    const OptResult res = optimize(problem);

    for (std::size_t i = 1; i < res.log.size(); ++i) {
        if (res.log[i].j > res.log[i - 1].j) {
            return "cost increases at log row " + std::to_string(i);
        }
    }
    for (const auto& rec : res.log) {
        if (rec.u_norm * rec.u_norm > rec.j / problem.mu + 1e-9) {
            return "norm bound violated at iteration " + std::to_string(rec.iteration);
        }
    }

    const OracleControlResult oracle = oracle_best_control(problem, 10000, 2026);
    if (res.j_star > oracle.j_best + 1e-6) {
        return "descent cost " + fmt(res.j_star) + " > oracle " + fmt(oracle.j_best)
            + " + 1e-6";
    }

    const double dt = seconds_since(t0);
    if (dt >= 300.0) return "runtime " + fmt(dt) + " s exceeds 5 min";
    return "";
}

std::string criterion_10() {
    OptOptions opts;
    opts.max_iters = 300;
    opts.grad_tol = 1e-7;

    std::vector<double> norms;
    for (double mu : {0.01, 0.1, 1.0, 10.0}) {
        const ControlProblem problem = tiny_problem(mu);
        const OptResult res = optimize(problem, opts);
        norms.push_back(control_norm(res.u_star, problem.omega));
    }
    for (std::size_t i = 1; i < norms.size(); ++i) {
        if (norms[i] > norms[i - 1] + 1e-6) {
            return "norm rises from " + fmt(norms[i - 1]) + " to " + fmt(norms[i]);
        }
    }

    const ControlProblem heavy = tiny_problem(1e6);
    const OptResult res = optimize(heavy, opts);
    const double n = control_norm(res.u_star, heavy.omega);
    if (n > 1e-2) return "heavy-penalty norm " + fmt(n) + " > 1e-2";
    return "";
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream f(entry.path(), std::ios::binary);
        std::ostringstream content;
        content << f.rdbuf();
        out[entry.path().filename().string()] = content.str();
    }
    return out;
}

std::string criterion_11() {
    const char* configs[] = {
        R"({"command":"solve-state","n_cells":12,"n_steps":16,"p":3,"set":"nonnegative",)"
        R"("kernel":"exp-decay:1","y0":"bump","f":"const:0.4","seed":11})",
        R"({"command":"optimize","n_cells":8,"n_steps":8,"n_intervals":2,)"
        R"("y_target":"bump","mu":0.5,"max_iters":8,"seed":11})",
        R"({"command":"check-estimates","n_cells":8,"n_steps":8,"horizon":0.5,)"
        R"("y0":"cospix","seed":11})",
        R"({"command":"convergence","n_cells":8,"n_steps":8,"halvings":3,)"
        R"("horizon":0.5,"y0":"cospix","seed":11})",
    };
    const char* names[] = {"solve-state", "optimize", "check-estimates", "convergence"};

    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    const fs::path base = fs::temp_directory_path() / ("evi_accept_" + std::to_string(stamp));
    fs::create_directories(base);
    const char* cli = std::getenv("EVI_CLI");

    std::string result;
    for (int c = 0; c < 4 && result.empty(); ++c) {
        const fs::path cfg_path = base / (std::string(names[c]) + ".json");
        {
            std::ofstream f(cfg_path);
            f << configs[c] << "\n";
        }
        const fs::path out1 = base / (std::string(names[c]) + "_1");
        const fs::path out2 = base / (std::string(names[c]) + "_2");
        for (const fs::path& out : {out1, out2}) {
            int code = 0;
            if (cli != nullptr) {
                const std::string cmd = std::string("\"") + cli + "\" --config "
                    + cfg_path.string() + " --out " + out.string() + " --quiet";
                code = std::system(cmd.c_str());
            } else {
                RunConfig rc = parse_config_json(configs[c]);
                rc.out_dir = out.string();
                std::ostringstream sink;
                code = run_command(rc, sink);
            }
            if (code != 0) {
                result = std::string(names[c]) + " exited with status "
                    + std::to_string(code);
                break;
            }
        }
        if (!result.empty()) break;
        const auto s1 = snapshot_dir(out1);
        const auto s2 = snapshot_dir(out2);
        if (s1.empty()) {
            result = std::string(names[c]) + " wrote no artifacts";
        } else if (s1 != s2) {
            result = std::string(names[c]) + " artifacts differ between runs";
        }
    }

    std::error_code ec;
    fs::remove_all(base, ec);
    return result;
}

} // namespace

int main() {
    run_criterion(1, "zero data stays exactly zero for every built-in kernel", criterion_1);
    run_criterion(2, "linear decay matches a dense reference and shows first-order rates",
                  criterion_2);
    run_criterion(3, "implicit steps are nonexpansive with monotone subgradients",
                  criterion_3);
    run_criterion(4, "stored subgradients certify the inclusion on all trajectories",
                  criterion_4);
    run_criterion(5, "memory increments respect declared bounds; quadrature is first order",
                  criterion_5);
    run_criterion(6, "energy-estimate ratio stays within a factor two under refinement",
                  criterion_6);
    run_criterion(7, "pressed obstacle run stays pinned with nonnegative inequality gaps",
                  criterion_7);
    run_criterion(8, "warm and cold proximal starts agree within ten tolerances",
                  criterion_8);
    run_criterion(9, "projected descent matches the sampling oracle on the small instance",
                  criterion_9);
    run_criterion(10, "regularization path is monotone and heavy penalties crush the norm",
                  criterion_10);
    run_criterion(11, "repeated CLI runs produce byte-identical artifacts", criterion_11);
    return failures == 0 ? 0 : 1;
}
