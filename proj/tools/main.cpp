#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sweepsim/analysis.hpp"
#include "sweepsim/io.hpp"
#include "sweepsim/kernels.hpp"
#include "sweepsim/scenarios.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sweepsim;

namespace {

// Exit codes: 0 ok, 1 config, 2 infeasible initial condition, 3 numeric
// failure, 4 report assertion failed.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAssertion = 4;

class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string scenario_id;
    std::optional<double> eps;
    std::optional<double> step;
    std::optional<double> t_start;
    std::optional<double> t_end;
    std::optional<std::vector<double>> x0;
    std::optional<std::vector<double>> window;   // [lo, hi]
    std::optional<std::vector<double>> eps_list;
    std::optional<double> tol;
    std::optional<double> alpha;
    std::optional<std::vector<double>> start_a;
    std::optional<std::vector<double>> start_b;
    std::optional<double> eps_tol;
    std::optional<std::vector<double>> s_range;  // [lo, hi]
    std::optional<double> s_grid;
    std::optional<double> t_grid;
    std::optional<std::vector<double>> h_list;
    std::string target = "set";
    unsigned long long seed = 0;
    std::string out_dir = ".";
};

// Flag storage shared by all subcommands; only the parsed subcommand's
// options carry counts, and those override the config-file values.
struct FlagStore {
    std::string scenario_id;
    std::string config_path;
    std::string target;
    std::string out_dir;
    unsigned long long seed = 0;
    double eps = 0, step = 0, t_start = 0, t_end = 0, tol = 0, alpha = 0, eps_tol = 0,
           s_grid = 0, t_grid = 0;
    std::vector<double> x0, window, eps_list, start_a, start_b, s_range, h_list;

    std::vector<std::function<void(RunConfig&)>> appliers;

    void apply(RunConfig& cfg) const {
        for (const auto& fn : appliers) fn(cfg);
    }
};

void add_common(CLI::App* cmd, FlagStore& store) {
    auto reg = [&store](CLI::Option* opt, std::function<void(RunConfig&)> apply) {
        store.appliers.push_back([opt, apply = std::move(apply)](RunConfig& cfg) {
            if (opt->count() > 0) apply(cfg);
        });
    };
    cmd->add_option("--config", store.config_path,
                    "JSON config file (flags override its values)");
    reg(cmd->add_option("--scenario", store.scenario_id, "registry scenario id"),
        [&store](RunConfig& c) { c.scenario_id = store.scenario_id; });
    reg(cmd->add_option("--eps", store.eps, "perturbation parameter"),
        [&store](RunConfig& c) { c.eps = store.eps; });
    reg(cmd->add_option("--step", store.step, "time step h"),
        [&store](RunConfig& c) { c.step = store.step; });
    reg(cmd->add_option("--t-start", store.t_start, "window start"),
        [&store](RunConfig& c) { c.t_start = store.t_start; });
    reg(cmd->add_option("--t-end", store.t_end, "window end"),
        [&store](RunConfig& c) { c.t_end = store.t_end; });
    reg(cmd->add_option("--x0", store.x0, "initial state components")->expected(-1),
        [&store](RunConfig& c) { c.x0 = store.x0; });
    reg(cmd->add_option("--window", store.window, "analysis window lo hi")->expected(2),
        [&store](RunConfig& c) { c.window = store.window; });
    reg(cmd->add_option("--eps-list", store.eps_list, "eps sweep values")->expected(-1),
        [&store](RunConfig& c) { c.eps_list = store.eps_list; });
    reg(cmd->add_option("--tol", store.tol, "tolerance (attractor extraction / report)"),
        [&store](RunConfig& c) { c.tol = store.tol; });
    reg(cmd->add_option("--alpha", store.alpha, "monotonicity constant override"),
        [&store](RunConfig& c) { c.alpha = store.alpha; });
    reg(cmd->add_option("--seed", store.seed, "random seed for sampled estimates"),
        [&store](RunConfig& c) { c.seed = store.seed; });
    reg(cmd->add_option("--out", store.out_dir, "output directory"),
        [&store](RunConfig& c) { c.out_dir = store.out_dir; });
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("config parse error: " + std::string(e.what()));
    }
    try {
        auto get_vec = [&](const char* key, std::optional<std::vector<double>>& dst) {
            if (j.contains(key)) dst = j.at(key).get<std::vector<double>>();
        };
        auto get_num = [&](const char* key, std::optional<double>& dst) {
            if (j.contains(key)) dst = j.at(key).get<double>();
        };
        if (j.contains("scenario")) cfg.scenario_id = j.at("scenario").get<std::string>();
        get_num("eps", cfg.eps);
        get_num("step", cfg.step);
        get_num("t_start", cfg.t_start);
        get_num("t_end", cfg.t_end);
        get_vec("x0", cfg.x0);
        get_vec("window", cfg.window);
        get_vec("eps_list", cfg.eps_list);
        get_num("tol", cfg.tol);
        get_num("alpha", cfg.alpha);
        get_vec("start_a", cfg.start_a);
        get_vec("start_b", cfg.start_b);
        get_num("eps_tol", cfg.eps_tol);
        get_vec("s_range", cfg.s_range);
        get_num("s_grid", cfg.s_grid);
        get_num("t_grid", cfg.t_grid);
        get_vec("h_list", cfg.h_list);
        if (j.contains("target")) cfg.target = j.at("target").get<std::string>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<unsigned long long>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    } catch (const json::exception& e) {
        throw config_error("config schema error: " + std::string(e.what()));
    }
}

ScenarioSpec resolve_scenario(const RunConfig& cfg) {
    if (cfg.scenario_id.empty()) throw config_error("missing --scenario");
    if (!has_scenario(cfg.scenario_id)) throw config_error("unknown scenario: " + cfg.scenario_id);
    ScenarioSpec spec = make_scenario(cfg.scenario_id);
    if (cfg.eps) spec.scenario.eps = *cfg.eps;
    if (cfg.step) spec.scenario.h = *cfg.step;
    if (cfg.t_start) spec.scenario.t_start = *cfg.t_start;
    if (cfg.t_end) spec.scenario.t_end = *cfg.t_end;
    if (cfg.x0) spec.scenario.x0 = *cfg.x0;
    refresh_scenario(spec);
    if (!(spec.scenario.h > 0.0)) throw config_error("step must be positive");
    if (!(spec.scenario.t_end > spec.scenario.t_start))
        throw config_error("window must satisfy t_end > t_start");
    return spec;
}

double resolve_alpha(const RunConfig& cfg, const ScenarioSpec& spec, std::mt19937_64& rng) {
    if (cfg.alpha) return *cfg.alpha;
    if (spec.analytic_alpha) return *spec.analytic_alpha;
    // Fall back to the sampled estimate at eps0, minus a 0.05 sampling slack.
    const Scenario& s = spec.scenario;
    const double a_hat =
        estimate_monotonicity(s.field, s.field.eps0, s.moving_set.bound_M, s.t_start,
                              s.t_start + std::max(100.0, s.t_end - s.t_start), 10000, rng);
    return a_hat - 0.05;
}

std::pair<double, double> resolve_window(const RunConfig& cfg, const Scenario& s) {
    if (!cfg.window) return {s.t_start, s.t_end};
    if (cfg.window->size() != 2 || !((*cfg.window)[0] < (*cfg.window)[1]))
        throw config_error("--window expects lo hi with lo < hi");
    return {(*cfg.window)[0], (*cfg.window)[1]};
}

json scenario_echo(const ScenarioSpec& spec, const RunConfig& cfg) {
    const Scenario& s = spec.scenario;
    return json{
        {"scenario", spec.id},          {"eps", s.eps},
        {"step", s.h},                  {"t_start", s.t_start},
        {"t_end", s.t_end},             {"x0", s.x0},
        {"seed", cfg.seed},             {"lipschitz_L_C", s.moving_set.lipschitz_L_C},
        {"bound_M", s.moving_set.bound_M},
    };
}

void emit(const fs::path& dir, const std::string& name, const json& j) {
    atomic_write_text(dir / name, j.dump(2) + "\n");
}

int cmd_simulate(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    const Scenario& s = spec.scenario;
    std::mt19937_64 rng(cfg.seed);

    const Trajectory traj = catch_up(s);

    const double t_probe_hi = s.t_start + std::max(100.0, s.t_end - s.t_start);
    const double alpha_hat = estimate_monotonicity(s.field, s.eps, s.moving_set.bound_M,
                                                   s.t_start, t_probe_hi, 10000, rng);
    const LipschitzEstimate lip = estimate_lipschitz(s.field, s.eps, s.moving_set.bound_M,
                                                     s.t_start, t_probe_hi, 10000, rng);
    const MovingSetCheck set_check = validate_moving_set(s.moving_set, s.t_start, s.t_end, 512);

    const fs::path dir(cfg.out_dir);
    write_trajectory_csv(dir / "trajectory.csv", traj);
    json meta = scenario_echo(spec, cfg);
    meta["alpha_hat"] = alpha_hat;
    meta["L_x_hat"] = lip.L_x;
    meta["L_t_hat"] = lip.L_t;
    meta["steps"] = traj.size() - 1;
    meta["kernels"] = kernels::active_name();
    meta["moving_set_lipschitz_violation"] = set_check.max_lipschitz_violation;
    meta["moving_set_bound_violation"] = set_check.max_bound_violation;
    meta["velocity_bound_L0"] = discrete_velocity_bound(traj);
    emit(dir, "meta.json", meta);

    std::printf("simulate %s: %zu steps, alpha_hat=%.6g, L_x=%.6g, L_t=%.6g\n", spec.id.c_str(),
                traj.size() - 1, alpha_hat, lip.L_x, lip.L_t);
    std::printf("wrote %s and %s\n", (dir / "trajectory.csv").c_str(),
                (dir / "meta.json").c_str());
    return kExitOk;
}

int cmd_stability(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    std::mt19937_64 rng(cfg.seed);
    const double alpha = resolve_alpha(cfg, spec, rng);

    const Vec a = cfg.start_a.value_or(spec.scenario.x0);
    if (!cfg.start_b) throw config_error("stability: missing --start-b");
    const Vec b = *cfg.start_b;

    const StabilityReport report = incremental_decay(spec.scenario, a, b, alpha);
    const fs::path dir(cfg.out_dir);
    json j = to_json(report);
    j["config"] = scenario_echo(spec, cfg);
    emit(dir, "stability.json", j);
    atomic_write_text(dir / "gap.csv", gap_series_csv(report));

    std::printf("stability %s: fitted_rate=%.6g (r2=%.4f, reliable=%d), gronwall=%s\n",
                spec.id.c_str(), report.fitted_rate, report.r_squared,
                report.rate_reliable ? 1 : 0, report.gronwall_satisfied ? "pass" : "FAIL");
    return report.gronwall_satisfied ? kExitOk : kExitAssertion;
}

int cmd_response(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    if (!cfg.eps_list || cfg.eps_list->empty()) throw config_error("response: missing --eps-list");
    std::mt19937_64 rng(cfg.seed);
    const double alpha = resolve_alpha(cfg, spec, rng);
    const auto [w_lo, w_hi] = resolve_window(cfg, spec.scenario);
    const double tol = cfg.tol.value_or(1e-4);

    const ResponseReport report =
        perturbation_response(spec.scenario, *cfg.eps_list, w_lo, w_hi, alpha, tol);
    const fs::path dir(cfg.out_dir);
    json j = to_json(report);
    j["config"] = scenario_echo(spec, cfg);
    j["window"] = {w_lo, w_hi};
    emit(dir, "response.json", j);

    std::printf("response %s: window [%g, %g]\n", spec.id.c_str(), w_lo, w_hi);
    std::printf("  %-10s %-14s %-14s\n", "eps", "sup_gap", "bound");
    for (std::size_t i = 0; i < report.eps_values.size(); ++i)
        std::printf("  %-10g %-14.6g %-14.6g\n", report.eps_values[i], report.sup_gaps[i],
                    report.bound_values[i]);
    if (report.window_too_early) {
        std::printf("  window starts before the burn-in horizon; bounds not asserted\n");
        return kExitOk;
    }
    const bool ok = report.monotone_decreasing && report.bounds_satisfied;
    std::printf("  monotone=%s bounds=%s\n", report.monotone_decreasing ? "pass" : "FAIL",
                report.bounds_satisfied ? "pass" : "FAIL");
    return ok ? kExitOk : kExitAssertion;
}

int cmd_average(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    if (spec.averaged_id.empty())
        throw config_error("average: scenario has no averaged counterpart");
    if (!cfg.eps_list || cfg.eps_list->empty()) throw config_error("average: missing --eps-list");

    ScenarioSpec averaged = make_scenario(spec.averaged_id);
    averaged.scenario.t_start = spec.scenario.t_start;
    averaged.scenario.t_end = spec.scenario.t_end;
    // One common grid for the reference and every sweep member: the finest
    // eps still needs h <= eps/20, and sharing the grid cancels discretization
    // error out of the measured gaps.
    double eps_min = std::fabs((*cfg.eps_list)[0]);
    for (double eps : *cfg.eps_list) eps_min = std::min(eps_min, std::fabs(eps));
    const double span = spec.scenario.t_end - spec.scenario.t_start;
    double h_common;
    if (cfg.step) {
        h_common = *cfg.step;
    } else {
        const long n = static_cast<long>(std::ceil(span / (eps_min / 20.0) - 1e-9));
        h_common = span / static_cast<double>(n);
    }
    averaged.scenario.h = h_common;
    refresh_scenario(averaged);

    const double alpha = cfg.alpha ? *cfg.alpha : averaged.analytic_alpha.value_or(0.0);
    if (!(alpha > 0.0)) throw config_error("average: averaged scenario needs alpha > 0");
    const auto [w_lo, w_hi] = resolve_window(cfg, spec.scenario);
    const double tol = cfg.tol.value_or(1e-4);

    const Scenario base = spec.scenario;
    auto hf_family = [base, h_common](double eps) {
        Scenario run = base;
        run.eps = eps;
        run.h = h_common;
        return run;
    };
    const ResponseReport report =
        averaging_check(hf_family, averaged.scenario, *cfg.eps_list, w_lo, w_hi, alpha, tol);

    const fs::path dir(cfg.out_dir);
    json j = to_json(report);
    j["config"] = scenario_echo(spec, cfg);
    j["averaged_scenario"] = averaged.id;
    j["window"] = {w_lo, w_hi};
    emit(dir, "average.json", j);

    std::printf("average %s -> %s: window [%g, %g]\n", spec.id.c_str(), averaged.id.c_str(), w_lo,
                w_hi);
    std::printf("  %-10s %-14s\n", "eps", "sup_gap");
    for (std::size_t i = 0; i < report.eps_values.size(); ++i)
        std::printf("  %-10g %-14.6g\n", report.eps_values[i], report.sup_gaps[i]);
    std::printf("  monotone=%s\n", report.monotone_decreasing ? "pass" : "FAIL");
    return report.monotone_decreasing ? kExitOk : kExitAssertion;
}

int cmd_almost_period(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    const double eps_tol = cfg.eps_tol.value_or(cfg.tol.value_or(1e-3));
    if (!cfg.s_range || cfg.s_range->size() != 2)
        throw config_error("almost-period: missing --s-range lo hi");
    const double s_lo = (*cfg.s_range)[0];
    const double s_hi = (*cfg.s_range)[1];
    const double s_grid = cfg.s_grid.value_or((s_hi - s_lo) / 1000.0);
    const auto [t_lo, t_hi] = resolve_window(cfg, spec.scenario);

    AlmostPeriodReport report;
    if (cfg.target == "set") {
        const double t_grid = cfg.t_grid.value_or(0.05);
        report = almost_period_search(spec.scenario.moving_set, eps_tol, s_lo, s_hi, s_grid, t_lo,
                                      t_hi, t_grid);
    } else if (cfg.target == "trajectory") {
        std::mt19937_64 rng(cfg.seed);
        const double alpha = resolve_alpha(cfg, spec, rng);
        Scenario run = spec.scenario;
        run.t_start = t_lo;
        const double needed = t_hi + s_hi + 2.0 * run.h;
        run.t_end = t_lo + std::ceil((needed - t_lo) / run.h) * run.h;
        const Trajectory x0 = bounded_solution(run, alpha, cfg.tol.value_or(1e-4));
        report = almost_period_search(x0, eps_tol, s_lo, s_hi, s_grid, t_lo, t_hi);
    } else {
        throw config_error("almost-period: --target must be set or trajectory");
    }

    const fs::path dir(cfg.out_dir);
    json j = to_json(report);
    j["config"] = scenario_echo(spec, cfg);
    j["target"] = cfg.target;
    j["s_range"] = {s_lo, s_hi};
    emit(dir, "almost_period.json", j);

    std::printf("almost-period %s (%s): %zu shift(s) below %g in [%g, %g]\n", spec.id.c_str(),
                cfg.target.c_str(), report.periods_found.size(), eps_tol, s_lo, s_hi);
    for (double s : report.periods_found) std::printf("  s = %.12g\n", s);
    return kExitOk;
}

int cmd_order(const RunConfig& cfg) {
    ScenarioSpec spec = resolve_scenario(cfg);
    if (!cfg.h_list || cfg.h_list->size() < 3)
        throw config_error("order: missing --h-list (>= 3 decreasing steps)");
    const RichardsonResult result = richardson_order(spec.scenario, *cfg.h_list);

    const fs::path dir(cfg.out_dir);
    json j = to_json(result);
    j["config"] = scenario_echo(spec, cfg);
    emit(dir, "order.json", j);

    if (result.saturated)
        std::printf("order %s: saturated (errors below 1e-12)\n", spec.id.c_str());
    else
        std::printf("order %s: %.4f\n", spec.id.c_str(), result.order);
    return kExitOk;
}

int cmd_list_scenarios() {
    for (const auto& id : scenario_ids()) {
        const ScenarioSpec spec = make_scenario(id);
        std::printf("%-22s %s\n", id.c_str(), spec.description.c_str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sweepsim: perturbed Moreau sweeping process simulator and stability checker"};
    app.require_subcommand(1);

    FlagStore store;

    CLI::App* simulate = app.add_subcommand("simulate", "integrate one scenario, write CSV");
    add_common(simulate, store);

    CLI::App* stability = app.add_subcommand("stability", "incremental decay of two solutions");
    add_common(stability, store);
    {
        auto* oa = stability->add_option("--start-a", store.start_a, "first initial state")
                       ->expected(-1);
        auto* ob = stability->add_option("--start-b", store.start_b, "second initial state")
                       ->expected(-1);
        store.appliers.push_back([oa, &store](RunConfig& c) {
            if (oa->count() > 0) c.start_a = store.start_a;
        });
        store.appliers.push_back([ob, &store](RunConfig& c) {
            if (ob->count() > 0) c.start_b = store.start_b;
        });
    }

    CLI::App* response = app.add_subcommand("response", "perturbation response sweep against the monotone baseline");
    add_common(response, store);

    CLI::App* average = app.add_subcommand("average", "high-frequency averaging check");
    add_common(average, store);

    CLI::App* almost = app.add_subcommand("almost-period", "near-period scan");
    add_common(almost, store);
    {
        auto* ot = almost->add_option("--target", store.target, "set | trajectory");
        auto* oe = almost->add_option("--eps-tol", store.eps_tol, "near-period tolerance");
        auto* os = almost->add_option("--s-range", store.s_range, "shift range lo hi")
                       ->expected(2);
        auto* og = almost->add_option("--s-grid", store.s_grid, "shift scan resolution");
        auto* otg =
            almost->add_option("--t-grid", store.t_grid, "time sampling resolution (set target)");
        store.appliers.push_back([ot, &store](RunConfig& c) {
            if (ot->count() > 0) c.target = store.target;
        });
        store.appliers.push_back([oe, &store](RunConfig& c) {
            if (oe->count() > 0) c.eps_tol = store.eps_tol;
        });
        store.appliers.push_back([os, &store](RunConfig& c) {
            if (os->count() > 0) c.s_range = store.s_range;
        });
        store.appliers.push_back([og, &store](RunConfig& c) {
            if (og->count() > 0) c.s_grid = store.s_grid;
        });
        store.appliers.push_back([otg, &store](RunConfig& c) {
            if (otg->count() > 0) c.t_grid = store.t_grid;
        });
    }

    CLI::App* order = app.add_subcommand("order", "empirical convergence order");
    add_common(order, store);
    {
        auto* oh = order->add_option("--h-list", store.h_list, "decreasing step sizes")
                       ->expected(-1);
        store.appliers.push_back([oh, &store](RunConfig& c) {
            if (oh->count() > 0) c.h_list = store.h_list;
        });
    }

    CLI::App* list = app.add_subcommand("list-scenarios", "print the scenario registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!store.config_path.empty()) load_config_file(store.config_path, cfg);
        store.apply(cfg);  // flags override file values
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (stability->parsed()) return cmd_stability(cfg);
        if (response->parsed()) return cmd_response(cfg);
        if (average->parsed()) return cmd_average(cfg);
        if (almost->parsed()) return cmd_almost_period(cfg);
        if (order->parsed()) return cmd_order(cfg);
        if (list->parsed()) return cmd_list_scenarios();
        return kExitConfig;
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const infeasible_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInfeasible;
    } catch (const dykstra_error& e) {
        std::fprintf(stderr, "error: %s (residual %.3g)\n", e.what(), e.residual());
        return kExitNumeric;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "error: %s (step %ld)\n", e.what(), e.step_index());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
}
