#include "sweepsim/scenarios.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sweepsim {

namespace {

const double kSqrt2 = std::sqrt(2.0);

MovingSet sine_interval_set() {
    MovingSet ms;
    ms.snapshot = [](double t) {
        const double s = std::sin(t);
        return ConvexSetSnapshot::interval(s, s + 1.0);
    };
    ms.lipschitz_L_C = 1.0;  // |sin t1 - sin t2| <= |t1 - t2|
    ms.bound_M = 2.0;        // [sin t, sin t + 1] subset of [-1, 2]
    return ms;
}

MovingSet fixed_interval_set(double lo, double hi) {
    MovingSet ms;
    ms.snapshot = [lo, hi](double) { return ConvexSetSnapshot::interval(lo, hi); };
    ms.lipschitz_L_C = 0.0;
    ms.bound_M = std::max(std::fabs(lo), std::fabs(hi));
    return ms;
}

ScenarioSpec example1() {
    ScenarioSpec spec;
    spec.id = "example1";
    spec.description =
        "1-D sweeping by [sin t, sin t + 1] with f(t,x,eps) = eps*x^2 + (sin(sqrt2 t) + 2) x; "
        "monotone with alpha = 1 at eps = 0";
    spec.scenario.moving_set = sine_interval_set();
    spec.scenario.field.eval = [](double t, const Vec& x, double eps) {
        return Vec{eps * x[0] * x[0] + (std::sin(kSqrt2 * t) + 2.0) * x[0]};
    };
    spec.scenario.field.dim = 1;
    spec.scenario.field.eps0 = 0.0;
    spec.scenario.field.declared_alpha = 1.0;  // inf_t (sin(sqrt2 t) + 2) = 1
    spec.scenario.eps = 0.0;
    spec.scenario.x0 = Vec{0.5};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 20.0;
    spec.scenario.h = 1e-3;
    spec.analytic_alpha = 1.0;
    return spec;
}

ScenarioSpec example2() {
    ScenarioSpec spec;
    spec.id = "example2";
    spec.description =
        "1-D sweeping by [sin t, sin t + 1] with high-frequency non-monotone term "
        "sin(t/eps)*x^2 on top of (sin(sqrt2 t) + 2) x; averages to example2_averaged";
    spec.scenario.moving_set = sine_interval_set();
    spec.scenario.field.eval = [](double t, const Vec& x, double eps) {
        const double monotone = (std::sin(kSqrt2 * t) + 2.0) * x[0];
        if (eps == 0.0) return Vec{monotone};  // Bohr mean of the oscillatory term is 0
        return Vec{std::sin(t / eps) * x[0] * x[0] + monotone};
    };
    spec.scenario.field.dim = 1;
    spec.scenario.field.eps0 = 0.0;
    spec.scenario.field.time_scale = [](double eps) {
        return eps == 0.0 ? std::numeric_limits<double>::infinity() : std::fabs(eps);
    };
    spec.scenario.eps = 0.05;
    spec.scenario.x0 = Vec{0.5};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 10.0;
    spec.scenario.h = 2.5e-3;  // = eps/20 at the default eps
    spec.averaged_id = "example2_averaged";
    return spec;
}

ScenarioSpec example2_averaged() {
    ScenarioSpec spec;
    spec.id = "example2_averaged";
    spec.description =
        "Averaged counterpart of example2: 1-D sweeping by [sin t, sin t + 1] with "
        "f(t,x) = (sin(sqrt2 t) + 2) x";
    spec.scenario.moving_set = sine_interval_set();
    spec.scenario.field.eval = [](double t, const Vec& x, double) {
        return Vec{(std::sin(kSqrt2 * t) + 2.0) * x[0]};
    };
    spec.scenario.field.dim = 1;
    spec.scenario.field.eps0 = 0.0;
    spec.scenario.field.declared_alpha = 1.0;
    spec.scenario.eps = 0.0;
    spec.scenario.x0 = Vec{0.5};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 10.0;
    spec.scenario.h = 1e-3;
    spec.analytic_alpha = 1.0;
    return spec;
}

ScenarioSpec pure_sweep() {
    ScenarioSpec spec;
    spec.id = "pure_sweep";
    spec.description =
        "Pure sweeping by the translating interval [t, t + 1] with f = 0; the state rides "
        "the lower face, x(t_k) = t_k for k >= 1";
    MovingSet ms;
    ms.snapshot = [](double t) { return ConvexSetSnapshot::interval(t, t + 1.0); };
    ms.lipschitz_L_C = 1.0;
    ms.bound_M = 6.0;  // refreshed per window below
    spec.scenario.moving_set = ms;
    spec.scenario.field.eval = [](double, const Vec& x, double) { return Vec(x.size(), 0.0); };
    spec.scenario.field.dim = 1;
    spec.scenario.eps = 0.0;
    spec.scenario.x0 = Vec{0.0};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 5.0;
    spec.scenario.h = 1e-3;
    spec.bound_for_window = [](double t0, double t1) {
        return std::max(std::fabs(t0), std::fabs(t1) + 1.0);
    };
    return spec;
}

ScenarioSpec interior_ode() {
    ScenarioSpec spec;
    spec.id = "interior_ode";
    spec.description =
        "Fixed set [-2, 2] with f(t,x) = x and x0 = 1: the state never touches the "
        "boundary and follows x(t) = e^{-t} exactly";
    spec.scenario.moving_set = fixed_interval_set(-2.0, 2.0);
    spec.scenario.field.eval = [](double, const Vec& x, double) { return x; };
    spec.scenario.field.dim = 1;
    spec.scenario.field.declared_alpha = 1.0;
    spec.scenario.field.declared_L_f = 1.0;
    spec.scenario.eps = 0.0;
    spec.scenario.x0 = Vec{1.0};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 1.0;
    spec.scenario.h = 1e-3;
    spec.analytic_alpha = 1.0;
    return spec;
}

ScenarioSpec fixed_point_monotone() {
    ScenarioSpec spec;
    spec.id = "fixed_point_monotone";
    spec.description =
        "Fixed set [-1, 1] with f(t,x) = x: unique bounded solution is the equilibrium 0";
    spec.scenario.moving_set = fixed_interval_set(-1.0, 1.0);
    spec.scenario.field.eval = [](double, const Vec& x, double) { return x; };
    spec.scenario.field.dim = 1;
    spec.scenario.field.declared_alpha = 1.0;
    spec.scenario.field.declared_L_f = 1.0;
    spec.scenario.eps = 0.0;
    spec.scenario.x0 = Vec{1.0};
    spec.scenario.t_start = 0.0;
    spec.scenario.t_end = 10.0;
    spec.scenario.h = 1e-3;
    spec.analytic_alpha = 1.0;
    return spec;
}

}  // namespace

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids = {
        "example1",     "example2",          "example2_averaged",
        "pure_sweep",   "interior_ode",      "fixed_point_monotone",
    };
    return ids;
}

bool has_scenario(const std::string& id) {
    for (const auto& known : scenario_ids())
        if (known == id) return true;
    return false;
}

ScenarioSpec make_scenario(const std::string& id) {
    if (id == "example1") return example1();
    if (id == "example2") return example2();
    if (id == "example2_averaged") return example2_averaged();
    if (id == "pure_sweep") return pure_sweep();
    if (id == "interior_ode") return interior_ode();
    if (id == "fixed_point_monotone") return fixed_point_monotone();
    throw std::invalid_argument("unknown scenario: " + id);
}

void refresh_scenario(ScenarioSpec& spec) {
    if (spec.bound_for_window)
        spec.scenario.moving_set.bound_M =
            spec.bound_for_window(spec.scenario.t_start, spec.scenario.t_end);
}

}  // namespace sweepsim
