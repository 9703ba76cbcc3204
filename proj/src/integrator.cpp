#include "sweepsim/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace sweepsim {

namespace {

constexpr double kMaxSteps = 1e8;  // budget guard

long step_count(double t_start, double t_end, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("Scenario: requires h > 0");
    if (!(t_end > t_start)) throw std::invalid_argument("Scenario: requires t_end > t_start");
    const double raw = (t_end - t_start) / h;
    if (raw > kMaxSteps) throw std::invalid_argument("Scenario: step budget exceeded (1e8)");
    const long n = std::lround(raw);
    if (std::fabs(n * h - (t_end - t_start)) > 1e-9 * std::max(1.0, t_end - t_start))
        throw std::invalid_argument("Scenario: h must divide t_end - t_start");
    return n;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        var += (xs[i] - mx) * (xs[i] - mx);
    }
    return cov / var;
}

}  // namespace

Trajectory catch_up(const Scenario& s) {
    const long n = step_count(s.t_start, s.t_end, s.h);
    if (s.x0.size() != s.field.dim)
        throw std::invalid_argument("Scenario: x0 dimension does not match the field");
    ConvexSetSnapshot c0 = s.moving_set.snapshot(s.t_start);
    if (!contains(c0, s.x0, 1e-8))
        throw infeasible_error("catch_up: initial condition is not in C(t_start)");

    Trajectory traj;
    traj.t_start = s.t_start;
    traj.h = s.h;
    traj.dim = s.x0.size();
    traj.data.reserve(static_cast<std::size_t>(n + 1) * traj.dim);
    traj.data.insert(traj.data.end(), s.x0.begin(), s.x0.end());

    Vec x = s.x0;
    const double bound = s.moving_set.bound_M + 1e-6;
    for (long k = 0; k < n; ++k) {
        const double t_k = s.t_start + static_cast<double>(k) * s.h;
        const double t_next = s.t_start + static_cast<double>(k + 1) * s.h;
        Vec drift = s.field.eval(t_k, x, s.eps);
        if (!all_finite(drift)) throw numeric_error("catch_up: non-finite field value", k);
        Vec z = x;
        add_scaled(z, -s.h, drift);
        x = project(s.moving_set.snapshot(t_next), z);
        if (!all_finite(x)) throw numeric_error("catch_up: non-finite state", k + 1);
        if (norm(x) > bound)
            throw numeric_error("catch_up: state exceeds the declared uniform bound_M",
                                k + 1);
        traj.data.insert(traj.data.end(), x.begin(), x.end());
    }
    return traj;
}

double inclusion_residual(const Trajectory& traj, const Scenario& s, int samples_per_step,
                          std::mt19937_64* rng) {
    if (traj.size() < 2) throw std::invalid_argument("inclusion_residual: trajectory too short");
    double worst = -std::numeric_limits<double>::infinity();
    Vec scaled_xi(traj.dim);
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const double t_k = traj.time(k);
        const Vec x_k = traj.state_vec(k);
        const Vec x_next = traj.state_vec(k + 1);
        Vec drift = s.field.eval(t_k, x_k, s.eps);
        // h * xi_k = (x_k - h f) - x_{k+1}: exactly the pre-projection point
        // minus its projection, so the projection's variational inequality is
        // what gets certified.
        for (std::size_t d = 0; d < traj.dim; ++d)
            scaled_xi[d] = x_k[d] - traj.h * drift[d] - x_next[d];
        const double r = normal_cone_residual(s.moving_set.snapshot(traj.time(k + 1)), x_next,
                                              scaled_xi, samples_per_step, rng);
        worst = std::max(worst, r / traj.h);
    }
    return worst;
}

RichardsonResult richardson_order(const Scenario& s, const std::vector<double>& h_list) {
    if (h_list.size() < 3)
        throw std::invalid_argument("richardson_order: need at least 3 step sizes");
    for (std::size_t i = 1; i < h_list.size(); ++i)
        if (!(h_list[i] < h_list[i - 1]))
            throw std::invalid_argument("richardson_order: h_list must be strictly decreasing");

    RichardsonResult out;
    out.h_values = h_list;
    out.h_ref = h_list.back() / 4.0;

    Scenario ref = s;
    ref.h = out.h_ref;
    const Trajectory ref_traj = catch_up(ref);
    const Vec x_ref = ref_traj.state_vec(ref_traj.size() - 1);

    std::vector<double> log_h, log_e;
    for (double h : h_list) {
        Scenario run = s;
        run.h = h;
        const Trajectory traj = catch_up(run);
        const double err = dist(traj.state_vec(traj.size() - 1), x_ref);
        out.errors.push_back(err);
    }
    bool all_tiny = true;
    for (std::size_t i = 0; i < h_list.size(); ++i) {
        if (out.errors[i] >= 1e-12) {
            all_tiny = false;
            log_h.push_back(std::log(h_list[i]));
            log_e.push_back(std::log(out.errors[i]));
        }
    }
    if (all_tiny || log_h.size() < 2) {
        out.saturated = true;
        out.order = 0.0;
        return out;
    }
    out.order = fit_slope(log_h, log_e);
    return out;
}

double burn_in_horizon(double alpha, double bound_M, double tol) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("bounded_solution: not in monotone regime (alpha <= 0)");
    if (!(tol > 0.0)) throw std::invalid_argument("bounded_solution: requires tol > 0");
    return std::max(0.0, std::log(2.0 * bound_M / tol) / alpha);
}

Trajectory bounded_solution(const Scenario& s, double alpha, double tol,
                            const std::optional<Vec>& burn_start) {
    const double t_burn = burn_in_horizon(alpha, s.moving_set.bound_M, tol);
    const long burn_steps = static_cast<long>(std::ceil(t_burn / s.h - 1e-12));
    const double t0 = s.t_start - static_cast<double>(burn_steps) * s.h;

    Scenario run = s;
    run.t_start = t0;
    ConvexSetSnapshot c0 = s.moving_set.snapshot(t0);
    run.x0 = project(c0, burn_start.value_or(Vec(s.x0.size(), 0.0)));

    Trajectory full = catch_up(run);
    Trajectory out;
    out.t_start = s.t_start;
    out.h = s.h;
    out.dim = full.dim;
    out.data.assign(full.data.begin() + static_cast<long>(full.dim) * burn_steps,
                    full.data.end());
    return out;
}

double discrete_velocity_bound(const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        double gap2 = 0.0;
        for (std::size_t d = 0; d < traj.dim; ++d) {
            const double g = traj.data[(k + 1) * traj.dim + d] - traj.data[k * traj.dim + d];
            gap2 += g * g;
        }
        worst = std::max(worst, gap2);
    }
    return std::sqrt(worst) / traj.h;
}

}  // namespace sweepsim
