#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "sweepsim/integrator.hpp"

namespace sweepsim {

// Incremental-stability verdict for one pair of solutions. The envelope test
// checks ||x1(t)-x2(t)||^2 <= 1.05 * e^{-2 alpha (t-t0)} ||x1(t0)-x2(t0)||^2
// at every sample until the gap first drops below the discretization floor
// (10*h); the rate is a least-squares fit of log gap over the same samples.
struct StabilityReport {
    double fitted_rate = 0.0;   // per second; negative = decay
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> gap_samples;  // (t, ||x1-x2||)
    bool gronwall_satisfied = false;
    bool rate_reliable = false;  // false when the gap sits below the floor everywhere
    double alpha_declared = 0.0;
    double floor = 0.0;
};

// Near-period scan result. residual(s) is the sup over the sampled window of
// the shift deviation (Hausdorff metric for set families, Euclidean for
// trajectories); periods_found lists every refined shift with residual below
// epsilon_tol.
struct AlmostPeriodReport {
    double epsilon_tol = 0.0;
    std::vector<double> periods_found;
    std::vector<std::pair<double, double>> scan;  // (s, residual) on the coarse grid
    std::function<double(double)> residual;
    bool shifts_rounded = false;  // trajectory targets snap shifts to multiples of h
};

// Perturbation-response or averaging sweep: sup-gap against the bound per eps.
struct ResponseReport {
    std::vector<double> eps_values;
    std::vector<double> sup_gaps;
    std::vector<double> bound_values;
    bool monotone_decreasing = false;      // strict decrease of sup_gaps
    bool bounds_satisfied = false;         // sup_gap <= bound*1.05 + slack per entry
    bool window_too_early = false;         // window starts before the burn-in horizon
    double discretization_slack = 0.0;
    double scaling_exponent = 0.0;         // fitted slope of log gap vs log eps (reported only)
};

// True iff a(t) <= e^{lambda (t-t0)} a(t0) + integral of e^{lambda (t-s)} b(s) ds
// (trapezoid on the sample grid) with multiplicative slack 1 + 1e-6.
bool gronwall_check(const std::vector<std::pair<double, double>>& samples, double lambda,
                    const std::function<double(double)>& b);

StabilityReport incremental_decay(const Scenario& s, const Vec& x0_a, const Vec& x0_b,
                                  double alpha_declared);

AlmostPeriodReport almost_period_search(const MovingSet& target, double eps_tol, double s_lo,
                                        double s_hi, double s_grid, double t_lo, double t_hi,
                                        double t_grid);

AlmostPeriodReport almost_period_search(const Trajectory& target, double eps_tol, double s_lo,
                                        double s_hi, double s_grid, double t_lo, double t_hi);

// Asymptotic response envelope sqrt(sup_df * M / (2 alpha)): the uniform
// deviation a monotone process tolerates from a drift perturbation of size
// sup_df inside the ball of radius M.
double response_envelope_bound(double alpha, double M, double sup_df);

ResponseReport perturbation_response(const Scenario& base, const std::vector<double>& eps_values,
                                     double window_lo, double window_hi, double alpha,
                                     double attractor_tol = 1e-4, int max_threads = 0);

ResponseReport averaging_check(const std::function<Scenario(double)>& hf_family,
                               const Scenario& averaged, const std::vector<double>& eps_values,
                               double window_lo, double window_hi, double alpha,
                               double attractor_tol = 1e-4, int max_threads = 0);

// Sup over the common sample grid of ||a(t) - b(t)|| restricted to
// [window_lo, window_hi]; grids must nest (one h an integer multiple of the
// other).
double trajectory_sup_gap(const Trajectory& a, const Trajectory& b, double window_lo,
                          double window_hi);

}  // namespace sweepsim
