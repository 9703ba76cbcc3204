#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sweepsim/convex_sets.hpp"
#include "sweepsim/dynamics.hpp"
#include "sweepsim/vec.hpp"

namespace sweepsim {

// Full problem instance: moving set, perturbation field, parameter, initial
// state, window and step.
struct Scenario {
    MovingSet moving_set;
    Perturbation field;
    double eps = 0.0;
    Vec x0;
    double t_start = 0.0;
    double t_end = 0.0;
    double h = 0.0;
};

// Uniformly sampled discrete solution; states are packed row-major
// (steps x dim) so gap scans run through the reduction kernels.
struct Trajectory {
    double t_start = 0.0;
    double h = 0.0;
    std::size_t dim = 0;
    std::vector<double> data;

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    double time(std::size_t k) const { return t_start + static_cast<double>(k) * h; }
    std::span<const double> state(std::size_t k) const {
        return std::span<const double>(data).subspan(k * dim, dim);
    }
    Vec state_vec(std::size_t k) const {
        auto s = state(k);
        return Vec(s.begin(), s.end());
    }
};

class infeasible_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
  public:
    numeric_error(const std::string& what, long step_index)
        : std::runtime_error(what), step_index_(step_index) {}
    long step_index() const { return step_index_; }

  private:
    long step_index_ = -1;
};

// Catching-up scheme: x_{k+1} = project(C(t_{k+1}), x_k - h*f(t_k, x_k, eps)).
// Returns all iterates including x_0. Every state after the first is feasible
// by construction; feasibility of x_0, finiteness and the uniform bound are
// checked as the run proceeds.
Trajectory catch_up(const Scenario& s);

// Max over steps of normal_cone_residual(C(t_{k+1}), x_{k+1}, h*xi_k) / h for
// xi_k = -(x_{k+1}-x_k)/h - f(t_k, x_k, eps). Values <= tol certify the
// discrete inclusion; positives witness a violation.
double inclusion_residual(const Trajectory& traj, const Scenario& s, int samples_per_step,
                          std::mt19937_64* rng = nullptr);

struct RichardsonResult {
    double order = 0.0;
    bool saturated = false;   // all errors below 1e-12: scheme exact on this instance
    std::vector<double> h_values;
    std::vector<double> errors;
    double h_ref = 0.0;
};

// Empirical convergence order: least-squares slope of log||x_h(t_end) -
// x_ref(t_end)|| against log h, reference step = min(h_list)/4. Every h must
// divide the window evenly.
RichardsonResult richardson_order(const Scenario& s, const std::vector<double>& h_list);

// Approximates the unique bounded solution by integrating from
// t_start - T_burn with T_burn = ln(2*bound_M / tol)/alpha and discarding the
// burn-in segment; exponential contraction makes the start state irrelevant
// up to tol. Requires the monotone regime (alpha > 0).
Trajectory bounded_solution(const Scenario& s, double alpha, double tol,
                            const std::optional<Vec>& burn_start = std::nullopt);

double burn_in_horizon(double alpha, double bound_M, double tol);

// Max discrete velocity max_k ||x_{k+1} - x_k|| / h (the sampled L_0).
double discrete_velocity_bound(const Trajectory& traj);

}  // namespace sweepsim
