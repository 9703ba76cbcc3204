#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "sweepsim/vec.hpp"

namespace sweepsim {

// Perturbation field f(t, x, eps). eval must be deterministic (identical
// arguments give bitwise-identical results). time_scale(eps) is the shortest
// oscillation scale of t -> f(t,.,eps); quadrature over the field keeps its
// step below time_scale/20 so high-frequency terms are resolved.
struct Perturbation {
    std::function<Vec(double t, const Vec& x, double eps)> eval;
    std::size_t dim = 1;
    double eps0 = 0.0;
    std::optional<double> declared_L_f;
    std::optional<double> declared_alpha;
    std::function<double(double eps)> time_scale =
        [](double) { return std::numeric_limits<double>::infinity(); };
};

using TimeField = std::function<Vec(double t, const Vec& x)>;

// Sampled lower bound alpha_hat on the monotonicity constant of
// x -> f(t,x,eps): min over sampled (t, x1 != x2) of
// <f(t,x1)-f(t,x2), x1-x2> / ||x1-x2||^2. Positive values are evidence of
// the monotone regime; the estimate upper-bounds the true constant on the
// sampled domain.
double estimate_monotonicity(const Perturbation& f, double eps, double domain_radius,
                             double t_lo, double t_hi, int samples, std::mt19937_64& rng);

struct LipschitzEstimate {
    double L_x = 0.0;
    double L_t = 0.0;
};

// Sampled maxima of difference quotients in x and t separately (lower bounds
// on the true constants). Time increments are drawn log-uniformly down to
// time_scale(eps)/1000 so 1/eps-scaled time constants register.
LipschitzEstimate estimate_lipschitz(const Perturbation& f, double eps, double domain_radius,
                                     double t_lo, double t_hi, int samples, std::mt19937_64& rng);

struct BohrMeanResult {
    Vec mean;      // (1/T) * integral over [0,T] of g(tau, x) dtau
    double tail;   // || mean(T) - mean(T/2) ||, an O(1/T) convergence indicator
};

BohrMeanResult bohr_mean(const TimeField& g, const Vec& x, double T, long steps);

// Long-run time average of an almost periodic field, memoized per exact
// argument (no interpolation).
struct AveragedField {
    std::function<Vec(const Vec& x)> g0;
    double horizon_T = 0.0;
    long sample_steps = 0;
};

AveragedField averaged_field(const TimeField& g, double T, long steps);

// || integral over [tau, t] of f(s,x,eps) - f(s,x,eps0) ds || by composite
// trapezoid; the step is refined automatically below time_scale/20.
double integral_deviation(const Perturbation& f, double eps, const Vec& x, double tau, double t,
                          long steps);

// Sampled check of the declared Lipschitz-in-x constant, when present:
// max over sampled pairs of ||df|| - L_f*||dx|| - 1e-8 (<= 0 passes).
double validate_declared_lipschitz(const Perturbation& f, double eps, double domain_radius,
                                   double t_lo, double t_hi, int samples, std::mt19937_64& rng);

}  // namespace sweepsim
