#include "sweepsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "sweepsim/kernels.hpp"

namespace sweepsim {

namespace {

Vec sample_in_ball(std::size_t dim, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec x(dim);
    double n = 0.0;
    do {
        for (auto& c : x) c = gauss(rng);
        n = norm(x);
    } while (n < 1e-300);
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
    return scaled(x, r / n);
}

void require_finite(const Vec& v, const char* who) {
    if (!all_finite(v)) throw std::runtime_error(std::string(who) + ": non-finite field value");
}

// Trapezoid over [a, b] with `steps` panels, one component buffer at a time
// so the summation runs through the dispatched reduction kernel.
Vec trapezoid(const std::function<Vec(double)>& g, double a, double b, long steps) {
    if (steps < 1) throw std::invalid_argument("trapezoid: requires steps >= 1");
    const double h = (b - a) / static_cast<double>(steps);
    Vec first = g(a);
    require_finite(first, "trapezoid");
    const std::size_t dim = first.size();
    std::vector<std::vector<double>> buf(dim, std::vector<double>(steps + 1));
    for (std::size_t d = 0; d < dim; ++d) buf[d][0] = first[d];
    for (long k = 1; k <= steps; ++k) {
        const double t = (k == steps) ? b : a + k * h;
        Vec v = g(t);
        require_finite(v, "trapezoid");
        if (v.size() != dim) throw std::runtime_error("trapezoid: integrand dimension changed");
        for (std::size_t d = 0; d < dim; ++d) buf[d][static_cast<std::size_t>(k)] = v[d];
    }
    const auto& ops = kernels::active();
    Vec out(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double total = ops.sum(buf[d].data(), buf[d].size());
        out[d] = h * (total - 0.5 * (buf[d].front() + buf[d].back()));
    }
    return out;
}

long refine_steps(long steps, double span, double scale) {
    if (!std::isfinite(scale) || scale <= 0.0) return steps;
    const double needed = std::ceil(span / (scale / 20.0));
    if (needed > 1e9) throw std::invalid_argument("quadrature: step requirement exceeds budget");
    return std::max(steps, static_cast<long>(needed));
}

}  // namespace

double estimate_monotonicity(const Perturbation& f, double eps, double domain_radius,
                             double t_lo, double t_hi, int samples, std::mt19937_64& rng) {
    if (samples < 1000) throw std::invalid_argument("estimate_monotonicity: samples >= 1e3");
    if (!(domain_radius > 0.0))
        throw std::invalid_argument("estimate_monotonicity: domain_radius > 0");
    std::uniform_real_distribution<double> t_dist(t_lo, t_hi);
    double alpha = std::numeric_limits<double>::infinity();
    const std::size_t dim = f.dim;
    for (int k = 0; k < samples; ++k) {
        const double t = t_dist(rng);
        Vec x1 = sample_in_ball(dim, domain_radius, rng);
        Vec x2 = sample_in_ball(x1.size(), domain_radius, rng);
        const double gap2 = norm_sq(sub(x1, x2));
        if (gap2 < 1e-24) continue;
        Vec f1 = f.eval(t, x1, eps);
        Vec f2 = f.eval(t, x2, eps);
        require_finite(f1, "estimate_monotonicity");
        require_finite(f2, "estimate_monotonicity");
        alpha = std::min(alpha, dot(sub(f1, f2), sub(x1, x2)) / gap2);
    }
    return alpha;
}

LipschitzEstimate estimate_lipschitz(const Perturbation& f, double eps, double domain_radius,
                                     double t_lo, double t_hi, int samples, std::mt19937_64& rng) {
    if (samples < 1000) throw std::invalid_argument("estimate_lipschitz: samples >= 1e3");
    std::uniform_real_distribution<double> t_dist(t_lo, t_hi);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double span = t_hi - t_lo;
    const double scale = f.time_scale ? f.time_scale(eps) : 1.0;
    const double dt_min =
        std::isfinite(scale) ? std::max(1e-9, scale * 1e-3) : std::max(1e-9, span * 1e-6);
    const double dt_max = std::max(dt_min * 10.0, span / 10.0);

    LipschitzEstimate est;
    const std::size_t dim = f.dim;
    for (int k = 0; k < samples; ++k) {
        const double t = t_dist(rng);
        Vec x1 = sample_in_ball(dim, domain_radius, rng);

        // Space quotient over pairs at mixed scales.
        Vec dir = sample_in_ball(dim, 1.0, rng);
        const double n = norm(dir);
        if (n > 1e-12) {
            const double r = domain_radius *
                             std::pow(10.0, -6.0 * unif(rng));  // log-uniform in [R*1e-6, R]
            Vec x2 = x1;
            add_scaled(x2, r / n, dir);
            Vec f1 = f.eval(t, x1, eps);
            Vec f2 = f.eval(t, x2, eps);
            require_finite(f1, "estimate_lipschitz");
            require_finite(f2, "estimate_lipschitz");
            est.L_x = std::max(est.L_x, norm(sub(f1, f2)) / norm(sub(x2, x1)));
        }

        // Time quotient with log-uniform increments.
        const double dt = dt_min * std::pow(dt_max / dt_min, unif(rng));
        Vec fa = f.eval(t, x1, eps);
        Vec fb = f.eval(t + dt, x1, eps);
        require_finite(fb, "estimate_lipschitz");
        est.L_t = std::max(est.L_t, norm(sub(fb, fa)) / dt);
    }
    return est;
}

double validate_declared_lipschitz(const Perturbation& f, double eps, double domain_radius,
                                   double t_lo, double t_hi, int samples, std::mt19937_64& rng) {
    if (!f.declared_L_f) return 0.0;
    const double L = *f.declared_L_f;
    std::uniform_real_distribution<double> t_dist(t_lo, t_hi);
    const std::size_t dim = f.dim;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double t = t_dist(rng);
        Vec x1 = sample_in_ball(dim, domain_radius, rng);
        Vec x2 = sample_in_ball(dim, domain_radius, rng);
        Vec f1 = f.eval(t, x1, eps);
        Vec f2 = f.eval(t, x2, eps);
        worst = std::max(worst, norm(sub(f1, f2)) - L * norm(sub(x1, x2)) - 1e-8);
    }
    return worst;
}

BohrMeanResult bohr_mean(const TimeField& g, const Vec& x, double T, long steps) {
    if (!(T > 0.0)) throw std::invalid_argument("bohr_mean: requires T > 0");
    if (steps < 1000) throw std::invalid_argument("bohr_mean: requires steps >= 1e3");
    if (steps % 2 != 0) ++steps;  // keep T/2 on the grid
    auto integrand = [&](double t) { return g(t, x); };
    Vec full = trapezoid(integrand, 0.0, T, steps);
    Vec half = trapezoid(integrand, 0.0, 0.5 * T, steps / 2);
    BohrMeanResult out;
    out.mean = scaled(full, 1.0 / T);
    Vec half_mean = scaled(half, 2.0 / T);
    out.tail = dist(out.mean, half_mean);
    return out;
}

AveragedField averaged_field(const TimeField& g, double T, long steps) {
    if (!(T > 0.0)) throw std::invalid_argument("averaged_field: requires T > 0");
    if (steps < 1000) throw std::invalid_argument("averaged_field: requires steps >= 1e3");
    struct Cache {
        std::mutex mutex;
        std::map<Vec, Vec> values;  // exact-argument memoization
    };
    auto cache = std::make_shared<Cache>();
    AveragedField out;
    out.horizon_T = T;
    out.sample_steps = steps;
    out.g0 = [g, T, steps, cache](const Vec& x) -> Vec {
        {
            std::lock_guard lock(cache->mutex);
            auto it = cache->values.find(x);
            if (it != cache->values.end()) return it->second;
        }
        Vec mean = bohr_mean(g, x, T, steps).mean;
        std::lock_guard lock(cache->mutex);
        return cache->values.emplace(x, std::move(mean)).first->second;
    };
    return out;
}

double integral_deviation(const Perturbation& f, double eps, const Vec& x, double tau, double t,
                          long steps) {
    if (!(t > tau)) throw std::invalid_argument("integral_deviation: requires t > tau");
    if (steps < 1000) throw std::invalid_argument("integral_deviation: requires steps >= 1e3");
    const double scale =
        f.time_scale ? std::min(f.time_scale(eps), f.time_scale(f.eps0)) : 1.0;
    steps = refine_steps(steps, t - tau, scale);
    auto integrand = [&](double s) { return sub(f.eval(s, x, eps), f.eval(s, x, f.eps0)); };
    return norm(trapezoid(integrand, tau, t, steps));
}

}  // namespace sweepsim
