#include "sweepsim/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>

#include "sweepsim/kernels.hpp"

namespace sweepsim {

namespace {

struct LineFit {
    double slope = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto& ops = kernels::active();
    const double n = static_cast<double>(xs.size());
    const double sx = ops.sum(xs.data(), xs.size());
    const double sy = ops.sum(ys.data(), ys.size());
    const double sxx = ops.dot(xs.data(), xs.data(), xs.size());
    const double sxy = ops.dot(xs.data(), ys.data(), xs.size());
    const double syy = ops.dot(ys.data(), ys.data(), ys.size());
    const double var_x = sxx - sx * sx / n;
    const double var_y = syy - sy * sy / n;
    const double cov = sxy - sx * sy / n;
    LineFit fit;
    fit.slope = cov / var_x;
    fit.r_squared = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
    return fit;
}

int worker_count(int max_threads, std::size_t jobs) {
    int n = max_threads;
    if (n <= 0) {
        if (const char* env = std::getenv("SWEEPSIM_THREADS")) n = std::atoi(env);
        if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return static_cast<int>(std::min<std::size_t>(jobs, static_cast<std::size_t>(n)));
}

// Index-parallel map over independent jobs; results land by index, so the
// outcome is identical to the sequential run.
void parallel_for(std::size_t jobs, int max_threads, const std::function<void(std::size_t)>& fn) {
    const int workers = worker_count(max_threads, jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Golden-section refinement of a locally unimodal residual.
double refine_minimum(const std::function<double(double)>& f, double lo, double hi,
                      double resolution) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 200 && (b - a) > resolution; ++iter) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

AlmostPeriodReport scan_periods(const std::function<double(double)>& residual, double eps_tol,
                                double s_lo, double s_hi, double s_grid, double refine_resolution) {
    if (!(s_grid > 0.0) || !(s_hi > s_lo))
        throw std::invalid_argument("almost_period_search: bad shift range or grid");
    AlmostPeriodReport report;
    report.epsilon_tol = eps_tol;
    report.residual = residual;

    const long n = std::lround(std::floor((s_hi - s_lo) / s_grid)) + 1;
    report.scan.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        const double s = s_lo + static_cast<double>(k) * s_grid;
        report.scan.emplace_back(s, residual(s));
    }

    // Local minima of the coarse scan are candidate near-periods; refine each
    // so tolerances far below the grid (e.g. 1e-9) stay reachable.
    auto push_found = [&](double s) {
        for (double existing : report.periods_found)
            if (std::fabs(existing - s) < 0.5 * s_grid) return;
        report.periods_found.push_back(s);
    };
    for (std::size_t i = 0; i < report.scan.size(); ++i) {
        const double r = report.scan[i].second;
        const bool left_ok = i == 0 || report.scan[i - 1].second >= r;
        const bool right_ok = i + 1 == report.scan.size() || report.scan[i + 1].second >= r;
        if (!(left_ok && right_ok)) continue;
        const double lo = i == 0 ? report.scan[i].first : report.scan[i - 1].first;
        const double hi =
            i + 1 == report.scan.size() ? report.scan[i].first : report.scan[i + 1].first;
        double s_star = report.scan[i].first;
        if (hi > lo) s_star = refine_minimum(residual, lo, hi, refine_resolution);
        if (residual(s_star) < eps_tol) push_found(s_star);
        else if (r < eps_tol) push_found(report.scan[i].first);
    }
    std::sort(report.periods_found.begin(), report.periods_found.end());
    return report;
}

}  // namespace

bool gronwall_check(const std::vector<std::pair<double, double>>& samples, double lambda,
                    const std::function<double(double)>& b) {
    if (samples.size() < 3) throw std::invalid_argument("gronwall_check: need >= 3 samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].first > samples[i - 1].first))
            throw std::invalid_argument("gronwall_check: samples must be time-sorted");

    const double t0 = samples.front().first;
    const double a0 = samples.front().second;
    double integral = 0.0;  // trapezoid of e^{lambda (t_k - s)} b(s), propagated exactly
    double b_prev = b(t0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const double t = samples[k].first;
        if (k > 0) {
            const double dt = t - samples[k - 1].first;
            const double decay = std::exp(lambda * dt);
            const double b_here = b(t);
            integral = integral * decay + 0.5 * dt * (decay * b_prev + b_here);
            b_prev = b_here;
        }
        const double envelope = std::exp(lambda * (t - t0)) * a0 + integral;
        const double slack = std::fabs(envelope) * 1e-6 + 1e-12;
        if (samples[k].second > envelope + slack) return false;
    }
    return true;
}

StabilityReport incremental_decay(const Scenario& s, const Vec& x0_a, const Vec& x0_b,
                                  double alpha_declared) {
    Scenario sa = s;
    sa.x0 = x0_a;
    Scenario sb = s;
    sb.x0 = x0_b;
    const Trajectory ta = catch_up(sa);
    const Trajectory tb = catch_up(sb);

    StabilityReport report;
    report.alpha_declared = alpha_declared;
    report.floor = 10.0 * s.h;
    report.gap_samples.reserve(ta.size());
    for (std::size_t k = 0; k < ta.size(); ++k) {
        double gap2 = 0.0;
        for (std::size_t d = 0; d < ta.dim; ++d) {
            const double g = ta.data[k * ta.dim + d] - tb.data[k * tb.dim + d];
            gap2 += g * g;
        }
        report.gap_samples.emplace_back(ta.time(k), std::sqrt(gap2));
    }

    // Envelope and fit both stop at the first crossing of the floor; the log
    // of discretization noise carries no rate information.
    std::size_t cut = report.gap_samples.size();
    for (std::size_t k = 0; k < report.gap_samples.size(); ++k) {
        if (report.gap_samples[k].second < report.floor) {
            cut = k;
            break;
        }
    }

    const double gap0 = report.gap_samples.front().second;
    report.gronwall_satisfied = true;
    for (std::size_t k = 0; k < cut; ++k) {
        const double t = report.gap_samples[k].first;
        const double g2 = report.gap_samples[k].second * report.gap_samples[k].second;
        const double envelope =
            1.05 * std::exp(-2.0 * alpha_declared * (t - s.t_start)) * gap0 * gap0;
        if (g2 > envelope) {
            report.gronwall_satisfied = false;
            break;
        }
    }

    std::vector<double> ts, logs;
    for (std::size_t k = 0; k < cut; ++k) {
        if (report.gap_samples[k].second <= 0.0) continue;
        ts.push_back(report.gap_samples[k].first);
        logs.push_back(std::log(report.gap_samples[k].second));
    }
    if (ts.size() >= 2) {
        const LineFit fit = fit_line(ts, logs);
        report.fitted_rate = fit.slope;
        report.r_squared = fit.r_squared;
        report.rate_reliable = true;
    } else {
        report.rate_reliable = false;  // gap at or below the floor everywhere
    }
    return report;
}

AlmostPeriodReport almost_period_search(const MovingSet& target, double eps_tol, double s_lo,
                                        double s_hi, double s_grid, double t_lo, double t_hi,
                                        double t_grid) {
    if (!(t_grid > 0.0)) throw std::invalid_argument("almost_period_search: t_grid > 0");
    if (t_hi - t_lo < 2.0 * s_hi)
        throw std::invalid_argument("almost_period_search: t_window too short (< 2*s_range)");
    const MovingSet family = target;  // owned by the residual closure
    auto residual = [family, t_lo, t_hi, t_grid](double s) {
        double worst = 0.0;
        const long n = std::lround(std::floor((t_hi - t_lo) / t_grid));
        for (long k = 0; k <= n; ++k) {
            const double t = t_lo + static_cast<double>(k) * t_grid;
            worst = std::max(worst,
                             hausdorff_distance(family.snapshot(t + s), family.snapshot(t)));
        }
        return worst;
    };
    return scan_periods(residual, eps_tol, s_lo, s_hi, s_grid, 1e-12);
}

AlmostPeriodReport almost_period_search(const Trajectory& target, double eps_tol, double s_lo,
                                        double s_hi, double s_grid, double t_lo, double t_hi) {
    if (t_hi - t_lo < 2.0 * s_hi)
        throw std::invalid_argument("almost_period_search: t_window too short (< 2*s_range)");
    const double span = target.time(target.size() - 1);
    if (t_hi + s_hi > span - 0.5 * target.h + 1e-12)
        throw std::invalid_argument(
            "almost_period_search: trajectory does not cover t_window + s_range");

    const std::size_t k_lo = static_cast<std::size_t>(
        std::lround(std::ceil((t_lo - target.t_start) / target.h - 1e-9)));
    const std::size_t k_hi = static_cast<std::size_t>(
        std::lround(std::floor((t_hi - target.t_start) / target.h + 1e-9)));

    auto shared = std::make_shared<const Trajectory>(target);
    auto rounded = std::make_shared<bool>(false);
    auto residual = [shared, rounded, k_lo, k_hi](double s) {
        const auto& ops = kernels::active();
        const double ratio = s / shared->h;
        const long shift = std::lround(ratio);
        if (std::fabs(ratio - static_cast<double>(shift)) > 1e-9) *rounded = true;
        const std::size_t n = k_hi - k_lo + 1;
        return ops.sup_gap(shared->data.data() + k_lo * shared->dim,
                           shared->data.data() +
                               (k_lo + static_cast<std::size_t>(shift)) * shared->dim,
                           n, shared->dim);
    };
    AlmostPeriodReport report =
        scan_periods(residual, eps_tol, s_lo, s_hi, s_grid, target.h);
    report.shifts_rounded = *rounded;
    // Snap refined shifts onto the trajectory grid.
    for (double& s : report.periods_found)
        s = static_cast<double>(std::lround(s / target.h)) * target.h;
    return report;
}

double response_envelope_bound(double alpha, double M, double sup_df) {
    if (!(alpha > 0.0)) throw std::invalid_argument("response_envelope_bound: requires alpha > 0");
    if (M < 0.0 || sup_df < 0.0)
        throw std::invalid_argument("response_envelope_bound: requires M, sup_df >= 0");
    return std::sqrt(sup_df * M / (2.0 * alpha));
}

double trajectory_sup_gap(const Trajectory& a, const Trajectory& b, double window_lo,
                          double window_hi) {
    if (a.dim != b.dim) throw std::invalid_argument("trajectory_sup_gap: dimension mismatch");
    const Trajectory& coarse = a.h >= b.h ? a : b;
    const Trajectory& fine = a.h >= b.h ? b : a;
    const double ratio_raw = coarse.h / fine.h;
    const long ratio = std::lround(ratio_raw);
    if (std::fabs(ratio_raw - static_cast<double>(ratio)) > 1e-9)
        throw std::invalid_argument("trajectory_sup_gap: grids do not nest");
    const double offset_raw = (coarse.t_start - fine.t_start) / fine.h;
    const long offset = std::lround(offset_raw);
    if (std::fabs(offset_raw - static_cast<double>(offset)) > 1e-6)
        throw std::invalid_argument("trajectory_sup_gap: grids are not aligned");

    double worst = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        const double t = coarse.time(k);
        if (t < window_lo - 1e-12 || t > window_hi + 1e-12) continue;
        const long j = offset + static_cast<long>(k) * ratio;
        if (j < 0 || static_cast<std::size_t>(j) >= fine.size()) continue;
        double gap2 = 0.0;
        for (std::size_t d = 0; d < coarse.dim; ++d) {
            const double g = coarse.data[k * coarse.dim + d] -
                             fine.data[static_cast<std::size_t>(j) * fine.dim + d];
            gap2 += g * g;
        }
        worst = std::max(worst, gap2);
        any = true;
    }
    if (!any) throw std::invalid_argument("trajectory_sup_gap: empty window");
    return std::sqrt(worst);
}

namespace {

ResponseReport sweep_response(const Trajectory& reference, const Scenario& base,
                              const std::function<Scenario(double)>& make_scenario,
                              const std::vector<double>& eps_values, double window_lo,
                              double window_hi, double alpha, double burn_horizon,
                              int max_threads) {
    ResponseReport report;
    report.eps_values = eps_values;
    report.sup_gaps.resize(eps_values.size());
    report.bound_values.resize(eps_values.size());
    report.window_too_early = window_lo < base.t_start + burn_horizon - 1e-12;

    std::vector<double> slacks(eps_values.size(), 0.0);
    parallel_for(eps_values.size(), max_threads, [&](std::size_t i) {
        const Scenario run = make_scenario(eps_values[i]);
        const Trajectory traj = catch_up(run);
        report.sup_gaps[i] = trajectory_sup_gap(traj, reference, window_lo, window_hi);

        // Response envelope from the deviation actually seen on the tube,
        // inflated 10% for sampling.
        double sup_df = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const Vec x = traj.state_vec(k);
            const double t = traj.time(k);
            sup_df = std::max(sup_df, dist(run.field.eval(t, x, run.eps),
                                           run.field.eval(t, x, run.field.eps0)));
        }
        report.bound_values[i] = response_envelope_bound(alpha, base.moving_set.bound_M, 1.1 * sup_df);
        slacks[i] = 5.0 * run.h;
    });

    report.discretization_slack = *std::max_element(slacks.begin(), slacks.end());
    report.monotone_decreasing = true;
    for (std::size_t i = 1; i < report.sup_gaps.size(); ++i)
        if (!(report.sup_gaps[i] < report.sup_gaps[i - 1])) report.monotone_decreasing = false;
    report.bounds_satisfied = true;
    for (std::size_t i = 0; i < report.sup_gaps.size(); ++i)
        if (report.sup_gaps[i] > report.bound_values[i] * 1.05 + slacks[i])
            report.bounds_satisfied = false;

    std::vector<double> log_eps, log_gap;
    for (std::size_t i = 0; i < eps_values.size(); ++i) {
        const double de = std::fabs(eps_values[i] - base.field.eps0);
        if (de > 0.0 && report.sup_gaps[i] > 0.0) {
            log_eps.push_back(std::log(de));
            log_gap.push_back(std::log(report.sup_gaps[i]));
        }
    }
    if (log_eps.size() >= 2) report.scaling_exponent = fit_line(log_eps, log_gap).slope;
    return report;
}

}  // namespace

ResponseReport perturbation_response(const Scenario& base, const std::vector<double>& eps_values,
                                     double window_lo, double window_hi, double alpha,
                                     double attractor_tol, int max_threads) {
    Scenario ref = base;
    ref.eps = base.field.eps0;
    const Trajectory x0 = bounded_solution(ref, alpha, attractor_tol);
    const double burn = burn_in_horizon(alpha, base.moving_set.bound_M, attractor_tol);
    auto make_scenario = [&base](double eps) {
        Scenario run = base;
        run.eps = eps;
        return run;
    };
    return sweep_response(x0, base, make_scenario, eps_values, window_lo, window_hi, alpha, burn,
                          max_threads);
}

ResponseReport averaging_check(const std::function<Scenario(double)>& hf_family,
                               const Scenario& averaged, const std::vector<double>& eps_values,
                               double window_lo, double window_hi, double alpha,
                               double attractor_tol, int max_threads) {
    const Trajectory x0 = bounded_solution(averaged, alpha, attractor_tol);
    const double burn = burn_in_horizon(alpha, averaged.moving_set.bound_M, attractor_tol);
    auto make_scenario = [&](double eps) {
        Scenario run = hf_family(eps);
        const double scale = run.field.time_scale ? run.field.time_scale(eps)
                                                  : std::numeric_limits<double>::infinity();
        if (std::isfinite(scale) && run.h > scale / 20.0 + 1e-15)
            throw std::invalid_argument(
                "averaging_check: step too coarse for eps (needs h <= eps/20)");
        return run;
    };
    return sweep_response(x0, averaged, make_scenario, eps_values, window_lo, window_hi, alpha,
                          burn, max_threads);
}

}  // namespace sweepsim
