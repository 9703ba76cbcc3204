#include "sweepsim/convex_sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sweepsim {

namespace {

constexpr double kUnitNormTol = 1e-12;
constexpr double kUnboundedSupport = 1e12;

void require_dim(const ConvexSetSnapshot& set, const Vec& p, const char* op) {
    if (set.dim() != p.size())
        throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Projection onto a single halfspace {<n,x> <= b}, n unit.
void project_halfspace(Vec& x, const Vec& n, double b) {
    const double excess = dot(x, n) - b;
    if (excess > 0.0) add_scaled(x, -excess, n);
}

double max_violation(const HalfspaceIntersection& hs, const Vec& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < hs.normals.size(); ++i)
        v = std::max(v, dot(x, hs.normals[i]) - hs.offsets[i]);
    return v;
}

// Supporting point by projected ascent from the interior point: the iterate
// x <- P(x + step*u) strictly increases <u,x> until it reaches a maximizing
// face, on which the projection becomes a fixed point. The step doubles while
// the ascent runs unimpeded, so an unbounded direction crosses the threshold
// in a few dozen iterations instead of creeping forever.
Vec polytope_support_point(const HalfspaceIntersection& hs, const Vec& u) {
    const DykstraOptions opts{};
    Vec x = hs.interior_point;
    double step = 10.0;
    double value = dot(x, u);
    int stalled = 0;
    for (int iter = 0; iter < 20000; ++iter) {
        Vec y = x;
        add_scaled(y, step, u);
        y = dykstra_project(hs, y, opts.tol, opts.max_iter);
        const double next = dot(y, u);
        if (next > kUnboundedSupport)
            throw std::runtime_error("support: set unbounded in requested direction");
        const double gain = next - value;
        if (gain > 0.9 * step) step = std::min(step * 2.0, 1e11);
        x = std::move(y);
        value = next;
        if (gain < 1e-14 * std::max(1.0, std::fabs(value))) {
            if (++stalled >= 3) return x;
        } else {
            stalled = 0;
        }
    }
    return x;
}

}  // namespace

ConvexSetSnapshot ConvexSetSnapshot::interval(double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: requires lo <= hi (nonempty)");
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("Interval: endpoints must be finite");
    return ConvexSetSnapshot(Interval{lo, hi});
}

ConvexSetSnapshot ConvexSetSnapshot::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size() || lo.empty())
        throw std::invalid_argument("Box: endpoint dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i]))
            throw std::invalid_argument("Box: requires lo <= hi componentwise (nonempty)");
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw std::invalid_argument("Box: endpoints must be finite");
    }
    return ConvexSetSnapshot(Box{std::move(lo), std::move(hi)});
}

ConvexSetSnapshot ConvexSetSnapshot::ball(Vec center, double radius) {
    if (center.empty()) throw std::invalid_argument("Ball: empty center");
    if (!(radius >= 0.0)) throw std::invalid_argument("Ball: requires radius >= 0");
    if (!all_finite(center) || !std::isfinite(radius))
        throw std::invalid_argument("Ball: data must be finite");
    return ConvexSetSnapshot(Ball{std::move(center), radius});
}

ConvexSetSnapshot ConvexSetSnapshot::halfspaces(std::vector<Vec> normals, Vec offsets,
                                                Vec interior_point) {
    if (normals.empty() || normals.size() != offsets.size())
        throw std::invalid_argument("HalfspaceIntersection: normals/offsets size mismatch");
    const std::size_t d = interior_point.size();
    if (d == 0) throw std::invalid_argument("HalfspaceIntersection: empty interior point");
    for (const Vec& n : normals) {
        if (n.size() != d)
            throw std::invalid_argument("HalfspaceIntersection: normal dimension mismatch");
        if (std::fabs(norm(n) - 1.0) > kUnitNormTol)
            throw std::invalid_argument("HalfspaceIntersection: normals must be unit vectors");
    }
    HalfspaceIntersection hs{std::move(normals), std::move(offsets), std::move(interior_point)};
    for (std::size_t i = 0; i < hs.normals.size(); ++i) {
        if (dot(hs.interior_point, hs.normals[i]) >= hs.offsets[i])
            throw std::invalid_argument(
                "HalfspaceIntersection: supplied point is not strictly interior");
    }
    ConvexSetSnapshot snap{Variant{hs}};
    // Boundedness certificate: finite support in the 2*dim axis directions.
    for (std::size_t axis = 0; axis < d; ++axis) {
        for (double sign : {1.0, -1.0}) {
            Vec u(d, 0.0);
            u[axis] = sign;
            (void)support(snap, u);  // throws if unbounded
        }
    }
    return snap;
}

ConvexSetSnapshot ConvexSetSnapshot::translate(ConvexSetSnapshot base, Vec offset) {
    if (base.dim() != offset.size())
        throw std::invalid_argument("Translate: offset dimension mismatch");
    return ConvexSetSnapshot(Translate{
        std::make_shared<const ConvexSetSnapshot>(std::move(base)), std::move(offset)});
}

std::size_t ConvexSetSnapshot::dim() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) return 1;
            else if constexpr (std::is_same_v<T, Box>) return s.lo.size();
            else if constexpr (std::is_same_v<T, Ball>) return s.center.size();
            else if constexpr (std::is_same_v<T, HalfspaceIntersection>)
                return s.interior_point.size();
            else return s.base->dim();
        },
        v_);
}

Vec dykstra_project(const HalfspaceIntersection& set, const Vec& p, double tol, int max_iter) {
    if (!(tol > 0.0)) throw std::invalid_argument("dykstra_project: requires tol > 0");
    if (p.size() != set.interior_point.size())
        throw std::invalid_argument("dykstra_project: dimension mismatch");
    const std::size_t m = set.normals.size();
    Vec x = p;
    std::vector<Vec> corrections(m, Vec(p.size(), 0.0));
    Vec prev = x;
    double residual = 0.0;
    for (int cycle = 0; cycle < max_iter; ++cycle) {
        for (std::size_t i = 0; i < m; ++i) {
            Vec y = add(x, corrections[i]);
            Vec projected = y;
            project_halfspace(projected, set.normals[i], set.offsets[i]);
            corrections[i] = sub(y, projected);
            x = std::move(projected);
        }
        const double displacement = dist(x, prev);
        const double violation = max_violation(set, x);
        // Small per-cycle displacement alone is not convergence: the iterate
        // can creep along a face for many cycles. Each correction is
        // lambda_i * n_i with lambda_i >= 0, so optimality is certified by
        // KKT complementary slackness on top of feasibility.
        double comp = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double lambda = dot(corrections[i], set.normals[i]);
            const double slack = std::max(0.0, set.offsets[i] - dot(x, set.normals[i]));
            comp = std::max(comp, lambda * slack);
        }
        const double comp_scale = tol * std::max(1.0, dist(p, x));
        residual = std::max({displacement, violation, comp});
        if (displacement < tol && violation < tol && comp < comp_scale) return x;
        prev = x;
    }
    throw dykstra_error("dykstra_project: iteration budget exhausted", residual);
}

Vec project(const ConvexSetSnapshot& set, const Vec& p, const DykstraOptions& opts) {
    require_dim(set, p, "project");
    return std::visit(
        [&](const auto& s) -> Vec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return Vec{clamp(p[0], s.lo, s.hi)};
            } else if constexpr (std::is_same_v<T, Box>) {
                Vec r(p.size());
                for (std::size_t i = 0; i < p.size(); ++i) r[i] = clamp(p[i], s.lo[i], s.hi[i]);
                return r;
            } else if constexpr (std::is_same_v<T, Ball>) {
                Vec d = sub(p, s.center);
                const double n = norm(d);
                if (n <= s.radius) return p;
                Vec r = s.center;
                add_scaled(r, s.radius / n, d);
                return r;
            } else if constexpr (std::is_same_v<T, HalfspaceIntersection>) {
                if (max_violation(s, p) <= 0.0) return p;
                return dykstra_project(s, p, opts.tol, opts.max_iter);
            } else {
                Vec shifted = sub(p, s.offset);
                Vec r = project(*s.base, shifted, opts);
                return add(r, s.offset);
            }
        },
        set.value());
}

double distance(const ConvexSetSnapshot& set, const Vec& p, const DykstraOptions& opts) {
    return dist(p, project(set, p, opts));
}

bool contains(const ConvexSetSnapshot& set, const Vec& p, double tol, const DykstraOptions& opts) {
    if (tol < 0.0) throw std::invalid_argument("contains: requires tol >= 0");
    return distance(set, p, opts) <= tol;
}

Vec support_point(const ConvexSetSnapshot& set, const Vec& u) {
    require_dim(set, u, "support");
    if (std::fabs(norm(u) - 1.0) > 1e-9)
        throw std::invalid_argument("support: direction must be a unit vector");
    return std::visit(
        [&](const auto& s) -> Vec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return Vec{u[0] >= 0.0 ? s.hi : s.lo};
            } else if constexpr (std::is_same_v<T, Box>) {
                Vec r(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] >= 0.0 ? s.hi[i] : s.lo[i];
                return r;
            } else if constexpr (std::is_same_v<T, Ball>) {
                Vec r = s.center;
                add_scaled(r, s.radius, u);
                return r;
            } else if constexpr (std::is_same_v<T, HalfspaceIntersection>) {
                return polytope_support_point(s, u);
            } else {
                Vec r = support_point(*s.base, u);
                return add(r, s.offset);
            }
        },
        set.value());
}

double support(const ConvexSetSnapshot& set, const Vec& u) {
    const double value = dot(support_point(set, u), u);
    if (!(value < kUnboundedSupport))
        throw std::runtime_error("support: set unbounded in requested direction");
    return value;
}

std::vector<Vec> sample_directions(std::size_t dim, int dir_samples) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(Vec{1.0});
        dirs.push_back(Vec{-1.0});
        return dirs;
    }
    if (dir_samples < 2) throw std::invalid_argument("sample_directions: too few directions");
    dirs.reserve(static_cast<std::size_t>(dir_samples));
    if (dim == 2) {
        for (int k = 0; k < dir_samples; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / dir_samples;
            dirs.push_back(Vec{std::cos(theta), std::sin(theta)});
        }
        return dirs;
    }
    // Fixed-seed Gaussian directions: quasi-uniform enough for the sampled
    // lower bounds used here, and deterministic.
    std::mt19937_64 rng(0x5eed5e75u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (dirs.size() < static_cast<std::size_t>(dir_samples)) {
        Vec u(dim);
        for (auto& c : u) c = gauss(rng);
        const double n = norm(u);
        if (n < 1e-12) continue;
        dirs.push_back(scaled(u, 1.0 / n));
    }
    return dirs;
}

namespace {

bool is_polytope(const ConvexSetSnapshot& s) {
    if (std::holds_alternative<HalfspaceIntersection>(s.value())) return true;
    if (const auto* t = std::get_if<Translate>(&s.value())) return is_polytope(*t->base);
    return false;
}

int default_dir_samples(std::size_t dim) { return dim <= 2 ? 360 : 512; }

double sampled_hausdorff(const ConvexSetSnapshot& a, const ConvexSetSnapshot& b,
                         int dir_samples) {
    double worst = 0.0;
    for (const Vec& u : sample_directions(a.dim(), dir_samples))
        worst = std::max(worst, std::fabs(support(a, u) - support(b, u)));
    return worst;
}

}  // namespace

double hausdorff_distance(const ConvexSetSnapshot& a, const ConvexSetSnapshot& b,
                          int dir_samples) {
    if (a.dim() != b.dim()) throw std::invalid_argument("hausdorff_distance: dimension mismatch");
    const bool any_polytope = is_polytope(a) || is_polytope(b);
    if (dir_samples == 0) dir_samples = default_dir_samples(a.dim());
    if (any_polytope && a.dim() >= 2 && dir_samples < 16)
        throw std::invalid_argument(
            "hausdorff_distance: need dir_samples >= 16 for polytope operands");

    const auto* ia = std::get_if<Interval>(&a.value());
    const auto* ib = std::get_if<Interval>(&b.value());
    if (ia && ib) return std::max(std::fabs(ia->lo - ib->lo), std::fabs(ia->hi - ib->hi));

    const auto* ba = std::get_if<Box>(&a.value());
    const auto* bb = std::get_if<Box>(&b.value());
    if (ba && bb) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ba->lo.size(); ++i)
            worst = std::max(worst, std::max(std::fabs(ba->lo[i] - bb->lo[i]),
                                             std::fabs(ba->hi[i] - bb->hi[i])));
        return worst;
    }

    const auto* sa = std::get_if<Ball>(&a.value());
    const auto* sb = std::get_if<Ball>(&b.value());
    if (sa && sb) return dist(sa->center, sb->center) + std::fabs(sa->radius - sb->radius);

    const auto* ta = std::get_if<Translate>(&a.value());
    const auto* tb = std::get_if<Translate>(&b.value());
    if (ta && tb && ta->base == tb->base) return dist(ta->offset, tb->offset);

    return sampled_hausdorff(a, b, dir_samples);
}

double bounding_radius(const ConvexSetSnapshot& set) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Interval>) {
                return std::max(std::fabs(s.lo), std::fabs(s.hi));
            } else if constexpr (std::is_same_v<T, Box>) {
                double sum = 0.0;
                for (std::size_t i = 0; i < s.lo.size(); ++i) {
                    const double m = std::max(std::fabs(s.lo[i]), std::fabs(s.hi[i]));
                    sum += m * m;
                }
                return std::sqrt(sum);
            } else if constexpr (std::is_same_v<T, Ball>) {
                return norm(s.center) + s.radius;
            } else if constexpr (std::is_same_v<T, HalfspaceIntersection>) {
                const std::size_t d = s.interior_point.size();
                double worst = 0.0;
                for (const Vec& u : sample_directions(d, default_dir_samples(d)))
                    worst = std::max(worst, dot(polytope_support_point(s, u), u));
                return 1.05 * std::max(worst, 0.0);
            } else {
                return bounding_radius(*s.base) + norm(s.offset);
            }
        },
        set.value());
}

double normal_cone_residual(const ConvexSetSnapshot& set, const Vec& x, const Vec& xi,
                            int sample_count, std::mt19937_64* rng) {
    require_dim(set, x, "normal_cone_residual");
    require_dim(set, xi, "normal_cone_residual");
    if (sample_count < 8)
        throw std::invalid_argument("normal_cone_residual: requires sample_count >= 8");
    if (!contains(set, x, 1e-6))
        throw std::invalid_argument("normal_cone_residual: x is not in the set (N_C(x) empty)");

    std::mt19937_64 local(0x9e3779b97f4a7c15ull);
    std::mt19937_64& gen = rng ? *rng : local;
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t d = set.dim();
    const double scale = std::max(1.0, bounding_radius(set));

    double worst = -std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec& c) {
        double inner = 0.0;
        for (std::size_t i = 0; i < d; ++i) inner += xi[i] * (c[i] - x[i]);
        worst = std::max(worst, inner);
    };

    // Support points along deterministic directions catch face witnesses.
    const int dir_count = std::max(8, sample_count / 2);
    for (const Vec& u : sample_directions(d, std::max(dir_count, d == 1 ? 2 : 16)))
        consider(support_point(set, u));

    // Projected random exterior (and interior) points fill in the bulk.
    for (int k = 0; k < sample_count; ++k) {
        Vec pt(d);
        for (auto& c : pt) c = gauss(gen) * 2.0 * scale;
        consider(project(set, pt));
    }
    return worst;
}

MovingSetCheck validate_moving_set(const MovingSet& ms, double t0, double t1, int samples) {
    if (!(t1 > t0) || samples < 2)
        throw std::invalid_argument("validate_moving_set: bad window or sample count");
    MovingSetCheck out;
    const double step = (t1 - t0) / (samples - 1);
    ConvexSetSnapshot prev = ms.snapshot(t0);
    out.max_bound_violation = bounding_radius(prev) - ms.bound_M;
    for (int k = 1; k < samples; ++k) {
        const double t = t0 + k * step;
        ConvexSetSnapshot cur = ms.snapshot(t);
        const double dh = hausdorff_distance(prev, cur);
        out.max_lipschitz_violation =
            std::max(out.max_lipschitz_violation, dh - ms.lipschitz_L_C * step - 1e-8);
        out.max_bound_violation =
            std::max(out.max_bound_violation, bounding_radius(cur) - ms.bound_M);
        prev = std::move(cur);
    }
    out.ok = out.max_lipschitz_violation <= 0.0 && out.max_bound_violation <= 0.0;
    return out;
}

}  // namespace sweepsim
