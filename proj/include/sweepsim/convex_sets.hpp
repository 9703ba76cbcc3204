#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "sweepsim/vec.hpp"

namespace sweepsim {

// Closed convex set at a fixed time. Variants cover the moving intervals of
// the worked examples plus boxes, balls and bounded halfspace intersections
// so the general theory is exercised beyond 1-D. All values are immutable
// after construction and safe to share across threads.

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Box {
    Vec lo;
    Vec hi;
};

struct Ball {
    Vec center;
    double radius = 0.0;
};

// {x : <normals[i], x> <= offsets[i] for all i}. Normals must be unit
// vectors. A strictly interior point is required at construction; it seeds
// the nonemptiness/boundedness certificate and the support-point ascent.
struct HalfspaceIntersection {
    std::vector<Vec> normals;
    Vec offsets;
    Vec interior_point;
};

class ConvexSetSnapshot;

struct Translate {
    std::shared_ptr<const ConvexSetSnapshot> base;
    Vec offset;
};

class ConvexSetSnapshot {
  public:
    using Variant = std::variant<Interval, Box, Ball, HalfspaceIntersection, Translate>;

    static ConvexSetSnapshot interval(double lo, double hi);
    static ConvexSetSnapshot box(Vec lo, Vec hi);
    static ConvexSetSnapshot ball(Vec center, double radius);
    static ConvexSetSnapshot halfspaces(std::vector<Vec> normals, Vec offsets, Vec interior_point);
    static ConvexSetSnapshot translate(ConvexSetSnapshot base, Vec offset);

    std::size_t dim() const;
    const Variant& value() const { return v_; }

  private:
    explicit ConvexSetSnapshot(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

struct DykstraOptions {
    double tol = 1e-10;
    int max_iter = 10000;
};

// Iteration budget exhausted; carries the last residual (max of cycle
// displacement and worst constraint violation).
class dykstra_error : public std::runtime_error {
  public:
    dykstra_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_ = 0.0;
};

// Euclidean projection argmin_{c in set} ||c - p||. Closed form for
// Interval/Box/Ball/Translate, Dykstra for HalfspaceIntersection.
Vec project(const ConvexSetSnapshot& set, const Vec& p, const DykstraOptions& opts = {});

Vec dykstra_project(const HalfspaceIntersection& set, const Vec& p, double tol, int max_iter);

// dist(p, set) <= tol, with dist computed through project().
bool contains(const ConvexSetSnapshot& set, const Vec& p, double tol,
              const DykstraOptions& opts = {});

double distance(const ConvexSetSnapshot& set, const Vec& p, const DykstraOptions& opts = {});

// Support function sup_{c in set} <u, c> for unit u, and a point attaining it.
double support(const ConvexSetSnapshot& set, const Vec& u);
Vec support_point(const ConvexSetSnapshot& set, const Vec& u);

// Hausdorff distance. Exact for Interval/Box/Ball pairs and translates of a
// shared base; any other combination is the max support-gap over dir_samples
// sampled unit directions (a lower bound that tightens as dir_samples grows;
// exact in 1-D where the directions are just +-1). dir_samples = 0 picks the
// default (360 in 2-D, 512 quasi-uniform in higher dimension).
double hausdorff_distance(const ConvexSetSnapshot& a, const ConvexSetSnapshot& b,
                          int dir_samples = 0);

// Signed certificate for xi in N_set(x): max over sampled c in set of
// <xi, c - x>. Nonpositive values certify membership up to sampling;
// positive values witness a violation. Requires contains(set, x, 1e-6).
double normal_cone_residual(const ConvexSetSnapshot& set, const Vec& x, const Vec& xi,
                            int sample_count, std::mt19937_64* rng = nullptr);

// Upper bound on sup_{c in set} ||c||; exact for Interval/Box/Ball,
// support-sampled (then inflated by 5%) for halfspace intersections.
double bounding_radius(const ConvexSetSnapshot& set);

// Time-parameterized family t -> C(t) with its declared Lipschitz constant
// (Hausdorff metric) and uniform bound on ||C(t)||.
struct MovingSet {
    std::function<ConvexSetSnapshot(double)> snapshot;
    double lipschitz_L_C = 0.0;
    double bound_M = 0.0;
};

struct MovingSetCheck {
    double max_lipschitz_violation = 0.0;  // max over sampled pairs of d_H - L_C*dt - 1e-8
    double max_bound_violation = 0.0;      // max over samples of bounding_radius - bound_M
    bool ok = true;
};

// Sampled check of the declared constants over [t0, t1]: consecutive-sample
// Lipschitz quotients plus the uniform bound. A lower-bound test, not a
// certificate (support-sampled d_H underestimates for polytopes).
MovingSetCheck validate_moving_set(const MovingSet& ms, double t0, double t1, int samples);

// dir_samples unit directions: {+1,-1} in 1-D, uniform angles in 2-D, and a
// fixed-seed quasi-uniform set in higher dimension. Deterministic.
std::vector<Vec> sample_directions(std::size_t dim, int dir_samples);

}  // namespace sweepsim
