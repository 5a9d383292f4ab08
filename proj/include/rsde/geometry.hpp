#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rsde/linalg.hpp"

namespace rsde {

enum class DomainKind { Interval, ConvexPolygon, Disc, LipDomain, Product };

enum class PointTag { Interior, Boundary, ExteriorNear, ExteriorFar };

// signed_distance < 0 inside, > 0 outside; magnitude is the distance to the
// boundary.
struct PointClass {
    PointTag tag;
    double signed_distance;
};

// Region between two Lipschitz graphs: a <= x <= b, f1(x) <= y <= f2(x),
// with f1 = f2 at both endpoints and sampled slope bound strictly below 1.
struct LipGraphs {
    std::function<double(double)> f1, f2;
    double a = 0, b = 1;
    double lambda = 0;  // sampled sup |f'| over both graphs
};

struct DomainDescriptor {
    DomainKind kind = DomainKind::Interval;
    int dim = 1;

    // Interval [lo, hi]; hi may be +infinity (reflecting half-line).
    double lo = 0, hi = 0;

    // Convex polygon, CCW vertices with precomputed unit inward edge normals.
    std::vector<Vec> vertices;
    std::vector<Vec> edge_normal;

    Vec center;
    double radius = 0;

    LipGraphs lip;

    std::vector<DomainDescriptor> factors;

    bool bounded = true;
    double diameter = 1.0;  // reference scale 1.0 for the half-line
    double C0 = 0.0;        // exterior-ball constant; 0 for convex domains
    double reach = std::numeric_limits<double>::infinity();  // 1/(2*C0)

    double eps_boundary() const { return 1e-9 * diameter; }

    // Exact membership in the closure, with optional slack.
    bool contains(const Vec& z, double tol = 0.0) const;
    // Unsigned distance to the boundary (exact for interval/polygon/disc,
    // sampled-and-refined for Lipschitz graphs).
    double boundary_distance(const Vec& z) const;
    // Nearest point of the closure; no reach precondition enforced here.
    Vec project(const Vec& z) const;
};

DomainDescriptor make_interval(double lo, double hi);
DomainDescriptor make_polygon(std::vector<Vec> ccw_vertices);
DomainDescriptor make_rectangle(double xlo, double xhi, double ylo, double yhi);
DomainDescriptor make_disc(const Vec& center, double radius);
DomainDescriptor make_lip_domain(std::function<double(double)> f1,
                                 std::function<double(double)> f2, double a, double b);
// Stock example domain: f1(x) = -sin(pi x)/(2 pi), f2 = -f1 on [0,1]; slope bound 1/2.
DomainDescriptor make_sine_lip_domain();
DomainDescriptor make_product(const DomainDescriptor& d1, const DomainDescriptor& d2);

struct CoveringBall {
    Vec center;
    double radius;
    Vec direction;  // unit vector a_i
    double lambda;  // sampled min of nu . a_i over boundary points within 2R
};

struct AdmissibilityCertificate {
    double C0;
    double reach;  // +infinity when C0 == 0
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad_phi;
    double alpha;  // sampled min of grad phi . nu over the boundary
    std::vector<CoveringBall> covering;
};

// Builds the certificate for any built-in domain: phi is a recentered
// negative quadratic floored at 1 (so products can multiply factor phis
// directly), alpha is sampled over boundary generators, and the covering uses
// normalized grad phi directions with the sampled lambda, shrinking the ball
// radius until lambda is positive.
AdmissibilityCertificate make_certificate(const DomainDescriptor& domain);

PointClass classify_point(const DomainDescriptor& domain, const Vec& z, double eps_bdry);
PointClass classify_point(const DomainDescriptor& domain, const Vec& z);

// Nearest-point projection; throws OutOfReachError beyond reach/2.
Vec project_to_closure(const DomainDescriptor& domain, const Vec& z);

// Unit inward proximal normal generators at a boundary point: one on a smooth
// piece, two at a corner, per-factor generators embedded with zero blocks on
// products. Throws NotOnBoundaryError away from the boundary.
std::vector<Vec> proximal_normal_generators(const DomainDescriptor& domain, const Vec& z,
                                            double eps_bdry);
std::vector<Vec> proximal_normal_generators(const DomainDescriptor& domain, const Vec& z);

// Deterministic boundary sample (uniform-ish in boundary measure).
std::vector<Vec> sample_boundary(const DomainDescriptor& domain, size_t count);
// Deterministic closure sample keyed by seed (rejection from the bounding box).
std::vector<Vec> sample_closure(const DomainDescriptor& domain, size_t count, uint64_t seed);

}  // namespace rsde
