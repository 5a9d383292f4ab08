#include "rsde/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsde/errors.hpp"
#include "rsde/rng.hpp"

namespace rsde {
namespace {

constexpr int kLipGrid = 4096;     // coarse scan resolution for graph queries
constexpr int kRefineSteps = 40;   // local refinement iterations after the scan
constexpr double kInf = std::numeric_limits<double>::infinity();

struct SegNearest {
    Vec point;
    double dist2;
};

SegNearest nearest_on_segment(const Vec& z, const Vec& a, const Vec& b) {
    const Vec ab = b - a;
    const double den = norm2(ab);
    double t = den > 0 ? dot(z - a, ab) / den : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec p = a + t * ab;
    return {p, norm2(z - p)};
}

double graph_d2(const std::function<double(double)>& f, const Vec& z, double x) {
    const double dx = x - z[0];
    const double dy = f(x) - z[1];
    return dx * dx + dy * dy;
}

// Nearest point on the graph of f over [a,b], searched inside the parameter
// window [xlo, xhi]: coarse scan on the construction grid, then ternary
// refinement in the bracket around the best sample.
SegNearest nearest_on_graph(const std::function<double(double)>& f, const Vec& z, double a,
                            double b, double xlo, double xhi) {
    xlo = std::clamp(xlo, a, b);
    xhi = std::clamp(xhi, a, b);
    const double step = (b - a) / kLipGrid;
    int i0 = static_cast<int>(std::floor((xlo - a) / step));
    int i1 = static_cast<int>(std::ceil((xhi - a) / step));
    i0 = std::clamp(i0, 0, kLipGrid);
    i1 = std::clamp(i1, 0, kLipGrid);
    int best = i0;
    double best_d2 = kInf;
    for (int i = i0; i <= i1; ++i) {
        const double d2 = graph_d2(f, z, a + step * i);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    double lo = a + step * std::max(best - 1, 0);
    double hi = a + step * std::min(best + 1, kLipGrid);
    for (int it = 0; it < kRefineSteps; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (graph_d2(f, z, m1) <= graph_d2(f, z, m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    const double xs = 0.5 * (lo + hi);
    double xbest = a + step * best;
    double dbest = best_d2;
    if (graph_d2(f, z, xs) < dbest) {
        xbest = xs;
        dbest = graph_d2(f, z, xs);
    }
    return {Vec(xbest, f(xbest)), dbest};
}

// Window half-width for graph queries: the nearest graph point is never
// farther in parameter than the distance to any one candidate point.
double lip_window(const LipGraphs& g, const Vec& z) {
    const double xc = std::clamp(z[0], g.a, g.b);
    const double dx = z[0] - xc;
    const double d1 = std::hypot(dx, g.f1(xc) - z[1]);
    const double d2 = std::hypot(dx, g.f2(xc) - z[1]);
    return std::min(d1, d2) + 1e-12 * (g.b - g.a);
}

SegNearest lip_nearest(const LipGraphs& g, const Vec& z) {
    const double w = lip_window(g, z);
    const SegNearest n1 = nearest_on_graph(g.f1, z, g.a, g.b, z[0] - w, z[0] + w);
    const SegNearest n2 = nearest_on_graph(g.f2, z, g.a, g.b, z[0] - w, z[0] + w);
    return n1.dist2 <= n2.dist2 ? n1 : n2;
}

// One-sided-safe derivative of a graph function.
double graph_slope(const std::function<double(double)>& f, double x, double a, double b) {
    const double h = (b - a) * 1e-7;
    const double xl = std::max(x - h, a);
    const double xr = std::min(x + h, b);
    return (f(xr) - f(xl)) / (xr - xl);
}

double polygon_perimeter(const DomainDescriptor& d) {
    double p = 0;
    const size_t n = d.vertices.size();
    for (size_t i = 0; i < n; ++i) p += norm(d.vertices[(i + 1) % n] - d.vertices[i]);
    return p;
}

void bounding_box(const DomainDescriptor& d, Vec& lo, Vec& hi);

void bounding_box(const DomainDescriptor& d, Vec& lo, Vec& hi) {
    switch (d.kind) {
        case DomainKind::Interval:
            lo = Vec(1);
            hi = Vec(1);
            lo[0] = d.lo;
            hi[0] = d.bounded ? d.hi : d.lo + 6.0;
            return;
        case DomainKind::ConvexPolygon: {
            lo = Vec(2);
            hi = Vec(2);
            lo[0] = lo[1] = kInf;
            hi[0] = hi[1] = -kInf;
            for (const Vec& v : d.vertices)
                for (int k = 0; k < 2; ++k) {
                    lo[k] = std::min(lo[k], v[k]);
                    hi[k] = std::max(hi[k], v[k]);
                }
            return;
        }
        case DomainKind::Disc:
            lo = Vec(d.center[0] - d.radius, d.center[1] - d.radius);
            hi = Vec(d.center[0] + d.radius, d.center[1] + d.radius);
            return;
        case DomainKind::LipDomain: {
            double ymin = kInf, ymax = -kInf;
            for (int i = 0; i <= kLipGrid; ++i) {
                const double x = d.lip.a + (d.lip.b - d.lip.a) * i / kLipGrid;
                ymin = std::min(ymin, d.lip.f1(x));
                ymax = std::max(ymax, d.lip.f2(x));
            }
            lo = Vec(d.lip.a, ymin);
            hi = Vec(d.lip.b, ymax);
            return;
        }
        case DomainKind::Product: {
            Vec l0, h0, l1, h1;
            bounding_box(d.factors[0], l0, h0);
            bounding_box(d.factors[1], l1, h1);
            lo = concat(l0, l1);
            hi = concat(h0, h1);
            return;
        }
    }
    throw Error("unreachable domain kind");
}

Vec interior_center(const DomainDescriptor& d) {
    switch (d.kind) {
        case DomainKind::Interval: {
            Vec c(1);
            c[0] = d.bounded ? 0.5 * (d.lo + d.hi) : d.lo + 1.0;
            return c;
        }
        case DomainKind::ConvexPolygon: {
            Vec c(2);
            for (const Vec& v : d.vertices) c += v;
            c *= 1.0 / static_cast<double>(d.vertices.size());
            return c;
        }
        case DomainKind::Disc:
            return d.center;
        case DomainKind::LipDomain: {
            const double xm = 0.5 * (d.lip.a + d.lip.b);
            return Vec(xm, 0.5 * (d.lip.f1(xm) + d.lip.f2(xm)));
        }
        case DomainKind::Product:
            return concat(interior_center(d.factors[0]), interior_center(d.factors[1]));
    }
    throw Error("unreachable domain kind");
}

}  // namespace

bool DomainDescriptor::contains(const Vec& z, double tol) const {
    switch (kind) {
        case DomainKind::Interval:
            return z[0] >= lo - tol && (!bounded || z[0] <= hi + tol);
        case DomainKind::ConvexPolygon: {
            const size_t n = vertices.size();
            for (size_t i = 0; i < n; ++i) {
                // edge_normal is unit inward, so this is the signed distance
                // to the edge line.
                if (dot(edge_normal[i], z - vertices[i]) < -tol) return false;
            }
            return true;
        }
        case DomainKind::Disc:
            return norm(z - center) <= radius + tol;
        case DomainKind::LipDomain: {
            if (z[0] < lip.a - tol || z[0] > lip.b + tol) return false;
            const double xc = std::clamp(z[0], lip.a, lip.b);
            return z[1] >= lip.f1(xc) - tol && z[1] <= lip.f2(xc) + tol;
        }
        case DomainKind::Product:
            return factors[0].contains(head(z, factors[0].dim), tol) &&
                   factors[1].contains(tail(z, factors[1].dim), tol);
    }
    return false;
}

double DomainDescriptor::boundary_distance(const Vec& z) const {
    switch (kind) {
        case DomainKind::Interval: {
            const double dl = std::fabs(z[0] - lo);
            return bounded ? std::min(dl, std::fabs(hi - z[0])) : dl;
        }
        case DomainKind::ConvexPolygon: {
            const size_t n = vertices.size();
            double best = kInf;
            for (size_t i = 0; i < n; ++i)
                best = std::min(best, nearest_on_segment(z, vertices[i], vertices[(i + 1) % n]).dist2);
            return std::sqrt(best);
        }
        case DomainKind::Disc:
            return std::fabs(norm(z - center) - radius);
        case DomainKind::LipDomain:
            return std::sqrt(lip_nearest(lip, z).dist2);
        case DomainKind::Product: {
            const Vec x = head(z, factors[0].dim);
            const Vec y = tail(z, factors[1].dim);
            if (contains(z)) {
                return std::min(factors[0].boundary_distance(x), factors[1].boundary_distance(y));
            }
            const double ex = factors[0].contains(x) ? 0.0 : factors[0].boundary_distance(x);
            const double ey = factors[1].contains(y) ? 0.0 : factors[1].boundary_distance(y);
            return std::hypot(ex, ey);
        }
    }
    return kInf;
}

Vec DomainDescriptor::project(const Vec& z) const {
    if (contains(z)) return z;
    switch (kind) {
        case DomainKind::Interval: {
            Vec p(1);
            p[0] = bounded ? std::clamp(z[0], lo, hi) : std::max(z[0], lo);
            return p;
        }
        case DomainKind::ConvexPolygon: {
            const size_t n = vertices.size();
            SegNearest best{Vec(2), kInf};
            for (size_t i = 0; i < n; ++i) {
                const SegNearest cand = nearest_on_segment(z, vertices[i], vertices[(i + 1) % n]);
                if (cand.dist2 < best.dist2) best = cand;
            }
            return best.point;
        }
        case DomainKind::Disc:
            return center + radius * normalized(z - center);
        case DomainKind::LipDomain:
            return lip_nearest(lip, z).point;
        case DomainKind::Product:
            return concat(factors[0].project(head(z, factors[0].dim)),
                          factors[1].project(tail(z, factors[1].dim)));
    }
    return z;
}

DomainDescriptor make_interval(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo)) throw std::invalid_argument("interval: need finite lo < hi");
    DomainDescriptor d;
    d.kind = DomainKind::Interval;
    d.dim = 1;
    d.lo = lo;
    d.hi = hi;
    d.bounded = std::isfinite(hi);
    d.diameter = d.bounded ? hi - lo : 1.0;
    d.C0 = 0.0;
    d.reach = kInf;
    return d;
}

DomainDescriptor make_polygon(std::vector<Vec> ccw_vertices) {
    const size_t n = ccw_vertices.size();
    if (n < 3) throw std::invalid_argument("polygon: need at least 3 vertices");
    double area2 = 0;
    for (size_t i = 0; i < n; ++i)
        area2 += cross2(ccw_vertices[i], ccw_vertices[(i + 1) % n]);
    if (area2 <= 0) throw std::invalid_argument("polygon: vertices must be CCW with positive area");
    DomainDescriptor d;
    d.kind = DomainKind::ConvexPolygon;
    d.dim = 2;
    d.vertices = std::move(ccw_vertices);
    double diam = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) diam = std::max(diam, norm(d.vertices[i] - d.vertices[j]));
    d.diameter = diam;
    for (size_t i = 0; i < n; ++i) {
        const Vec e = d.vertices[(i + 1) % n] - d.vertices[i];
        const Vec f = d.vertices[(i + 2) % n] - d.vertices[(i + 1) % n];
        if (cross2(e, f) < -1e-12 * diam * diam)
            throw std::invalid_argument("polygon: vertices must describe a convex region");
        d.edge_normal.push_back(normalized(perp2(e)));
    }
    d.C0 = 0.0;
    d.reach = kInf;
    return d;
}

DomainDescriptor make_rectangle(double xlo, double xhi, double ylo, double yhi) {
    return make_polygon({Vec(xlo, ylo), Vec(xhi, ylo), Vec(xhi, yhi), Vec(xlo, yhi)});
}

DomainDescriptor make_disc(const Vec& center, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("disc: radius must be positive");
    DomainDescriptor d;
    d.kind = DomainKind::Disc;
    d.dim = 2;
    d.center = center;
    d.radius = radius;
    d.diameter = 2 * radius;
    d.C0 = 0.0;
    d.reach = kInf;
    return d;
}

DomainDescriptor make_lip_domain(std::function<double(double)> f1,
                                 std::function<double(double)> f2, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("lip domain: need a < b");
    DomainDescriptor d;
    d.kind = DomainKind::LipDomain;
    d.dim = 2;
    d.lip.f1 = std::move(f1);
    d.lip.f2 = std::move(f2);
    d.lip.a = a;
    d.lip.b = b;
    const double span = b - a;
    const double tip_tol = 1e-9 * span;
    if (std::fabs(d.lip.f1(a) - d.lip.f2(a)) > tip_tol || std::fabs(d.lip.f1(b) - d.lip.f2(b)) > tip_tol)
        throw std::invalid_argument("lip domain: graphs must meet at both endpoints");
    // Sampled slope bound, ordering check, and curvature for the
    // exterior-ball constant, all on the construction grid.
    double lambda = 0, kappa = 0, ymin = kInf, ymax = -kInf;
    const double h = span / kLipGrid;
    for (int i = 0; i <= kLipGrid; ++i) {
        const double x = a + h * i;
        const double v1 = d.lip.f1(x);
        const double v2 = d.lip.f2(x);
        if (v1 > v2 + 1e-12 * std::max(1.0, span))
            throw std::invalid_argument("lip domain: lower graph must not exceed upper graph");
        ymin = std::min(ymin, v1);
        ymax = std::max(ymax, v2);
        for (const auto* f : {&d.lip.f1, &d.lip.f2}) {
            lambda = std::max(lambda, std::fabs(graph_slope(*f, x, a, b)));
            if (i > 0 && i < kLipGrid) {
                const double fxx = ((*f)(x + h) - 2 * (*f)(x) + (*f)(x - h)) / (h * h);
                const double fx = ((*f)(x + h) - (*f)(x - h)) / (2 * h);
                kappa = std::max(kappa, std::fabs(fxx) / std::pow(1 + fx * fx, 1.5));
            }
        }
    }
    if (lambda >= 1.0)
        throw std::invalid_argument("lip domain: sampled slope bound must be below 1");
    d.lip.lambda = lambda;
    d.diameter = std::hypot(span, ymax - ymin);
    d.C0 = kappa;
    d.reach = kappa > 0 ? 1.0 / (2 * kappa) : kInf;
    return d;
}

DomainDescriptor make_sine_lip_domain() {
    const double pi = std::acos(-1.0);
    return make_lip_domain([pi](double x) { return -0.5 * std::sin(pi * x) / pi; },
                           [pi](double x) { return 0.5 * std::sin(pi * x) / pi; }, 0.0, 1.0);
}

DomainDescriptor make_product(const DomainDescriptor& d1, const DomainDescriptor& d2) {
    if (d1.kind == DomainKind::Product || d2.kind == DomainKind::Product)
        throw std::invalid_argument("product: factors must not themselves be products");
    if (!d1.bounded || !d2.bounded)
        throw std::invalid_argument("product: factors must be bounded");
    if (d1.dim + d2.dim > kMaxDim)
        throw std::invalid_argument("product: combined dimension exceeds 4");
    DomainDescriptor d;
    d.kind = DomainKind::Product;
    d.dim = d1.dim + d2.dim;
    d.factors = {d1, d2};
    d.diameter = std::hypot(d1.diameter, d2.diameter);
    d.C0 = std::max(d1.C0, d2.C0);
    d.reach = d.C0 > 0 ? 1.0 / (2 * d.C0) : kInf;
    return d;
}

PointClass classify_point(const DomainDescriptor& domain, const Vec& z, double eps_bdry) {
    const double dist = domain.boundary_distance(z);
    const bool inside = domain.contains(z);
    const double sdf = inside ? -dist : dist;
    PointTag tag;
    if (dist <= eps_bdry) {
        tag = PointTag::Boundary;
    } else if (inside) {
        tag = PointTag::Interior;
    } else if (dist > 0.5 * domain.reach) {
        tag = PointTag::ExteriorFar;
    } else {
        tag = PointTag::ExteriorNear;
    }
    return {tag, sdf};
}

PointClass classify_point(const DomainDescriptor& domain, const Vec& z) {
    return classify_point(domain, z, domain.eps_boundary());
}

Vec project_to_closure(const DomainDescriptor& domain, const Vec& z) {
    if (domain.contains(z)) return z;
    const Vec p = domain.project(z);
    if (norm(z - p) > 0.5 * domain.reach)
        throw OutOfReachError("project_to_closure: point beyond reach/2 of the domain");
    return p;
}

std::vector<Vec> proximal_normal_generators(const DomainDescriptor& domain, const Vec& z,
                                            double eps_bdry) {
    std::vector<Vec> gens;
    switch (domain.kind) {
        case DomainKind::Interval: {
            Vec up(1), down(1);
            up[0] = 1.0;
            down[0] = -1.0;
            if (std::fabs(z[0] - domain.lo) <= eps_bdry) gens.push_back(up);
            if (domain.bounded && std::fabs(domain.hi - z[0]) <= eps_bdry) gens.push_back(down);
            break;
        }
        case DomainKind::ConvexPolygon: {
            const size_t n = domain.vertices.size();
            for (size_t i = 0; i < n; ++i) {
                const SegNearest sn =
                    nearest_on_segment(z, domain.vertices[i], domain.vertices[(i + 1) % n]);
                if (std::sqrt(sn.dist2) <= eps_bdry) gens.push_back(domain.edge_normal[i]);
            }
            break;
        }
        case DomainKind::Disc: {
            if (std::fabs(norm(z - domain.center) - domain.radius) <= eps_bdry)
                gens.push_back(normalized(domain.center - z));
            break;
        }
        case DomainKind::LipDomain: {
            const double w = lip_window(domain.lip, z) + eps_bdry;
            const SegNearest n1 =
                nearest_on_graph(domain.lip.f1, z, domain.lip.a, domain.lip.b, z[0] - w, z[0] + w);
            const SegNearest n2 =
                nearest_on_graph(domain.lip.f2, z, domain.lip.a, domain.lip.b, z[0] - w, z[0] + w);
            if (std::sqrt(n1.dist2) <= eps_bdry) {
                const double s = graph_slope(domain.lip.f1, n1.point[0], domain.lip.a, domain.lip.b);
                gens.push_back(normalized(Vec(-s, 1.0)));  // inward is upward off the lower graph
            }
            if (std::sqrt(n2.dist2) <= eps_bdry) {
                const double s = graph_slope(domain.lip.f2, n2.point[0], domain.lip.a, domain.lip.b);
                gens.push_back(normalized(Vec(s, -1.0)));  // inward is downward off the upper graph
            }
            break;
        }
        case DomainKind::Product: {
            const Vec x = head(z, domain.factors[0].dim);
            const Vec y = tail(z, domain.factors[1].dim);
            if (domain.factors[0].boundary_distance(x) <= eps_bdry) {
                for (const Vec& g : proximal_normal_generators(domain.factors[0], x, eps_bdry))
                    gens.push_back(concat(g, Vec::zero(domain.factors[1].dim)));
            }
            if (domain.factors[1].boundary_distance(y) <= eps_bdry) {
                for (const Vec& g : proximal_normal_generators(domain.factors[1], y, eps_bdry))
                    gens.push_back(concat(Vec::zero(domain.factors[0].dim), g));
            }
            break;
        }
    }
    if (gens.empty())
        throw NotOnBoundaryError("proximal_normal_generators: point is not on the boundary");
    return gens;
}

std::vector<Vec> proximal_normal_generators(const DomainDescriptor& domain, const Vec& z) {
    return proximal_normal_generators(domain, z, domain.eps_boundary());
}

std::vector<Vec> sample_boundary(const DomainDescriptor& domain, size_t count) {
    std::vector<Vec> out;
    out.reserve(count);
    switch (domain.kind) {
        case DomainKind::Interval: {
            Vec l(1), r(1);
            l[0] = domain.lo;
            r[0] = domain.hi;
            for (size_t i = 0; i < count; ++i)
                out.push_back(domain.bounded && (i % 2 == 1) ? r : l);
            break;
        }
        case DomainKind::ConvexPolygon: {
            const double per = polygon_perimeter(domain);
            const size_t n = domain.vertices.size();
            for (size_t i = 0; i < count; ++i) {
                double s = per * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
                for (size_t e = 0; e < n; ++e) {
                    const Vec a = domain.vertices[e];
                    const Vec b = domain.vertices[(e + 1) % n];
                    const double len = norm(b - a);
                    if (s <= len || e + 1 == n) {
                        out.push_back(a + (len > 0 ? s / len : 0.0) * (b - a));
                        break;
                    }
                    s -= len;
                }
            }
            break;
        }
        case DomainKind::Disc: {
            const double pi = std::acos(-1.0);
            for (size_t i = 0; i < count; ++i) {
                const double t = 2 * pi * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
                out.push_back(domain.center + domain.radius * Vec(std::cos(t), std::sin(t)));
            }
            break;
        }
        case DomainKind::LipDomain: {
            for (size_t i = 0; i < count; ++i) {
                const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
                const double a = domain.lip.a, b = domain.lip.b;
                if (u < 0.5) {
                    const double x = a + 2 * u * (b - a);
                    out.push_back(Vec(x, domain.lip.f1(x)));
                } else {
                    const double x = a + (2 * u - 1) * (b - a);
                    out.push_back(Vec(x, domain.lip.f2(x)));
                }
            }
            break;
        }
        case DomainKind::Product: {
            const size_t half = std::max<size_t>(count / 2, 1);
            const auto bd0 = sample_boundary(domain.factors[0], half);
            const auto bd1 = sample_boundary(domain.factors[1], half);
            const auto in0 = sample_closure(domain.factors[0], half, 0x5EED0);
            const auto in1 = sample_closure(domain.factors[1], half, 0x5EED1);
            for (size_t i = 0; i < count; ++i) {
                const size_t j = (i / 2) % half;
                if (i % 2 == 0) {
                    out.push_back(concat(bd0[j], in1[j]));
                } else {
                    out.push_back(concat(in0[j], bd1[j]));
                }
            }
            break;
        }
    }
    return out;
}

std::vector<Vec> sample_closure(const DomainDescriptor& domain, size_t count, uint64_t seed) {
    std::vector<Vec> out;
    out.reserve(count);
    if (domain.kind == DomainKind::Disc) {
        const double pi = std::acos(-1.0);
        for (size_t i = 0; i < count; ++i) {
            const double u = uniform_at(seed, StreamTag::Generic, 0, i, 0);
            const double t = 2 * pi * uniform_at(seed, StreamTag::Generic, 0, i, 1);
            out.push_back(domain.center + domain.radius * std::sqrt(u) * Vec(std::cos(t), std::sin(t)));
        }
        return out;
    }
    if (domain.kind == DomainKind::Product) {
        const auto s0 = sample_closure(domain.factors[0], count, hash_mix(seed, 0));
        const auto s1 = sample_closure(domain.factors[1], count, hash_mix(seed, 1));
        for (size_t i = 0; i < count; ++i) out.push_back(concat(s0[i], s1[i]));
        return out;
    }
    Vec lo, hi;
    bounding_box(domain, lo, hi);
    uint64_t attempt = 0;
    while (out.size() < count) {
        Vec z(domain.dim);
        for (int k = 0; k < domain.dim; ++k) {
            const double u = uniform_at(seed, StreamTag::Generic, 1, attempt, static_cast<uint64_t>(k));
            z[k] = lo[k] + u * (hi[k] - lo[k]);
        }
        ++attempt;
        if (domain.contains(z)) out.push_back(z);
        if (attempt > 1000 * (count + 16))
            throw Error("sample_closure: rejection sampling failed to fill the request");
    }
    return out;
}

namespace {

// Quadratic phi for one non-product domain, floored at 1 on the closure so
// product certificates can multiply factor phis directly.
struct QuadraticPhi {
    Vec c;
    double K;
    double value(const Vec& z) const { return K - norm2(z - c); }
    Vec grad(const Vec& z) const { return 2.0 * (c - z); }
};

QuadraticPhi make_quadratic_phi(const DomainDescriptor& d) {
    QuadraticPhi q;
    q.c = interior_center(d);
    double D2 = 0;
    if (d.bounded) {
        for (const Vec& z : sample_boundary(d, 1024)) D2 = std::max(D2, norm2(z - q.c));
        // Sampled max misses at most the boundary-grid gap; pad so phi
        // stays at or above 1 on the whole closure.
        D2 *= 1.0 + 1e-6;
        D2 += 1e-9 * d.diameter * d.diameter;
    } else {
        D2 = norm2(Vec::scalar(d.lo) - q.c);
    }
    q.K = D2 + 1.0;
    return q;
}

}  // namespace

AdmissibilityCertificate make_certificate(const DomainDescriptor& domain) {
    AdmissibilityCertificate cert;
    cert.C0 = domain.C0;
    cert.reach = domain.reach;

    if (domain.kind == DomainKind::Product) {
        const QuadraticPhi q1 = make_quadratic_phi(domain.factors[0]);
        const QuadraticPhi q2 = make_quadratic_phi(domain.factors[1]);
        const int d1 = domain.factors[0].dim;
        const int d2 = domain.factors[1].dim;
        cert.phi = [q1, q2, d1, d2](const Vec& z) {
            return q1.value(head(z, d1)) * q2.value(tail(z, d2));
        };
        cert.grad_phi = [q1, q2, d1, d2](const Vec& z) {
            const Vec x = head(z, d1);
            const Vec y = tail(z, d2);
            return concat(q2.value(y) * q1.grad(x), q1.value(x) * q2.grad(y));
        };
    } else {
        const QuadraticPhi q = make_quadratic_phi(domain);
        cert.phi = [q](const Vec& z) { return q.value(z); };
        cert.grad_phi = [q](const Vec& z) { return q.grad(z); };
    }

    // alpha: sampled min of grad phi . nu over boundary generators.
    cert.alpha = kInf;
    const size_t n_alpha = domain.kind == DomainKind::Product ? 4096 : 2048;
    for (const Vec& z : sample_boundary(domain, n_alpha)) {
        const Vec g = cert.grad_phi(z);
        for (const Vec& nu : proximal_normal_generators(domain, z))
            cert.alpha = std::min(cert.alpha, dot(g, nu));
    }
    // Sampled minimum; allow for the normals turning between samples.
    cert.alpha -= 4.0 * std::acos(-1.0) * domain.diameter / static_cast<double>(n_alpha);

    // Covering: greedy centers at half the advertised radius, directions
    // along grad phi, lambda sampled within twice the advertised radius.
    const size_t n_cover = domain.kind == DomainKind::Product ? 32768 : 4096;
    const std::vector<Vec> samples = sample_boundary(domain, n_cover);
    std::vector<std::vector<Vec>> sample_gens;
    sample_gens.reserve(samples.size());
    for (const Vec& z : samples) sample_gens.push_back(proximal_normal_generators(domain, z));
    double R = domain.diameter / 8.0;
    for (int shrink = 0; shrink < 8; ++shrink) {
        cert.covering.clear();
        for (const Vec& z : samples) {
            bool covered = false;
            for (const CoveringBall& b : cert.covering)
                if (norm(z - b.center) <= 0.5 * R) {
                    covered = true;
                    break;
                }
            if (!covered)
                cert.covering.push_back({z, R, normalized(cert.grad_phi(z)), kInf});
        }
        // The minimum runs over finitely many samples and the normals turn at
        // a bounded rate along the boundary, so shave a spacing-proportional
        // margin to make the reported bound hold between samples as well.
        const double slack =
            4.0 * std::acos(-1.0) * domain.diameter / static_cast<double>(n_cover);
        double lambda_min = kInf;
        for (CoveringBall& b : cert.covering) {
            for (size_t i = 0; i < samples.size(); ++i) {
                if (norm(samples[i] - b.center) > 2 * R) continue;
                for (const Vec& nu : sample_gens[i]) b.lambda = std::min(b.lambda, dot(nu, b.direction));
            }
            b.lambda -= slack;
            lambda_min = std::min(lambda_min, b.lambda);
        }
        if (lambda_min > 0) break;
        R *= 0.5;
    }
    return cert;
}

}  // namespace rsde
