#include "rsde/coupling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsde/errors.hpp"

namespace rsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vec checked_start(const DomainDescriptor& domain, const Vec& z, const char* name) {
    if (z.n != domain.dim) throw std::invalid_argument(std::string(name) + ": dimension mismatch");
    if (domain.contains(z)) return z;
    if (!domain.contains(z, domain.eps_boundary()))
        throw std::invalid_argument(std::string(name) + ": start lies outside the closed domain");
    return domain.project(z);
}

// One catch-up substep: free move by h*g, then metric projection if the
// candidate escapes. Corrections beyond reach/2 are outside the scheme's
// validity and abort the run. The projection correction size is added to
// *lvar so runs can report the boundary-term variation per component.
Vec push_step(const DomainDescriptor& domain, const Vec& z, const Vec& g, double h, double* lvar) {
    Vec pre = z + h * g;
    if (domain.contains(pre)) return pre;
    Vec proj = domain.project(pre);
    double correction = norm(proj - pre);
    if (correction > 0.5 * domain.reach)
        throw OutOfReachError("coupling substep pushed farther than reach/2; refine the step");
    *lvar += correction;
    return proj;
}

struct Recorder {
    CouplingRun run;
    size_t idx = 0;

    Recorder(CouplingKind kind, const DyadicPath& path, int substeps, double delta) {
        run.kind = kind;
        run.level = path.level;
        run.substeps = substeps;
        run.delta_coal = delta;
        run.dt = std::ldexp(1.0, -path.level) / substeps;
        size_t count = path.cells() * static_cast<size_t>(substeps) + 1;
        run.x.assign(count * 2, 0.0);
        run.y.assign(count * 2, 0.0);
        run.theta.assign(count, kNaN);
    }

    void put(const Vec& xv, const Vec& yv, bool live) {
        run.x[2 * idx] = xv.a[0];
        run.x[2 * idx + 1] = xv.a[1];
        run.y[2 * idx] = yv.a[0];
        run.y[2 * idx + 1] = yv.a[1];
        if (live) {
            run.theta[idx] = angle(xv, yv);
        } else if (run.coalesce_index < 0) {
            run.coalesce_index = static_cast<std::ptrdiff_t>(idx);
        }
        ++idx;
    }
};

void validate_pair(const DomainDescriptor& domain, const DyadicPath& path, int substeps) {
    if (domain.dim != 2) throw std::invalid_argument("couplings require a planar domain");
    if (path.r != 2) throw std::invalid_argument("couplings require a planar driving path");
    if (substeps < 1) throw std::invalid_argument("substeps must be positive");
}

double resolve_delta(const DomainDescriptor& domain, double delta_coal) {
    return delta_coal > 0 ? delta_coal : 1e-8 * domain.diameter;
}

}  // namespace

double angle(const Vec& x, const Vec& y) { return std::atan2(y.a[1] - x.a[1], y.a[0] - x.a[0]); }

CouplingRun run_synchronous(const DomainDescriptor& domain, const DyadicPath& path, const Vec& x0,
                            const Vec& y0, int substeps, double delta_coal) {
    validate_pair(domain, path, substeps);
    const double delta = resolve_delta(domain, delta_coal);
    Vec X = checked_start(domain, x0, "x0");
    Vec Y = checked_start(domain, y0, "y0");

    Recorder rec(CouplingKind::Synchronous, path, substeps, delta);
    bool dead = norm(Y - X) < delta;
    if (dead) Y = X;
    rec.put(X, Y, !dead);

    const double scale = std::ldexp(1.0, path.level);
    const double h = rec.run.dt;
    for (size_t m = 0; m < path.cells(); ++m) {
        Vec v = Vec(scale * (path.value(m + 1, 0) - path.value(m, 0)),
                    scale * (path.value(m + 1, 1) - path.value(m, 1)));
        for (int s = 0; s < substeps; ++s) {
            X = push_step(domain, X, v, h, &rec.run.lvar_x);
            rec.run.input_variation_x += h * norm(v);
            if (dead) {
                Y = X;
            } else {
                Y = push_step(domain, Y, v, h, &rec.run.lvar_y);
                rec.run.input_variation_y += h * norm(v);
                if (norm(Y - X) < delta) {
                    dead = true;
                    Y = X;
                }
            }
            rec.put(X, Y, !dead);
        }
    }
    return std::move(rec.run);
}

CouplingRun run_mirror(const DomainDescriptor& domain, const DyadicPath& path, const Vec& x0,
                       const Vec& y0, int substeps, double delta_coal) {
    validate_pair(domain, path, substeps);
    const double delta = resolve_delta(domain, delta_coal);
    Vec X = checked_start(domain, x0, "x0");
    Vec Y = checked_start(domain, y0, "y0");

    Recorder rec(CouplingKind::Mirror, path, substeps, delta);
    bool dead = norm(Y - X) < delta;
    rec.put(X, Y, !dead);

    const double scale = std::ldexp(1.0, path.level);
    const double h = rec.run.dt;
    for (size_t m = 0; m < path.cells(); ++m) {
        Vec v = Vec(scale * (path.value(m + 1, 0) - path.value(m, 0)),
                    scale * (path.value(m + 1, 1) - path.value(m, 1)));
        for (int s = 0; s < substeps; ++s) {
            if (dead) {
                rec.put(X, Y, false);
                continue;
            }
            Vec d_old = Y - X;
            Vec u = normalized(d_old);
            Vec vy = v - (2.0 * dot(u, v)) * u;
            double lvx = 0, lvy = 0;
            Vec Xn = push_step(domain, X, v, h, &lvx);
            Vec Yn = push_step(domain, Y, vy, h, &lvy);
            Vec d_new = Yn - Xn;
            if (norm(d_new) < delta || dot(d_new, d_old) <= 0.0) {
                // The pair met (or crossed) inside this substep; freeze at the
                // substep start.
                dead = true;
                rec.put(X, Y, false);
            } else {
                X = Xn;
                Y = Yn;
                rec.run.lvar_x += lvx;
                rec.run.lvar_y += lvy;
                rec.run.input_variation_x += h * norm(v);
                rec.run.input_variation_y += h * norm(vy);
                rec.put(X, Y, true);
            }
        }
    }
    return std::move(rec.run);
}

InvariantReport check_cone_invariant(const CouplingRun& run, double lower, double upper,
                                     double eps_angle) {
    InvariantReport rep;
    for (size_t i = 0; i < run.count(); ++i) {
        if (!run.live(i)) break;
        ++rep.checked;
        double th = run.theta[i];
        double excess = 0;
        if (th < lower - eps_angle) excess = (lower - eps_angle) - th;
        if (th > upper + eps_angle) excess = th - (upper + eps_angle);
        if (excess > 0) {
            ++rep.violations;
            if (rep.first_violation < 0) rep.first_violation = static_cast<std::ptrdiff_t>(i);
            if (excess > rep.worst_excess) rep.worst_excess = excess;
        }
    }
    return rep;
}

InvariantReport check_wall_exclusion(const CouplingRun& run, const DomainDescriptor& lip_domain,
                                     double eps_bdry) {
    if (lip_domain.kind != DomainKind::LipDomain)
        throw std::invalid_argument("wall exclusion is defined for Lipschitz graph domains");
    const LipGraphs& g = lip_domain.lip;
    const double lo = std::atan(1.0);                    // pi/4
    const double hi = 2 * std::atan(1.0) - std::atan(g.lambda);  // pi/2 - atan(lambda)
    InvariantReport rep;
    for (size_t i = 0; i < run.count(); ++i) {
        if (!run.live(i)) break;
        double th = run.theta[i];
        if (th < lo || th > hi) continue;
        ++rep.checked;
        Vec x = run.xa(i);
        Vec y = run.ya(i);
        double gap_x = g.f2(x.a[0]) - x.a[1];  // X against the upper graph
        double gap_y = y.a[1] - g.f1(y.a[0]);  // Y against the lower graph
        double gap = std::min(gap_x, gap_y);
        if (gap <= eps_bdry) {
            ++rep.violations;
            if (rep.first_violation < 0) rep.first_violation = static_cast<std::ptrdiff_t>(i);
            double depth = eps_bdry - gap;
            if (depth > rep.worst_excess) rep.worst_excess = depth;
        }
    }
    return rep;
}

MonotonicityReport check_edge_monotonicity(const CouplingRun& run, double lambda, double eps_angle,
                                           double eps_step) {
    const double lo = std::atan(1.0) + eps_angle;
    const double hi = 2 * std::atan(1.0) - std::atan(lambda) - eps_angle;
    const double two_pi = 8 * std::atan(1.0);
    MonotonicityReport rep;
    if (run.count() < 2) return rep;
    for (size_t i = 0; i + 1 < run.count(); ++i) {
        if (!run.live(i) || !run.live(i + 1)) break;
        double th = run.theta[i];
        if (th < lo || th > hi) continue;
        ++rep.qualifying;
        double d = std::remainder(run.theta[i + 1] - th, two_pi);
        if (d > rep.worst_delta) rep.worst_delta = d;
        if (d > eps_step) ++rep.violations;
    }
    return rep;
}

}  // namespace rsde
