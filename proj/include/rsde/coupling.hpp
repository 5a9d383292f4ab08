#pragma once

#include <cstddef>
#include <vector>

#include "rsde/geometry.hpp"
#include "rsde/linalg.hpp"
#include "rsde/wiener.hpp"

namespace rsde {

enum class CouplingKind { Synchronous, Mirror };

// Two reflected processes on a planar domain driven by one planar path.
// theta[i] = atan2((Y-X)_2, (Y-X)_1) while the pair is live and NaN from
// coalesce_index on. tau() is the first coalesced sample time.
struct CouplingRun {
    CouplingKind kind = CouplingKind::Synchronous;
    double dt = 0;
    int level = 0;
    int substeps = 1;
    double delta_coal = 0;
    std::vector<double> x, y;   // count * 2
    std::vector<double> theta;  // count
    std::ptrdiff_t coalesce_index = -1;
    // Cumulative boundary-term variation and composed-input variation for
    // each component, accumulated while the pair is live.
    double lvar_x = 0, lvar_y = 0;
    double input_variation_x = 0, input_variation_y = 0;

    size_t count() const { return theta.size(); }
    bool coalesced() const { return coalesce_index >= 0; }
    bool live(size_t i) const {
        return coalesce_index < 0 || i < static_cast<size_t>(coalesce_index);
    }
    double tau() const { return coalesce_index < 0 ? -1.0 : dt * static_cast<double>(coalesce_index); }
    Vec xa(size_t i) const { return Vec(x[2 * i], x[2 * i + 1]); }
    Vec ya(size_t i) const { return Vec(y[2 * i], y[2 * i + 1]); }
};

double angle(const Vec& x, const Vec& y);

// Both components move with the same increments and reflect independently;
// once |X - Y| < delta_coal the pair coalesces and Y is set equal to X.
// delta_coal <= 0 selects the default 1e-8 * diameter.
CouplingRun run_synchronous(const DomainDescriptor& domain, const DyadicPath& path, const Vec& x0,
                            const Vec& y0, int substeps, double delta_coal = -1.0);

// Y moves with the increment reflected across the hyperplane normal to
// Y - X (recomputed at each substep start); both components freeze at the
// coalescence time. Besides |X - Y| < delta_coal, a substep whose update
// reverses the direction of Y - X (the pair crossing the diagonal inside one
// substep) also coalesces, frozen at the substep start.
CouplingRun run_mirror(const DomainDescriptor& domain, const DyadicPath& path, const Vec& x0,
                       const Vec& y0, int substeps, double delta_coal = -1.0);

struct InvariantReport {
    size_t checked = 0;
    size_t violations = 0;
    double worst_excess = 0;
    std::ptrdiff_t first_violation = -1;
    bool pass() const { return violations == 0; }
};

// Counts live samples with theta outside [lower - eps_angle, upper + eps_angle].
InvariantReport check_cone_invariant(const CouplingRun& run, double lower, double upper,
                                     double eps_angle);

// While theta is in [pi/4, pi/2 - atan(lambda)], X must keep off the upper
// graph and Y off the lower graph (vertical proximity within eps_bdry counts
// as contact).
InvariantReport check_wall_exclusion(const CouplingRun& run, const DomainDescriptor& lip_domain,
                                     double eps_bdry);

struct MonotonicityReport {
    size_t qualifying = 0;
    size_t violations = 0;
    double worst_delta = 0;
    bool pass() const { return violations == 0; }
};

// Over consecutive live samples whose angle starts in the buffer band
// [pi/4 + eps_angle, pi/2 - atan(lambda) - eps_angle], the angle increment
// must not exceed eps_step.
MonotonicityReport check_edge_monotonicity(const CouplingRun& run, double lambda, double eps_angle,
                                           double eps_step = 1e-6);

}  // namespace rsde
