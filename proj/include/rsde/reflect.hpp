#pragma once

#include <functional>
#include <vector>

#include "rsde/geometry.hpp"
#include "rsde/linalg.hpp"
#include "rsde/wiener.hpp"

namespace rsde {

enum class FieldKind { Identity, Rotation, MirrorPair, Custom };
enum class FieldSmoothness { Lipschitz, C2 };

// Diffusion field sigma (d x r) plus optional drift b. Built-ins:
//   Identity    sigma = I, any d = r
//   Rotation    d = 2, r = 1, sigma(x) = (x2, -x1)
//   MirrorPair  d = 4, r = 2, state (x, y): the x block is the identity and
//               the y block reflects across the hyperplane normal to y - x
struct FieldSpec {
    FieldKind kind = FieldKind::Identity;
    FieldSmoothness smooth = FieldSmoothness::C2;
    int d = 1, r = 1;
    std::function<Mat(const Vec&)> sigma_fn;  // Custom only
    std::function<Vec(const Vec&)> drift_fn;  // optional
    bool has_drift = false;

    Mat sigma(const Vec& x) const;
    Vec sigma_apply(const Vec& x, const Vec& v) const;  // sigma(x) * v without forming the matrix
    Vec drift(const Vec& x) const;
};

FieldSpec make_identity_field(int d);
FieldSpec make_rotation_field();
FieldSpec make_mirror_pair_field();
FieldSpec make_custom_field(int d, int r, std::function<Mat(const Vec&)> sigma,
                            std::function<Vec(const Vec&)> drift, FieldSmoothness smooth);

// Sampled bounds of a field over a domain: sup of the operator norm estimate
// and a Lipschitz constant estimate from sample pairs.
struct FieldBounds {
    double sup_norm;
    double lipschitz;
};
FieldBounds estimate_field_bounds(const FieldSpec& field, const DomainDescriptor& domain,
                                  size_t samples);

// One reflected trajectory on the substep grid t_i = i * dt with
// dt = 2^-level / substeps: states x, boundary terms l (componentwise), and
// the cumulative variation lvar of l. input_variation accumulates the total
// variation of the composed input x0 + integral of sigma dw + drift dt, which
// dominates lvar by construction of the catch-up projection.
struct ReflectedTrajectory {
    int dim = 1;
    double dt = 0;
    int level = 0;
    int substeps = 1;
    std::vector<double> x, l;   // count * dim
    std::vector<double> lvar;   // count
    double input_variation = 0;

    size_t count() const { return lvar.size(); }
    double time(size_t i) const { return dt * static_cast<double>(i); }
    Vec state(size_t i) const {
        Vec v(dim);
        for (int k = 0; k < dim; ++k) v[k] = x[i * static_cast<size_t>(dim) + k];
        return v;
    }
    UniformSeries x_view() const { return {0, dt, x.data(), count(), dim}; }
    UniformSeries l_view() const { return {0, dt, l.data(), count(), dim}; }
    UniformSeries lvar_view() const { return {0, dt, lvar.data(), count(), 1}; }
};

inline constexpr int kDefaultSubsteps = 1 << 6;
inline constexpr int kMaxSubsteps = 1 << 14;

// Catch-up scheme: within each dyadic cell the driver slope is frozen and
// every substep projects the Euler update back onto the closure. A projection
// farther than reach/2 restarts the trajectory with doubled substeps, up to
// kMaxSubsteps, then surfaces OutOfReachError.
ReflectedTrajectory integrate_reflected(const DomainDescriptor& domain, const FieldSpec& field,
                                        const DyadicPath& path, const Vec& x0, int substeps);
void integrate_reflected_into(const DomainDescriptor& domain, const FieldSpec& field,
                              const DyadicPath& path, const Vec& x0, int substeps,
                              ReflectedTrajectory& out);

// Tangent-cone form: the substep velocity is the cone projection of
// sigma(x) v + b(x) at the current state, then the update is snapped to the
// closure. Same substep-doubling protocol as the catch-up scheme.
ReflectedTrajectory integrate_tangent_form(const DomainDescriptor& domain, const FieldSpec& field,
                                           const DyadicPath& path, const Vec& x0, int substeps);

struct PicardResult {
    ReflectedTrajectory traj;
    int iterations;
    double residual;
};

// Fixed-point iteration y -> Gamma(x0 + integral sigma(y) dw + drift dt) on
// the substep grid, where Gamma is the catch-up map with identity field. The
// map contracts only while Lip(sigma) times the driver variation is small, so
// the horizon is split into variation-budgeted windows and the fixed point is
// chained across them. Within each window the seed iterate composes sigma
// along the constant start state (uncounted); counted iterations stop when
// the sup distance between successive iterates drops below tol. iterations
// and residual report the worst window. Throws NoConvergenceError when a
// window exhausts max_iter.
PicardResult solve_picard(const DomainDescriptor& domain, const FieldSpec& field,
                          const DyadicPath& path, const Vec& x0, int substeps, double tol,
                          int max_iter);

// Exact reflection map on [0, infinity) for a sampled scalar input:
// l_i = max(0, max_{j<=i}(-w_j) - x0), x_i = x0 + w_i + l_i.
struct Reflected1D {
    std::vector<double> x, l;
};
Reflected1D skorohod_map_1d(const std::vector<double>& w, double x0);

// (1/2) sum_i (D_{V_i} V_i)(z) over columns V_i of sigma, with each Jacobian
// formed by central differences of step fd_step. MirrorPair states closer to
// the pair diagonal than 10 * fd_step throw SingularPointError.
Vec stratonovich_correction(const FieldSpec& field, const Vec& z, double fd_step);

}  // namespace rsde
