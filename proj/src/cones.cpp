#include "rsde/cones.hpp"

#include <algorithm>
#include <cmath>

#include "rsde/errors.hpp"

namespace rsde {
namespace {

// Projection of v onto the orthogonal complement of span{normals[i] : i in mask},
// by modified Gram-Schmidt; rank-deficient selections lose nothing.
Vec project_complement(const std::vector<Vec>& normals, unsigned mask, const Vec& v) {
    Vec q[kMaxDim];
    int nq = 0;
    for (size_t i = 0; i < normals.size(); ++i) {
        if (!(mask & (1u << i))) continue;
        Vec w = normals[i];
        for (int j = 0; j < nq; ++j) w -= dot(w, q[j]) * q[j];
        const double m = norm(w);
        if (m > 1e-12) {
            w *= 1.0 / m;
            q[nq++] = w;
        }
    }
    Vec u = v;
    for (int j = 0; j < nq; ++j) u -= dot(u, q[j]) * q[j];
    return u;
}

// Lexicographic order on active sets viewed as sorted index sequences.
bool lex_less(unsigned a, unsigned b, size_t k) {
    for (size_t i = 0; i < k; ++i) {
        const bool ia = a & (1u << i);
        const bool ib = b & (1u << i);
        if (ia != ib) return ia;  // containing the smaller index wins
    }
    return false;
}

}  // namespace

ConeSpec tangent_cone(const DomainDescriptor& domain, const Vec& z, double eps_bdry) {
    const PointClass pc = classify_point(domain, z, eps_bdry);
    ConeSpec cone;
    cone.base = z;
    cone.dim = domain.dim;
    if (pc.tag == PointTag::Interior) return cone;
    if (pc.tag != PointTag::Boundary)
        throw OutsideDomainError("tangent_cone: point is not in the closure within eps_bdry");
    cone.normals = proximal_normal_generators(domain, z, eps_bdry);
    return cone;
}

ConeSpec tangent_cone(const DomainDescriptor& domain, const Vec& z) {
    return tangent_cone(domain, z, domain.eps_boundary());
}

Vec project_onto_cone(const ConeSpec& cone, const Vec& v) {
    const size_t k = cone.normals.size();
    if (k == 0) return v;
    for (size_t i = 0; i < k; ++i)
        for (size_t j = i + 1; j < k; ++j)
            if (dot(cone.normals[i], cone.normals[j]) <= -1.0 + 1e-9)
                throw DegenerateConeError("project_onto_cone: cone has opposed normals");

    const double feas_tol = 1e-12 * std::max(1.0, norm(v));
    const double tie_tol = 1e-14 * std::max(1.0, norm2(v));
    bool found = false;
    unsigned best_mask = 0;
    Vec best = v;
    double best_d2 = 0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        const Vec u = project_complement(cone.normals, mask, v);
        bool feasible = true;
        for (size_t i = 0; i < k; ++i)
            if (dot(u, cone.normals[i]) < -feas_tol) {
                feasible = false;
                break;
            }
        if (!feasible) continue;
        const double d2 = norm2(u - v);
        if (!found || d2 < best_d2 - tie_tol ||
            (d2 <= best_d2 + tie_tol && lex_less(mask, best_mask, k))) {
            found = true;
            best = u;
            best_d2 = d2;
            best_mask = mask;
        }
    }
    // The full active set always yields a feasible candidate (all normals
    // removed leaves a subspace of the cone), so a survivor exists whenever
    // the degeneracy screen passed.
    if (!found) throw DegenerateConeError("project_onto_cone: no feasible candidate");
    return best;
}

Vec project_product(const ConeSpec& cone_a, const ConeSpec& cone_b, const Vec& v) {
    const Vec ua = project_onto_cone(cone_a, head(v, cone_a.dim));
    const Vec ub = project_onto_cone(cone_b, tail(v, cone_b.dim));
    return concat(ua, ub);
}

}  // namespace rsde
