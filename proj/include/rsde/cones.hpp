#pragma once

#include <vector>

#include "rsde/geometry.hpp"
#include "rsde/linalg.hpp"

namespace rsde {

// Polyhedral tangent cone {u : u . n_i >= 0} at a base point. k = 0 means the
// whole space (interior points).
struct ConeSpec {
    Vec base;
    int dim = 0;
    std::vector<Vec> normals;  // unit inward normals, at most 4
};

// Tangent cone of the closure at z: empty constraint set in the interior,
// the proximal normal generators of faces within eps_bdry on the boundary.
// Throws OutsideDomainError when z is not in the closure within eps_bdry.
ConeSpec tangent_cone(const DomainDescriptor& domain, const Vec& z, double eps_bdry);
ConeSpec tangent_cone(const DomainDescriptor& domain, const Vec& z);

// Euclidean projection onto the cone by active-set enumeration: every subset
// of constraints is treated as equalities, the input is projected onto the
// orthogonal complement of the selected normals, infeasible candidates are
// discarded, and the nearest survivor wins (ties to the lexicographically
// smallest active set). Throws DegenerateConeError on (near-)opposed normals.
Vec project_onto_cone(const ConeSpec& cone, const Vec& v);

// Componentwise projection for a product of cones on complementary blocks.
Vec project_product(const ConeSpec& cone_a, const ConeSpec& cone_b, const Vec& v);

}  // namespace rsde
