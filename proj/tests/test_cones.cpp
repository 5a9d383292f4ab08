#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsde/cones.hpp"
#include "rsde/errors.hpp"
#include "rsde/geometry.hpp"
#include "rsde/rng.hpp"

using namespace rsde;

namespace {

const double kPi = 4 * std::atan(1.0);

Vec unit2(double theta) { return Vec(std::cos(theta), std::sin(theta)); }

Vec random_unit(int dim, uint64_t seed, uint64_t idx) {
    Vec v(dim);
    double m = 0;
    while (m < 1e-6) {
        for (int k = 0; k < dim; ++k)
            v[k] = gaussian_at(seed, StreamTag::Generic, 3, idx, static_cast<uint64_t>(k));
        m = norm(v);
        ++idx;  // retry with fresh draws in the measure-zero degenerate case
    }
    return (1.0 / m) * v;
}

// Random cone with a guaranteed strictly feasible direction: all normals are
// small perturbations of one base direction.
ConeSpec random_cone(int dim, int k, uint64_t seed, uint64_t idx) {
    ConeSpec cone;
    cone.dim = dim;
    cone.base = Vec::zero(dim);
    Vec b = random_unit(dim, seed, 1000 + idx * 7);
    for (int j = 0; j < k; ++j) {
        Vec p = random_unit(dim, seed, 2000 + idx * 7 + static_cast<uint64_t>(j));
        Vec n = normalized(b + 0.8 * p);
        cone.normals.push_back(n);
    }
    return cone;
}

bool feasible(const ConeSpec& cone, const Vec& z, double tol) {
    for (const Vec& n : cone.normals)
        if (dot(z, n) < -tol) return false;
    return true;
}

// Nearest cone point of the form max(0, v.d) d over feasible directions d.
double grid_distance(const ConeSpec& cone, const Vec& v, const std::vector<Vec>& dirs) {
    double best = norm(v);  // apex candidate
    for (const Vec& d : dirs) {
        if (!feasible(cone, d, 0.0)) continue;
        double s = std::max(0.0, dot(v, d));
        best = std::min(best, norm(v - s * d));
    }
    return best;
}

std::vector<Vec> circle_grid(size_t n) {
    std::vector<Vec> dirs;
    dirs.reserve(n);
    for (size_t i = 0; i < n; ++i) dirs.push_back(unit2(2 * kPi * i / n));
    return dirs;
}

// Fibonacci sphere, near-uniform directions in 3D.
std::vector<Vec> sphere_grid(size_t n) {
    std::vector<Vec> dirs;
    dirs.reserve(n);
    const double ga = kPi * (3.0 - std::sqrt(5.0));
    for (size_t i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / n;
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * static_cast<double>(i);
        Vec d(3);
        d[0] = rho * std::cos(phi);
        d[1] = rho * std::sin(phi);
        d[2] = z;
        dirs.push_back(d);
    }
    return dirs;
}

Vec random_vec(int dim, double scale, uint64_t seed, uint64_t idx) {
    Vec v(dim);
    for (int k = 0; k < dim; ++k)
        v[k] = scale * (2 * uniform_at(seed, StreamTag::Generic, 4, idx, static_cast<uint64_t>(k)) - 1);
    return v;
}

}  // namespace

TEST_CASE("whole-space, half-space, and apex projections") {
    ConeSpec whole;
    whole.dim = 2;
    whole.base = Vec(0.0, 0.0);
    Vec v(3.0, -1.0);
    Vec u = project_onto_cone(whole, v);
    CHECK(u[0] == doctest::Approx(3.0));
    CHECK(u[1] == doctest::Approx(-1.0));

    ConeSpec half = whole;
    half.normals = {Vec(0.0, 1.0)};
    u = project_onto_cone(half, Vec(1.0, -2.0));
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == doctest::Approx(0.0).epsilon(1e-12));

    // Both normals push (1,-1) all the way to the apex.
    ConeSpec wedge = whole;
    const double s = 1.0 / std::sqrt(2.0);
    wedge.normals = {Vec(0.0, 1.0), Vec(-s, s)};
    u = project_onto_cone(wedge, Vec(1.0, -1.0));
    CHECK(norm(u) <= 1e-12);

    // An obtuse sector: v points away from every feasible direction.
    ConeSpec sector = whole;
    sector.normals = {Vec(0.0, 1.0), Vec(s, -s)};
    u = project_onto_cone(sector, Vec(-1.0, 0.5));
    CHECK(norm(u) <= 1e-12);
}

TEST_CASE("degenerate antipodal normals are rejected") {
    ConeSpec cone;
    cone.dim = 2;
    cone.base = Vec(0.0, 0.0);
    cone.normals = {Vec(0.0, 1.0), Vec(0.0, -1.0)};
    CHECK_THROWS_AS(project_onto_cone(cone, Vec(1.0, 1.0)), DegenerateConeError);
}

TEST_CASE("projection invariants on random cones") {
    for (uint64_t i = 0; i < 300; ++i) {
        int dim = (i % 2 == 0) ? 2 : 3;
        int k = 1 + static_cast<int>(i % 3);
        if (dim == 2) k = 1 + static_cast<int>(i % 2);
        ConeSpec cone = random_cone(dim, k, 0xC0DEULL, i);
        Vec v = random_vec(dim, 3.0, 0xC0DEULL, i);
        Vec u = project_onto_cone(cone, v);

        // Feasibility.
        for (const Vec& n : cone.normals) CHECK(dot(u, n) >= -1e-12);
        // Idempotence.
        CHECK(norm(project_onto_cone(cone, u) - u) <= 1e-12);
        // Positive homogeneity.
        Vec u3 = project_onto_cone(cone, 3.0 * v);
        CHECK(norm(u3 - 3.0 * u) <= 1e-12 * (1 + norm(u3)));
        // Nonexpansiveness.
        Vec v2 = random_vec(dim, 3.0, 0xC0DE2ULL, i);
        Vec w2 = project_onto_cone(cone, v2);
        CHECK(norm(u - w2) <= norm(v - v2) + 1e-12);
        // Optimality certificate: v - u is polar to the cone.
        size_t found = 0;
        for (uint64_t j = 0; j < 4000 && found < 1000; ++j) {
            Vec z = random_unit(dim, 0xFADEULL, i * 4000 + j);
            if (!feasible(cone, z, 0.0)) continue;
            ++found;
            CHECK(dot(v - u, z) <= 1e-10);
        }
        CHECK(found > 0);
        CHECK(std::fabs(dot(v - u, u)) <= 1e-10 * (1 + norm2(v)));
    }
}

TEST_CASE("active-set projection matches dense direction search") {
    auto dirs2 = circle_grid(4096);
    auto dirs3 = sphere_grid(20000);
    double worst = 0;
    for (uint64_t i = 0; i < 1000; ++i) {
        int dim = (i < 700) ? 2 : 3;
        int k = (dim == 2) ? 1 + static_cast<int>(i % 2) : 1 + static_cast<int>(i % 3);
        ConeSpec cone = random_cone(dim, k, 0xBEDEULL, i);
        Vec v = random_vec(dim, 2.0, 0xBEDEULL, i);
        Vec u = project_onto_cone(cone, v);
        double exact = norm(v - u);
        double brute = grid_distance(cone, v, dim == 2 ? dirs2 : dirs3);
        // The exact projection can never lose to a feasible grid candidate.
        CHECK(exact <= brute + 1e-12);
        double res = (dim == 2 ? 2 * kPi / 4096 : 0.03) * norm(v);
        CHECK(brute - exact <= res);
        worst = std::max(worst, brute - exact);
    }
    CHECK(worst >= 0);
}

TEST_CASE("tangent cones from domains") {
    DomainDescriptor rect = make_rectangle(-1, 1, 0, 2);
    ConeSpec interior = tangent_cone(rect, Vec(0.0, 1.0));
    CHECK(interior.normals.empty());

    ConeSpec corner = tangent_cone(rect, Vec(1.0, 0.0));
    REQUIRE(corner.normals.size() == 2);
    auto ns = corner.normals;
    std::sort(ns.begin(), ns.end(), [](const Vec& a, const Vec& b) { return a[0] < b[0]; });
    CHECK(ns[0][0] == doctest::Approx(-1.0));
    CHECK(ns[1][1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(tangent_cone(rect, Vec(5.0, 5.0)), OutsideDomainError);

    DomainDescriptor prod = make_product(rect, rect);
    ConeSpec mixed = tangent_cone(prod, concat(Vec(1.0, 0.0), Vec(0.0, 1.0)));
    REQUIRE(mixed.normals.size() == 2);
    for (const Vec& n : mixed.normals) {
        CHECK(n.n == 4);
        CHECK(n[2] == 0.0);
        CHECK(n[3] == 0.0);
    }
}

TEST_CASE("product projection splits across blocks and matches joint enumeration") {
    ConeSpec whole2;
    whole2.dim = 2;
    whole2.base = Vec(0.0, 0.0);

    ConeSpec half = whole2;
    half.normals = {Vec(0.0, 1.0)};

    Vec v = concat(Vec(1.0, -2.0), Vec(5.0, 5.0));
    Vec u = project_product(half, whole2, v);
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(u[2] == doctest::Approx(5.0));
    CHECK(u[3] == doctest::Approx(5.0));

    // Corner x corner: blockwise result equals one joint 4D active-set run.
    for (uint64_t i = 0; i < 50; ++i) {
        ConeSpec ca = random_cone(2, 2, 0xAB1EULL, i);
        ConeSpec cb = random_cone(2, 2, 0xAB2EULL, i);
        ConeSpec joint;
        joint.dim = 4;
        joint.base = Vec::zero(4);
        for (const Vec& n : ca.normals) joint.normals.push_back(concat(n, Vec(0.0, 0.0)));
        for (const Vec& n : cb.normals) joint.normals.push_back(concat(Vec(0.0, 0.0), n));
        Vec w = random_vec(4, 2.0, 0xAB3EULL, i);
        Vec split = project_product(ca, cb, w);
        Vec whole = project_onto_cone(joint, w);
        CHECK(norm(split - whole) <= 1e-10);
    }
}
