#include <cmath>
#include <vector>

#include "doctest.h"
#include "rsde/errors.hpp"
#include "rsde/wiener.hpp"

using namespace rsde;

namespace {

UniformSeries series_of(const std::vector<double>& data, double dt, int dim) {
    return {0.0, dt, data.data(), data.size() / static_cast<size_t>(dim), dim};
}

}  // namespace

TEST_CASE("sampled paths start at zero and are reproducible") {
    DyadicPath p = sample_path(2, 4, 1.0, 99);
    CHECK(p.value(0, 0) == 0.0);
    CHECK(p.value(0, 1) == 0.0);
    CHECK(p.cells() == 16);
    CHECK(p.points() == 17);

    DyadicPath q = sample_path(2, 4, 1.0, 99);
    CHECK(p.values == q.values);
    DyadicPath r = sample_path(2, 4, 1.0, 100);
    CHECK(p.values != r.values);
}

TEST_CASE("terminal value has unit variance across seeds") {
    const size_t n = 100000;
    double sum = 0, sumsq = 0;
    for (size_t s = 0; s < n; ++s) {
        DyadicPath p = sample_path(1, 0, 1.0, s);
        double w1 = p.value(1, 0);
        sum += w1;
        sumsq += w1 * w1;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(var >= 0.99);
    CHECK(var <= 1.01);
}

TEST_CASE("refinement preserves coarse grid values bit-for-bit") {
    DyadicPath p = sample_path(2, 3, 1.0, 7);
    DyadicPath q = refine(p);
    CHECK(q.level == 4);
    CHECK(q.cells() == 2 * p.cells());
    for (size_t m = 0; m < p.points(); ++m)
        for (int k = 0; k < 2; ++k) CHECK(q.value(2 * m, k) == p.value(m, k));

    DyadicPath q2 = refine(refine(p));
    CHECK(q2.level == 5);
    CHECK(q2.cells() == 4 * p.cells());
    for (size_t m = 0; m < p.points(); ++m)
        for (int k = 0; k < 2; ++k) CHECK(q2.value(4 * m, k) == p.value(m, k));
}

TEST_CASE("bridge midpoints have the conditional variance of the formula") {
    const int N = 2;
    const size_t n = 100000;
    double sum = 0, sumsq = 0;
    for (size_t s = 0; s < n; ++s) {
        DyadicPath p = sample_path(1, N, 1.0, 500000 + s);
        DyadicPath q = refine(p);
        // Midpoint of the first coarse cell minus the neighbor average.
        double mid = q.value(1, 0) - 0.5 * (p.value(0, 0) + p.value(1, 0));
        sum += mid;
        sumsq += mid * mid;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    double expect = std::ldexp(1.0, -(N + 2));
    CHECK(var >= 0.97 * expect);
    CHECK(var <= 1.03 * expect);
}

TEST_CASE("evaluation interpolates linearly and slopes use the right cell") {
    DyadicPath p = sample_path(1, 3, 1.0, 11);
    double dt = std::ldexp(1.0, -3);
    for (size_t m = 0; m < p.points(); ++m) {
        Vec v = evaluate(p, dt * static_cast<double>(m));
        CHECK(v[0] == p.value(m, 0));
    }
    Vec mid = evaluate(p, 1.5 * dt);
    CHECK(mid[0] == doctest::Approx(0.5 * (p.value(1, 0) + p.value(2, 0))));

    Vec s0 = slope(p, 0.0);
    CHECK(s0[0] == doctest::Approx(8.0 * (p.value(1, 0) - p.value(0, 0))));
    Vec s1 = slope(p, dt);  // right-limit convention at grid points
    CHECK(s1[0] == doctest::Approx(8.0 * (p.value(2, 0) - p.value(1, 0))));
    Vec send = slope(p, 1.0);  // final cell extends to the horizon
    CHECK(send[0] == doctest::Approx(8.0 * (p.value(8, 0) - p.value(7, 0))));

    CHECK_THROWS_AS(evaluate(p, 1.0 + 1e-9), OutOfHorizonError);
    CHECK_THROWS_AS(evaluate(p, -1e-9), OutOfHorizonError);
    CHECK_THROWS_AS(slope(p, 2.0), OutOfHorizonError);
}

TEST_CASE("refinement consistency at coarse grid times") {
    DyadicPath p = sample_path(2, 4, 1.0, 2024);
    DyadicPath q = refine(p);
    double dt = std::ldexp(1.0, -4);
    for (size_t m = 0; m < p.points(); ++m) {
        Vec a = evaluate(p, dt * static_cast<double>(m));
        Vec b = evaluate(q, dt * static_cast<double>(m));
        CHECK(a[0] == b[0]);
        CHECK(a[1] == b[1]);
    }
}

TEST_CASE("holder norm on frozen sequences") {
    std::vector<double> constant = {2.0, 2.0, 2.0, 2.0};
    HolderEstimate h = holder_norm(series_of(constant, 0.25, 1), 0.5, 0.0, 1.0);
    CHECK(h.value == doctest::Approx(0.0));
    CHECK(h.exact);

    std::vector<double> ramp = {0.0, 0.25, 0.5, 0.75, 1.0};
    h = holder_norm(series_of(ramp, 0.25, 1), 1.0, 0.0, 1.0);
    CHECK(h.value == doctest::Approx(1.0));

    std::vector<double> two = {0.0, 1.0};
    h = holder_norm(series_of(two, 0.25, 1), 0.5, 0.0, 0.25);
    CHECK(h.value == doctest::Approx(2.0));

    CHECK_THROWS_AS(holder_norm(series_of(two, 0.25, 1), 0.5, 0.05, 0.2), EmptyWindowError);
}

TEST_CASE("total variation on frozen sequences") {
    std::vector<double> ramp = {0.0, 2.5, 5.0};
    CHECK(total_variation(series_of(ramp, 0.5, 1), 0.0, 1.0) == doctest::Approx(5.0));

    std::vector<double> zigzag = {0.0, 1.0, 0.0};
    CHECK(total_variation(series_of(zigzag, 0.5, 1), 0.0, 1.0) == doctest::Approx(2.0));

    std::vector<double> legs = {0.0, 0.0, 3.0, 4.0, 0.0, 8.0};
    CHECK(total_variation(series_of(legs, 0.5, 2), 0.0, 1.0) == doctest::Approx(10.0));
}

TEST_CASE("grid-aligned increments have the Brownian second moment") {
    const size_t n = 10000;
    const int N = 4;
    const double dt = std::ldexp(1.0, -N);
    for (size_t lagc : {1, 4}) {
        double acc = 0;
        size_t cnt = 0;
        for (size_t s = 0; s < n; ++s) {
            DyadicPath p = sample_path(2, N, 1.0, 900000 + s);
            for (size_t m = 0; m + lagc < p.points(); m += lagc) {
                double d0 = p.value(m + lagc, 0) - p.value(m, 0);
                double d1 = p.value(m + lagc, 1) - p.value(m, 1);
                acc += d0 * d0 + d1 * d1;
                ++cnt;
            }
        }
        double expect = 2.0 * dt * static_cast<double>(lagc);
        CHECK(acc / static_cast<double>(cnt) == doctest::Approx(expect).epsilon(0.05));
    }
}
