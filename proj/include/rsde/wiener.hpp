#pragma once

#include <cstdint>
#include <vector>

#include "rsde/linalg.hpp"

namespace rsde {

// Piecewise-linear path on the dyadic grid {m 2^-level}, r coordinates,
// values stored row-major per grid point. Grid values at shared times are
// preserved exactly under refinement; every Gaussian used is a pure function
// of (seed, stream, level, index, coordinate), so the sampling order never
// matters and refinement is reproducible from (seed, base_level, level).
struct DyadicPath {
    int r = 1;
    int level = 0;
    double horizon = 1.0;
    uint64_t seed = 0;
    int base_level = 0;  // level at which the path was originally sampled
    std::vector<double> values;

    size_t cells() const { return values.size() / static_cast<size_t>(r) - 1; }
    size_t points() const { return values.size() / static_cast<size_t>(r); }
    double value(size_t point, int coord) const {
        return values[point * static_cast<size_t>(r) + static_cast<size_t>(coord)];
    }
};

// Brownian sample on the level-N grid: independent increments of
// per-coordinate variance 2^-N. horizon must be a positive multiple of 2^-N.
DyadicPath sample_path(int r, int level, double horizon, uint64_t seed);

// Dyadic refinement by Brownian bridge midpoints: conditional mean is the
// neighbor average, per-coordinate variance 2^-(level+2); existing grid
// values are copied bit-exactly.
DyadicPath refine(const DyadicPath& path);

// Piecewise-linear evaluation; throws OutOfHorizonError outside [0, horizon].
Vec evaluate(const DyadicPath& path, double t);

// Cell slope with the right-limit convention at grid points; the final cell
// extends to t = horizon. Throws OutOfHorizonError outside [0, horizon].
Vec slope(const DyadicPath& path, double t);

// Uniformly sampled multi-coordinate series: t_i = t0 + i*dt.
struct UniformSeries {
    double t0 = 0;
    double dt = 1;
    const double* data = nullptr;
    size_t count = 0;
    int dim = 1;

    Vec at(size_t i) const {
        Vec v(dim);
        for (int k = 0; k < dim; ++k) v[k] = data[i * static_cast<size_t>(dim) + k];
        return v;
    }
    double time(size_t i) const { return t0 + dt * static_cast<double>(i); }
};

UniformSeries view(const DyadicPath& path);

struct HolderEstimate {
    double value;
    bool exact;  // false when the dyadic-stride approximation was used
};

// sup |psi(t_j) - psi(t_i)| / (t_j - t_i)^beta over sample pairs inside
// [s, t]: exact O(n^2) scan up to 10^4 in-window samples, dyadic strides
// (i, i + 2^q) beyond that. Throws EmptyWindowError below two samples.
HolderEstimate holder_norm(const UniformSeries& series, double beta, double s, double t);

// Sum of consecutive increment norms over samples inside [s, t].
double total_variation(const UniformSeries& series, double s, double t);

}  // namespace rsde
