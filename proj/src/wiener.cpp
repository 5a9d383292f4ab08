#include "rsde/wiener.hpp"

#include <cmath>
#include <stdexcept>

#include "rsde/errors.hpp"
#include "rsde/rng.hpp"

namespace rsde {
namespace {

size_t horizon_cells(int level, double horizon) {
    const double cells = horizon * std::ldexp(1.0, level);
    const double rounded = std::round(cells);
    if (!(horizon > 0) || std::fabs(cells - rounded) > 1e-9 || rounded < 1)
        throw std::invalid_argument("horizon must be a positive multiple of 2^-level");
    return static_cast<size_t>(rounded);
}

}  // namespace

DyadicPath sample_path(int r, int level, double horizon, uint64_t seed) {
    if (r < 1 || r > kMaxDim) throw std::invalid_argument("path dimension must be 1..4");
    if (level < 0 || level > 40) throw std::invalid_argument("level must be 0..40");
    DyadicPath p;
    p.r = r;
    p.level = level;
    p.horizon = horizon;
    p.seed = seed;
    p.base_level = level;
    const size_t cells = horizon_cells(level, horizon);
    p.values.assign((cells + 1) * static_cast<size_t>(r), 0.0);
    const double sd = std::sqrt(std::ldexp(1.0, -level));
    for (size_t m = 0; m < cells; ++m) {
        for (int i = 0; i < r; ++i) {
            const double z = gaussian_at(seed, StreamTag::Increment, static_cast<uint64_t>(level),
                                         m, static_cast<uint64_t>(i));
            p.values[(m + 1) * r + i] = p.values[m * r + i] + sd * z;
        }
    }
    return p;
}

DyadicPath refine(const DyadicPath& path) {
    DyadicPath q;
    q.r = path.r;
    q.level = path.level + 1;
    q.horizon = path.horizon;
    q.seed = path.seed;
    q.base_level = path.base_level;
    const size_t cells = path.cells();
    q.values.assign((2 * cells + 1) * static_cast<size_t>(path.r), 0.0);
    // Midpoint of a cell of width 2^-level: mean of the endpoints plus noise
    // of variance 2^-(level+2).
    const double sd = std::sqrt(std::ldexp(1.0, -(path.level + 2)));
    for (size_t m = 0; m <= cells; ++m)
        for (int i = 0; i < path.r; ++i)
            q.values[(2 * m) * path.r + i] = path.values[m * path.r + i];
    for (size_t m = 0; m < cells; ++m) {
        for (int i = 0; i < path.r; ++i) {
            const double mid =
                0.5 * (path.values[m * path.r + i] + path.values[(m + 1) * path.r + i]);
            const double z = gaussian_at(path.seed, StreamTag::Midpoint,
                                         static_cast<uint64_t>(q.level), 2 * m + 1,
                                         static_cast<uint64_t>(i));
            q.values[(2 * m + 1) * path.r + i] = mid + sd * z;
        }
    }
    return q;
}

namespace {

size_t locate_cell(const DyadicPath& path, double t, double& frac) {
    const double tol = 1e-12 * std::max(1.0, path.horizon);
    if (t < -tol || t > path.horizon + tol)
        throw OutOfHorizonError("path evaluation outside [0, horizon]");
    const double pos = std::max(t, 0.0) * std::ldexp(1.0, path.level);
    const size_t cells = path.cells();
    size_t m = static_cast<size_t>(pos);
    if (m >= cells) m = cells - 1;  // right-limit convention collapses at the horizon
    frac = pos - static_cast<double>(m);
    return m;
}

}  // namespace

Vec evaluate(const DyadicPath& path, double t) {
    double frac;
    const size_t m = locate_cell(path, t, frac);
    Vec v(path.r);
    for (int i = 0; i < path.r; ++i) {
        const double a = path.values[m * path.r + i];
        const double b = path.values[(m + 1) * path.r + i];
        v[i] = a + frac * (b - a);
    }
    return v;
}

Vec slope(const DyadicPath& path, double t) {
    double frac;
    const size_t m = locate_cell(path, t, frac);
    const double scale = std::ldexp(1.0, path.level);
    Vec v(path.r);
    for (int i = 0; i < path.r; ++i)
        v[i] = scale * (path.values[(m + 1) * path.r + i] - path.values[m * path.r + i]);
    return v;
}

UniformSeries view(const DyadicPath& path) {
    UniformSeries s;
    s.t0 = 0;
    s.dt = std::ldexp(1.0, -path.level);
    s.data = path.values.data();
    s.count = path.points();
    s.dim = path.r;
    return s;
}

namespace {

void window_indices(const UniformSeries& series, double s, double t, size_t& i0, size_t& i1) {
    const double tol = 1e-9 * std::max(1.0, series.dt * static_cast<double>(series.count));
    if (!(t > s)) throw EmptyWindowError("window must satisfy s < t");
    const double lo = (s - series.t0) / series.dt;
    const double hi = (t - series.t0) / series.dt;
    const double i0f = std::ceil(lo - tol);
    const double i1f = std::floor(hi + tol);
    i0 = i0f <= 0 ? 0 : static_cast<size_t>(i0f);
    i1 = i1f < 0 ? 0 : std::min(static_cast<size_t>(i1f), series.count - 1);
    if (i1 <= i0) throw EmptyWindowError("window holds fewer than two samples");
}

double pair_ratio(const UniformSeries& series, size_t i, size_t j, double beta) {
    double d2 = 0;
    for (int k = 0; k < series.dim; ++k) {
        const double d = series.data[j * series.dim + k] - series.data[i * series.dim + k];
        d2 += d * d;
    }
    const double dt = series.dt * static_cast<double>(j - i);
    return std::sqrt(d2) / std::pow(dt, beta);
}

}  // namespace

HolderEstimate holder_norm(const UniformSeries& series, double beta, double s, double t) {
    size_t i0, i1;
    window_indices(series, s, t, i0, i1);
    const size_t n = i1 - i0 + 1;
    double best = 0;
    if (n <= 10000) {
        for (size_t i = i0; i < i1; ++i)
            for (size_t j = i + 1; j <= i1; ++j) best = std::max(best, pair_ratio(series, i, j, beta));
        return {best, true};
    }
    for (size_t stride = 1; stride < n; stride *= 2)
        for (size_t i = i0; i + stride <= i1; ++i)
            best = std::max(best, pair_ratio(series, i, i + stride, beta));
    return {best, false};
}

double total_variation(const UniformSeries& series, double s, double t) {
    size_t i0, i1;
    window_indices(series, s, t, i0, i1);
    double tv = 0;
    for (size_t i = i0; i < i1; ++i) {
        double d2 = 0;
        for (int k = 0; k < series.dim; ++k) {
            const double d = series.data[(i + 1) * series.dim + k] - series.data[i * series.dim + k];
            d2 += d * d;
        }
        tv += std::sqrt(d2);
    }
    return tv;
}

}  // namespace rsde
