#include "rsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsde/errors.hpp"
#include "rsde/rng.hpp"

namespace rsde {

double pairwise_sum(const double* data, size_t count) {
    if (count == 0) return 0.0;
    if (count <= 8) {
        double s = 0;
        for (size_t i = 0; i < count; ++i) s += data[i];
        return s;
    }
    const size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

double pairwise_sum(const std::vector<double>& data) { return pairwise_sum(data.data(), data.size()); }

MeanSE summarize(const std::vector<double>& values) {
    MeanSE out;
    const size_t n = values.size();
    if (n == 0) return out;
    out.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n < 2) return out;
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) {
        const double d = values[i] - out.mean;
        sq[i] = d * d;
    }
    out.variance = pairwise_sum(sq) / static_cast<double>(n - 1);
    out.std_error = std::sqrt(out.variance / static_cast<double>(n));
    return out;
}

namespace {

constexpr size_t kMinPaths = 100;

// Least-squares slope of log(y) against log(x) over rows with positive data.
bool loglog_slope(const std::vector<StatRow>& rows, double& slope) {
    double sx = 0, sy = 0;
    size_t n = 0;
    for (const auto& r : rows)
        if (r.key > 0 && r.mean > 0) {
            sx += std::log(r.key);
            sy += std::log(r.mean);
            ++n;
        }
    if (n < 2) return false;
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double num = 0, den = 0;
    for (const auto& r : rows)
        if (r.key > 0 && r.mean > 0) {
            const double dx = std::log(r.key) - mx;
            num += dx * (std::log(r.mean) - my);
            den += dx * dx;
        }
    if (den == 0) return false;
    slope = num / den;
    return true;
}

size_t aligned_index(const UniformSeries& s, double t, const char* what) {
    const double raw = (t - s.t0) / s.dt;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-6)
        throw std::invalid_argument(std::string(what) + " is not aligned with the sample grid");
    if (rounded < 0 || rounded >= static_cast<double>(s.count))
        throw std::invalid_argument(std::string(what) + " lies outside the sampled window");
    return static_cast<size_t>(rounded);
}

}  // namespace

StatTable moment_scaling(size_t n_paths, const SeriesGen& gen, int m,
                         const std::vector<double>& lags) {
    if (n_paths < kMinPaths)
        throw InsufficientSamplesError("moment scaling needs at least 100 paths");
    if (m < 0 || m > 2) throw std::invalid_argument("moment order m must be 0, 1, or 2");
    if (lags.empty()) throw std::invalid_argument("no lags given");
    const double q = std::ldexp(1.0, m + 1);  // 2^(m+1)

    // per-lag, per-path averages
    std::vector<std::vector<double>> per_lag(lags.size());
    for (auto& v : per_lag) v.reserve(n_paths);

    for (size_t p = 0; p < n_paths; ++p) {
        const UniformSeries s = gen(p);
        if (s.count < 2) throw std::invalid_argument("series too short for moment scaling");
        for (size_t li = 0; li < lags.size(); ++li) {
            const double raw = lags[li] / s.dt;
            const double rounded = std::round(raw);
            if (std::abs(raw - rounded) > 1e-6 * std::max(1.0, raw))
                throw std::invalid_argument("lag is not grid-aligned");
            const size_t k = static_cast<size_t>(rounded);
            if (k == 0 || k >= s.count) throw std::invalid_argument("lag outside the sample range");
            double acc = 0;
            for (size_t i = 0; i + k < s.count; ++i) {
                const double d2 = norm2(s.at(i + k) - s.at(i));
                acc += std::pow(d2, 0.5 * q);
            }
            per_lag[li].push_back(acc / static_cast<double>(s.count - k));
        }
    }

    StatTable table;
    table.rows.reserve(lags.size());
    for (size_t li = 0; li < lags.size(); ++li) {
        const MeanSE st = summarize(per_lag[li]);
        table.rows.push_back({lags[li], st.mean, st.variance, st.std_error, n_paths});
        table.max_value = std::max(table.max_value, st.mean);
    }
    table.has_slope = loglog_slope(table.rows, table.slope);
    return table;
}

StatTable holder_tail(size_t n_paths, const TripleGen& gen, double beta,
                      const std::vector<double>& r_grid) {
    if (n_paths < kMinPaths) throw InsufficientSamplesError("holder tail needs at least 100 paths");
    if (!(beta > 0) || !(beta < 0.5))
        throw std::invalid_argument("tail diagnostic expects 0 < beta < 1/2");
    if (r_grid.empty()) throw std::invalid_argument("no thresholds given");

    std::vector<double> maxima(n_paths);
    bool approx = false;
    for (size_t p = 0; p < n_paths; ++p) {
        const auto views = gen(p);
        double worst = 0;
        for (const UniformSeries& s : views) {
            const double t_end = s.time(s.count - 1);
            const HolderEstimate h = holder_norm(s, beta, s.t0, t_end);
            approx = approx || !h.exact;
            worst = std::max(worst, h.value);
        }
        maxima[p] = worst;
    }

    StatTable table;
    table.approximate = approx;
    table.rows.reserve(r_grid.size());
    for (const double R : r_grid) {
        size_t hits = 0;
        for (const double v : maxima)
            if (v >= R) ++hits;
        const double pr = static_cast<double>(hits) / static_cast<double>(n_paths);
        const double se = std::sqrt(std::max(pr * (1 - pr), 0.0) / static_cast<double>(n_paths));
        table.rows.push_back({R, pr, pr * (1 - pr), se, n_paths});
        table.max_value = std::max(table.max_value, pr);
    }
    // Tail exponent over the informative thresholds only.
    std::vector<StatRow> inner;
    for (const auto& r : table.rows)
        if (r.mean > 0 && r.mean < 1) inner.push_back(r);
    table.has_slope = loglog_slope(inner, table.slope);
    return table;
}

StatTable variation_growth(const ReflectedTrajectory& traj,
                           const std::vector<std::pair<double, double>>& windows, double R) {
    if (!(R > 0)) throw std::invalid_argument("covering radius must be positive");
    if (windows.empty()) throw std::invalid_argument("no windows given");
    const UniformSeries xs = traj.x_view();
    const UniformSeries ls = traj.l_view();

    StatTable table;
    table.rows.reserve(windows.size());
    for (const auto& [s, t] : windows) {
        if (!(s < t)) throw std::invalid_argument("window must satisfy s < t");
        const size_t i0 = aligned_index(xs, s, "window start");
        const size_t i1 = aligned_index(xs, t, "window end");
        const double dlvar = traj.lvar[i1] - traj.lvar[i0];

        double sup_l = 0;
        for (size_t i = i0; i <= i1; ++i) sup_l = std::max(sup_l, norm(ls.at(i)));

        const HolderEstimate hx = holder_norm(xs, 0.25, s, t);
        table.approximate = table.approximate || !hx.exact;
        const double h4 = hx.value * hx.value * hx.value * hx.value;
        const double denom = ((t - s) * h4 / (R * R * R * R) + 1.0) * sup_l;

        double ratio;
        if (denom > 0) {
            ratio = dlvar / denom;
        } else if (dlvar <= 1e-15) {
            ratio = 0.0;
        } else {
            throw DegenerateWindowError("boundary term grew inside a window with zero sup norm");
        }
        table.rows.push_back({s, ratio, 0.0, 0.0, i1 - i0 + 1});
        table.max_value = std::max(table.max_value, ratio);
    }
    return table;
}

LadderTable weak_convergence_ladder(const DomainDescriptor& domain, const FieldSpec& field,
                                    const std::function<double(const Vec&)>& f, const Vec& x0,
                                    const std::vector<int>& levels, double horizon, size_t n_paths,
                                    int substeps, uint64_t seed) {
    if (n_paths < kMinPaths)
        throw InsufficientSamplesError("convergence ladder needs at least 100 paths");
    if (levels.empty()) throw std::invalid_argument("no levels given");
    for (size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw std::invalid_argument("levels must be strictly increasing");

    const size_t L = levels.size();
    std::vector<std::vector<double>> values(L, std::vector<double>(n_paths));

    ReflectedTrajectory scratch;
    for (size_t p = 0; p < n_paths; ++p) {
        const uint64_t ps = derive_path_seed(seed, p);
        DyadicPath path = sample_path(field.r, levels.front(), horizon, ps);
        for (size_t li = 0; li < L; ++li) {
            while (path.level < levels[li]) path = refine(path);
            integrate_reflected_into(domain, field, path, x0, substeps, scratch);
            values[li][p] = f(scratch.state(scratch.count() - 1));
        }
    }

    LadderTable table;
    table.n_paths = n_paths;
    table.rows.reserve(L);
    for (size_t li = 0; li < L; ++li) {
        const MeanSE st = summarize(values[li]);
        table.rows.push_back({levels[li], st.mean, st.std_error});
    }
    std::vector<double> diff(n_paths);
    for (size_t li = 0; li + 1 < L; ++li) {
        for (size_t p = 0; p < n_paths; ++p) diff[p] = values[li][p] - values[li + 1][p];
        const MeanSE st = summarize(diff);
        table.diffs.push_back({levels[li], std::abs(st.mean), st.std_error});
    }
    return table;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, F - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - F);
    }
    return d;
}

}  // namespace rsde
