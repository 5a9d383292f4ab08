#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rsde/geometry.hpp"
#include "rsde/linalg.hpp"
#include "rsde/reflect.hpp"
#include "rsde/wiener.hpp"

namespace rsde {

// Produces the series for one path index; the backing storage must stay
// valid until the next invocation (generators own a reusable buffer).
using SeriesGen = std::function<UniformSeries(size_t)>;
// Same contract, yielding (driver, state, boundary term) views per path.
using TripleGen = std::function<std::array<UniformSeries, 3>(size_t)>;

struct StatRow {
    double key = 0;  // lag, threshold R, or window start
    double mean = 0;
    double variance = 0;
    double std_error = 0;
    size_t samples = 0;
};

struct StatTable {
    std::vector<StatRow> rows;
    double slope = 0;      // log-log least-squares fit where applicable
    bool has_slope = false;
    double max_value = 0;  // max of row means
    bool approximate = false;  // some Holder estimate used the dyadic-stride scan
};

struct NamedCheck {
    std::string name;
    bool pass = false;
    double value = 0;
    double threshold = 0;
};

struct EnsembleSummary {
    std::string id;
    std::vector<std::pair<std::string, StatTable>> tables;
    std::vector<NamedCheck> checks;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Per lag tau: the Monte-Carlo mean over paths of the per-path average of
// |psi(t + tau) - psi(t)|^(2^(m+1)) across grid-aligned pairs, plus a log-log
// slope fit across lags. m in {0, 1, 2}; lags must be multiples of the sample
// spacing. Throws InsufficientSamplesError below 100 paths.
StatTable moment_scaling(size_t n_paths, const SeriesGen& gen, int m,
                         const std::vector<double>& lags);

// Empirical tail P(max of the three beta-Holder norms >= R) per threshold in
// r_grid, with a log-log tail-exponent fit over thresholds with tails in
// (0, 1). Throws InsufficientSamplesError below 100 paths.
StatTable holder_tail(size_t n_paths, const TripleGen& gen, double beta,
                      const std::vector<double>& r_grid);

// Per window (s, t): the ratio of the boundary-variation increment
// lvar(t) - lvar(s) to ((t-s) R^-4 ||X||_{1/4,[s,t]}^4 + 1) * sup_[s,t] |L|.
// R is the covering-ball radius from the domain certificate. A window with
// zero denominator and zero increment reports ratio 0; a zero denominator
// with nonzero increment throws DegenerateWindowError.
StatTable variation_growth(const ReflectedTrajectory& traj,
                           const std::vector<std::pair<double, double>>& windows, double R);

struct LadderRow {
    int level = 0;
    double mean = 0;
    double std_error = 0;
};
struct LadderDiff {
    int level = 0;       // Delta between this level and the next one
    double delta = 0;    // |mean difference|, estimated per path then averaged
    double std_error = 0;
};
struct LadderTable {
    std::vector<LadderRow> rows;
    std::vector<LadderDiff> diffs;
    size_t n_paths = 0;
};

// For each path index: sample one driver lineage at levels.front(), refine it
// through every requested level, integrate, and record f(X_horizon). Reports
// per-level mean and standard error plus successive per-path differences; the
// shared lineage makes consecutive levels strongly coupled, so the difference
// standard errors are far below the per-level ones. Throws
// InsufficientSamplesError below 100 paths.
LadderTable weak_convergence_ladder(const DomainDescriptor& domain, const FieldSpec& field,
                                    const std::function<double(const Vec&)>& f, const Vec& x0,
                                    const std::vector<int>& levels, double horizon, size_t n_paths,
                                    int substeps, uint64_t seed);

// Kolmogorov-Smirnov statistic: sup over the sample of both one-sided gaps
// between the empirical CDF and cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Order-insensitive pairwise sum, used for all ensemble reductions.
double pairwise_sum(const double* data, size_t count);
double pairwise_sum(const std::vector<double>& data);

struct MeanSE {
    double mean = 0;
    double variance = 0;
    double std_error = 0;
};
MeanSE summarize(const std::vector<double>& values);

}  // namespace rsde
