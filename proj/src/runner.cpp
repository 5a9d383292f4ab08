#include "rsde/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rsde/coupling.hpp"
#include "rsde/diagnostics.hpp"
#include "rsde/errors.hpp"
#include "rsde/rng.hpp"

namespace rsde {

DyadicPath make_driver(int r, int level, double horizon, uint64_t seed,
                       const std::string& test_driver) {
    if (test_driver.empty()) return sample_path(r, level, horizon, seed);
    DyadicPath p;
    p.r = r;
    p.level = level;
    p.horizon = horizon;
    p.seed = seed;
    p.base_level = level;
    const double cells = horizon * std::ldexp(1.0, level);
    const size_t points = static_cast<size_t>(std::llround(cells)) + 1;
    p.values.assign(points * static_cast<size_t>(r), 0.0);
    if (test_driver == "zero") return p;
    if (test_driver.rfind("ramp:", 0) == 0) {
        const std::string arg = test_driver.substr(5);
        char* end = nullptr;
        const double c = std::strtod(arg.c_str(), &end);
        if (arg.empty() || end != arg.c_str() + arg.size())
            throw std::invalid_argument("bad ramp slope '" + arg + "'");
        const double dt = std::ldexp(1.0, -level);
        for (size_t m = 0; m < points; ++m)
            for (int i = 0; i < r; ++i)
                p.values[m * static_cast<size_t>(r) + i] = c * dt * static_cast<double>(m);
        return p;
    }
    throw std::invalid_argument("unknown test driver '" + test_driver + "' (zero|ramp:<slope>)");
}

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    const int workers = static_cast<int>(std::min<size_t>(std::max(threads, 1), n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto work = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

namespace fs = std::filesystem;

void append_double(std::string& buf, double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof tmp, "%.17g", v);
    buf += tmp;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << content;
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

size_t thin_stride(size_t count, size_t max_rows) {
    return std::max<size_t>(1, (count + max_rows - 1) / max_rows);
}

// Emits rows at stride spacing plus the final sample.
template <typename RowFn>
std::string csv_rows(const std::string& header, size_t count, size_t stride, RowFn&& row) {
    std::string buf = header;
    buf += '\n';
    for (size_t i = 0; i < count; i += stride) row(buf, i);
    if (count > 0 && (count - 1) % stride != 0) row(buf, count - 1);
    return buf;
}

std::string trajectory_csv(const ReflectedTrajectory& t, size_t max_rows) {
    std::string header = "t";
    for (int k = 1; k <= t.dim; ++k) header += ",x" + std::to_string(k);
    for (int k = 1; k <= t.dim; ++k) header += ",l" + std::to_string(k);
    header += ",lvar";
    const size_t stride = thin_stride(t.count(), max_rows);
    return csv_rows(header, t.count(), stride, [&](std::string& buf, size_t i) {
        append_double(buf, t.time(i));
        for (int k = 0; k < t.dim; ++k) {
            buf += ',';
            append_double(buf, t.x[i * static_cast<size_t>(t.dim) + k]);
        }
        for (int k = 0; k < t.dim; ++k) {
            buf += ',';
            append_double(buf, t.l[i * static_cast<size_t>(t.dim) + k]);
        }
        buf += ',';
        append_double(buf, t.lvar[i]);
        buf += '\n';
    });
}

std::string path_csv(const DyadicPath& p, size_t max_rows) {
    std::string header = "t";
    for (int k = 1; k <= p.r; ++k) header += ",w" + std::to_string(k);
    const double dt = std::ldexp(1.0, -p.level);
    const size_t stride = thin_stride(p.points(), max_rows);
    return csv_rows(header, p.points(), stride, [&](std::string& buf, size_t i) {
        append_double(buf, dt * static_cast<double>(i));
        for (int k = 0; k < p.r; ++k) {
            buf += ',';
            append_double(buf, p.value(i, k));
        }
        buf += '\n';
    });
}

std::string coupling_csv(const CouplingRun& run, size_t max_rows) {
    const size_t stride = thin_stride(run.count(), max_rows);
    return csv_rows("t,x1,x2,y1,y2,theta,coalesced", run.count(), stride,
                    [&](std::string& buf, size_t i) {
                        append_double(buf, run.dt * static_cast<double>(i));
                        for (int k = 0; k < 2; ++k) {
                            buf += ',';
                            append_double(buf, run.x[2 * i + k]);
                        }
                        for (int k = 0; k < 2; ++k) {
                            buf += ',';
                            append_double(buf, run.y[2 * i + k]);
                        }
                        buf += ',';
                        append_double(buf, run.theta[i]);
                        buf += run.live(i) ? ",0\n" : ",1\n";
                    });
}

std::string stat_table_csv(const StatTable& table, const std::string& key_name) {
    std::string buf = key_name + ",mean,variance,std_error,samples\n";
    for (const auto& r : table.rows) {
        append_double(buf, r.key);
        buf += ',';
        append_double(buf, r.mean);
        buf += ',';
        append_double(buf, r.variance);
        buf += ',';
        append_double(buf, r.std_error);
        buf += ',' + std::to_string(r.samples) + '\n';
    }
    return buf;
}

// Max deviation of X_t - x0 - Riemann(sigma dw + b dt) - L_t over samples,
// walking the same substep slopes the integrator used.
double decomposition_error(const ReflectedTrajectory& t, const FieldSpec& field,
                           const DyadicPath& path, const Vec& x0) {
    const double cell_scale = std::ldexp(1.0, path.level);
    Vec acc = Vec::zero(t.dim);
    Vec v(path.r);
    double worst = 0;
    size_t idx = 0;
    for (size_t m = 0; m < path.cells(); ++m) {
        for (int i = 0; i < path.r; ++i)
            v[i] = cell_scale * (path.values[(m + 1) * path.r + i] - path.values[m * path.r + i]);
        for (int s = 0; s < t.substeps; ++s, ++idx) {
            Vec g = field.sigma_apply(t.state(idx), v);
            if (field.has_drift) g += field.drift(t.state(idx));
            acc += t.dt * g;
            Vec l(t.dim);
            for (int k = 0; k < t.dim; ++k) l[k] = t.l[(idx + 1) * static_cast<size_t>(t.dim) + k];
            worst = std::max(worst, norm(t.state(idx + 1) - x0 - acc - l));
        }
    }
    return worst;
}

struct CheckAccumulator {
    std::vector<NamedCheck> checks;
    void add(const std::string& name, bool pass, double value, double threshold) {
        checks.push_back({name, pass, value, threshold});
    }
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

std::string render_report(const ExperimentConfig& cfg, const std::string& test_driver,
                          const CheckAccumulator& checks, double wall_seconds,
                          const std::vector<std::string>& notes, int code) {
    std::ostringstream os;
    os << "experiment: " << to_string(cfg.kind) << "\n";
    os << "seed: " << cfg.seed << "\n";
    os << "paths: " << cfg.paths << "\n";
    if (!test_driver.empty()) os << "test_driver: " << test_driver << "\n";
    char wt[32];
    std::snprintf(wt, sizeof wt, "%.3f", wall_seconds);
    os << "wall_time_s: " << wt << "\n";
    for (const auto& n : notes) os << n << "\n";
    for (const auto& c : checks.checks) {
        char v[48], th[48];
        std::snprintf(v, sizeof v, "%.6g", c.value);
        std::snprintf(th, sizeof th, "%.6g", c.threshold);
        os << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " (value=" << v
           << ", threshold=" << th << ")\n";
    }
    os << "exit: " << code << "\n";
    os << "config:\n";
    std::istringstream is(cfg.raw_text);
    std::string line;
    while (std::getline(is, line)) os << "| " << line << "\n";
    return os.str();
}

double containment_slack(const DomainDescriptor& domain, const ReflectedTrajectory& t) {
    double worst = 0;
    for (size_t i = 0; i < t.count(); ++i) {
        const Vec x = t.state(i);
        if (!domain.contains(x)) worst = std::max(worst, domain.boundary_distance(x));
    }
    return worst;
}

struct PathChecks {
    double containment = 0;
    double variation_excess = 0;
    double decomposition = 0;
};

void run_simulate(const ExperimentConfig& cfg, const std::string& test_driver,
                  const fs::path& out, CheckAccumulator& checks, std::vector<std::string>& notes) {
    std::vector<PathChecks> per_path(cfg.paths);
    std::mutex io_mutex;
    parallel_for(cfg.paths, cfg.parallelism, [&](size_t p) {
        thread_local ReflectedTrajectory traj;
        const DyadicPath driver =
            make_driver(cfg.field.r, cfg.level, cfg.horizon, derive_path_seed(cfg.seed, p),
                        test_driver);
        integrate_reflected_into(cfg.domain, cfg.field, driver, cfg.x0, cfg.substeps, traj);
        PathChecks& pc = per_path[p];
        pc.containment = containment_slack(cfg.domain, traj);
        pc.variation_excess = traj.lvar.back() - traj.input_variation;
        pc.decomposition =
            decomposition_error(traj, cfg.field, driver, cfg.x0) / (1.0 + traj.lvar.back());
        if (p < cfg.max_files) {
            const std::string tcsv = trajectory_csv(traj, cfg.thin_rows);
            const std::string pcsv = path_csv(driver, cfg.thin_rows);
            std::lock_guard<std::mutex> lock(io_mutex);
            write_file(out / ("traj_" + std::to_string(p) + ".csv"), tcsv);
            write_file(out / ("path_" + std::to_string(p) + ".csv"), pcsv);
        }
    });
    double worst_contain = 0, worst_var = 0, worst_decomp = 0;
    for (const auto& pc : per_path) {
        worst_contain = std::max(worst_contain, pc.containment);
        worst_var = std::max(worst_var, pc.variation_excess);
        worst_decomp = std::max(worst_decomp, pc.decomposition);
    }
    checks.add("containment", worst_contain <= cfg.domain.eps_boundary(), worst_contain,
               cfg.domain.eps_boundary());
    checks.add("variation_domination", worst_var <= 1e-6, worst_var, 1e-6);
    checks.add("decomposition_identity", worst_decomp <= 1e-10, worst_decomp, 1e-10);
    notes.push_back("trajectories: " + std::to_string(cfg.paths));
}

void run_couple(const ExperimentConfig& cfg, const std::string& test_driver, const fs::path& out,
                CheckAccumulator& checks, std::vector<std::string>& notes) {
    struct CoupleChecks {
        size_t cone_violations = 0;
        size_t wall_violations = 0;
        size_t mono_violations = 0;
        size_t mono_qualifying = 0;
        size_t coalesced = 0;
    };
    std::vector<CoupleChecks> per_path(cfg.paths);
    const bool lip = cfg.domain.kind == DomainKind::LipDomain;
    std::mutex io_mutex;
    parallel_for(cfg.paths, cfg.parallelism, [&](size_t p) {
        const DyadicPath driver = make_driver(2, cfg.level, cfg.horizon,
                                              derive_path_seed(cfg.seed, p), test_driver);
        const CouplingRun run =
            cfg.coupling == CouplingKind::Synchronous
                ? run_synchronous(cfg.domain, driver, cfg.x0, cfg.y0, cfg.substeps, cfg.delta_coal)
                : run_mirror(cfg.domain, driver, cfg.x0, cfg.y0, cfg.substeps, cfg.delta_coal);
        CoupleChecks& cc = per_path[p];
        if (cfg.has_angle_bounds) {
            const InvariantReport rep =
                check_cone_invariant(run, cfg.angle_lower, cfg.angle_upper, cfg.eps_angle);
            cc.cone_violations = rep.violations;
        }
        if (lip) {
            cc.wall_violations =
                check_wall_exclusion(run, cfg.domain, cfg.domain.eps_boundary()).violations;
            if (cfg.coupling == CouplingKind::Synchronous) {
                const MonotonicityReport mono =
                    check_edge_monotonicity(run, cfg.domain.lip.lambda, cfg.eps_angle);
                cc.mono_violations = mono.violations;
                cc.mono_qualifying = mono.qualifying;
            }
        }
        if (run.coalesced()) cc.coalesced = 1;
        if (p < cfg.max_files) {
            const std::string ccsv = coupling_csv(run, cfg.thin_rows);
            std::lock_guard<std::mutex> lock(io_mutex);
            write_file(out / ("coupling_" + std::to_string(p) + ".csv"), ccsv);
        }
    });
    size_t cone = 0, wall = 0, mono = 0, qual = 0, coal = 0;
    for (const auto& cc : per_path) {
        cone += cc.cone_violations;
        wall += cc.wall_violations;
        mono += cc.mono_violations;
        qual += cc.mono_qualifying;
        coal += cc.coalesced;
    }
    if (cfg.has_angle_bounds)
        checks.add("cone_invariant", cone == 0, static_cast<double>(cone), 0);
    if (lip) {
        checks.add("wall_exclusion", wall == 0, static_cast<double>(wall), 0);
        if (cfg.coupling == CouplingKind::Synchronous)
            checks.add("edge_monotonicity", mono == 0, static_cast<double>(mono), 0);
    }
    notes.push_back("coalesced_runs: " + std::to_string(coal) + "/" + std::to_string(cfg.paths));
    if (qual > 0) notes.push_back("monotonicity_qualifying_substeps: " + std::to_string(qual));
}

std::function<double(const Vec&)> make_statistic(const std::string& name) {
    if (name == "min2") return [](const Vec& x) { return std::min(x.a[0], 2.0); };
    if (name == "x1") return [](const Vec& x) { return x.a[0]; };
    return [](const Vec& x) { return norm(x); };
}

void run_converge(const ExperimentConfig& cfg, const std::string& test_driver, const fs::path& out,
                  CheckAccumulator& checks, std::vector<std::string>& notes) {
    if (!test_driver.empty())
        throw std::invalid_argument("the convergence ladder requires Brownian input");
    const LadderTable table =
        weak_convergence_ladder(cfg.domain, cfg.field, make_statistic(cfg.f_name), cfg.x0,
                                cfg.levels, cfg.horizon, cfg.paths, cfg.substeps, cfg.seed);
    std::string buf = "level,mean,std_error\n";
    for (const auto& row : table.rows) {
        buf += std::to_string(row.level) + ',';
        append_double(buf, row.mean);
        buf += ',';
        append_double(buf, row.std_error);
        buf += '\n';
    }
    write_file(out / "ladder.csv", buf);
    buf = "level,delta,std_error\n";
    for (const auto& d : table.diffs) {
        buf += std::to_string(d.level) + ',';
        append_double(buf, d.delta);
        buf += ',';
        append_double(buf, d.std_error);
        buf += '\n';
    }
    write_file(out / "ladder_diffs.csv", buf);

    // Successive |mean_N - mean_{N+1}| must not grow once noise is accounted.
    bool decreasing = true;
    double worst = 0;
    for (size_t i = 0; i + 1 < table.diffs.size(); ++i) {
        const double slack = 2 * std::hypot(table.diffs[i].std_error, table.diffs[i + 1].std_error);
        const double excess = table.diffs[i + 1].delta - table.diffs[i].delta - slack;
        worst = std::max(worst, excess);
        if (excess > 0) decreasing = false;
    }
    checks.add("delta_decreasing", decreasing, worst, 0);
    notes.push_back("levels: " + std::to_string(cfg.levels.front()) + ".." +
                    std::to_string(cfg.levels.back()));
}

void run_diagnose(const ExperimentConfig& cfg, const std::string& test_driver, const fs::path& out,
                  CheckAccumulator& checks, std::vector<std::string>& notes) {
    // Sequential ensemble generator with a reusable trajectory buffer.
    ReflectedTrajectory scratch;
    DyadicPath driver;
    auto integrate_one = [&](size_t p) {
        driver = make_driver(cfg.field.r, cfg.level, cfg.horizon, derive_path_seed(cfg.seed, p),
                             test_driver);
        integrate_reflected_into(cfg.domain, cfg.field, driver, cfg.x0, cfg.substeps, scratch);
    };

    if (cfg.suite == "moments") {
        const SeriesGen gen = [&](size_t p) {
            integrate_one(p);
            return scratch.x_view();
        };
        const StatTable table = moment_scaling(cfg.paths, gen, cfg.moment_m, cfg.lags);
        write_file(out / "moments.csv", stat_table_csv(table, "lag"));
        checks.add("moment_slope_fitted", table.has_slope, table.slope, 0);
        if (table.has_slope) {
            char s[32];
            std::snprintf(s, sizeof s, "%.4f", table.slope);
            notes.push_back(std::string("moment_loglog_slope: ") + s);
        }
    } else if (cfg.suite == "holder") {
        const TripleGen gen = [&](size_t p) {
            integrate_one(p);
            return std::array<UniformSeries, 3>{view(driver), scratch.x_view(), scratch.l_view()};
        };
        const StatTable table = holder_tail(cfg.paths, gen, cfg.beta, cfg.thresholds);
        write_file(out / "holder.csv", stat_table_csv(table, "R"));
        bool monotone = true;
        for (size_t i = 0; i + 1 < table.rows.size(); ++i)
            if (table.rows[i].key < table.rows[i + 1].key &&
                table.rows[i].mean < table.rows[i + 1].mean - 1e-12)
                monotone = false;
        checks.add("tail_nonincreasing", monotone, 0, 0);
        if (table.has_slope) {
            char s[32];
            std::snprintf(s, sizeof s, "%.4f", table.slope);
            notes.push_back(std::string("tail_loglog_slope: ") + s);
        }
    } else if (cfg.suite == "variation") {
        const AdmissibilityCertificate cert = make_certificate(cfg.domain);
        if (cert.covering.empty()) throw Error("domain certificate has no covering balls");
        const double R = cert.covering.front().radius;
        double worst_ratio = 0;
        size_t degenerate = 0;
        StatTable last;
        for (size_t p = 0; p < cfg.paths; ++p) {
            integrate_one(p);
            try {
                last = variation_growth(scratch, cfg.windows, R);
                worst_ratio = std::max(worst_ratio, last.max_value);
            } catch (const DegenerateWindowError&) {
                ++degenerate;
            }
        }
        write_file(out / "variation.csv", stat_table_csv(last, "window_start"));
        checks.add("no_degenerate_windows", degenerate == 0, static_cast<double>(degenerate), 0);
        char s[32];
        std::snprintf(s, sizeof s, "%.4f", worst_ratio);
        notes.push_back(std::string("max_variation_ratio: ") + s);
        notes.push_back("covering_radius: " + std::to_string(R));
    } else {
        throw std::invalid_argument("unknown diagnostic suite '" + cfg.suite + "'");
    }
}

}  // namespace

ExitReport run_experiment(const ExperimentConfig& cfg, const std::string& test_driver) {
    const auto start = std::chrono::steady_clock::now();
    CheckAccumulator checks;
    std::vector<std::string> notes;
    int code = 0;
    const fs::path out(cfg.out_dir);
    try {
        fs::create_directories(out);
        switch (cfg.kind) {
            case ExperimentKind::Simulate:
                run_simulate(cfg, test_driver, out, checks, notes);
                break;
            case ExperimentKind::Couple:
                run_couple(cfg, test_driver, out, checks, notes);
                break;
            case ExperimentKind::Converge:
                run_converge(cfg, test_driver, out, checks, notes);
                break;
            case ExperimentKind::Diagnose:
                run_diagnose(cfg, test_driver, out, checks, notes);
                break;
        }
        if (!checks.all_pass()) code = 2;
    } catch (const std::exception& e) {
        notes.push_back(std::string("error: ") + e.what());
        code = 1;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ExitReport result;
    result.code = code;
    result.report = render_report(cfg, test_driver, checks, wall, notes, code);
    try {
        write_file(out / "report.txt", result.report);
    } catch (const std::exception& e) {
        result.report += std::string("report write failed: ") + e.what() + "\n";
        result.code = 1;
    }
    return result;
}

}  // namespace rsde
