#include "rsde/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace rsde {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Couple: return "couple";
        case ExperimentKind::Converge: return "converge";
        case ExperimentKind::Diagnose: return "diagnose";
    }
    return "?";
}

namespace {

std::string format_issues(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    os << "invalid configuration (" << issues.size() << " issue" << (issues.size() == 1 ? "" : "s")
       << "):";
    for (const auto& i : issues) {
        os << "\n  ";
        if (i.line > 0) os << "line " << i.line << " ";
        os << "[" << (i.key.empty() ? "-" : i.key) << "]: " << i.message;
    }
    return os.str();
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

// Collects raw entries plus every issue found on the way; typed getters
// record issues instead of throwing so one pass reports everything at once.
struct Reader {
    std::map<std::string, Entry> entries;
    std::vector<ConfigIssue> issues;

    void fail(const std::string& key, const std::string& message, int line = 0) {
        if (line == 0) {
            // Range and consistency failures happen after the entry was read;
            // recover the source line so the report can point at it.
            const auto it = entries.find(key);
            if (it != entries.end()) line = it->second.line;
        }
        issues.push_back({line, key, message});
    }

    Entry* find(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::optional<std::string> get_string(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        return e->value;
    }

    std::optional<double> get_double(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        const std::string v = trim(e->value);
        if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end != v.c_str() + v.size() || v.empty()) {
            fail(key, "expected a number, got '" + e->value + "'", e->line);
            return std::nullopt;
        }
        return x;
    }

    std::optional<long long> get_int(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        const std::string v = trim(e->value);
        char* end = nullptr;
        const long long x = std::strtoll(v.c_str(), &end, 10);
        if (end != v.c_str() + v.size() || v.empty()) {
            fail(key, "expected an integer, got '" + e->value + "'", e->line);
            return std::nullopt;
        }
        return x;
    }

    std::optional<uint64_t> get_u64(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        const std::string v = trim(e->value);
        if (!v.empty() && v[0] == '-') {
            fail(key, "expected a nonnegative integer", e->line);
            return std::nullopt;
        }
        char* end = nullptr;
        const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
        if (end != v.c_str() + v.size() || v.empty()) {
            fail(key, "expected an unsigned integer, got '" + e->value + "'", e->line);
            return std::nullopt;
        }
        return static_cast<uint64_t>(x);
    }

    // "(a,b)" pairs; bare numbers are rejected.
    std::optional<Vec> parse_point(const std::string& key, const std::string& token, int line) {
        const std::string v = trim(token);
        if (v.size() < 5 || v.front() != '(' || v.back() != ')') {
            fail(key, "expected a point '(x,y)', got '" + token + "'", line);
            return std::nullopt;
        }
        const std::string inner = v.substr(1, v.size() - 2);
        const size_t comma = inner.find(',');
        if (comma == std::string::npos || inner.find(',', comma + 1) != std::string::npos) {
            fail(key, "expected exactly two coordinates in '" + token + "'", line);
            return std::nullopt;
        }
        const std::string xs = trim(inner.substr(0, comma)), ys = trim(inner.substr(comma + 1));
        char* end = nullptr;
        const double x = std::strtod(xs.c_str(), &end);
        if (xs.empty() || end != xs.c_str() + xs.size()) {
            fail(key, "bad coordinate '" + xs + "'", line);
            return std::nullopt;
        }
        const double y = std::strtod(ys.c_str(), &end);
        if (ys.empty() || end != ys.c_str() + ys.size()) {
            fail(key, "bad coordinate '" + ys + "'", line);
            return std::nullopt;
        }
        return Vec(x, y);
    }

    std::optional<Vec> get_point(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        return parse_point(key, e->value, e->line);
    }

    // Sequence of "(a,b)" groups separated by whitespace (spaces inside the
    // parentheses are fine).
    std::optional<std::vector<Vec>> get_points(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        std::vector<Vec> out;
        const std::string& v = e->value;
        size_t i = 0;
        while (i < v.size()) {
            if (std::isspace(static_cast<unsigned char>(v[i]))) {
                ++i;
                continue;
            }
            if (v[i] != '(') {
                fail(key, "expected '(' in point list", e->line);
                return std::nullopt;
            }
            const size_t close = v.find(')', i);
            if (close == std::string::npos) {
                fail(key, "unterminated point in list", e->line);
                return std::nullopt;
            }
            auto p = parse_point(key, v.substr(i, close - i + 1), e->line);
            if (!p) return std::nullopt;
            out.push_back(*p);
            i = close + 1;
        }
        if (out.empty()) {
            fail(key, "empty point list", e->line);
            return std::nullopt;
        }
        return out;
    }

    std::optional<std::vector<double>> get_doubles(const std::string& key) {
        Entry* e = find(key);
        if (!e) return std::nullopt;
        std::vector<double> out;
        std::istringstream is(e->value);
        std::string tok;
        while (is >> tok) {
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size()) {
                fail(key, "expected a number list, got '" + tok + "'", e->line);
                return std::nullopt;
            }
            out.push_back(x);
        }
        if (out.empty()) {
            fail(key, "empty number list", e->line);
            return std::nullopt;
        }
        return out;
    }
};

bool power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

// The start point: a bare number on 1D domains, "(x,y)" on planar ones.
std::optional<Vec> read_start(Reader& r, const std::string& key, const DomainDescriptor& domain) {
    Entry* e = r.find(key);
    if (!e) return std::nullopt;
    const std::string v = trim(e->value);
    if (!v.empty() && v.front() == '(') {
        auto p = r.parse_point(key, v, e->line);
        if (p && domain.dim != 2) {
            r.fail(key, "domain is one-dimensional but the start is a point", e->line);
            return std::nullopt;
        }
        return p;
    }
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
        r.fail(key, "expected a number or '(x,y)', got '" + e->value + "'", e->line);
        return std::nullopt;
    }
    if (domain.dim != 1) {
        r.fail(key, "domain is planar but the start is a scalar", e->line);
        return std::nullopt;
    }
    Vec out(1);
    out[0] = x;
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(format_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(const std::string& text, ExperimentKind kind) {
    Reader r;

    // Pass 1: raw key = value lines.
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const size_t eq = body.find('=');
        if (eq == std::string::npos) {
            r.fail("", "expected 'key = value'", lineno);
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            r.fail("", "empty key", lineno);
            continue;
        }
        if (r.entries.count(key)) {
            r.fail(key, "duplicate key", lineno);
            continue;
        }
        r.entries[key] = {value, lineno, false};
    }

    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.raw_text = text;

    if (auto k = r.get_string("kind"); k && trim(*k) != to_string(kind))
        r.fail("kind", std::string("config kind '") + trim(*k) + "' does not match the subcommand '" +
                           to_string(kind) + "'");

    // Domain.
    bool have_domain = false;
    if (auto dk = r.get_string("domain.kind")) {
        const std::string d = trim(*dk);
        try {
            if (d == "interval") {
                auto lo = r.get_double("domain.lo"), hi = r.get_double("domain.hi");
                if (!r.has("domain.lo")) r.fail("domain.lo", "required for interval domains");
                if (!r.has("domain.hi")) r.fail("domain.hi", "required for interval domains");
                if (lo && hi) {
                    cfg.domain = make_interval(*lo, *hi);
                    have_domain = true;
                }
            } else if (d == "rectangle") {
                auto v = r.get_doubles("domain.rect");
                if (!r.has("domain.rect")) {
                    r.fail("domain.rect", "required for rectangle domains (xlo xhi ylo yhi)");
                } else if (v && v->size() != 4) {
                    r.fail("domain.rect", "expected four numbers: xlo xhi ylo yhi");
                } else if (v) {
                    cfg.domain = make_rectangle((*v)[0], (*v)[1], (*v)[2], (*v)[3]);
                    have_domain = true;
                }
            } else if (d == "polygon") {
                auto v = r.get_points("domain.vertices");
                if (!r.has("domain.vertices")) {
                    r.fail("domain.vertices", "required for polygon domains");
                } else if (v) {
                    cfg.domain = make_polygon(*v);
                    have_domain = true;
                }
            } else if (d == "disc") {
                auto c = r.get_point("domain.center");
                auto rad = r.get_double("domain.radius");
                if (!r.has("domain.center")) r.fail("domain.center", "required for disc domains");
                if (!r.has("domain.radius")) r.fail("domain.radius", "required for disc domains");
                if (c && rad) {
                    cfg.domain = make_disc(*c, *rad);
                    have_domain = true;
                }
            } else if (d == "lip") {
                cfg.domain = make_sine_lip_domain();
                have_domain = true;
            } else {
                r.fail("domain.kind",
                       "unknown domain kind '" + d + "' (interval|rectangle|polygon|disc|lip)");
            }
        } catch (const std::exception& ex) {
            r.fail("domain.kind", ex.what());
        }
    } else {
        r.fail("domain.kind", "missing required key");
    }

    // Field.
    if (auto fk = r.get_string("field.kind")) {
        const std::string f = trim(*fk);
        if (f == "identity") {
            cfg.field = make_identity_field(have_domain ? cfg.domain.dim : 1);
        } else if (f == "rotation") {
            if (have_domain && cfg.domain.dim != 2)
                r.fail("field.kind", "rotation field needs a planar domain");
            cfg.field = make_rotation_field();
        } else {
            r.fail("field.kind", "unknown field kind '" + f + "' (identity|rotation)");
        }
    } else if (have_domain) {
        cfg.field = make_identity_field(cfg.domain.dim);
    }

    // Driver.
    const bool need_driver = kind != ExperimentKind::Converge;
    if (auto n = r.get_int("driver.N")) {
        if (*n < 0 || *n > 20)
            r.fail("driver.N", "level must be in [0, 20]");
        else
            cfg.level = static_cast<int>(*n);
    } else if (need_driver && !r.has("driver.N")) {
        r.fail("driver.N", "missing required key");
    }
    if (auto t = r.get_double("driver.T")) {
        cfg.horizon = *t;
        if (!(*t > 0)) {
            r.fail("driver.T", "horizon must be positive");
        } else {
            const double cells = *t * std::ldexp(1.0, cfg.level);
            if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells) ||
                std::round(cells) < 1)
                r.fail("driver.T", "horizon must be a positive dyadic multiple of 2^-N");
        }
    } else if (!r.has("driver.T")) {
        r.fail("driver.T", "missing required key");
    }
    if (auto s = r.get_u64("driver.seed")) {
        cfg.seed = *s;
    } else if (!r.has("driver.seed")) {
        r.fail("driver.seed", "missing required key");
    }
    if (auto s = r.get_int("driver.substeps")) {
        if (!power_of_two(*s) || *s > kMaxSubsteps)
            r.fail("driver.substeps", "substeps must be a power of two in [1, 2^14]");
        else
            cfg.substeps = static_cast<int>(*s);
    }

    // Ensemble.
    if (auto p = r.get_int("ensemble.paths")) {
        if (*p < 1 || *p > 1000000)
            r.fail("ensemble.paths", "paths must be in [1, 10^6]");
        else
            cfg.paths = static_cast<size_t>(*p);
    } else if ((kind == ExperimentKind::Converge || kind == ExperimentKind::Diagnose) &&
               !r.has("ensemble.paths")) {
        r.fail("ensemble.paths", "missing required key");
    }
    if (auto p = r.get_int("ensemble.parallelism")) {
        if (*p < 1 || *p > 256)
            r.fail("ensemble.parallelism", "parallelism must be in [1, 256]");
        else
            cfg.parallelism = static_cast<int>(*p);
    }

    // Output.
    if (auto o = r.get_string("output.dir")) cfg.out_dir = trim(*o);
    if (auto t = r.get_int("output.thin")) {
        if (*t < 2 || *t > 10000000)
            r.fail("output.thin", "row cap must be in [2, 10^7]");
        else
            cfg.thin_rows = static_cast<size_t>(*t);
    }
    if (auto m = r.get_int("output.max_files")) {
        if (*m < 0)
            r.fail("output.max_files", "must be nonnegative");
        else
            cfg.max_files = static_cast<size_t>(*m);
    }

    // Invariant bounds.
    {
        const bool lo = r.has("invariant.lower"), hi = r.has("invariant.upper");
        auto lov = r.get_double("invariant.lower"), hiv = r.get_double("invariant.upper");
        if (lo != hi) r.fail(lo ? "invariant.upper" : "invariant.lower", "both bounds are required");
        if (lov && hiv) {
            if (!(*lov < *hiv)) {
                r.fail("invariant.lower", "lower bound must be below the upper bound");
            } else {
                cfg.has_angle_bounds = true;
                cfg.angle_lower = *lov;
                cfg.angle_upper = *hiv;
            }
        }
        if (auto e = r.get_double("invariant.eps_angle")) {
            if (!(*e > 0))
                r.fail("invariant.eps_angle", "must be positive");
            else
                cfg.eps_angle = *e;
        }
    }

    // Starts.
    if (kind == ExperimentKind::Couple) {
        if (have_domain && cfg.domain.dim != 2)
            r.fail("domain.kind", "couplings require a planar domain");
        auto x = r.get_point("coupling.x0"), y = r.get_point("coupling.y0");
        if (!r.has("coupling.x0")) r.fail("coupling.x0", "missing required key");
        if (!r.has("coupling.y0")) r.fail("coupling.y0", "missing required key");
        if (x) cfg.x0 = *x;
        if (y) cfg.y0 = *y;
        if (auto ck = r.get_string("coupling.kind")) {
            const std::string c = trim(*ck);
            if (c == "synchronous")
                cfg.coupling = CouplingKind::Synchronous;
            else if (c == "mirror")
                cfg.coupling = CouplingKind::Mirror;
            else
                r.fail("coupling.kind", "unknown coupling '" + c + "' (synchronous|mirror)");
        }
        if (auto dc = r.get_double("coupling.delta_coal")) {
            if (!(*dc > 0))
                r.fail("coupling.delta_coal", "must be positive");
            else
                cfg.delta_coal = *dc;
        }
    } else {
        if (have_domain) {
            auto x = read_start(r, "initial", cfg.domain);
            if (!r.has("initial"))
                r.fail("initial", "missing required key");
            else if (x)
                cfg.x0 = *x;
        } else {
            r.find("initial");  // consume; the domain issue is already recorded
        }
    }

    // Converge.
    if (kind == ExperimentKind::Converge) {
        if (auto lv = r.get_doubles("converge.levels")) {
            for (const double raw : *lv) {
                if (raw != std::floor(raw) || raw < 0 || raw > 20) {
                    r.fail("converge.levels", "levels must be integers in [0, 20]");
                    cfg.levels.clear();
                    break;
                }
                cfg.levels.push_back(static_cast<int>(raw));
            }
            for (size_t i = 1; i < cfg.levels.size(); ++i)
                if (cfg.levels[i] <= cfg.levels[i - 1]) {
                    r.fail("converge.levels", "levels must be strictly increasing");
                    break;
                }
            if (!cfg.levels.empty()) {
                const double cells = cfg.horizon * std::ldexp(1.0, cfg.levels.front());
                if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells) ||
                    std::round(cells) < 1)
                    r.fail("driver.T", "horizon must be dyadic at the coarsest ladder level");
            }
        } else if (!r.has("converge.levels")) {
            r.fail("converge.levels", "missing required key");
        }
        if (auto f = r.get_string("converge.f")) {
            cfg.f_name = trim(*f);
            if (cfg.f_name != "min2" && cfg.f_name != "x1" && cfg.f_name != "norm")
                r.fail("converge.f", "unknown statistic '" + cfg.f_name + "' (min2|x1|norm)");
        } else {
            r.fail("converge.f", "missing required key");
        }
    }

    // Diagnose.
    if (kind == ExperimentKind::Diagnose) {
        if (auto s = r.get_string("diagnose.suite")) {
            cfg.suite = trim(*s);
            if (cfg.suite == "moments") {
                if (auto m = r.get_int("diagnose.m")) {
                    if (*m < 0 || *m > 2)
                        r.fail("diagnose.m", "moment order must be 0, 1, or 2");
                    else
                        cfg.moment_m = static_cast<int>(*m);
                }
                if (auto lg = r.get_doubles("diagnose.lags"))
                    cfg.lags = *lg;
                else if (!r.has("diagnose.lags"))
                    r.fail("diagnose.lags", "missing required key for the moments suite");
            } else if (cfg.suite == "holder") {
                if (auto b = r.get_double("diagnose.beta")) {
                    if (!(*b > 0 && *b < 0.5))
                        r.fail("diagnose.beta", "beta must lie in (0, 1/2)");
                    else
                        cfg.beta = *b;
                }
                if (auto th = r.get_doubles("diagnose.thresholds"))
                    cfg.thresholds = *th;
                else if (!r.has("diagnose.thresholds"))
                    r.fail("diagnose.thresholds", "missing required key for the holder suite");
            } else if (cfg.suite == "variation") {
                if (auto w = r.get_points("diagnose.windows")) {
                    for (const Vec& p : *w) {
                        if (!(p.a[0] < p.a[1])) {
                            r.fail("diagnose.windows", "each window needs s < t");
                            break;
                        }
                        cfg.windows.emplace_back(p.a[0], p.a[1]);
                    }
                } else if (!r.has("diagnose.windows")) {
                    r.fail("diagnose.windows", "missing required key for the variation suite");
                }
            } else {
                r.fail("diagnose.suite",
                       "unknown suite '" + cfg.suite + "' (moments|holder|variation)");
            }
        } else {
            r.fail("diagnose.suite", "missing required key");
        }
    }

    // Anything not consumed is a typo or a key for a different experiment.
    for (const auto& [key, entry] : r.entries)
        if (!entry.used) r.fail(key, "unknown key for this experiment", entry.line);

    if (!r.issues.empty()) {
        std::sort(r.issues.begin(), r.issues.end(), [](const ConfigIssue& a, const ConfigIssue& b) {
            if (a.line != b.line) return a.line < b.line;
            return a.key < b.key;
        });
        throw ConfigError(std::move(r.issues));
    }
    return cfg;
}

}  // namespace rsde
