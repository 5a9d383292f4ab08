#include <string>

#include "doctest.h"
#include "rsde/config.hpp"

using namespace rsde;

namespace {

const char* kMinimalSimulate =
    "domain.kind = interval\n"
    "domain.lo = 0\n"
    "domain.hi = 1\n"
    "driver.N = 4\n"
    "driver.T = 1\n"
    "driver.seed = 7\n"
    "initial = 0.3\n";

bool has_issue(const ConfigError& e, const std::string& key) {
    for (const ConfigIssue& i : e.issues())
        if (i.key == key) return true;
    return false;
}

}  // namespace

TEST_CASE("minimal simulate config parses with defaults") {
    ExperimentConfig cfg = parse_config(kMinimalSimulate, ExperimentKind::Simulate);
    CHECK(cfg.kind == ExperimentKind::Simulate);
    CHECK(cfg.domain.kind == DomainKind::Interval);
    CHECK(cfg.level == 4);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.seed == 7);
    CHECK(cfg.paths == 1);
    CHECK(cfg.substeps == kDefaultSubsteps);
    CHECK(cfg.x0[0] == doctest::Approx(0.3));
    CHECK(cfg.field.kind == FieldKind::Identity);
    CHECK(cfg.field.d == 1);
}

TEST_CASE("missing required keys are reported by name") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 4\n"
        "driver.T = 1\n"
        "initial = 0.3\n";
    try {
        parse_config(text, ExperimentKind::Simulate);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "driver.seed"));
    }
}

TEST_CASE("range violations name the offending key and line") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 25\n"
        "driver.T = 1\n"
        "driver.seed = 7\n"
        "initial = 0.3\n";
    try {
        parse_config(text, ExperimentKind::Simulate);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(!e.issues().empty());
        bool found = false;
        for (const ConfigIssue& i : e.issues())
            if (i.key == "driver.N" && i.line == 4) found = true;
        CHECK(found);
        CHECK(std::string(e.what()).find("driver.N") != std::string::npos);
    }
}

TEST_CASE("several problems are aggregated into one error") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 25\n"
        "driver.T = 0.3\n"
        "initial = 0.3\n"
        "mystery.key = 1\n";
    try {
        parse_config(text, ExperimentKind::Simulate);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.issues().size() >= 4);
        CHECK(has_issue(e, "driver.N"));
        CHECK(has_issue(e, "driver.T"));      // not dyadic
        CHECK(has_issue(e, "driver.seed"));   // missing
        CHECK(has_issue(e, "mystery.key"));   // unknown
    }
}

TEST_CASE("duplicate keys and malformed lines are rejected") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.lo = 0.5\n"
        "this line has no equals\n";
    try {
        parse_config(text, ExperimentKind::Simulate);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "domain.lo"));
        bool line4 = false;
        for (const ConfigIssue& i : e.issues())
            if (i.line == 4) line4 = true;
        CHECK(line4);
    }
}

TEST_CASE("comments and blank lines are ignored") {
    std::string text = std::string("# leading comment\n\n") + kMinimalSimulate +
                       "# trailing comment\n";
    ExperimentConfig cfg = parse_config(text, ExperimentKind::Simulate);
    CHECK(cfg.seed == 7);
}

TEST_CASE("kind key must match the subcommand when present") {
    std::string text = std::string("kind = couple\n") + kMinimalSimulate;
    CHECK_THROWS_AS(parse_config(text, ExperimentKind::Simulate), ConfigError);
    std::string ok = std::string("kind = simulate\n") + kMinimalSimulate;
    CHECK(parse_config(ok, ExperimentKind::Simulate).kind == ExperimentKind::Simulate);
}

TEST_CASE("polygon vertex lists parse as point sequences") {
    std::string text =
        "domain.kind = polygon\n"
        "domain.vertices = (0,0) (4,0) (1,1)\n"
        "driver.N = 4\n"
        "driver.T = 1\n"
        "driver.seed = 1\n"
        "initial = (1, 0.2)\n";
    ExperimentConfig cfg = parse_config(text, ExperimentKind::Simulate);
    CHECK(cfg.domain.kind == DomainKind::ConvexPolygon);
    REQUIRE(cfg.domain.vertices.size() == 3);
    CHECK(cfg.domain.vertices[1][0] == doctest::Approx(4.0));
    CHECK(cfg.x0[0] == doctest::Approx(1.0));
    CHECK(cfg.x0[1] == doctest::Approx(0.2));
}

TEST_CASE("planar domains reject scalar starts") {
    std::string text =
        "domain.kind = disc\n"
        "domain.center = (0,0)\n"
        "domain.radius = 1\n"
        "driver.N = 4\n"
        "driver.T = 1\n"
        "driver.seed = 1\n"
        "initial = 0.5\n";
    CHECK_THROWS_AS(parse_config(text, ExperimentKind::Simulate), ConfigError);
}

TEST_CASE("substeps must be a power of two within range") {
    std::string base =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 4\n"
        "driver.T = 1\n"
        "driver.seed = 7\n"
        "initial = 0.3\n";
    CHECK(parse_config(base + "driver.substeps = 64\n", ExperimentKind::Simulate).substeps == 64);
    CHECK_THROWS_AS(parse_config(base + "driver.substeps = 48\n", ExperimentKind::Simulate),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(base + "driver.substeps = 32768\n", ExperimentKind::Simulate),
                    ConfigError);
}

TEST_CASE("couple configs require planar starts and a known kind") {
    std::string text =
        "domain.kind = polygon\n"
        "domain.vertices = (0,0) (4,0) (1,1)\n"
        "driver.N = 5\n"
        "driver.T = 1\n"
        "driver.seed = 3\n"
        "coupling.kind = mirror\n"
        "coupling.x0 = (1, 0.2)\n"
        "coupling.y0 = (2, 0.2)\n";
    ExperimentConfig cfg = parse_config(text, ExperimentKind::Couple);
    CHECK(cfg.coupling == CouplingKind::Mirror);
    CHECK(cfg.y0[0] == doctest::Approx(2.0));

    std::string missing =
        "domain.kind = polygon\n"
        "domain.vertices = (0,0) (4,0) (1,1)\n"
        "driver.N = 5\n"
        "driver.T = 1\n"
        "driver.seed = 3\n"
        "coupling.kind = quantum\n"
        "coupling.x0 = (1, 0.2)\n";
    try {
        parse_config(missing, ExperimentKind::Couple);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "coupling.kind"));
        CHECK(has_issue(e, "coupling.y0"));
    }
}

TEST_CASE("converge configs demand an increasing ladder and a functional") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = inf\n"
        "driver.T = 1\n"
        "driver.seed = 11\n"
        "initial = 0\n"
        "ensemble.paths = 500\n"
        "converge.levels = 4 5 6\n"
        "converge.f = min2\n";
    ExperimentConfig cfg = parse_config(text, ExperimentKind::Converge);
    REQUIRE(cfg.levels.size() == 3);
    CHECK(cfg.levels[2] == 6);
    CHECK(cfg.f_name == "min2");

    std::string bad =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = inf\n"
        "driver.T = 1\n"
        "driver.seed = 11\n"
        "initial = 0\n"
        "ensemble.paths = 500\n"
        "converge.levels = 6 5\n"
        "converge.f = min2\n";
    try {
        parse_config(bad, ExperimentKind::Converge);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "converge.levels"));
    }
}

TEST_CASE("diagnose configs select a suite with its parameters") {
    std::string text =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 6\n"
        "driver.T = 1\n"
        "driver.seed = 2\n"
        "initial = 0.3\n"
        "ensemble.paths = 200\n"
        "diagnose.suite = moments\n"
        "diagnose.m = 0\n"
        "diagnose.lags = 0.0625 0.125\n";
    ExperimentConfig cfg = parse_config(text, ExperimentKind::Diagnose);
    CHECK(cfg.suite == "moments");
    CHECK(cfg.moment_m == 0);
    REQUIRE(cfg.lags.size() == 2);

    std::string holder =
        "domain.kind = interval\n"
        "domain.lo = 0\n"
        "domain.hi = 1\n"
        "driver.N = 6\n"
        "driver.T = 1\n"
        "driver.seed = 2\n"
        "initial = 0.3\n"
        "ensemble.paths = 200\n"
        "diagnose.suite = holder\n"
        "diagnose.beta = 0.75\n"
        "diagnose.thresholds = 1 2 4\n";
    try {
        parse_config(holder, ExperimentKind::Diagnose);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "diagnose.beta"));
    }
}

TEST_CASE("invariant bounds come in pairs") {
    std::string text =
        "domain.kind = polygon\n"
        "domain.vertices = (0,0) (4,0) (1,1)\n"
        "driver.N = 5\n"
        "driver.T = 1\n"
        "driver.seed = 3\n"
        "coupling.kind = synchronous\n"
        "coupling.x0 = (1, 0.2)\n"
        "coupling.y0 = (2, 0.2)\n"
        "invariant.lower = -0.5\n";
    try {
        parse_config(text, ExperimentKind::Couple);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(has_issue(e, "invariant.upper"));
    }
}
