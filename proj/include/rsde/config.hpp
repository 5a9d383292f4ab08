#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsde/coupling.hpp"
#include "rsde/errors.hpp"
#include "rsde/geometry.hpp"
#include "rsde/linalg.hpp"
#include "rsde/reflect.hpp"

namespace rsde {

enum class ExperimentKind { Simulate, Couple, Converge, Diagnose };

const char* to_string(ExperimentKind kind);

struct ConfigIssue {
    int line = 0;  // 1-based; 0 when the issue is not tied to a line
    std::string key;
    std::string message;
};

// Aggregated parse/validation failure; what() lists every issue.
class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

  private:
    std::vector<ConfigIssue> issues_;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::string raw_text;  // echoed into reports

    DomainDescriptor domain;
    FieldSpec field;  // identity or rotation; couplings build their own fields

    // driver
    int level = 6;          // driver.N
    double horizon = 1.0;   // driver.T, a dyadic multiple of 2^-N
    uint64_t seed = 0;      // driver.seed
    int substeps = kDefaultSubsteps;

    // ensemble
    size_t paths = 1;
    int parallelism = 1;

    // output
    std::string out_dir = "out";
    size_t thin_rows = 10000;  // cap on CSV rows per trajectory
    size_t max_files = 16;     // per-path CSVs written for the first runs only

    // invariant (couple)
    bool has_angle_bounds = false;
    double angle_lower = 0, angle_upper = 0;
    double eps_angle = 1e-4;

    // coupling
    CouplingKind coupling = CouplingKind::Synchronous;
    Vec x0;  // simulate/converge/diagnose start ("initial"), couple X start
    Vec y0;  // couple Y start
    double delta_coal = -1;  // <= 0 selects the library default

    // converge
    std::vector<int> levels;
    std::string f_name;  // min2 | x1 | norm

    // diagnose
    std::string suite;  // moments | holder | variation
    int moment_m = 0;
    std::vector<double> lags;
    double beta = 0.25;
    std::vector<double> thresholds;
    std::vector<std::pair<double, double>> windows;
};

// key = value lines with # comments and dotted section keys. The experiment
// kind comes from the caller (CLI subcommand). Throws ConfigError carrying
// every parse and validation issue, each naming its key and line.
ExperimentConfig parse_config(const std::string& text, ExperimentKind kind);

}  // namespace rsde
