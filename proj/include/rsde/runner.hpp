#pragma once

#include <functional>
#include <string>

#include "rsde/config.hpp"
#include "rsde/wiener.hpp"

namespace rsde {

struct ExitReport {
    int code = 0;  // 0 ok, 2 invariant violations, 1 runtime errors
    std::string report;
};

// Runs the configured experiment, writes CSVs and report.txt under
// cfg.out_dir, and returns the exit code plus the report text. test_driver
// substitutes a deterministic path for Brownian input: "" (Brownian),
// "zero", or "ramp:<slope>" (every coordinate moves at the given slope).
// Module errors are caught, recorded in the report, and mapped to code 1.
ExitReport run_experiment(const ExperimentConfig& cfg, const std::string& test_driver = "");

// The driver used by run_experiment: Brownian for an empty name, else the
// named deterministic test path. Throws std::invalid_argument on unknown
// names.
DyadicPath make_driver(int r, int level, double horizon, uint64_t seed,
                       const std::string& test_driver);

// Indexed parallel loop: fn(i) for i in [0, n), split over `threads` workers.
// Work items must write only to their own slots. The first exception thrown
// by any worker is rethrown after all workers finish.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace rsde
