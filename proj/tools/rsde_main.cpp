#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rsde/config.hpp"
#include "rsde/runner.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    std::string test_driver;
};

void add_common(CLI::App* sub, SubArgs& args) {
    sub->add_option("--config", args.config_path, "experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", args.seed, "master seed (overrides driver.seed)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    sub->add_option("--test-driver", args.test_driver,
                    "deterministic driver: zero or ramp:<slope>");
}

int run(rsde::ExperimentKind kind, const SubArgs& args) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read config '" << args.config_path << "'\n";
        return 1;
    }
    std::ostringstream buf;
    buf << in.rdbuf();

    rsde::ExperimentConfig cfg;
    try {
        cfg = rsde::parse_config(buf.str(), kind);
    } catch (const rsde::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.seed = args.seed;

    const rsde::ExitReport result = rsde::run_experiment(cfg, args.test_driver);
    std::cout << result.report;
    return result.code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reflected-path simulation toolkit"};
    app.require_subcommand(1);

    SubArgs args[4];
    const rsde::ExperimentKind kinds[4] = {
        rsde::ExperimentKind::Simulate, rsde::ExperimentKind::Couple,
        rsde::ExperimentKind::Converge, rsde::ExperimentKind::Diagnose};
    const char* names[4] = {"simulate", "couple", "converge", "diagnose"};
    const char* blurbs[4] = {"integrate reflected trajectories", "run coupled pairs",
                             "run a refinement ladder", "run statistical diagnostics"};
    CLI::App* subs[4];
    for (int i = 0; i < 4; ++i) {
        subs[i] = app.add_subcommand(names[i], blurbs[i]);
        add_common(subs[i], args[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (int i = 0; i < 4; ++i)
        if (subs[i]->parsed()) {
            try {
                return run(kinds[i], args[i]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 1;
            }
        }
    return 1;
}
