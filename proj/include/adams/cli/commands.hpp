#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "adams/cli/config.hpp"

namespace adams::cli {

enum ExitCode : int {
    kExitPass = 0,
    kExitSuiteFailure = 1,
    kExitConfigError = 2,
    kExitDivergence = 3,
};

/// Every command writes effective_config.json next to its outputs. Files other than timing.json
/// are byte-identical across re-runs of the same configuration at any thread count.
int cmd_train(const TrainSettings& s, const std::filesystem::path& out, std::ostream& log);
int cmd_simulate_ema(const EmaSettings& s, const std::filesystem::path& out, std::ostream& log);
int cmd_verify_theory(const TheorySettings& s, const std::filesystem::path& out, std::ostream& log);
int cmd_compare_updates(const CompareSettings& s, const std::filesystem::path& out, std::ostream& log);
int cmd_sweep(const SweepSettings& s, const std::filesystem::path& out, std::ostream& log);

struct SuiteReport {
    Json report;
    bool pass = false;
};

/// Property suites behind verify-theory: smoothness, reverse_pl, descent, bounded_update,
/// noise_tail, negative_control, constants.
SuiteReport run_theory_suites(const TheorySettings& s);

struct EmaReport {
    CsvTable table;
    Json summary;
    bool pass = false;
};

/// Analytic-vs-Monte-Carlo rows behind simulate-ema.
EmaReport run_ema_grid(const EmaSettings& s);

/// Full command line without the program name, e.g. {"train", "--config", "c.json"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adams::cli
